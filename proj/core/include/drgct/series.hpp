#pragma once

#include <Eigen/Dense>

#include "drgct/errors.hpp"

namespace drgct {

/// A bivariate sample {(X_t, Y_t)}, t = 1..n. Entries must be finite and the
/// two series equally long. Immutable after construction.
struct TimeSeriesPair {
  Eigen::VectorXd x;
  Eigen::VectorXd y;

  TimeSeriesPair(Eigen::VectorXd x_in, Eigen::VectorXd y_in);

  Eigen::Index n() const { return x.size(); }
};

/// Lag orders: p past values of X and q past values of Y enter the
/// conditioning set. Rows start at s = max(p, q) + 1 so both lag windows
/// exist; p and q are otherwise unrestricted.
struct LagConfig {
  int p = 1;
  int q = 1;

  LagConfig(int p_in, int q_in);

  int start() const { return std::max(p, q) + 1; }
};

/// The reorganized sample: one row per usable time point t, holding the
/// response y_t, the lag vector (Y_{t-1},...,Y_{t-q}) and the lag vector
/// (X_{t-1},...,X_{t-p}). Lag j of a row with 0-based response index t is
/// the source entry at t-1-j. Immutable after construction.
class LaggedDesign {
 public:
  LaggedDesign(Eigen::VectorXd response, Eigen::MatrixXd ylags,
               Eigen::MatrixXd xlags);

  Eigen::Index rows() const { return response_.size(); }
  int q() const { return static_cast<int>(ylags_.cols()); }
  int p() const { return static_cast<int>(xlags_.cols()); }

  const Eigen::VectorXd& response() const { return response_; }
  const Eigen::MatrixXd& ylags() const { return ylags_; }
  const Eigen::MatrixXd& xlags() const { return xlags_; }

  Eigen::VectorXd yvec(Eigen::Index row) const { return ylags_.row(row); }
  Eigen::VectorXd xvec(Eigen::Index row) const { return xlags_.row(row); }

 private:
  Eigen::VectorXd response_;
  Eigen::MatrixXd ylags_;
  Eigen::MatrixXd xlags_;
};

/// Reorganize a raw pair into the lagged design. Requires
/// n >= max(p, q) + 2 (at least two usable rows).
LaggedDesign embed_lags(const TimeSeriesPair& series, const LagConfig& cfg);

/// Percent changes: out[i] = 100 * (raw[i+1] - raw[i]) / raw[i]. All raw
/// values must be strictly positive.
Eigen::VectorXd percent_change(const Eigen::VectorXd& raw);

/// Elementwise division by a positive divisor.
Eigen::VectorXd scale_volume(const Eigen::VectorXd& v, double divisor = 10.0);

/// Per-coordinate affine standardization. Constant coordinates keep sd = 1
/// so the transform stays invertible.
class Scaler {
 public:
  Scaler() = default;

  /// Fit means and sample standard deviations column by column. Needs at
  /// least two rows.
  static Scaler fit(const Eigen::MatrixXd& columns);

  /// Pass-through scaler (mean 0, sd 1 in every coordinate).
  static Scaler identity(Eigen::Index dim);

  /// Rebuild from stored moments (deserialization).
  static Scaler from_moments(Eigen::VectorXd mean, Eigen::VectorXd sd);

  Eigen::VectorXd transform(const Eigen::VectorXd& v) const;
  Eigen::MatrixXd transform(const Eigen::MatrixXd& m) const;
  Eigen::VectorXd inverse(const Eigen::VectorXd& v) const;

  Eigen::Index dim() const { return mean_.size(); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& sd() const { return sd_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::VectorXd sd_;
};

/// Fit a scaler over all covariate columns of a design ([Y lags | X lags]).
Scaler fit_scaler(const LaggedDesign& design);

Eigen::VectorXd apply_scaler(const Scaler& scaler, const Eigen::VectorXd& v);

}  // namespace drgct
