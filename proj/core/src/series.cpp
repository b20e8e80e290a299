#include "drgct/series.hpp"

#include <string>

namespace drgct {

TimeSeriesPair::TimeSeriesPair(Eigen::VectorXd x_in, Eigen::VectorXd y_in)
    : x(std::move(x_in)), y(std::move(y_in)) {
  if (x.size() != y.size()) {
    throw DataError("series lengths differ: x has " + std::to_string(x.size()) +
                    " entries, y has " + std::to_string(y.size()));
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw DataError("series contain non-finite values; missing data is rejected");
  }
}

LagConfig::LagConfig(int p_in, int q_in) : p(p_in), q(q_in) {
  if (p < 1 || q < 1) {
    throw UsageError("lag orders must satisfy p >= 1 and q >= 1");
  }
}

LaggedDesign::LaggedDesign(Eigen::VectorXd response, Eigen::MatrixXd ylags,
                           Eigen::MatrixXd xlags)
    : response_(std::move(response)),
      ylags_(std::move(ylags)),
      xlags_(std::move(xlags)) {
  if (ylags_.rows() != response_.size() || xlags_.rows() != response_.size()) {
    throw DataError("lagged design row counts disagree");
  }
}

LaggedDesign embed_lags(const TimeSeriesPair& series, const LagConfig& cfg) {
  const int maxlag = std::max(cfg.p, cfg.q);
  const Eigen::Index n = series.n();
  const Eigen::Index min_n = maxlag + 2;
  if (n < min_n) {
    throw DataError("series too short: need at least " + std::to_string(min_n) +
                    " observations for p=" + std::to_string(cfg.p) +
                    ", q=" + std::to_string(cfg.q) + ", got " +
                    std::to_string(n));
  }

  const Eigen::Index rows = n - maxlag;
  Eigen::VectorXd response(rows);
  Eigen::MatrixXd ylags(rows, cfg.q);
  Eigen::MatrixXd xlags(rows, cfg.p);

  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index t = maxlag + r;  // 0-based response index
    response(r) = series.y(t);
    for (int j = 0; j < cfg.q; ++j) ylags(r, j) = series.y(t - 1 - j);
    for (int k = 0; k < cfg.p; ++k) xlags(r, k) = series.x(t - 1 - k);
  }
  return LaggedDesign(std::move(response), std::move(ylags), std::move(xlags));
}

Eigen::VectorXd percent_change(const Eigen::VectorXd& raw) {
  if (raw.size() < 2) {
    throw DataError("percent change needs at least 2 observations");
  }
  if ((raw.array() <= 0.0).any()) {
    throw DataError("percent change undefined: series has nonpositive values");
  }
  Eigen::VectorXd out(raw.size() - 1);
  for (Eigen::Index i = 0; i + 1 < raw.size(); ++i) {
    out(i) = 100.0 * (raw(i + 1) - raw(i)) / raw(i);
  }
  return out;
}

Eigen::VectorXd scale_volume(const Eigen::VectorXd& v, double divisor) {
  if (!(divisor > 0.0)) {
    throw UsageError("volume divisor must be positive");
  }
  return v / divisor;
}

Scaler Scaler::fit(const Eigen::MatrixXd& columns) {
  if (columns.rows() < 2) {
    throw DataError("scaler needs at least 2 rows to fit");
  }
  Scaler s;
  const auto rows = static_cast<double>(columns.rows());
  s.mean_ = columns.colwise().mean().transpose();
  s.sd_.resize(columns.cols());
  for (Eigen::Index c = 0; c < columns.cols(); ++c) {
    const double ss = (columns.col(c).array() - s.mean_(c)).square().sum();
    const double sd = std::sqrt(ss / (rows - 1.0));
    s.sd_(c) = sd > 0.0 ? sd : 1.0;  // constant column rule
  }
  return s;
}

Scaler Scaler::identity(Eigen::Index dim) {
  Scaler s;
  s.mean_ = Eigen::VectorXd::Zero(dim);
  s.sd_ = Eigen::VectorXd::Ones(dim);
  return s;
}

Scaler Scaler::from_moments(Eigen::VectorXd mean, Eigen::VectorXd sd) {
  if (mean.size() != sd.size() || (sd.array() <= 0.0).any()) {
    throw DataError("scaler moments invalid");
  }
  Scaler s;
  s.mean_ = std::move(mean);
  s.sd_ = std::move(sd);
  return s;
}

Eigen::VectorXd Scaler::transform(const Eigen::VectorXd& v) const {
  if (v.size() != mean_.size()) {
    throw DataError("scaler dimension mismatch: expected " +
                    std::to_string(mean_.size()) + ", got " +
                    std::to_string(v.size()));
  }
  return (v - mean_).cwiseQuotient(sd_);
}

Eigen::MatrixXd Scaler::transform(const Eigen::MatrixXd& m) const {
  if (m.cols() != mean_.size()) {
    throw DataError("scaler dimension mismatch: expected " +
                    std::to_string(mean_.size()) + " columns, got " +
                    std::to_string(m.cols()));
  }
  return ((m.rowwise() - mean_.transpose()).array().rowwise() /
          sd_.transpose().array())
      .matrix();
}

Eigen::VectorXd Scaler::inverse(const Eigen::VectorXd& v) const {
  if (v.size() != mean_.size()) {
    throw DataError("scaler dimension mismatch: expected " +
                    std::to_string(mean_.size()) + ", got " +
                    std::to_string(v.size()));
  }
  return v.cwiseProduct(sd_) + mean_;
}

Scaler fit_scaler(const LaggedDesign& design) {
  Eigen::MatrixXd cols(design.rows(), design.q() + design.p());
  cols << design.ylags(), design.xlags();
  return Scaler::fit(cols);
}

Eigen::VectorXd apply_scaler(const Scaler& scaler, const Eigen::VectorXd& v) {
  return scaler.transform(v);
}

}  // namespace drgct
