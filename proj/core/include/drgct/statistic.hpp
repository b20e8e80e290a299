#pragma once

#include <complex>
#include <functional>

#include <Eigen/Dense>

#include "drgct/freq.hpp"
#include "drgct/mdn.hpp"
#include "drgct/series.hpp"

namespace drgct {

/// Cached per-observation, per-frequency summands Psi (row_count x L).
/// Everything downstream of model fitting — the statistic and the whole
/// bootstrap — reads only this matrix.
struct SummandMatrix {
  Eigen::MatrixXcd psi;

  Eigen::Index rows() const { return psi.rows(); }
  int size() const { return static_cast<int>(psi.cols()); }
};

/// The empirical process evaluated at each frequency pair, normalized by
/// row_count^(-1/2), split into real and imaginary parts.
struct ProcessValues {
  Eigen::VectorXcd s;
  Eigen::VectorXd s_real;
  Eigen::VectorXd s_imag;
};

struct TestStatistic {
  double ks = 0.0;
};

/// Doubly robust summands:
/// (y_t - mhat) * e^{i mu'Y} * (e^{i nu'X} - phihat(nu | Y)).
SummandMatrix compute_summands(const LaggedDesign& design,
                               const Eigen::VectorXd& residuals,
                               const CharFnEstimate& cf, const FreqSet& pairs);

/// Uncorrected summands: (y_t - mhat) * e^{i mu'Y} * e^{i nu'X}.
SummandMatrix compute_naive_summands(const LaggedDesign& design,
                                     const Eigen::VectorXd& residuals,
                                     const FreqSet& pairs);

/// Normalized column sums of Psi, accumulated in ascending row order so
/// results are bit-stable.
ProcessValues compute_process(const SummandMatrix& psi);

/// KS = max over pairs of max(|real part|, |imaginary part|).
TestStatistic compute_ks(const ProcessValues& values);

using MeanOracle = std::function<double(const Eigen::VectorXd& yvec)>;
using CfOracle = std::function<std::complex<double>(
    const Eigen::VectorXd& nu, const Eigen::VectorXd& yvec)>;

/// The infeasible process with population nuisance functions substituted
/// for the estimators; simulation-only diagnostic.
ProcessValues compute_oracle_process(const LaggedDesign& design,
                                     const MeanOracle& true_m,
                                     const CfOracle& true_phi,
                                     const FreqSet& pairs);

}  // namespace drgct
