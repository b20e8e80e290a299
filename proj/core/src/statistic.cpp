#include "drgct/statistic.hpp"

#include <cmath>
#include <string>

#include "drgct/errors.hpp"

namespace drgct {
namespace {

std::complex<double> unit_phase(double theta) {
  return {std::cos(theta), std::sin(theta)};
}

void check_shapes(const LaggedDesign& design, const Eigen::VectorXd& residuals,
                  const FreqSet& pairs) {
  if (residuals.size() != design.rows()) {
    throw DataError("residual length " + std::to_string(residuals.size()) +
                    " does not match design rows " +
                    std::to_string(design.rows()));
  }
  if (pairs.size() < 1) throw UsageError("need at least one frequency pair");
  for (const auto& pr : pairs.pairs) {
    if (pr.mu.size() != design.q() || pr.nu.size() != design.p()) {
      throw DataError("frequency pair dimensions do not match design lags");
    }
  }
}

/// Column sums in ascending row order; shared by the statistic and the
/// bootstrap so the xi = 1 identity holds bit-for-bit.
Eigen::VectorXcd ordered_column_sums(const Eigen::MatrixXcd& psi) {
  Eigen::VectorXcd sums = Eigen::VectorXcd::Zero(psi.cols());
  for (Eigen::Index l = 0; l < psi.cols(); ++l) {
    std::complex<double> acc(0.0, 0.0);
    for (Eigen::Index t = 0; t < psi.rows(); ++t) acc += psi(t, l);
    sums(l) = acc;
  }
  return sums;
}

}  // namespace

SummandMatrix compute_summands(const LaggedDesign& design,
                               const Eigen::VectorXd& residuals,
                               const CharFnEstimate& cf, const FreqSet& pairs) {
  check_shapes(design, residuals, pairs);
  if (cf.phi.rows() != design.rows() || cf.phi.cols() != pairs.size()) {
    throw DataError("characteristic-function estimate shape mismatch");
  }

  const Eigen::Index n = design.rows();
  const int L = pairs.size();
  SummandMatrix out;
  out.psi.resize(n, L);
  for (int l = 0; l < L; ++l) {
    const auto& pr = pairs.pairs[static_cast<std::size_t>(l)];
    for (Eigen::Index t = 0; t < n; ++t) {
      const double theta_y = pr.mu.dot(design.ylags().row(t));
      const double theta_x = pr.nu.dot(design.xlags().row(t));
      out.psi(t, l) = residuals(t) * unit_phase(theta_y) *
                      (unit_phase(theta_x) - cf.phi(t, l));
    }
  }
  return out;
}

SummandMatrix compute_naive_summands(const LaggedDesign& design,
                                     const Eigen::VectorXd& residuals,
                                     const FreqSet& pairs) {
  check_shapes(design, residuals, pairs);
  const Eigen::Index n = design.rows();
  const int L = pairs.size();
  SummandMatrix out;
  out.psi.resize(n, L);
  for (int l = 0; l < L; ++l) {
    const auto& pr = pairs.pairs[static_cast<std::size_t>(l)];
    for (Eigen::Index t = 0; t < n; ++t) {
      const double theta = pr.mu.dot(design.ylags().row(t)) +
                           pr.nu.dot(design.xlags().row(t));
      out.psi(t, l) = residuals(t) * unit_phase(theta);
    }
  }
  return out;
}

ProcessValues compute_process(const SummandMatrix& psi) {
  if (psi.rows() < 1) throw DataError("summand matrix is empty");
  const double norm = 1.0 / std::sqrt(static_cast<double>(psi.rows()));
  ProcessValues out;
  out.s = ordered_column_sums(psi.psi) * norm;
  out.s_real = out.s.real();
  out.s_imag = out.s.imag();
  return out;
}

TestStatistic compute_ks(const ProcessValues& values) {
  if (values.s.size() < 1) throw UsageError("process has no frequency pairs");
  double ks = 0.0;
  for (Eigen::Index l = 0; l < values.s.size(); ++l) {
    ks = std::max(ks, std::max(std::abs(values.s_real(l)),
                               std::abs(values.s_imag(l))));
  }
  return TestStatistic{ks};
}

ProcessValues compute_oracle_process(const LaggedDesign& design,
                                     const MeanOracle& true_m,
                                     const CfOracle& true_phi,
                                     const FreqSet& pairs) {
  if (pairs.size() < 1) throw UsageError("need at least one frequency pair");

  const Eigen::Index n = design.rows();
  const int L = pairs.size();
  SummandMatrix psi;
  psi.psi.resize(n, L);
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::VectorXd yv = design.yvec(t);
    const Eigen::VectorXd xv = design.xvec(t);
    const double resid = design.response()(t) - true_m(yv);
    for (int l = 0; l < L; ++l) {
      const auto& pr = pairs.pairs[static_cast<std::size_t>(l)];
      const double theta_y = pr.mu.dot(yv);
      const double theta_x = pr.nu.dot(xv);
      psi.psi(t, l) = resid * unit_phase(theta_y) *
                      (unit_phase(theta_x) - true_phi(pr.nu, yv));
    }
  }
  return compute_process(psi);
}

}  // namespace drgct
