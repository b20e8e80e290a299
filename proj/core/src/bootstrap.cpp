#include "drgct/bootstrap.hpp"

#include <cmath>
#include <string>

#include "drgct/errors.hpp"

namespace drgct {
namespace {

// Mammen's two-point law: mean 0, variance 1 (and third moment 1).
constexpr double kGolden = 1.6180339887498948482;      // (sqrt(5)+1)/2
constexpr double kGoldenMinor = 0.6180339887498948482; // (sqrt(5)-1)/2
constexpr double kMammenProbLow = 0.72360679774997896964;  // (sqrt(5)+1)/(2 sqrt(5))

}  // namespace

Eigen::VectorXd draw_multipliers(Eigen::Index row_count, MultiplierLaw law,
                                 RngStream& rng) {
  if (row_count < 1) throw UsageError("multiplier vector needs at least one row");
  Eigen::VectorXd xi(row_count);
  switch (law) {
    case MultiplierLaw::Rademacher:
      for (Eigen::Index t = 0; t < row_count; ++t) xi(t) = rng.rademacher();
      break;
    case MultiplierLaw::Mammen:
      for (Eigen::Index t = 0; t < row_count; ++t) {
        xi(t) = rng.uniform() < kMammenProbLow ? -kGoldenMinor : kGolden;
      }
      break;
    case MultiplierLaw::StandardNormal:
      for (Eigen::Index t = 0; t < row_count; ++t) xi(t) = rng.normal();
      break;
  }
  return xi;
}

ProcessValues bootstrap_process(const SummandMatrix& psi,
                                const Eigen::VectorXd& xi) {
  if (xi.size() != psi.rows()) {
    throw DataError("multiplier length " + std::to_string(xi.size()) +
                    " does not match summand rows " +
                    std::to_string(psi.rows()));
  }
  const double norm = 1.0 / std::sqrt(static_cast<double>(psi.rows()));
  ProcessValues out;
  out.s.resize(psi.size());
  // Same ascending-row accumulation as compute_process, so xi = 1
  // reproduces the statistic path bit-for-bit.
  for (Eigen::Index l = 0; l < psi.psi.cols(); ++l) {
    std::complex<double> acc(0.0, 0.0);
    for (Eigen::Index t = 0; t < psi.psi.rows(); ++t) {
      acc += xi(t) * psi.psi(t, l);
    }
    out.s(l) = acc * norm;
  }
  out.s_real = out.s.real();
  out.s_imag = out.s.imag();
  return out;
}

BootstrapResult run_bootstrap(const SummandMatrix& psi, double ks_n,
                              const BootstrapConfig& cfg, double alpha) {
  if (cfg.replications < 1) {
    throw UsageError("bootstrap needs at least one replication");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw UsageError("significance level must lie in (0, 1)");
  }

  BootstrapResult out;
  out.alpha = alpha;
  out.ks_star.resize(cfg.replications);
  int exceed = 0;
  for (int b = 0; b < cfg.replications; ++b) {
    RngStream rng(derive_seed(cfg.seed, SeedDomain::Bootstrap,
                              static_cast<std::uint64_t>(b)));
    const Eigen::VectorXd xi = draw_multipliers(psi.rows(), cfg.law, rng);
    const double ks_b = compute_ks(bootstrap_process(psi, xi)).ks;
    out.ks_star(b) = ks_b;
    if (ks_b >= ks_n) ++exceed;
  }
  out.p_value = static_cast<double>(exceed) /
                static_cast<double>(cfg.replications);
  out.reject = out.p_value < alpha;
  return out;
}

}  // namespace drgct
