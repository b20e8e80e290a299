#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "drgct/rng.hpp"
#include "drgct/statistic.hpp"

namespace drgct {

/// Multiplier laws. All have zero mean and unit variance; rademacher and
/// mammen have bounded support, standard_normal does not.
enum class MultiplierLaw { Rademacher, Mammen, StandardNormal };

struct BootstrapConfig {
  int replications = 1000;
  MultiplierLaw law = MultiplierLaw::Rademacher;
  std::uint64_t seed = 0;
};

struct BootstrapResult {
  Eigen::VectorXd ks_star;
  double p_value = 1.0;
  double alpha = 0.05;
  bool reject = false;
};

/// One i.i.d. multiplier per design row.
Eigen::VectorXd draw_multipliers(Eigen::Index row_count, MultiplierLaw law,
                                 RngStream& rng);

/// Multiplier-perturbed process: row_count^(-1/2) * sum_t xi_t Psi_{t,l}.
/// Reads only the cached summands; never re-touches the fitted models.
ProcessValues bootstrap_process(const SummandMatrix& psi,
                                const Eigen::VectorXd& xi);

/// B independent multiplier draws, each reduced to a KS value; p-value is
/// the fraction of draws with KS* >= KS (ties count). Replication b uses
/// its own counter-derived stream, so results are order-independent.
BootstrapResult run_bootstrap(const SummandMatrix& psi, double ks_n,
                              const BootstrapConfig& cfg, double alpha);

}  // namespace drgct
