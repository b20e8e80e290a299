#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "drgct/rng.hpp"
#include "drgct/series.hpp"

namespace drgct {

/// Simulation designs. S kinds satisfy the no-causality null; P kinds embed
/// causality from the X lags into Y through different nonlinearities.
enum class DgpKind { S1, S2, P1, P2, P3, P4 };

std::string to_string(DgpKind kind);
DgpKind dgp_kind_from_string(const std::string& name);

/// One concrete process: X_t = 0.5 * sum_k b_k X_{t-k} + e1_t for every
/// kind, with the Y recursion selected by kind. Coefficient vectors have
/// length la; the scalars a, c, a0 apply only where the kind uses them.
struct DgpSpec {
  DgpKind kind = DgpKind::S1;
  int la = 1;
  Eigen::VectorXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  double a_scalar = 0.0;
  double c_scalar = 0.0;
  double a0 = 0.0;
  double innovation_variance = 0.5;
  int burn_in = 500;
};

/// The published parameter set for a kind and lag order (la in 1..5).
DgpSpec preset(DgpKind kind, int la);

/// Parse keys of the form "S1:1" .. "P4:5".
DgpSpec parse_dgp_key(const std::string& key);
std::string dgp_key(const DgpSpec& spec);

/// Simulate burn_in + T steps from zero initial lags and return the last T.
/// Innovations are i.i.d. centered normals with the configured variance,
/// independent across the two equations. Aborts with DivergenceError when
/// any |X_t| or |Y_t| exceeds 1e6.
TimeSeriesPair generate(const DgpSpec& spec, int T, RngStream& rng);

/// The deterministic part of the kind's Y equation. S kinds ignore xvec.
double oracle_m(const DgpSpec& spec, const Eigen::VectorXd& yvec,
                const Eigen::VectorXd& xvec);

/// Population conditional characteristic function under S1, where the X lag
/// vector is independent of the Y history: the CF of a zero-mean Gaussian
/// with the stationary AR covariance (solved via Yule-Walker). Real-valued
/// by symmetry.
std::complex<double> oracle_phi_s1(const DgpSpec& spec,
                                   const Eigen::VectorXd& nu);

/// Local alternative around an S-kind null: the Y recursion gains a shift
/// T^{-1/2} * delta(W_{t-1}) with W = (X lags, Y lags). delta must stay
/// within delta_bound.
struct LocalAltSpec {
  DgpSpec base;
  std::function<double(const Eigen::VectorXd& w)> delta;
  double delta_bound = 1.0;
};

struct LocalAltSample {
  TimeSeriesPair series;
  double max_shift = 0.0;
  double mean_abs_shift = 0.0;
};

LocalAltSample generate_local_alt(const LocalAltSpec& spec, int T,
                                  RngStream& rng);

}  // namespace drgct
