#include "drgct/dgp.hpp"

#include <cmath>

#include "drgct/errors.hpp"

namespace drgct {
namespace {

constexpr double kDivergenceGuard = 1e6;

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (const double x : values) v(i++) = x;
  return v;
}

struct PresetRow {
  Eigen::VectorXd a, b, c;
  double a_scalar, c_scalar, a0;
};

PresetRow preset_row(int la) {
  switch (la) {
    case 1:
      return {vec({1.0}), vec({-1.0}), vec({-1.0}), 0.5, 1.0, 0.5};
    case 2:
      return {vec({0.5, -0.5}), vec({-0.5, 0.5}), vec({-0.5, 0.5}),
              0.25, 0.6, 0.4};
    case 3:
      return {vec({0.5, -0.5, 0.5}), vec({-0.5, 0.5, 0.5}),
              vec({-0.5, 0.5, -0.5}), 0.25, 0.5, 1.0 / 3.0};
    case 4:
      return {vec({0.25, -0.25, 0.25, 0.25}), vec({-0.25, 0.25, 0.25, -0.25}),
              vec({-0.25, 0.25, -0.25, 0.25}), 0.125, 0.5, 1.0 / 3.0};
    case 5:
      return {vec({0.25, -0.25, 0.25, 0.25, -0.25}),
              vec({-0.25, 0.25, 0.25, -0.25, 0.25}),
              vec({-0.25, 0.25, -0.25, 0.25, -0.25}), 0.125, 0.5, 1.0 / 3.0};
    default:
      throw UsageError("lag order out of range: presets cover la in 1..5, got " +
                       std::to_string(la));
  }
}

/// Y-equation value from the current lag windows; shared by the generator
/// and oracle_m so the two cannot drift apart.
double y_mean(const DgpSpec& spec, const Eigen::VectorXd& ylags,
              const Eigen::VectorXd& xlags) {
  switch (spec.kind) {
    case DgpKind::S1:
      return 0.5 * spec.a.dot(ylags);
    case DgpKind::S2:
      return spec.a_scalar * (-0.5 * ylags.array().square()).exp().sum();
    case DgpKind::P1:
      return 0.5 * spec.a.dot(ylags) + std::sin(spec.c.dot(xlags));
    case DgpKind::P2:
      return 0.5 * spec.a.dot(ylags) +
             0.5 * spec.c_scalar * xlags.array().square().sum();
    case DgpKind::P3:
      return spec.a_scalar * (-0.5 * ylags.array().square()).exp().sum() +
             spec.c_scalar * xlags.array().cos().sum();
    case DgpKind::P4:
      return spec.a0 * xlags.cwiseProduct(ylags).sum();
  }
  throw UsageError("unknown DGP kind");
}

bool uses_xlags(DgpKind kind) {
  return kind != DgpKind::S1 && kind != DgpKind::S2;
}

void validate(const DgpSpec& spec) {
  if (spec.la < 1) throw UsageError("DGP lag order must be positive");
  if (spec.b.size() != spec.la) {
    throw UsageError("DGP coefficient vector b must have length la");
  }
  const bool needs_a = spec.kind == DgpKind::S1 || spec.kind == DgpKind::P1 ||
                       spec.kind == DgpKind::P2;
  if (needs_a && spec.a.size() != spec.la) {
    throw UsageError("DGP coefficient vector a must have length la");
  }
  if (spec.kind == DgpKind::P1 && spec.c.size() != spec.la) {
    throw UsageError("DGP coefficient vector c must have length la");
  }
  if (!(spec.innovation_variance > 0.0)) {
    throw UsageError("innovation variance must be positive");
  }
}

/// Core recursion. shift, when set, is added to the Y equation and its
/// magnitudes are reported through the out-parameters.
TimeSeriesPair simulate(
    const DgpSpec& spec, int T, RngStream& rng,
    const std::function<double(const Eigen::VectorXd&)>* shift,
    double shift_scale, double shift_bound, double* max_shift,
    double* sum_abs_shift) {
  validate(spec);
  const int la = spec.la;
  if (T < la + 2) {
    throw UsageError("sample size too small for the requested lag order");
  }
  const double sd = std::sqrt(spec.innovation_variance);
  const long total = static_cast<long>(spec.burn_in) + T;

  // history(0) is the most recent value
  Eigen::VectorXd xhist = Eigen::VectorXd::Zero(la);
  Eigen::VectorXd yhist = Eigen::VectorXd::Zero(la);
  Eigen::VectorXd x(T), y(T);
  Eigen::VectorXd w(2 * la);

  for (long t = 0; t < total; ++t) {
    const double e1 = rng.normal(0.0, sd);
    const double e2 = rng.normal(0.0, sd);
    const double xt = 0.5 * spec.b.dot(xhist) + e1;
    double yt = y_mean(spec, yhist, xhist) + e2;
    if (shift != nullptr) {
      w.head(la) = xhist;
      w.tail(la) = yhist;
      const double d = (*shift)(w);
      if (!std::isfinite(d) || std::abs(d) > shift_bound) {
        throw NumericalError("local-alternative shift exceeded its declared bound");
      }
      const double scaled = shift_scale * d;
      yt += scaled;
      *max_shift = std::max(*max_shift, std::abs(scaled));
      *sum_abs_shift += std::abs(scaled);
    }
    if (std::abs(xt) > kDivergenceGuard || std::abs(yt) > kDivergenceGuard) {
      throw DivergenceError("DGP " + dgp_key(spec) + " diverged at step " +
                            std::to_string(t),
                            t);
    }
    for (int k = la - 1; k > 0; --k) {
      xhist(k) = xhist(k - 1);
      yhist(k) = yhist(k - 1);
    }
    xhist(0) = xt;
    yhist(0) = yt;
    const long kept = t - spec.burn_in;
    if (kept >= 0) {
      x(kept) = xt;
      y(kept) = yt;
    }
  }
  return TimeSeriesPair(std::move(x), std::move(y));
}

}  // namespace

std::string to_string(DgpKind kind) {
  switch (kind) {
    case DgpKind::S1: return "S1";
    case DgpKind::S2: return "S2";
    case DgpKind::P1: return "P1";
    case DgpKind::P2: return "P2";
    case DgpKind::P3: return "P3";
    case DgpKind::P4: return "P4";
  }
  throw UsageError("unknown DGP kind");
}

DgpKind dgp_kind_from_string(const std::string& name) {
  if (name == "S1") return DgpKind::S1;
  if (name == "S2") return DgpKind::S2;
  if (name == "P1") return DgpKind::P1;
  if (name == "P2") return DgpKind::P2;
  if (name == "P3") return DgpKind::P3;
  if (name == "P4") return DgpKind::P4;
  throw UsageError("unknown DGP kind: " + name);
}

DgpSpec preset(DgpKind kind, int la) {
  const PresetRow row = preset_row(la);
  DgpSpec spec;
  spec.kind = kind;
  spec.la = la;
  spec.b = row.b;
  switch (kind) {
    case DgpKind::S1:
      spec.a = row.a;
      break;
    case DgpKind::S2:
      spec.a_scalar = row.a_scalar;
      break;
    case DgpKind::P1:
      spec.a = row.a;
      spec.c = row.c;
      break;
    case DgpKind::P2:
      spec.a = row.a;
      spec.c_scalar = row.c_scalar;
      break;
    case DgpKind::P3:
      spec.a_scalar = row.a_scalar;
      spec.c_scalar = row.c_scalar;
      break;
    case DgpKind::P4:
      spec.a0 = row.a0;
      break;
  }
  return spec;
}

DgpSpec parse_dgp_key(const std::string& key) {
  const auto colon = key.find(':');
  if (colon == std::string::npos) {
    throw UsageError("bad DGP key (expected e.g. \"S1:1\"): " + key);
  }
  const DgpKind kind = dgp_kind_from_string(key.substr(0, colon));
  int la = 0;
  try {
    la = std::stoi(key.substr(colon + 1));
  } catch (const std::exception&) {
    throw UsageError("bad lag order in DGP key: " + key);
  }
  return preset(kind, la);
}

std::string dgp_key(const DgpSpec& spec) {
  return to_string(spec.kind) + ":" + std::to_string(spec.la);
}

TimeSeriesPair generate(const DgpSpec& spec, int T, RngStream& rng) {
  double unused_a = 0.0, unused_b = 0.0;
  return simulate(spec, T, rng, nullptr, 0.0, 0.0, &unused_a, &unused_b);
}

double oracle_m(const DgpSpec& spec, const Eigen::VectorXd& yvec,
                const Eigen::VectorXd& xvec) {
  if (yvec.size() != spec.la) {
    throw DataError("oracle_m: y lag vector has wrong length");
  }
  if (uses_xlags(spec.kind) && xvec.size() != spec.la) {
    throw DataError("oracle_m: x lag vector has wrong length");
  }
  if (!uses_xlags(spec.kind)) {
    // The null holds: the conditional mean never reads the X lags.
    return y_mean(spec, yvec, Eigen::VectorXd::Zero(spec.la));
  }
  return y_mean(spec, yvec, xvec);
}

std::complex<double> oracle_phi_s1(const DgpSpec& spec,
                                   const Eigen::VectorXd& nu) {
  if (spec.kind != DgpKind::S1) {
    throw UsageError("oracle CF is available for S1 only");
  }
  validate(spec);
  const int p = spec.la;
  if (nu.size() != p) throw DataError("oracle_phi_s1: frequency has wrong length");

  // Yule-Walker for the AR coefficients phi_k = 0.5 * b_k: solve for
  // autocovariances gamma_0..gamma_p from
  //   gamma_k - sum_j phi_j gamma_{|k-j|} = sigma^2 * 1(k = 0).
  const Eigen::VectorXd phi = 0.5 * spec.b;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p + 1, p + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p + 1);
  for (int k = 0; k <= p; ++k) {
    A(k, k) += 1.0;
    for (int j = 1; j <= p; ++j) {
      A(k, std::abs(k - j)) -= phi(j - 1);
    }
  }
  rhs(0) = spec.innovation_variance;
  const Eigen::VectorXd gamma = A.fullPivLu().solve(rhs);

  Eigen::MatrixXd cov(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) cov(i, j) = gamma(std::abs(i - j));
  }
  const double quad = nu.dot(cov * nu);
  return {std::exp(-0.5 * quad), 0.0};
}

LocalAltSample generate_local_alt(const LocalAltSpec& spec, int T,
                                  RngStream& rng) {
  if (spec.base.kind != DgpKind::S1 && spec.base.kind != DgpKind::S2) {
    throw UsageError("local alternatives are built on the S1/S2 null designs");
  }
  if (!spec.delta) throw UsageError("local alternative needs a shift function");
  if (!(spec.delta_bound > 0.0)) {
    throw UsageError("shift bound must be positive");
  }

  LocalAltSample out{TimeSeriesPair(Eigen::VectorXd::Zero(2),
                                    Eigen::VectorXd::Zero(2)),
                     0.0, 0.0};
  double sum_abs = 0.0;
  const double scale = 1.0 / std::sqrt(static_cast<double>(T));
  out.series = simulate(spec.base, T, rng, &spec.delta, scale,
                        spec.delta_bound, &out.max_shift, &sum_abs);
  const auto steps = static_cast<double>(spec.base.burn_in + T);
  out.mean_abs_shift = sum_abs / steps;
  return out;
}

}  // namespace drgct
