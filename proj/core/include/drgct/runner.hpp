#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "drgct/bootstrap.hpp"
#include "drgct/dgp.hpp"
#include "drgct/mdn.hpp"
#include "drgct/mlp.hpp"
#include "drgct/statistic.hpp"

namespace drgct {

/// Which empirical process feeds the KS statistic. Naive drops the
/// characteristic-function correction and is kept for size-inflation
/// comparisons; Both runs the two side by side on shared fits.
enum class StatisticMode { DoublyRobust, Naive, Both };

std::string to_string(StatisticMode mode);
StatisticMode statistic_mode_from_string(const std::string& name);

std::string to_string(MultiplierLaw law);
MultiplierLaw multiplier_law_from_string(const std::string& name);

/// Full configuration for one test run. la sets p = q; nonzero p/q override
/// it. G is the mixture size used by the density network (the nested mdn
/// config's component count is ignored in favor of it). All randomness
/// derives from seed through fixed domains.
struct TestConfig {
  int la = 1;
  int p = 0;
  int q = 0;
  int L = 20;
  int M = 20;
  int G = 10;
  int B = 1000;
  double alpha = 0.05;
  FreqBounds freq_bounds;
  MultiplierLaw multiplier_law = MultiplierLaw::Rademacher;
  StatisticMode mode = StatisticMode::DoublyRobust;
  std::uint64_t seed = 0;
  MlpConfig mlp;
  MdnConfig mdn;

  LagConfig resolved_lags() const {
    return LagConfig(p > 0 ? p : la, q > 0 ? q : la);
  }
};

struct TestDiagnostics {
  double mlp_initial_loss = 0.0;
  double mlp_final_loss = 0.0;
  std::optional<double> mdn_initial_loss;
  std::optional<double> mdn_final_loss;
};

struct TestResult {
  double ks = 0.0;
  double p_value = 1.0;
  bool reject = false;
  Eigen::VectorXd s_real;
  Eigen::VectorXd s_imag;
  TestDiagnostics diagnostics;
  TestConfig config;
  std::uint64_t seed = 0;
};

/// Run the whole procedure on one series: embed, fit the mean network,
/// fit the density network (doubly robust mode), sample frequency pairs,
/// estimate the characteristic function, build the summands, bootstrap the
/// p-value. No sample splitting: both networks train on the full design.
/// Errors carry a stage label. mode must not be Both.
TestResult run_single_test(const TimeSeriesPair& series, const TestConfig& cfg);

struct DualTestResult {
  TestResult dr;
  TestResult naive;
};

/// Doubly robust and naive statistics from one set of fits, bootstrapped
/// with identical multiplier draws so the correction is the only
/// difference.
DualTestResult run_dual_test(const TimeSeriesPair& series,
                             const TestConfig& cfg);

/// Monte-Carlo grid: every (kind, lag, sample size) cell runs reps
/// replications of generate -> test. Per-replication seeds derive from
/// (master seed, cell, replication), so a cell's results do not depend on
/// which other cells run. timing controls whether wall-clock fields are
/// recorded (off keeps output byte-deterministic).
struct ExperimentPlan {
  std::vector<DgpKind> kinds;
  std::vector<int> lags;
  std::vector<int> sample_sizes;
  int reps = 200;
  TestConfig test;
  int threads = 0;
  bool timing = false;
};

/// One record per executed test; the unit of the results file.
struct ReplicationRecord {
  std::string dgp_or_file;
  int la = 0;
  int T = 0;
  std::uint64_t seed = 0;
  std::string mode;
  double ks = 0.0;
  double p_value = 1.0;
  bool reject = false;
  int diverged_redraws = 0;
  std::optional<long> runtime_ms;
  std::vector<double> s_real;
  std::vector<double> s_imag;
  double mlp_initial_loss = 0.0;
  double mlp_final_loss = 0.0;
  std::optional<double> mdn_initial_loss;
  std::optional<double> mdn_final_loss;

  friend bool operator==(const ReplicationRecord&,
                         const ReplicationRecord&) = default;
};

struct CellResult {
  DgpKind kind = DgpKind::S1;
  std::string label;  // DGP key or input file
  int la = 0;
  int T = 0;
  std::string mode;
  int reps = 0;
  int rejections = 0;
  double rate = 0.0;
  double mc_se = 0.0;
  int diverged_redraws = 0;
  bool flagged = false;  // more than 10% of replications needed redraws
};

struct RejectionTable {
  std::vector<CellResult> cells;
};

RejectionTable run_experiment(const ExperimentPlan& plan,
                              std::vector<ReplicationRecord>* records);

}  // namespace drgct
