#include "drgct/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <thread>

#include "drgct/errors.hpp"

namespace drgct {
namespace {

constexpr int kMaxRedraws = 100;
constexpr double kRedrawFlagFraction = 0.1;

template <typename Fn>
auto run_stage(const char* label, Fn&& fn) {
  try {
    return fn();
  } catch (const DivergenceError&) {
    throw;
  } catch (const DataError& e) {
    throw DataError(std::string("stage ") + label + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("stage ") + label + ": " + e.what());
  }
}

void validate_config(const TestConfig& cfg) {
  if (cfg.L < 1) throw UsageError("L must be at least 1");
  if (cfg.M < 1) throw UsageError("M must be at least 1");
  if (cfg.G < 1) throw UsageError("G must be at least 1");
  if (cfg.B < 1) throw UsageError("B must be at least 1");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw UsageError("alpha must lie in (0, 1)");
  }
}

/// Everything the two statistic variants share for one series.
struct Fits {
  LaggedDesign design;
  MlpModel mlp;
  Eigen::VectorXd resid;
  FreqSet pairs;
};

Fits fit_common(const TimeSeriesPair& series, const TestConfig& cfg) {
  const LagConfig lags = cfg.resolved_lags();
  LaggedDesign design =
      run_stage("embed", [&] { return embed_lags(series, lags); });

  MlpConfig mlp_cfg = cfg.mlp;
  mlp_cfg.opt.seed = derive_seed(cfg.seed, SeedDomain::MlpInit);
  MlpModel mlp =
      run_stage("train-mlp", [&] { return train_mlp(design, mlp_cfg); });
  Eigen::VectorXd resid =
      run_stage("residuals", [&] { return residuals(mlp, design); });
  FreqSet pairs = sample_freq_pairs(cfg.L, cfg.freq_bounds, design.q(),
                                    design.p(), cfg.seed);
  return Fits{std::move(design), std::move(mlp), std::move(resid),
              std::move(pairs)};
}

TestResult finalize(const Fits& fits, const TestConfig& cfg,
                    const SummandMatrix& psi, StatisticMode mode) {
  const ProcessValues values =
      run_stage("statistic", [&] { return compute_process(psi); });
  const TestStatistic ks = compute_ks(values);

  BootstrapConfig boot;
  boot.replications = cfg.B;
  boot.law = cfg.multiplier_law;
  boot.seed = cfg.seed;
  const BootstrapResult br = run_stage(
      "bootstrap", [&] { return run_bootstrap(psi, ks.ks, boot, cfg.alpha); });

  TestResult result;
  result.ks = ks.ks;
  result.p_value = br.p_value;
  result.reject = br.reject;
  result.s_real = values.s_real;
  result.s_imag = values.s_imag;
  result.diagnostics.mlp_initial_loss = fits.mlp.info.initial_loss;
  result.diagnostics.mlp_final_loss = fits.mlp.info.final_loss;
  result.config = cfg;
  result.config.mode = mode;
  result.seed = cfg.seed;
  return result;
}

}  // namespace

std::string to_string(StatisticMode mode) {
  switch (mode) {
    case StatisticMode::DoublyRobust: return "dr";
    case StatisticMode::Naive: return "naive";
    case StatisticMode::Both: return "both";
  }
  throw UsageError("unknown statistic mode");
}

StatisticMode statistic_mode_from_string(const std::string& name) {
  if (name == "dr" || name == "doubly_robust") return StatisticMode::DoublyRobust;
  if (name == "naive") return StatisticMode::Naive;
  if (name == "both") return StatisticMode::Both;
  throw UsageError("unknown statistic mode: " + name);
}

std::string to_string(MultiplierLaw law) {
  switch (law) {
    case MultiplierLaw::Rademacher: return "rademacher";
    case MultiplierLaw::Mammen: return "mammen";
    case MultiplierLaw::StandardNormal: return "standard_normal";
  }
  throw UsageError("unknown multiplier law");
}

MultiplierLaw multiplier_law_from_string(const std::string& name) {
  if (name == "rademacher") return MultiplierLaw::Rademacher;
  if (name == "mammen") return MultiplierLaw::Mammen;
  if (name == "standard_normal") return MultiplierLaw::StandardNormal;
  throw UsageError("unknown multiplier law: " + name);
}

TestResult run_single_test(const TimeSeriesPair& series, const TestConfig& cfg) {
  validate_config(cfg);
  if (cfg.mode == StatisticMode::Both) {
    throw UsageError("run_single_test needs a single statistic mode; "
                     "use run_dual_test for both");
  }

  const Fits fits = fit_common(series, cfg);
  if (cfg.mode == StatisticMode::Naive) {
    const SummandMatrix psi = run_stage("statistic", [&] {
      return compute_naive_summands(fits.design, fits.resid, fits.pairs);
    });
    return finalize(fits, cfg, psi, StatisticMode::Naive);
  }

  MdnConfig mdn_cfg = cfg.mdn;
  mdn_cfg.components = cfg.G;
  mdn_cfg.opt.seed = derive_seed(cfg.seed, SeedDomain::MdnInit);
  const MdnModel mdn =
      run_stage("train-mdn", [&] { return train_mdn(fits.design, mdn_cfg); });
  RngStream cf_rng(derive_seed(cfg.seed, SeedDomain::CfSampling));
  const CharFnEstimate cf = run_stage("cf", [&] {
    return estimate_cf(mdn, fits.design, fits.pairs, cfg.M, cf_rng);
  });
  const SummandMatrix psi = run_stage("statistic", [&] {
    return compute_summands(fits.design, fits.resid, cf, fits.pairs);
  });
  TestResult result = finalize(fits, cfg, psi, StatisticMode::DoublyRobust);
  result.diagnostics.mdn_initial_loss = mdn.info.initial_loss;
  result.diagnostics.mdn_final_loss = mdn.info.final_loss;
  return result;
}

DualTestResult run_dual_test(const TimeSeriesPair& series,
                             const TestConfig& cfg) {
  validate_config(cfg);
  const Fits fits = fit_common(series, cfg);

  MdnConfig mdn_cfg = cfg.mdn;
  mdn_cfg.components = cfg.G;
  mdn_cfg.opt.seed = derive_seed(cfg.seed, SeedDomain::MdnInit);
  const MdnModel mdn =
      run_stage("train-mdn", [&] { return train_mdn(fits.design, mdn_cfg); });
  RngStream cf_rng(derive_seed(cfg.seed, SeedDomain::CfSampling));
  const CharFnEstimate cf = run_stage("cf", [&] {
    return estimate_cf(mdn, fits.design, fits.pairs, cfg.M, cf_rng);
  });

  const SummandMatrix psi_dr = run_stage("statistic", [&] {
    return compute_summands(fits.design, fits.resid, cf, fits.pairs);
  });
  const SummandMatrix psi_naive = run_stage("statistic", [&] {
    return compute_naive_summands(fits.design, fits.resid, fits.pairs);
  });

  DualTestResult out{finalize(fits, cfg, psi_dr, StatisticMode::DoublyRobust),
                     finalize(fits, cfg, psi_naive, StatisticMode::Naive)};
  out.dr.diagnostics.mdn_initial_loss = mdn.info.initial_loss;
  out.dr.diagnostics.mdn_final_loss = mdn.info.final_loss;
  return out;
}

namespace {

std::uint64_t cell_hash(DgpKind kind, int la, int T) {
  return derive_seed(0, SeedDomain::Experiment,
                     static_cast<std::uint64_t>(kind),
                     static_cast<std::uint64_t>(la),
                     static_cast<std::uint64_t>(T));
}

ReplicationRecord to_record(const TestResult& r, const std::string& dgp,
                            int la, int T, std::uint64_t seed, int redraws,
                            std::optional<long> runtime_ms) {
  ReplicationRecord rec;
  rec.dgp_or_file = dgp;
  rec.la = la;
  rec.T = T;
  rec.seed = seed;
  rec.mode = to_string(r.config.mode);
  rec.ks = r.ks;
  rec.p_value = r.p_value;
  rec.reject = r.reject;
  rec.diverged_redraws = redraws;
  rec.runtime_ms = runtime_ms;
  rec.s_real.assign(r.s_real.data(), r.s_real.data() + r.s_real.size());
  rec.s_imag.assign(r.s_imag.data(), r.s_imag.data() + r.s_imag.size());
  rec.mlp_initial_loss = r.diagnostics.mlp_initial_loss;
  rec.mlp_final_loss = r.diagnostics.mlp_final_loss;
  rec.mdn_initial_loss = r.diagnostics.mdn_initial_loss;
  rec.mdn_final_loss = r.diagnostics.mdn_final_loss;
  return rec;
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
  }
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
          body(i);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

RejectionTable run_experiment(const ExperimentPlan& plan,
                              std::vector<ReplicationRecord>* records) {
  if (plan.kinds.empty() || plan.lags.empty() || plan.sample_sizes.empty()) {
    throw UsageError("experiment plan grid is empty");
  }
  if (plan.reps < 1) throw UsageError("experiment needs at least one replication");
  validate_config(plan.test);

  struct Cell {
    DgpKind kind;
    int la;
    int T;
    std::uint64_t hash;
  };
  std::vector<Cell> cells;
  for (const DgpKind kind : plan.kinds) {
    for (const int la : plan.lags) {
      for (const int T : plan.sample_sizes) {
        cells.push_back({kind, la, T, cell_hash(kind, la, T)});
      }
    }
  }

  const bool both = plan.test.mode == StatisticMode::Both;
  const int per_rep = both ? 2 : 1;
  const int total = static_cast<int>(cells.size()) * plan.reps;

  std::vector<ReplicationRecord> slots(
      static_cast<std::size_t>(total * per_rep));

  parallel_for(total, plan.threads, [&](int idx) {
    const Cell& cell = cells[static_cast<std::size_t>(idx / plan.reps)];
    const int rep = idx % plan.reps;

    TestConfig cfg = plan.test;
    cfg.la = cell.la;
    cfg.p = 0;
    cfg.q = 0;
    cfg.seed = derive_seed(plan.test.seed, SeedDomain::Experiment, cell.hash,
                           static_cast<std::uint64_t>(rep));

    const DgpSpec spec = preset(cell.kind, cell.la);
    int redraws = 0;
    std::optional<TimeSeriesPair> series;
    while (!series.has_value()) {
      RngStream data_rng(derive_seed(plan.test.seed, SeedDomain::Data,
                                     cell.hash, static_cast<std::uint64_t>(rep),
                                     static_cast<std::uint64_t>(redraws)));
      try {
        series.emplace(generate(spec, cell.T, data_rng));
      } catch (const DivergenceError&) {
        if (++redraws > kMaxRedraws) {
          throw NumericalError("cell " + dgp_key(spec) +
                               " exceeded the redraw limit");
        }
      }
    }

    const auto started = std::chrono::steady_clock::now();
    const std::string key = dgp_key(spec);
    if (both) {
      const DualTestResult dual = run_dual_test(*series, cfg);
      const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - started);
      const std::optional<long> ms =
          plan.timing ? std::optional<long>(elapsed.count()) : std::nullopt;
      slots[static_cast<std::size_t>(idx) * 2] =
          to_record(dual.dr, key, cell.la, cell.T, cfg.seed, redraws, ms);
      slots[static_cast<std::size_t>(idx) * 2 + 1] =
          to_record(dual.naive, key, cell.la, cell.T, cfg.seed, redraws, ms);
    } else {
      const TestResult result = run_single_test(*series, cfg);
      const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - started);
      const std::optional<long> ms =
          plan.timing ? std::optional<long>(elapsed.count()) : std::nullopt;
      slots[static_cast<std::size_t>(idx)] =
          to_record(result, key, cell.la, cell.T, cfg.seed, redraws, ms);
    }
  });

  RejectionTable table;
  const std::vector<std::string> modes =
      both ? std::vector<std::string>{"dr", "naive"}
           : std::vector<std::string>{to_string(plan.test.mode)};
  for (std::size_t c = 0; c < cells.size(); ++c) {
    // Redraw counts come from the data stream, which is shared when a
    // replication produces records for both modes.
    int redraws = 0;
    int reps_with_redraw = 0;
    for (int rep = 0; rep < plan.reps; ++rep) {
      const std::size_t slot = (c * static_cast<std::size_t>(plan.reps) +
                                static_cast<std::size_t>(rep)) *
                               static_cast<std::size_t>(per_rep);
      redraws += slots[slot].diverged_redraws;
      if (slots[slot].diverged_redraws > 0) ++reps_with_redraw;
    }

    for (std::size_t m = 0; m < modes.size(); ++m) {
      CellResult cr;
      cr.kind = cells[c].kind;
      cr.label = dgp_key(preset(cells[c].kind, cells[c].la));
      cr.la = cells[c].la;
      cr.T = cells[c].T;
      cr.mode = modes[m];
      cr.reps = plan.reps;
      for (int rep = 0; rep < plan.reps; ++rep) {
        const std::size_t slot =
            (c * static_cast<std::size_t>(plan.reps) +
             static_cast<std::size_t>(rep)) *
                static_cast<std::size_t>(per_rep) +
            m;
        if (slots[slot].reject) ++cr.rejections;
      }
      cr.diverged_redraws = redraws;
      cr.rate = static_cast<double>(cr.rejections) /
                static_cast<double>(plan.reps);
      cr.mc_se = std::sqrt(cr.rate * (1.0 - cr.rate) /
                           static_cast<double>(plan.reps));
      cr.flagged = reps_with_redraw >
                   static_cast<int>(kRedrawFlagFraction * plan.reps);
      table.cells.push_back(std::move(cr));
    }
  }

  if (records != nullptr) {
    records->insert(records->end(), slots.begin(), slots.end());
  }
  return table;
}

}  // namespace drgct
