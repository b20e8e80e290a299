// Command-line front end: simulate (Monte-Carlo grids), test (one series),
// realdata (price/volume lag sweeps), report (reformat results files).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "drgct/config.hpp"
#include "drgct/errors.hpp"
#include "drgct/realdata.hpp"
#include "drgct/report.hpp"
#include "drgct/runner.hpp"
#include "drgct/series.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> lags;
  std::optional<int> reps;
  std::optional<int> bootstrap;
  std::optional<double> alpha;
  std::optional<std::string> freq_bounds;
  std::optional<int> threads;
  bool timing = false;
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--seed", ov.seed, "Master seed");
  cmd->add_option("--mode", ov.mode, "Statistic mode: dr, naive, or both");
  cmd->add_option("--lags", ov.lags,
                  "Lag orders, e.g. \"1,2,5\" or \"1-10\"");
  cmd->add_option("--reps", ov.reps, "Monte-Carlo replications per cell");
  cmd->add_option("--bootstrap", ov.bootstrap, "Bootstrap replications B");
  cmd->add_option("--alpha", ov.alpha, "Significance level");
  cmd->add_option("--freq-bounds", ov.freq_bounds,
                  "Frequency box as lo,hi (default -1,1)");
  cmd->add_option("--threads", ov.threads, "Worker threads (0 = hardware)");
  cmd->add_flag("--timing", ov.timing,
                "Record wall-clock runtime_ms in results (off keeps output "
                "byte-deterministic)");
}

std::vector<int> parse_lag_list(const std::string& text) {
  std::vector<int> lags;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string token =
        text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    const std::size_t dash = token.find('-');
    try {
      if (dash != std::string::npos) {
        const int lo = std::stoi(token.substr(0, dash));
        const int hi = std::stoi(token.substr(dash + 1));
        if (lo > hi) throw drgct::UsageError("bad lag range: " + token);
        for (int v = lo; v <= hi; ++v) lags.push_back(v);
      } else {
        lags.push_back(std::stoi(token));
      }
    } catch (const std::invalid_argument&) {
      throw drgct::UsageError("bad lag list entry: " + token);
    } catch (const std::out_of_range&) {
      throw drgct::UsageError("bad lag list entry: " + token);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (lags.empty()) throw drgct::UsageError("empty lag list");
  return lags;
}

void apply_test_overrides(drgct::TestConfig& cfg, const Overrides& ov) {
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.mode) cfg.mode = drgct::statistic_mode_from_string(*ov.mode);
  if (ov.bootstrap) cfg.B = *ov.bootstrap;
  if (ov.alpha) cfg.alpha = *ov.alpha;
  if (ov.freq_bounds) {
    const std::size_t comma = ov.freq_bounds->find(',');
    if (comma == std::string::npos) {
      throw drgct::UsageError("--freq-bounds expects lo,hi");
    }
    try {
      cfg.freq_bounds.lo = std::stod(ov.freq_bounds->substr(0, comma));
      cfg.freq_bounds.hi = std::stod(ov.freq_bounds->substr(comma + 1));
    } catch (const std::exception&) {
      throw drgct::UsageError("--freq-bounds expects lo,hi");
    }
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw drgct::DataError("cannot write " + path.string());
  out << text;
  if (!out) throw drgct::DataError("failed writing " + path.string());
}

int run_simulate(const std::string& config_path, const std::string& out_dir,
                 const Overrides& ov) {
  drgct::ExperimentPlan plan = drgct::load_plan(config_path);
  apply_test_overrides(plan.test, ov);
  if (ov.lags) plan.lags = parse_lag_list(*ov.lags);
  if (ov.reps) plan.reps = *ov.reps;
  if (ov.threads) plan.threads = *ov.threads;
  if (ov.timing) plan.timing = true;

  std::vector<drgct::ReplicationRecord> records;
  const drgct::RejectionTable table = drgct::run_experiment(plan, &records);

  fs::create_directories(out_dir);
  drgct::write_results_jsonl((fs::path(out_dir) / "results.jsonl").string(),
                             records);
  const std::string md = drgct::format_rejection_table_markdown(table);
  write_text(fs::path(out_dir) / "report.md", md);
  std::cout << md;
  return kExitOk;
}

drgct::TimeSeriesPair load_xy_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw drgct::DataError("cannot open series file: " + path);
  std::vector<double> xs, ys;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw drgct::DataError("line " + std::to_string(line_no) +
                             ": expected x,y");
    }
    try {
      xs.push_back(std::stod(line.substr(0, comma)));
      ys.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      if (line_no == 1) continue;  // header
      throw drgct::DataError("line " + std::to_string(line_no) +
                             ": non-numeric x or y");
    }
  }
  Eigen::VectorXd x(static_cast<Eigen::Index>(xs.size()));
  Eigen::VectorXd y(static_cast<Eigen::Index>(ys.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    x(static_cast<Eigen::Index>(i)) = xs[i];
    y(static_cast<Eigen::Index>(i)) = ys[i];
  }
  return drgct::TimeSeriesPair(std::move(x), std::move(y));
}

int run_test(const std::string& input, const std::string& config_path,
             const std::string& out_dir, const Overrides& ov) {
  drgct::TestConfig cfg;
  if (!config_path.empty()) cfg = drgct::load_test_config(config_path);
  apply_test_overrides(cfg, ov);
  if (ov.lags) {
    const auto lags = parse_lag_list(*ov.lags);
    if (lags.size() != 1) {
      throw drgct::UsageError("test takes a single lag order");
    }
    cfg.la = lags.front();
    cfg.p = 0;
    cfg.q = 0;
  }
  if (cfg.mode == drgct::StatisticMode::Both) {
    throw drgct::UsageError("test runs one statistic mode; pick dr or naive");
  }

  const drgct::TimeSeriesPair series = load_xy_csv(input);
  const drgct::TestResult result = drgct::run_single_test(series, cfg);

  drgct::LagTestOutcome outcome{cfg.resolved_lags().q, result};
  drgct::ReplicationRecord rec =
      drgct::realdata_record(input, outcome, series.n());
  std::cout << drgct::to_jsonl_line(rec) << "\n";
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    drgct::write_results_jsonl((fs::path(out_dir) / "results.jsonl").string(),
                               {rec});
  }
  return kExitOk;
}

int run_realdata(const std::string& input, const std::string& config_path,
                 const std::string& direction, double divisor,
                 const std::string& out_dir, const Overrides& ov) {
  drgct::TestConfig cfg;
  if (!config_path.empty()) cfg = drgct::load_test_config(config_path);
  apply_test_overrides(cfg, ov);
  if (cfg.mode == drgct::StatisticMode::Both) {
    throw drgct::UsageError("realdata runs one statistic mode; pick dr or naive");
  }

  std::vector<drgct::RealDataJob::Direction> directions;
  if (direction == "xy") {
    directions = {drgct::RealDataJob::Direction::XCausesY};
  } else if (direction == "yx") {
    directions = {drgct::RealDataJob::Direction::YCausesX};
  } else if (direction == "both") {
    directions = {drgct::RealDataJob::Direction::XCausesY,
                  drgct::RealDataJob::Direction::YCausesX};
  } else {
    throw drgct::UsageError("--direction must be xy, yx, or both");
  }

  drgct::RealDataJob job;
  job.csv_path = input;
  job.volume_divisor = divisor;
  if (ov.lags) job.lags = parse_lag_list(*ov.lags);

  const auto rows = drgct::load_price_volume_csv(input);
  const long series_len = static_cast<long>(rows.size()) - 1;

  drgct::RealDataReport report;
  report.file = input;
  std::vector<drgct::ReplicationRecord> records;
  for (const auto dir : directions) {
    job.direction = dir;
    auto outcomes = drgct::run_real_data(job, cfg);
    for (const auto& o : outcomes) {
      records.push_back(drgct::realdata_record(input, o, series_len));
    }
    report.directions.emplace_back(drgct::to_string(dir), std::move(outcomes));
  }

  const std::string md = drgct::format_realdata_table_markdown(report);
  std::cout << md;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    drgct::write_results_jsonl((fs::path(out_dir) / "results.jsonl").string(),
                               records);
    write_text(fs::path(out_dir) / "report.md", md);
  }
  return kExitOk;
}

int run_report(const std::string& input, const std::string& out_path) {
  const auto records = drgct::parse_results_jsonl(input);
  if (records.empty()) throw drgct::DataError("results file has no records");
  const drgct::RejectionTable table = drgct::aggregate_records(records);
  const std::string md = drgct::format_rejection_table_markdown(table);
  std::cout << md;
  if (!out_path.empty()) write_text(out_path, md);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Doubly robust Granger causality testing"};
  app.require_subcommand(1);

  Overrides ov;

  auto* simulate = app.add_subcommand(
      "simulate", "Run a Monte-Carlo experiment plan from a config file");
  std::string sim_config;
  std::string sim_out = "out";
  simulate->add_option("--config", sim_config, "Experiment plan JSON")
      ->required();
  simulate->add_option("--out", sim_out, "Output directory");
  add_override_flags(simulate, ov);

  auto* test = app.add_subcommand("test", "Test one x,y series file");
  std::string test_input;
  std::string test_config;
  std::string test_out;
  test->add_option("--input", test_input, "CSV with x,y columns")->required();
  test->add_option("--config", test_config, "Test config JSON");
  test->add_option("--out", test_out, "Output directory");
  add_override_flags(test, ov);

  auto* realdata = app.add_subcommand(
      "realdata", "Lag sweep over a date,price,volume CSV");
  std::string rd_input;
  std::string rd_config;
  std::string rd_out;
  std::string rd_direction = "both";
  double rd_divisor = 10.0;
  realdata->add_option("--input", rd_input, "CSV file")->required();
  realdata->add_option("--config", rd_config, "Test config JSON");
  realdata->add_option("--direction", rd_direction, "xy, yx, or both");
  realdata->add_option("--divisor", rd_divisor, "Volume percent-change divisor");
  realdata->add_option("--out", rd_out, "Output directory");
  add_override_flags(realdata, ov);

  auto* report = app.add_subcommand("report", "Reformat a results.jsonl file");
  std::string rep_input;
  std::string rep_out;
  report->add_option("--input", rep_input, "results.jsonl")->required();
  report->add_option("--out", rep_out, "Markdown output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) return run_simulate(sim_config, sim_out, ov);
    if (test->parsed()) return run_test(test_input, test_config, test_out, ov);
    if (realdata->parsed()) {
      return run_realdata(rd_input, rd_config, rd_direction, rd_divisor,
                          rd_out, ov);
    }
    if (report->parsed()) return run_report(rep_input, rep_out);
  } catch (const drgct::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const drgct::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const drgct::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
