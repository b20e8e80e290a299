#include "drgct/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "drgct/errors.hpp"

namespace drgct {
namespace {

using ordered_json = nlohmann::ordered_json;

void reject_unknown_keys(const ordered_json& j,
                         const std::set<std::string>& known,
                         const std::string& context) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!known.contains(key)) {
      throw UsageError("unknown key \"" + key + "\" in " + context);
    }
  }
}

std::string loss_to_string(LossKind loss) {
  return loss == LossKind::Squared ? "squared" : "smooth_l1";
}

LossKind loss_from_string(const std::string& name) {
  if (name == "squared") return LossKind::Squared;
  if (name == "smooth_l1") return LossKind::SmoothL1;
  throw UsageError("unknown loss: " + name);
}

ordered_json opt_to_json(const OptimizerConfig& opt) {
  return {{"learning_rate", opt.learning_rate},
          {"epochs", opt.epochs},
          {"batch_size", opt.batch_size}};
}

void opt_from_json(const ordered_json& j, OptimizerConfig& opt,
                   const std::string& context) {
  reject_unknown_keys(j, {"learning_rate", "epochs", "batch_size"}, context);
  opt.learning_rate = j.value("learning_rate", opt.learning_rate);
  opt.epochs = j.value("epochs", opt.epochs);
  opt.batch_size = j.value("batch_size", opt.batch_size);
}

ordered_json mlp_to_json(const MlpConfig& mlp) {
  ordered_json j;
  j["hidden_layers"] = mlp.hidden_layers;
  j["width"] = mlp.width;
  j["loss"] = loss_to_string(mlp.loss);
  j["smooth_l1_delta"] = mlp.smooth_l1_delta;
  j["standardize_inputs"] = mlp.standardize_inputs;
  j["opt"] = opt_to_json(mlp.opt);
  return j;
}

MlpConfig mlp_from_json(const ordered_json& j) {
  reject_unknown_keys(j,
                      {"hidden_layers", "width", "loss", "smooth_l1_delta",
                       "standardize_inputs", "opt"},
                      "mlp config");
  MlpConfig mlp;
  mlp.hidden_layers = j.value("hidden_layers", mlp.hidden_layers);
  mlp.width = j.value("width", mlp.width);
  if (j.contains("loss")) mlp.loss = loss_from_string(j.at("loss"));
  mlp.smooth_l1_delta = j.value("smooth_l1_delta", mlp.smooth_l1_delta);
  mlp.standardize_inputs = j.value("standardize_inputs", mlp.standardize_inputs);
  if (j.contains("opt")) opt_from_json(j.at("opt"), mlp.opt, "mlp opt");
  return mlp;
}

ordered_json mdn_to_json(const MdnConfig& mdn) {
  ordered_json j;
  j["hidden_layers"] = mdn.hidden_layers;
  j["width"] = mdn.width;
  j["sigma_floor"] = mdn.sigma_floor;
  j["standardize_inputs"] = mdn.standardize_inputs;
  j["g_grid"] = mdn.g_grid;
  j["opt"] = opt_to_json(mdn.opt);
  return j;
}

MdnConfig mdn_from_json(const ordered_json& j) {
  reject_unknown_keys(j,
                      {"hidden_layers", "width", "sigma_floor",
                       "standardize_inputs", "g_grid", "opt"},
                      "mdn config");
  MdnConfig mdn;
  mdn.hidden_layers = j.value("hidden_layers", mdn.hidden_layers);
  mdn.width = j.value("width", mdn.width);
  mdn.sigma_floor = j.value("sigma_floor", mdn.sigma_floor);
  mdn.standardize_inputs = j.value("standardize_inputs", mdn.standardize_inputs);
  if (j.contains("g_grid")) {
    mdn.g_grid = j.at("g_grid").get<std::vector<int>>();
  }
  if (j.contains("opt")) opt_from_json(j.at("opt"), mdn.opt, "mdn opt");
  return mdn;
}

ordered_json test_config_to_json(const TestConfig& cfg) {
  ordered_json j;
  j["la"] = cfg.la;
  j["p"] = cfg.p;
  j["q"] = cfg.q;
  j["L"] = cfg.L;
  j["M"] = cfg.M;
  j["G"] = cfg.G;
  j["B"] = cfg.B;
  j["alpha"] = cfg.alpha;
  j["freq_bounds"] = {{"lo", cfg.freq_bounds.lo}, {"hi", cfg.freq_bounds.hi}};
  j["multiplier_law"] = to_string(cfg.multiplier_law);
  j["mode"] = to_string(cfg.mode);
  j["seed"] = cfg.seed;
  j["mlp"] = mlp_to_json(cfg.mlp);
  j["mdn"] = mdn_to_json(cfg.mdn);
  return j;
}

TestConfig test_config_from_json(const ordered_json& j) {
  reject_unknown_keys(j,
                      {"la", "p", "q", "L", "M", "G", "B", "alpha",
                       "freq_bounds", "multiplier_law", "mode", "seed", "mlp",
                       "mdn"},
                      "test config");
  TestConfig cfg;
  cfg.la = j.value("la", cfg.la);
  cfg.p = j.value("p", cfg.p);
  cfg.q = j.value("q", cfg.q);
  cfg.L = j.value("L", cfg.L);
  cfg.M = j.value("M", cfg.M);
  cfg.G = j.value("G", cfg.G);
  cfg.B = j.value("B", cfg.B);
  cfg.alpha = j.value("alpha", cfg.alpha);
  if (j.contains("freq_bounds")) {
    const auto& fb = j.at("freq_bounds");
    reject_unknown_keys(fb, {"lo", "hi"}, "freq_bounds");
    cfg.freq_bounds.lo = fb.value("lo", cfg.freq_bounds.lo);
    cfg.freq_bounds.hi = fb.value("hi", cfg.freq_bounds.hi);
  }
  if (j.contains("multiplier_law")) {
    cfg.multiplier_law = multiplier_law_from_string(j.at("multiplier_law"));
  }
  if (j.contains("mode")) {
    cfg.mode = statistic_mode_from_string(j.at("mode"));
  }
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("mlp")) cfg.mlp = mlp_from_json(j.at("mlp"));
  if (j.contains("mdn")) cfg.mdn = mdn_from_json(j.at("mdn"));
  return cfg;
}

ordered_json parse_text(const std::string& text, const std::string& what) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("cannot parse " + what + ": " + e.what());
  }
}

}  // namespace

TestConfig test_config_from_json_text(const std::string& text) {
  return test_config_from_json(parse_text(text, "test config"));
}

std::string test_config_to_json_text(const TestConfig& cfg) {
  return test_config_to_json(cfg).dump(2);
}

ExperimentPlan plan_from_json_text(const std::string& text) {
  const ordered_json j = parse_text(text, "experiment plan");
  reject_unknown_keys(
      j, {"kinds", "lags", "sample_sizes", "reps", "threads", "timing", "test"},
      "experiment plan");
  ExperimentPlan plan;
  if (j.contains("kinds")) {
    for (const auto& name : j.at("kinds")) {
      plan.kinds.push_back(dgp_kind_from_string(name.get<std::string>()));
    }
  }
  if (j.contains("lags")) plan.lags = j.at("lags").get<std::vector<int>>();
  if (j.contains("sample_sizes")) {
    plan.sample_sizes = j.at("sample_sizes").get<std::vector<int>>();
  }
  plan.reps = j.value("reps", plan.reps);
  plan.threads = j.value("threads", plan.threads);
  plan.timing = j.value("timing", plan.timing);
  if (j.contains("test")) {
    plan.test = test_config_from_json(j.at("test"));
  }
  return plan;
}

std::string plan_to_json_text(const ExperimentPlan& plan) {
  ordered_json j;
  j["kinds"] = ordered_json::array();
  for (const DgpKind kind : plan.kinds) j["kinds"].push_back(to_string(kind));
  j["lags"] = plan.lags;
  j["sample_sizes"] = plan.sample_sizes;
  j["reps"] = plan.reps;
  j["threads"] = plan.threads;
  j["timing"] = plan.timing;
  j["test"] = test_config_to_json(plan.test);
  return j.dump(2);
}

namespace {
std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

ExperimentPlan load_plan(const std::string& path) {
  return plan_from_json_text(slurp(path));
}

TestConfig load_test_config(const std::string& path) {
  return test_config_from_json_text(slurp(path));
}

}  // namespace drgct
