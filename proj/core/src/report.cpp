#include "drgct/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "drgct/errors.hpp"

namespace drgct {
namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json to_json(const ReplicationRecord& r) {
  ordered_json j;
  j["dgp_or_file"] = r.dgp_or_file;
  j["la"] = r.la;
  j["T"] = r.T;
  j["seed"] = r.seed;
  j["mode"] = r.mode;
  j["ks"] = r.ks;
  j["p_value"] = r.p_value;
  j["reject"] = r.reject;
  j["diverged_redraws"] = r.diverged_redraws;
  if (r.runtime_ms.has_value()) {
    j["runtime_ms"] = *r.runtime_ms;
  } else {
    j["runtime_ms"] = nullptr;
  }
  j["s_real"] = r.s_real;
  j["s_imag"] = r.s_imag;
  j["mlp_initial_loss"] = r.mlp_initial_loss;
  j["mlp_final_loss"] = r.mlp_final_loss;
  if (r.mdn_initial_loss.has_value()) {
    j["mdn_initial_loss"] = *r.mdn_initial_loss;
  } else {
    j["mdn_initial_loss"] = nullptr;
  }
  if (r.mdn_final_loss.has_value()) {
    j["mdn_final_loss"] = *r.mdn_final_loss;
  } else {
    j["mdn_final_loss"] = nullptr;
  }
  return j;
}

ReplicationRecord from_json(const ordered_json& j) {
  ReplicationRecord r;
  r.dgp_or_file = j.at("dgp_or_file").get<std::string>();
  r.la = j.at("la").get<int>();
  r.T = j.at("T").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.mode = j.at("mode").get<std::string>();
  r.ks = j.at("ks").get<double>();
  r.p_value = j.at("p_value").get<double>();
  r.reject = j.at("reject").get<bool>();
  r.diverged_redraws = j.at("diverged_redraws").get<int>();
  if (!j.at("runtime_ms").is_null()) {
    r.runtime_ms = j.at("runtime_ms").get<long>();
  }
  r.s_real = j.at("s_real").get<std::vector<double>>();
  r.s_imag = j.at("s_imag").get<std::vector<double>>();
  r.mlp_initial_loss = j.at("mlp_initial_loss").get<double>();
  r.mlp_final_loss = j.at("mlp_final_loss").get<double>();
  if (!j.at("mdn_initial_loss").is_null()) {
    r.mdn_initial_loss = j.at("mdn_initial_loss").get<double>();
  }
  if (!j.at("mdn_final_loss").is_null()) {
    r.mdn_final_loss = j.at("mdn_final_loss").get<double>();
  }
  return r;
}

}  // namespace

std::string to_jsonl_line(const ReplicationRecord& record) {
  return to_json(record).dump();
}

void write_results_jsonl(const std::string& path,
                         const std::vector<ReplicationRecord>& records) {
  if (records.empty()) throw UsageError("no records to write");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write results file: " + path);
  for (const auto& r : records) out << to_jsonl_line(r) << '\n';
  if (!out) throw DataError("failed while writing results file: " + path);
}

std::vector<ReplicationRecord> parse_results_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open results file: " + path);
  std::vector<ReplicationRecord> records;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(from_json(ordered_json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("results file " + path + " line " +
                      std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

RejectionTable aggregate_records(
    const std::vector<ReplicationRecord>& records) {
  std::map<std::tuple<std::string, int, int, std::string>,
           std::pair<int, int>>
      groups;  // (reps, rejections), keyed by (dgp, la, T, mode)
  std::map<std::tuple<std::string, int, int, std::string>, int> redraws;
  for (const auto& r : records) {
    const auto key = std::make_tuple(r.dgp_or_file, r.la, r.T, r.mode);
    auto& [reps, rejections] = groups[key];
    ++reps;
    if (r.reject) ++rejections;
    redraws[key] += r.diverged_redraws;
  }

  RejectionTable table;
  for (const auto& [key, counts] : groups) {
    CellResult cr;
    cr.label = std::get<0>(key);
    try {
      cr.kind = dgp_kind_from_string(cr.label.substr(0, cr.label.find(':')));
    } catch (const UsageError&) {
      cr.kind = DgpKind::S1;  // file-based records: label carries the name
    }
    cr.la = std::get<1>(key);
    cr.T = std::get<2>(key);
    cr.mode = std::get<3>(key);
    cr.reps = counts.first;
    cr.rejections = counts.second;
    cr.rate = static_cast<double>(cr.rejections) /
              static_cast<double>(cr.reps);
    cr.mc_se = std::sqrt(cr.rate * (1.0 - cr.rate) /
                         static_cast<double>(cr.reps));
    cr.diverged_redraws = redraws[key];
    table.cells.push_back(std::move(cr));
  }
  return table;
}

std::string format_rejection_table_markdown(const RejectionTable& table) {
  std::ostringstream out;
  out << "| DGP | La | T | Mode | Rate | MC s.e. | Rejections/Reps | "
         "Redraws |\n";
  out << "|-----|----|---|------|------|---------|-----------------|"
         "---------|\n";
  char buf[64];
  for (const auto& c : table.cells) {
    std::snprintf(buf, sizeof(buf), "%.3f", c.rate);
    const std::string rate = buf;
    std::snprintf(buf, sizeof(buf), "%.3f", c.mc_se);
    const std::string se = buf;
    const std::string label = c.label.empty() ? to_string(c.kind) : c.label;
    out << "| " << label << " | " << c.la << " | " << c.T
        << " | " << c.mode << " | " << rate << " | " << se << " | "
        << c.rejections << "/" << c.reps << " | " << c.diverged_redraws
        << (c.flagged ? " (flagged)" : "") << " |\n";
  }
  return out.str();
}

std::string format_realdata_table_markdown(const RealDataReport& report) {
  std::ostringstream out;
  out << "Reject marks per lag order (X = reject at level alpha, - = fail "
         "to reject) for "
      << report.file << "\n\n";
  out << "| Direction |";
  if (!report.directions.empty()) {
    for (const auto& o : report.directions.front().second) {
      out << " " << o.lag << " |";
    }
  }
  out << "\n|-----------|";
  if (!report.directions.empty()) {
    for (std::size_t i = 0; i < report.directions.front().second.size(); ++i) {
      out << "---|";
    }
  }
  out << "\n";
  for (const auto& [direction, outcomes] : report.directions) {
    out << "| " << direction << " |";
    for (const auto& o : outcomes) {
      out << " " << (o.result.reject ? "X" : "-") << " |";
    }
    out << "\n";
  }

  out << "\np-values:\n\n| Direction |";
  if (!report.directions.empty()) {
    for (const auto& o : report.directions.front().second) {
      out << " " << o.lag << " |";
    }
  }
  out << "\n|-----------|";
  if (!report.directions.empty()) {
    for (std::size_t i = 0; i < report.directions.front().second.size(); ++i) {
      out << "---|";
    }
  }
  out << "\n";
  char buf[64];
  for (const auto& [direction, outcomes] : report.directions) {
    out << "| " << direction << " |";
    for (const auto& o : outcomes) {
      std::snprintf(buf, sizeof(buf), "%.3f", o.result.p_value);
      out << " " << buf << " |";
    }
    out << "\n";
  }
  return out.str();
}

ReplicationRecord realdata_record(const std::string& file,
                                  const LagTestOutcome& outcome,
                                  long series_length) {
  ReplicationRecord rec;
  rec.dgp_or_file = file;
  rec.la = outcome.lag;
  rec.T = static_cast<int>(series_length);
  rec.seed = outcome.result.seed;
  rec.mode = to_string(outcome.result.config.mode);
  rec.ks = outcome.result.ks;
  rec.p_value = outcome.result.p_value;
  rec.reject = outcome.result.reject;
  rec.diverged_redraws = 0;
  rec.s_real.assign(outcome.result.s_real.data(),
                    outcome.result.s_real.data() + outcome.result.s_real.size());
  rec.s_imag.assign(outcome.result.s_imag.data(),
                    outcome.result.s_imag.data() + outcome.result.s_imag.size());
  rec.mlp_initial_loss = outcome.result.diagnostics.mlp_initial_loss;
  rec.mlp_final_loss = outcome.result.diagnostics.mlp_final_loss;
  rec.mdn_initial_loss = outcome.result.diagnostics.mdn_initial_loss;
  rec.mdn_final_loss = outcome.result.diagnostics.mdn_final_loss;
  return rec;
}

}  // namespace drgct
