#include "drgct/realdata.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "drgct/errors.hpp"

namespace drgct {
namespace {

bool parse_double(const std::string& field, double& out) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

std::vector<PriceVolumeRow> load_price_volume_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV file: " + path);

  std::vector<PriceVolumeRow> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const auto fields = split_csv_line(line);
    if (fields.size() != 3) {
      throw DataError("line " + std::to_string(line_no) +
                      ": expected 3 fields (date,price,volume), got " +
                      std::to_string(fields.size()));
    }
    PriceVolumeRow row;
    row.date = fields[0];
    if (!parse_double(fields[1], row.price) ||
        !parse_double(fields[2], row.volume)) {
      if (line_no == 1) continue;  // header
      throw DataError("line " + std::to_string(line_no) +
                      ": non-numeric price or volume");
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 3) {
    throw DataError("CSV " + path + " holds too few data rows");
  }
  return rows;
}

std::string to_string(RealDataJob::Direction direction) {
  return direction == RealDataJob::Direction::XCausesY ? "x_causes_y"
                                                       : "y_causes_x";
}

TimeSeriesPair transform_price_volume(const std::vector<PriceVolumeRow>& rows,
                                      double volume_divisor) {
  Eigen::VectorXd price(static_cast<Eigen::Index>(rows.size()));
  Eigen::VectorXd volume(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    price(static_cast<Eigen::Index>(i)) = rows[i].price;
    volume(static_cast<Eigen::Index>(i)) = rows[i].volume;
  }
  Eigen::VectorXd x = percent_change(price);
  Eigen::VectorXd y = scale_volume(percent_change(volume), volume_divisor);
  return TimeSeriesPair(std::move(x), std::move(y));
}

std::vector<LagTestOutcome> run_real_data(const RealDataJob& job,
                                          const TestConfig& cfg) {
  if (job.lags.empty()) throw UsageError("real-data lag sweep is empty");
  const auto rows = load_price_volume_csv(job.csv_path);
  TimeSeriesPair pair = transform_price_volume(rows, job.volume_divisor);
  if (job.direction == RealDataJob::Direction::YCausesX) {
    std::swap(pair.x, pair.y);
  }

  std::vector<LagTestOutcome> out;
  out.reserve(job.lags.size());
  for (const int lag : job.lags) {
    if (lag < 1) throw UsageError("lag orders must be positive");
    TestConfig lag_cfg = cfg;
    lag_cfg.la = lag;
    lag_cfg.p = 0;
    lag_cfg.q = 0;
    lag_cfg.seed = derive_seed(
        cfg.seed, SeedDomain::RealData, static_cast<std::uint64_t>(lag),
        job.direction == RealDataJob::Direction::XCausesY ? 0 : 1);
    out.push_back({lag, run_single_test(pair, lag_cfg)});
  }
  return out;
}

}  // namespace drgct
