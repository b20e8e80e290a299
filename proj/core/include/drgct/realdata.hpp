#pragma once

#include <string>
#include <vector>

#include "drgct/runner.hpp"

namespace drgct {

/// One parsed CSV row of the date,price,volume schema.
struct PriceVolumeRow {
  std::string date;
  double price = 0.0;
  double volume = 0.0;
};

/// Load a date,price,volume CSV (ISO dates, optional header). Malformed
/// rows raise DataError naming the line.
std::vector<PriceVolumeRow> load_price_volume_csv(const std::string& path);

/// A lag sweep over one causality direction of a price/volume file. Both
/// series are turned into percent changes; the volume changes are divided
/// by volume_divisor. x_causes_y tests whether price changes cause scaled
/// volume changes; y_causes_x swaps the roles.
struct RealDataJob {
  enum class Direction { XCausesY, YCausesX };

  std::string csv_path;
  Direction direction = Direction::XCausesY;
  std::vector<int> lags = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  double volume_divisor = 10.0;
};

std::string to_string(RealDataJob::Direction direction);

struct LagTestOutcome {
  int lag = 0;
  TestResult result;
};

/// One full test per lag in the sweep. Per-lag seeds derive from the
/// config seed and the lag, so sweeping is reproducible lag by lag.
std::vector<LagTestOutcome> run_real_data(const RealDataJob& job,
                                          const TestConfig& cfg);

/// The transformed pair in x-causes-y orientation (x = price changes,
/// y = scaled volume changes); exposed for tests and the CLI.
TimeSeriesPair transform_price_volume(const std::vector<PriceVolumeRow>& rows,
                                      double volume_divisor);

}  // namespace drgct
