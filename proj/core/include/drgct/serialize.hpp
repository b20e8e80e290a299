#pragma once

#include <string>

#include "drgct/mdn.hpp"
#include "drgct/mlp.hpp"

namespace drgct {

/// Versioned little-endian binary snapshots. Raw IEEE-754 bytes round-trip
/// bit-exactly.
void save_mlp(const MlpModel& model, const std::string& path);
MlpModel load_mlp(const std::string& path);

void save_mdn(const MdnModel& model, const std::string& path);
MdnModel load_mdn(const std::string& path);

}  // namespace drgct
