#pragma once

#include <string>
#include <vector>

#include "drgct/realdata.hpp"
#include "drgct/runner.hpp"

namespace drgct {

/// One results record as a single JSON line. Optional fields serialize as
/// explicit nulls; key order is fixed so equal records give equal bytes.
std::string to_jsonl_line(const ReplicationRecord& record);

void write_results_jsonl(const std::string& path,
                         const std::vector<ReplicationRecord>& records);

std::vector<ReplicationRecord> parse_results_jsonl(const std::string& path);

/// Rebuild per-cell rejection rates from raw records (used by the report
/// subcommand; the grouping key is (dgp_or_file, la, T, mode)).
RejectionTable aggregate_records(const std::vector<ReplicationRecord>& records);

std::string format_rejection_table_markdown(const RejectionTable& table);

/// Per-lag reject marks for one file, one row per direction.
struct RealDataReport {
  std::string file;
  std::vector<std::pair<std::string, std::vector<LagTestOutcome>>> directions;
};

std::string format_realdata_table_markdown(const RealDataReport& report);

ReplicationRecord realdata_record(const std::string& file,
                                  const LagTestOutcome& outcome,
                                  long series_length);

}  // namespace drgct
