#pragma once

// Runs a scenario to completion and writes its traces.

#include <filesystem>
#include <string>
#include <vector>

#include "slipstep/scenario.hpp"
#include "slipstep/trace.hpp"

namespace slipstep::harness {

struct RunResult {
  std::vector<trace::TraceRecord> records;
  trace::Summary summary;
  std::vector<double> tick_us;  // wall-clock compute per tick, never written to traces
};

struct RunOptions {
  bool measure_time = true;
  double transient_s = 3.0;
};

RunResult run_scenario(const scenario::Scenario& s, const RunOptions& options = {});

struct WrittenFiles {
  std::filesystem::path ndjson;
  std::filesystem::path csv;
  std::filesystem::path summary;
};

/// Writes <dir>/<name>.ndjson, <name>.csv and <name>.summary.json. Throws WriteError
/// when the directory or a file cannot be written.
WrittenFiles write_outputs(const std::filesystem::path& dir, const scenario::Scenario& s, const RunResult& r);

}  // namespace slipstep::harness
