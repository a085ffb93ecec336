#include "slipstep/harness.hpp"

#include <chrono>
#include <fstream>

#include <nlohmann/json.hpp>

#include "slipstep/engine.hpp"
#include "slipstep/errors.hpp"

namespace slipstep::harness {

RunResult run_scenario(const scenario::Scenario& s, const RunOptions& options) {
  RunResult out;
  engine::Engine eng(s);
  out.records.reserve(static_cast<std::size_t>(s.tick_count()));
  while (!eng.finished()) {
    const auto t0 = std::chrono::steady_clock::now();
    out.records.push_back(eng.step());
    if (options.measure_time) {
      const auto t1 = std::chrono::steady_clock::now();
      out.tick_us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
    }
  }
  out.summary = trace::summarize(out.records, out.tick_us, options.transient_s);
  return out;
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw WriteError("cannot write " + p.string());
  return f;
}

void check(std::ofstream& f, const std::filesystem::path& p) {
  f.flush();
  if (!f) throw WriteError("write failed: " + p.string());
}

}  // namespace

WrittenFiles write_outputs(const std::filesystem::path& dir, const scenario::Scenario& s, const RunResult& r) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw WriteError("cannot create " + dir.string() + ": " + ec.message());

  WrittenFiles files{dir / (s.name + ".ndjson"), dir / (s.name + ".csv"), dir / (s.name + ".summary.json")};
  {
    auto f = open_out(files.ndjson);
    trace::write_ndjson(f, trace::header_json(scenario::to_json(s)), r.records);
    check(f, files.ndjson);
  }
  {
    auto f = open_out(files.csv);
    trace::write_csv_header(f);
    for (const auto& rec : r.records) trace::write_csv_row(f, rec);
    check(f, files.csv);
  }
  {
    auto f = open_out(files.summary);
    nlohmann::json j = trace::to_json(r.summary);
    j["scenario"] = s.name;
    f << j.dump(2) << '\n';
    check(f, files.summary);
  }
  return files;
}

}  // namespace slipstep::harness
