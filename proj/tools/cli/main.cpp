// slipstep command-line entry point.
//
// Exit codes:
//   0  success
//   1  configuration or schema error (including unknown flags and version mismatch)
//   2  the character fell (run)
//   3  input file missing or unreadable, or serve address unavailable
//   4  output could not be written

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "slipstep/engine.hpp"
#include "slipstep/errors.hpp"
#include "slipstep/harness.hpp"
#include "slipstep/scenario.hpp"
#include "slipstep/trace.hpp"
#ifdef SLIPSTEP_HAVE_LIVE
#include "slipstep/live/server.hpp"
#endif

namespace fs = std::filesystem;
using namespace slipstep;

namespace {

enum Exit { kOk = 0, kConfig = 1, kFallen = 2, kMissing = 3, kWrite = 4 };

fs::path default_out() {
  if (const char* env = std::getenv("SLIPSTEP_OUT"); env && *env) return env;
  return "out";
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> duration;
};

scenario::Scenario load(const std::string& name, const Overrides& o) {
  scenario::Scenario s = scenario::resolve(name);
  if (o.seed) s.rng_seed = *o.seed;
  if (o.dt) s.dt_s = *o.dt;
  if (o.duration) s.duration_s = *o.duration;
  s.validate();
  // Building the engine loads the skeleton and gain files and checks them too.
  engine::Engine probe(s);
  return s;
}

int run_cmd(const std::vector<std::string>& names, const fs::path& out, const Overrides& o, int jobs, bool quiet) {
  std::vector<scenario::Scenario> scenarios;
  for (const auto& n : names) scenarios.push_back(load(n, o));

  struct Job {
    std::optional<trace::Summary> summary;
    std::optional<harness::WrittenFiles> files;
    std::string error;
    int code = kOk;
  };
  std::vector<Job> results(scenarios.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i; (i = next++) < scenarios.size();) {
      try {
        const auto r = harness::run_scenario(scenarios[i]);
        results[i].files = harness::write_outputs(out, scenarios[i], r);
        results[i].summary = r.summary;
        results[i].code = r.summary.fallen ? kFallen : kOk;
      } catch (const WriteError& e) {
        results[i] = {{}, {}, e.what(), kWrite};
      } catch (const Error& e) {
        results[i] = {{}, {}, e.what(), kConfig};
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(scenarios.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = kOk;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    if (!r.error.empty()) {
      std::cerr << "error: " << scenarios[i].name << ": " << r.error << "\n";
    } else if (!quiet) {
      const auto& s = *r.summary;
      std::cout << scenarios[i].name << ": ticks=" << s.ticks << " mean_speed=" << s.mean_speed_mps
                << " steps=" << s.step_count << " max_torque=" << s.max_torque_Nm
                << " p99_us=" << s.compute.p99_us;
      if (s.fallen) std::cout << " FALLEN at t=" << *s.fall_time_s;
      std::cout << "\n  " << r.files->ndjson.string() << "\n  " << r.files->csv.string() << "\n  "
                << r.files->summary.string() << "\n";
    }
    code = std::max(code, r.code);
  }
  return code;
}

int validate_cmd(const std::vector<std::string>& names, const Overrides& o) {
  int code = kOk;
  for (const auto& n : names) {
    try {
      const auto s = load(n, o);
      std::cout << "ok: " << n << " (" << s.name << ", " << s.tick_count() << " ticks)\n";
    } catch (const IoError& e) {
      std::cerr << "error: " << n << ": " << e.what() << "\n";
      code = std::max<int>(code, kMissing);
    } catch (const Error& e) {
      std::cerr << "invalid: " << n << ": " << e.what() << "\n";
      code = std::max<int>(code, kConfig);
    }
  }
  return code;
}

int list_cmd(bool as_json) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& n : scenario::builtin_names()) {
    const auto s = scenario::builtin(n);
    if (as_json) {
      list.push_back({{"name", n}, {"description", s.description}, {"duration_s", s.duration_s}});
    } else {
      std::cout << n << "\t" << s.description << "\n";
    }
  }
  if (as_json) std::cout << list.dump(2) << "\n";
  return kOk;
}

std::vector<std::string> split(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int export_cmd(const std::string& trace_path, const std::string& columns, const fs::path& out, bool to_stdout) {
  const auto loaded = trace::read_ndjson(trace_path);
  const auto cols = split(columns);
  if (to_stdout) {
    trace::export_columns(std::cout, loaded.records, cols);
    return kOk;
  }
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw WriteError("cannot create " + out.string());
  const fs::path file = out / (fs::path(trace_path).stem().string() + ".export.csv");
  std::ofstream f(file, std::ios::binary);
  if (!f) throw WriteError("cannot write " + file.string());
  trace::export_columns(f, loaded.records, cols);
  f.flush();
  if (!f) throw WriteError("write failed: " + file.string());
  std::cout << file.string() << "\n";
  return kOk;
}

#ifdef SLIPSTEP_HAVE_LIVE
int serve_cmd(const std::string& name, const Overrides& o, live::ServerOptions options, int decimation,
              const std::string& session_id) {
  live::SessionOptions so;
  so.decimation = decimation;
  so.session_id = session_id;
  live::Server server(live::Session(load(name, o), so), options);
  std::cout << "serving " << name << " on ws://" << options.bind_address << ":" << server.port() << "/" << std::endl;
  server.run();
  return kOk;
}
#endif

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slipstep: biped stepping simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "slipstep 0.3.0");

  Overrides ov;
  const auto add_overrides = [&](CLI::App* sub) {
    sub->add_option("--seed", ov.seed, "RNG seed override");
    sub->add_option("--dt", ov.dt, "Timestep override (s)")->check(CLI::Range(1e-5, 0.1));
    sub->add_option("--duration", ov.duration, "Duration override (s)")->check(CLI::NonNegativeNumber);
  };

  std::vector<std::string> names;
  fs::path out = default_out();
  int jobs = 1;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run scenarios and write trace + summary files");
  run->add_option("-s,--scenario", names, "Built-in name or scenario file (repeatable)")->required();
  run->add_option("-o,--out", out, "Output directory (default $SLIPSTEP_OUT or ./out)");
  run->add_option("-j,--jobs", jobs, "Parallel jobs")->check(CLI::PositiveNumber);
  run->add_flag("-q,--quiet", quiet, "Only report errors");
  add_overrides(run);

  std::vector<std::string> vnames;
  auto* validate = app.add_subcommand("validate", "Check scenario files without running them");
  validate->add_option("scenario", vnames, "Built-in names or scenario files")->required();
  add_overrides(validate);

  bool as_json = false;
  auto* list = app.add_subcommand("list-scenarios", "List the built-in scenarios");
  list->add_flag("--json", as_json, "JSON output");

  std::string trace_path, columns;
  bool to_stdout = false;
  auto* exp = app.add_subcommand("export", "Write plot-ready columns from an NDJSON trace");
  exp->add_option("-t,--trace", trace_path, "Trace file (.ndjson)")->required();
  exp->add_option("-c,--columns", columns,
                  "Comma-separated columns (default time_s,speed_mps,step_events,ankle_force_N)");
  exp->add_option("-o,--out", out, "Output directory (default $SLIPSTEP_OUT or ./out)");
  exp->add_flag("--stdout", to_stdout, "Write to standard output instead");

#ifdef SLIPSTEP_HAVE_LIVE
  std::string serve_name = "flat-walk";
  live::ServerOptions sopt;
  sopt.handle_signals = true;
  int decimation = 2;
  std::string session_id = "session-1";
  std::string tape;
  auto* serve = app.add_subcommand("serve", "Run one live session over WebSocket");
  serve->add_option("-s,--scenario", serve_name, "Built-in name or scenario file");
  serve->add_option("--bind", sopt.bind_address, "Bind address");
  serve->add_option("-p,--port", sopt.port, "Port (0 picks a free one)");
  serve->add_option("--tick-rate", sopt.tick_rate_hz, "Wall-clock ticks per second (0 = unpaced)")
      ->check(CLI::NonNegativeNumber);
  serve->add_option("--decimation", decimation, "Broadcast every n-th tick")->check(CLI::PositiveNumber);
  serve->add_option("--session", session_id, "Session id");
  serve->add_option("--tape", tape, "Write the command tape as a scenario file on shutdown");
  add_overrides(serve);
#endif

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return run_cmd(names, out, ov, jobs, quiet);
    if (*validate) return validate_cmd(vnames, ov);
    if (*list) return list_cmd(as_json);
    if (*exp) return export_cmd(trace_path, columns, out, to_stdout);
#ifdef SLIPSTEP_HAVE_LIVE
    if (*serve) {
      sopt.tape_path = tape;
      return serve_cmd(serve_name, ov, sopt, decimation, session_id);
    }
#endif
  } catch (const WriteError& e) {
    std::cerr << "write error: " << e.what() << "\n";
    return kWrite;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMissing;
  } catch (const VersionError& e) {
    std::cerr << "schema version error: " << e.what() << "\n";
    return kConfig;
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  }
  return kOk;
}
