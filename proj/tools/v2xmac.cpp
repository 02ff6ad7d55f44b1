// v2xmac command-line front end: solve / sweep / simulate / compare / recipes.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "v2xmac/config.hpp"
#include "v2xmac/metrics.hpp"
#include "v2xmac/recipes.hpp"
#include "v2xmac/report.hpp"
#include "v2xmac/sim.hpp"

using namespace v2xmac;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kConfigError = 2;
constexpr int kNoConvergence = 3;

struct Job {
  Tech tech;
  ScenarioConfig point;
};

std::vector<Job> jobs_for(const ScenarioConfig& config) {
  std::vector<Job> out;
  for (const auto& point : expand_sweep(config)) {
    for (Tech t : point.techs()) out.push_back({t, point});
  }
  return out;
}

std::string coordinates(const Job& j) {
  return fmt::format("{} N={} Gamma={} T_C={} T_D={} K={} lambda={} P_rk={}", to_string(j.tech), j.point.vehicles,
                     j.point.cv2x.selection_window, j.point.traffic.cam_interval, j.point.traffic.denm_interval,
                     j.point.traffic.denm_repetitions, j.point.traffic.denm_rate, j.point.cv2x.keep_probability);
}

// Runs fn(i) for i in [0, n) on `jobs` threads; the first exception wins.
template <typename Fn>
void parallel_for(int n, int jobs, Fn fn) {
  jobs = std::clamp(jobs, 1, std::max(n, 1));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next++; i < n; i = next++) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
        next = n;
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::runtime_error(fmt::format("cannot write {}", path));
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

struct Common {
  std::string config;
  std::string recipe;
  std::string out;
  int jobs = 1;
  std::uint64_t seed = 1;
  double duration_s = 60.0;
  int replications = 20;
  std::string trace;
};

ScenarioConfig load(const Common& c) {
  if (!c.recipe.empty()) {
    const Recipe* r = find_recipe(c.recipe);
    if (!r) throw ConfigError("--recipe", 0, c.recipe, "unknown recipe");
    return parse_config(r->text, c.recipe);
  }
  if (c.config.empty()) throw ConfigError("command line", 0, "--config", "a config file (or --recipe) is required");
  return load_config(c.config);
}

int run_solve(const Common& c) {
  const auto jobs = jobs_for(load(c));
  std::vector<std::optional<MetricsReport>> results(jobs.size());
  std::vector<int> iterations(jobs.size(), 0);
  std::vector<std::string> stalls(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), c.jobs, [&](int i) {
    try {
      results[i] = evaluate(jobs[i].tech, jobs[i].point);
    } catch (const NoFixedPointError& e) {
      iterations[i] = e.report().iterations;
      stalls[i] = e.what();
    } catch (const ModelError& e) {
      throw ModelError(e.code(), fmt::format("[{}] {}", coordinates(jobs[i]), e.what()));
    }
  });

  Output out(c.out);
  auto& os = out.stream();
  os << kMetricsSchema << '\n' << metrics_csv_header() << '\n';
  bool stalled = false;
  for (size_t i = 0; i < jobs.size(); ++i) {
    os << metrics_csv_row(jobs[i].tech, jobs[i].point, results[i], iterations[i]) << '\n';
    if (!stalls[i].empty()) {
      stalled = true;
      fmt::print(stderr, "no fixed point [{}]: {}\n", coordinates(jobs[i]), stalls[i]);
    }
  }
  return stalled ? kNoConvergence : kOk;
}

SimOptions sim_options(const Common& c) {
  SimOptions o;
  o.seed = c.seed;
  o.duration_s = c.duration_s;
  o.replications = c.replications;
  o.jobs = c.jobs;
  return o;
}

int run_simulate(const Common& c) {
  const auto jobs = jobs_for(load(c));
  std::ofstream trace_file;
  if (!c.trace.empty()) {
    trace_file.open(c.trace, std::ios::binary);
    if (!trace_file) throw std::runtime_error(fmt::format("cannot write {}", c.trace));
    trace_file << kTraceHeader << '\n';
  }
  Output out(c.out);
  auto& os = out.stream();
  os << kSimSchema << '\n' << sim_csv_header() << '\n';
  for (size_t i = 0; i < jobs.size(); ++i) {
    SimOptions o = sim_options(c);
    if (trace_file.is_open() && i == 0) o.trace = [&](const SimEvent& e) { trace_file << format_event(e) << '\n'; };
    const SimReport r = run_sim(jobs[i].tech, jobs[i].point, o);
    os << sim_csv_row(jobs[i].tech, jobs[i].point, r) << '\n';
  }
  return kOk;
}

int run_compare(const Common& c) {
  const auto jobs = jobs_for(load(c));
  Output out(c.out);
  auto& os = out.stream();
  os << kCompareSchema << '\n' << compare_csv_header() << '\n';
  for (const auto& job : jobs) {
    MetricsReport an;
    try {
      an = evaluate(job.tech, job.point);
    } catch (const NoFixedPointError& e) {
      fmt::print(stderr, "no fixed point [{}]: {}\n", coordinates(job), e.what());
      return kNoConvergence;
    }
    const SimReport sim = run_sim(job.tech, job.point, sim_options(c));
    os << compare_csv_row(job.tech, job.point, an, sim) << '\n';
  }
  return kOk;
}

int run_recipes(const std::string& dir, bool list) {
  if (list) {
    for (const auto& r : recipes()) fmt::print("{}\n", r.name);
    return kOk;
  }
  std::filesystem::create_directories(dir);
  for (const auto& r : recipes()) {
    const auto path = std::filesystem::path(dir) / fmt::format("{}.cfg", r.name);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    f << r.text;
    fmt::print("{}\n", path.string());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analytical and simulated MAC performance of C-V2X Mode 4 and IEEE 802.11p"};
  app.require_subcommand(1);
  Common c;

  auto add_io = [&c](CLI::App* sub) {
    sub->add_option("--config", c.config, "Scenario file (key = value)");
    sub->add_option("--out", c.out, "Output CSV (default: stdout)");
    sub->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };
  auto add_sim = [&c](CLI::App* sub) {
    sub->add_option("--seed", c.seed, "Base seed");
    sub->add_option("--duration-s", c.duration_s, "Simulated seconds per replication");
    sub->add_option("--replications", c.replications, "Independent replications");
  };

  auto* solve = app.add_subcommand("solve", "Solve the coupled model and print metrics");
  add_io(solve);
  auto* sweep = app.add_subcommand("sweep", "Like solve, also accepting a shipped recipe");
  add_io(sweep);
  sweep->add_option("--recipe", c.recipe, "Shipped recipe name");
  auto* simulate = app.add_subcommand("simulate", "Run the discrete-event simulator");
  add_io(simulate);
  add_sim(simulate);
  simulate->add_option("--trace", c.trace, "Event trace of the first point, replication 0");
  auto* compare = app.add_subcommand("compare", "Analytical vs simulated metrics");
  add_io(compare);
  add_sim(compare);
  std::string recipe_dir = "recipes";
  bool list = false;
  auto* rec = app.add_subcommand("recipes", "Write the shipped recipe configs");
  rec->add_option("--out", recipe_dir, "Target directory");
  rec->add_flag("--list", list, "Only list recipe names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (solve->parsed() || sweep->parsed()) return run_solve(c);
    if (simulate->parsed()) return run_simulate(c);
    if (compare->parsed()) return run_compare(c);
    if (rec->parsed()) return run_recipes(recipe_dir, list);
  } catch (const ModelError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    if (e.code() == ErrorCode::ConfigParseError) return kConfigError;
    if (e.code() == ErrorCode::NoFixedPoint) return kNoConvergence;
    return kFailure;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kFailure;
  }
  return kFailure;
}
