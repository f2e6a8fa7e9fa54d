// racr-bench: run, verify and summarize joint-diagonalization benchmarks.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "racr/bench.hpp"
#include "racr/jd.hpp"

namespace {

namespace bench = racr::bench;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kRunFailures = 2;

struct RunArgs {
  std::string plan;
  std::string out = "bench-out";
  std::optional<std::uint64_t> seed;
  std::string solvers;
  std::vector<std::string> overrides;
  int jobs = 1;
  bool quiet = false;
};

int cmd_run(const RunArgs& a) {
  bench::BenchmarkPlan plan;
  try {
    plan = a.plan.empty() ? bench::default_plan() : bench::load_plan(a.plan);
    if (a.seed) plan.master_seed = *a.seed;
    if (!a.solvers.empty()) bench::apply_setting(plan, "solvers", a.solvers);
    for (const auto& kv : a.overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw bench::PlanError(fmt::format("--set expects key=value, got '{}'", kv));
      bench::apply_setting(plan, kv.substr(0, eq), kv.substr(eq + 1));
    }
    plan.validate();
  } catch (const bench::PlanError& e) {
    std::cerr << "invalid plan: " << e.what() << '\n';
    return kInvalid;
  }

  bench::PlanResult result;
  try {
    result = bench::run_plan(plan, a.out, a.jobs, a.quiet ? nullptr : &std::cerr);
  } catch (const bench::PlanError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  bench::write_summary_csv(std::cout, result.summary);
  if (!result.failures.empty()) {
    std::cerr << fmt::format("{} of {} runs failed:\n", result.failures.size(), result.runs);
    for (const auto& f : result.failures) std::cerr << "  " << f.run << ": " << f.reason << '\n';
    return kRunFailures;
  }
  return kOk;
}

// Accept either a run's output directory or its traces/ subdirectory.
std::filesystem::path trace_dir(const std::string& dir) {
  const std::filesystem::path sub = std::filesystem::path(dir) / "traces";
  return std::filesystem::is_directory(sub) ? sub : std::filesystem::path(dir);
}

int cmd_verify(const std::string& dir) {
  bench::VerifyReport rep;
  try {
    rep = bench::verify_traces(trace_dir(dir));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  for (const auto& v : rep.violations) std::cout << v.trace << ": " << v.what << '\n';
  std::cout << fmt::format("{} traces, {} violations\n", rep.traces, rep.violations.size());
  return rep.ok() ? kOk : kRunFailures;
}

int cmd_summarize(const std::string& dir, const std::string& output) {
  std::vector<racr::RunTrace> traces;
  try {
    traces = bench::load_traces(trace_dir(dir));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  const auto rows = bench::summarize(traces);
  if (output.empty() || output == "-") {
    bench::write_summary_csv(std::cout, rows);
  } else {
    std::ofstream out(output);
    if (!out) {
      std::cerr << "cannot write " << output << '\n';
      return kInvalid;
    }
    bench::write_summary_csv(out, rows);
  }
  return kOk;
}

int cmd_generate(std::size_t n, long d, long r, std::uint64_t seed, double noise, const std::string& output) {
  try {
    const auto inst = racr::jd::generate(n, d, r, seed, noise);
    std::ofstream out(output);
    if (!out) {
      std::cerr << "cannot write " << output << '\n';
      return kInvalid;
    }
    racr::jd::write_instance(out, inst);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sub-sampled Riemannian cubic regularization benchmarks on joint diagonalization"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Execute a benchmark plan");
  run_cmd->add_option("--plan", run.plan, "Plan file (default: built-in desk plan)")->check(CLI::ExistingFile);
  run_cmd->add_option("--out", run.out, "Output directory")->capture_default_str();
  run_cmd->add_option("--seed", run.seed, "Master seed");
  run_cmd->add_option("--solvers", run.solvers, "Comma-separated subset of RACR,SRACR,SSRACR,SSRTR");
  run_cmd->add_option("--set", run.overrides, "Override a plan or solver setting, key=value (repeatable)");
  run_cmd->add_option("-j,--jobs", run.jobs, "Concurrent runs")->check(CLI::PositiveNumber)->capture_default_str();
  run_cmd->add_flag("-q,--quiet", run.quiet, "No per-run progress on stderr");

  std::string verify_dir;
  auto* verify_cmd = app.add_subcommand("verify", "Replay trace laws over stored traces");
  verify_cmd->add_option("--dir", verify_dir, "Run output or trace directory")->required();

  std::string sum_dir, sum_out;
  auto* sum_cmd = app.add_subcommand("summarize", "Recompute the summary from stored traces");
  sum_cmd->add_option("--dir", sum_dir, "Run output or trace directory")->required();
  sum_cmd->add_option("-o,--output", sum_out, "Summary CSV (default: stdout)");

  std::size_t gen_n = 500;
  long gen_d = 5, gen_r = 5;
  std::uint64_t gen_seed = 1;
  double gen_noise = 0.02;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("generate", "Write a JD instance file");
  gen_cmd->add_option("-n", gen_n, "Matrix count")->capture_default_str();
  gen_cmd->add_option("-d", gen_d, "Matrix size")->capture_default_str();
  gen_cmd->add_option("-r", gen_r, "Columns of U")->capture_default_str();
  gen_cmd->add_option("--seed", gen_seed)->capture_default_str();
  gen_cmd->add_option("--noise", gen_noise)->capture_default_str();
  gen_cmd->add_option("-o,--output", gen_out, "Instance file")->required();

  std::string keys;
  for (const auto& k : bench::setting_keys()) keys += (keys.empty() ? "" : ", ") + k;
  app.footer("Setting keys: " + keys);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInvalid;
  }

  if (*run_cmd) return cmd_run(run);
  if (*verify_cmd) return cmd_verify(verify_dir);
  if (*sum_cmd) return cmd_summarize(sum_dir, sum_out);
  if (*gen_cmd) return cmd_generate(gen_n, gen_d, gen_r, gen_seed, gen_noise, gen_out);
  return kInvalid;
}
