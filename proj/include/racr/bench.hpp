#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "racr/arc.hpp"
#include "racr/jd.hpp"
#include "racr/trace.hpp"

namespace racr::bench {

class PlanError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Case {
  std::size_t n = 0;
  Eigen::Index d = 0;
  Eigen::Index r = 0;

  std::string id() const;
};

struct BenchmarkPlan {
  std::vector<Case> cases;
  std::vector<Variant> solvers{Variant::RACR, Variant::SRACR, Variant::SSRACR, Variant::SSRTR};
  std::size_t repetitions = 3;
  std::uint64_t master_seed = 1;
  double noise = 0.02;
  double grad_fraction = 0.25;   // |S_g| = ceil(n * grad_fraction)
  double hess_fraction = 0.025;  // |S_H| = ceil(n * hess_fraction)
  jd::kernels::Backend backend = jd::Objective::default_backend();
  SolverConfig config = default_config();

  /// sigma0 = 0.001, rho_th = 0.9, gamma = 2, Delta_0 = 1, stop at ||G||^2 <= 0.001.
  static SolverConfig default_config();

  std::size_t grad_sample(std::size_t n) const;
  std::size_t hess_sample(std::size_t n) const;

  /// Throws PlanError.
  void validate() const;
};

/// (500,5,5), (500,10,10), (2015,5,5), three repetitions.
BenchmarkPlan default_plan();

/// "key = value" lines, '#' comments, one "case = n d r" line per case.
BenchmarkPlan parse_plan(std::istream& is);
BenchmarkPlan load_plan(const std::filesystem::path& path);
/// Set one plan or solver field by its plan-file key. Throws PlanError.
void apply_setting(BenchmarkPlan& plan, std::string_view key, std::string_view value);
/// Plan-file keys understood by apply_setting (besides "case").
std::vector<std::string> setting_keys();

struct RunSpec {
  std::size_t case_index = 0;
  Case c;
  Variant solver = Variant::SSRACR;
  std::size_t repetition = 0;
  std::uint64_t instance_seed = 0;
  std::uint64_t start_seed = 0;
  std::uint64_t solver_seed = 0;

  std::string file_name() const;
};

/// Every (case, repetition, solver) with seeds derived from the master seed.
/// All solvers of one (case, repetition) share the instance and start point.
std::vector<RunSpec> expand(const BenchmarkPlan& plan);

/// Run one spec on a prepared instance.
RunTrace run_one(const BenchmarkPlan& plan, const RunSpec& spec, const std::shared_ptr<const jd::Instance>& inst);

struct SummaryRow {
  std::string case_id;
  std::string solver;
  std::size_t runs = 0;
  double mean_iters = 0.0;
  double median_iters = 0.0;
  double mean_time_s = 0.0;
  double success_rate = 0.0;
  std::uint64_t grad_evals = 0;
  std::uint64_t hess_evals = 0;
};

/// Aggregates by (case, solver) using the traces' case/solver meta lines.
std::vector<SummaryRow> summarize(const std::vector<RunTrace>& traces);
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> read_summary_csv(std::istream& is);

/// Trace files in dir (sorted by name).
std::vector<std::filesystem::path> trace_files(const std::filesystem::path& dir);
std::vector<RunTrace> load_traces(const std::filesystem::path& dir);

struct RunFailure {
  std::string run;
  std::string reason;
};

struct PlanResult {
  std::vector<SummaryRow> summary;
  std::vector<RunFailure> failures;
  std::size_t runs = 0;
};

/// Executes the plan, writes <out>/traces/*.csv and <out>/summary.csv. The
/// summary is computed from the trace files as written. `jobs` > 1 runs
/// independent specs concurrently.
PlanResult run_plan(const BenchmarkPlan& plan, const std::filesystem::path& out_dir, int jobs = 1,
                    std::ostream* log = nullptr);

struct Violation {
  std::string trace;
  std::string what;
};

struct VerifyReport {
  std::size_t traces = 0;
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Replays the trace laws: sigma (or Delta) recurrence, f monotone with strict
/// decrease on success, success/failure counts, oracle counter accounting.
VerifyReport verify_trace(const RunTrace& trace, const std::string& name);
/// Reads every trace in dir; unreadable traces are reported as violations.
VerifyReport verify_traces(const std::filesystem::path& dir);

/// Traces with the millis column dropped, for determinism comparisons.
std::string strip_timing(const std::string& trace_csv);

}  // namespace racr::bench
