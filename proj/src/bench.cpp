#include "racr/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "racr/rng.hpp"
#include "racr/trust_region.hpp"

namespace racr::bench {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw PlanError(fmt::format("{}: '{}' is not a number", key, v));
  return out;
}

std::uint64_t parse_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw PlanError(fmt::format("{}: '{}' is not a nonnegative integer", key, v));
  return out;
}

std::vector<std::string_view> split_any(std::string_view s, std::string_view seps) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && seps.find(s[i]) != std::string_view::npos) ++i;
    std::size_t j = i;
    while (j < s.size() && seps.find(s[j]) == std::string_view::npos) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::size_t variant_rank(std::string_view name) {
  try {
    return static_cast<std::size_t>(parse_variant(name));
  } catch (const std::invalid_argument&) {
    return 99;
  }
}

std::string meta_or(const RunTrace& t, const char* key, std::string fallback = {}) {
  auto it = t.meta.find(key);
  return it == t.meta.end() ? fallback : it->second;
}

}  // namespace

std::string Case::id() const { return fmt::format("n{}_d{}_r{}", n, d, r); }

SolverConfig BenchmarkPlan::default_config() {
  SolverConfig cfg;
  cfg.sigma0 = 0.001;
  cfg.rho_th = 0.9;
  cfg.gamma = 2.0;
  cfg.delta0 = 1.0;
  cfg.stopping = StoppingRule::grad_squared(0.001);
  cfg.max_iters = 5000;
  return cfg;
}

std::size_t BenchmarkPlan::grad_sample(std::size_t n) const {
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(grad_fraction * static_cast<double>(n))), 1, n);
}

std::size_t BenchmarkPlan::hess_sample(std::size_t n) const {
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(hess_fraction * static_cast<double>(n))), 1, n);
}

void BenchmarkPlan::validate() const {
  if (cases.empty()) throw PlanError("plan has no cases");
  if (solvers.empty()) throw PlanError("plan has an empty solver set");
  if (repetitions < 1) throw PlanError("repetitions must be at least 1");
  for (const auto& c : cases)
    if (c.n < 1 || c.r < 1 || c.d < c.r) throw PlanError(fmt::format("invalid case ({}, {}, {})", c.n, c.d, c.r));
  if (!(grad_fraction > 0.0 && grad_fraction <= 1.0)) throw PlanError("grad_fraction must lie in (0, 1]");
  if (!(hess_fraction > 0.0 && hess_fraction <= 1.0)) throw PlanError("hess_fraction must lie in (0, 1]");
  if (!(noise >= 0.0)) throw PlanError("noise must be nonnegative");
  try {
    config.validate();
  } catch (const ContractViolation& e) {
    throw PlanError(e.what());
  }
}

BenchmarkPlan default_plan() {
  BenchmarkPlan plan;
  plan.cases = {{500, 5, 5}, {500, 10, 10}, {2015, 5, 5}};
  plan.repetitions = 3;
  return plan;
}

std::vector<std::string> setting_keys() {
  return {"solvers",  "repetitions", "master_seed", "noise",      "grad_fraction", "hess_fraction", "kernels",
          "sigma0",   "sigma_floor", "rho_th",      "gamma",      "delta0",        "delta_max",     "tau",
          "stopping", "eps_g",       "eps_H",       "max_iters",  "eigencheck",    "refine_steps",  "lanczos_tol"};
}

void apply_setting(BenchmarkPlan& plan, std::string_view key, std::string_view raw) {
  const std::string_view v = trim(raw);
  SolverConfig& cfg = plan.config;
  if (key == "solvers") {
    plan.solvers.clear();
    for (auto name : split_any(v, ", ")) {
      try {
        plan.solvers.push_back(parse_variant(name));
      } catch (const std::invalid_argument& e) {
        throw PlanError(e.what());
      }
    }
  } else if (key == "repetitions") {
    plan.repetitions = parse_uint(key, v);
  } else if (key == "master_seed") {
    plan.master_seed = parse_uint(key, v);
  } else if (key == "noise") {
    plan.noise = parse_double(key, v);
  } else if (key == "grad_fraction") {
    plan.grad_fraction = parse_double(key, v);
  } else if (key == "hess_fraction") {
    plan.hess_fraction = parse_double(key, v);
  } else if (key == "kernels") {
    if (v == "serial")
      plan.backend = jd::kernels::Backend::Serial;
    else if (v == "openmp")
      plan.backend = jd::kernels::Backend::OpenMP;
    else
      throw PlanError(fmt::format("kernels: expected serial or openmp, got '{}'", v));
  } else if (key == "sigma0") {
    cfg.sigma0 = parse_double(key, v);
  } else if (key == "sigma_floor") {
    cfg.sigma_floor = parse_double(key, v);
  } else if (key == "rho_th") {
    cfg.rho_th = parse_double(key, v);
  } else if (key == "gamma") {
    cfg.gamma = parse_double(key, v);
  } else if (key == "delta0") {
    cfg.delta0 = parse_double(key, v);
  } else if (key == "delta_max") {
    cfg.delta_max = parse_double(key, v);
  } else if (key == "tau") {
    cfg.stopping.tau = parse_double(key, v);
  } else if (key == "stopping") {
    if (v == "grad-squared")
      cfg.stopping.kind = StoppingRule::Kind::GradSquaredThreshold;
    else if (v == "optimality")
      cfg.stopping.kind = StoppingRule::Kind::SecondOrder;
    else
      throw PlanError(fmt::format("stopping: expected grad-squared or optimality, got '{}'", v));
  } else if (key == "eps_g") {
    cfg.eps_g = parse_double(key, v);
  } else if (key == "eps_H") {
    cfg.eps_H = parse_double(key, v);
  } else if (key == "max_iters") {
    cfg.max_iters = parse_uint(key, v);
  } else if (key == "eigencheck") {
    if (v == "every")
      cfg.eigencheck = EigencheckPolicy::EveryIteration;
    else if (v == "small-gradient")
      cfg.eigencheck = EigencheckPolicy::OnSmallGradient;
    else
      throw PlanError(fmt::format("eigencheck: expected every or small-gradient, got '{}'", v));
  } else if (key == "refine_steps") {
    const auto s = parse_uint(key, v);
    if (s > 20) throw PlanError("refine_steps must be at most 20");
    cfg.subsolver.refine_steps = static_cast<int>(s);
  } else if (key == "lanczos_tol") {
    cfg.subsolver.lanczos.tol = parse_double(key, v);
  } else {
    throw PlanError(fmt::format("unknown setting '{}'", key));
  }
}

BenchmarkPlan parse_plan(std::istream& is) {
  BenchmarkPlan plan;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::string_view s = line;
    if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw PlanError(fmt::format("line {}: expected 'key = value'", line_no));
    const auto key = trim(s.substr(0, eq));
    const auto value = trim(s.substr(eq + 1));
    try {
      if (key == "case") {
        const auto parts = split_any(value, " \t,()");
        if (parts.size() != 3) throw PlanError("case needs three integers n d r");
        plan.cases.push_back({parse_uint("n", parts[0]), static_cast<Eigen::Index>(parse_uint("d", parts[1])),
                              static_cast<Eigen::Index>(parse_uint("r", parts[2]))});
      } else {
        apply_setting(plan, key, value);
      }
    } catch (const PlanError& e) {
      throw PlanError(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  plan.validate();
  return plan;
}

BenchmarkPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PlanError(fmt::format("cannot open plan file {}", path.string()));
  return parse_plan(in);
}

std::string RunSpec::file_name() const {
  return fmt::format("{}__{}__rep{}.csv", c.id(), to_string(solver), repetition);
}

std::vector<RunSpec> expand(const BenchmarkPlan& plan) {
  std::vector<RunSpec> out;
  for (std::size_t ci = 0; ci < plan.cases.size(); ++ci) {
    const std::uint64_t case_key = rng::derive(plan.master_seed, ci, "case");
    for (std::size_t rep = 0; rep < plan.repetitions; ++rep) {
      const std::uint64_t inst_seed = rng::derive(case_key, rep, "instance");
      const std::uint64_t start_seed = rng::derive(case_key, rep, "start");
      for (Variant v : plan.solvers) {
        RunSpec s;
        s.case_index = ci;
        s.c = plan.cases[ci];
        s.solver = v;
        s.repetition = rep;
        s.instance_seed = inst_seed;
        s.start_seed = start_seed;
        s.solver_seed = rng::derive(inst_seed, static_cast<std::uint64_t>(v), "solver");
        out.push_back(s);
      }
    }
  }
  return out;
}

RunTrace run_one(const BenchmarkPlan& plan, const RunSpec& spec, const std::shared_ptr<const jd::Instance>& inst) {
  const jd::Objective objective(inst, plan.backend);
  const ManifoldPoint x0 = objective.manifold().random_point(spec.start_seed);
  SolverConfig cfg = configure_variant(plan.config, spec.solver);
  cfg.seed = spec.solver_seed;
  cfg.grad_sample = plan.grad_sample(spec.c.n);
  cfg.hess_sample = plan.hess_sample(spec.c.n);
  RunTrace trace =
      spec.solver == Variant::SSRTR ? run_trust_region(objective, x0, cfg) : run_arc(objective, x0, cfg);
  trace.meta["case"] = spec.c.id();
  trace.meta["case_index"] = std::to_string(spec.case_index);
  trace.meta["solver"] = std::string(to_string(spec.solver));
  trace.meta["repetition"] = std::to_string(spec.repetition);
  trace.meta["instance_seed"] = std::to_string(spec.instance_seed);
  trace.meta["noise"] = fmt::format("{:.17g}", plan.noise);
  return trace;
}

std::vector<SummaryRow> summarize(const std::vector<RunTrace>& traces) {
  struct Group {
    std::size_t case_index;
    std::size_t solver_rank;
    std::string case_id;
    std::string solver;
    std::vector<const RunTrace*> runs;
  };
  std::map<std::pair<std::string, std::string>, Group> groups;
  for (const auto& t : traces) {
    const std::string case_id = meta_or(t, "case", "?");
    const std::string solver = meta_or(t, "solver", "?");
    auto& g = groups[{case_id, solver}];
    g.case_id = case_id;
    g.solver = solver;
    g.case_index = std::stoull(meta_or(t, "case_index", "0"));
    g.solver_rank = variant_rank(solver);
    g.runs.push_back(&t);
  }
  std::vector<Group*> ordered;
  for (auto& [key, g] : groups) ordered.push_back(&g);
  std::sort(ordered.begin(), ordered.end(), [](const Group* a, const Group* b) {
    return std::tie(a->case_index, a->case_id, a->solver_rank, a->solver) <
           std::tie(b->case_index, b->case_id, b->solver_rank, b->solver);
  });

  std::vector<SummaryRow> rows;
  for (const Group* g : ordered) {
    SummaryRow row;
    row.case_id = g->case_id;
    row.solver = g->solver;
    row.runs = g->runs.size();
    std::vector<double> iters;
    double time_sum = 0.0;
    std::size_t reached = 0;
    for (const RunTrace* t : g->runs) {
      iters.push_back(static_cast<double>(t->iterations()));
      time_sum += t->total_millis() / 1000.0;
      if (t->outcome == Outcome::OptimalityReached) ++reached;
      row.grad_evals += t->final_grad_evals;
      row.hess_evals += t->final_hess_evals;
    }
    double iter_sum = 0.0;
    for (double v : iters) iter_sum += v;
    std::sort(iters.begin(), iters.end());
    const std::size_t m = iters.size();
    row.mean_iters = iter_sum / static_cast<double>(m);
    row.median_iters = m % 2 ? iters[m / 2] : 0.5 * (iters[m / 2 - 1] + iters[m / 2]);
    row.mean_time_s = time_sum / static_cast<double>(m);
    row.success_rate = static_cast<double>(reached) / static_cast<double>(m);
    rows.push_back(row);
  }
  return rows;
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "case,solver,runs,mean_iters,median_iters,mean_time_s,success_rate,grad_evals,hess_evals\n";
  for (const auto& r : rows)
    os << fmt::format("{},{},{},{:.3f},{:.1f},{:.6f},{:.4f},{},{}\n", r.case_id, r.solver, r.runs, r.mean_iters,
                      r.median_iters, r.mean_time_s, r.success_rate, r.grad_evals, r.hess_evals);
}

std::vector<SummaryRow> read_summary_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) ||
      line != "case,solver,runs,mean_iters,median_iters,mean_time_s,success_rate,grad_evals,hess_evals")
    throw TraceFormatError("summary has an unexpected header");
  std::vector<SummaryRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_any(line, ",");
    if (f.size() != 9) throw TraceFormatError(fmt::format("summary row '{}' has {} fields", line, f.size()));
    SummaryRow r;
    r.case_id = std::string(f[0]);
    r.solver = std::string(f[1]);
    r.runs = parse_uint("runs", f[2]);
    r.mean_iters = parse_double("mean_iters", f[3]);
    r.median_iters = parse_double("median_iters", f[4]);
    r.mean_time_s = parse_double("mean_time_s", f[5]);
    r.success_rate = parse_double("success_rate", f[6]);
    r.grad_evals = parse_uint("grad_evals", f[7]);
    r.hess_evals = parse_uint("hess_evals", f[8]);
    rows.push_back(r);
  }
  return rows;
}

std::vector<std::filesystem::path> trace_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir)) throw TraceFormatError(fmt::format("{} is not a directory", dir.string()));
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<RunTrace> load_traces(const std::filesystem::path& dir) {
  std::vector<RunTrace> out;
  for (const auto& p : trace_files(dir)) {
    std::ifstream in(p);
    try {
      out.push_back(read_trace_csv(in));
    } catch (const TraceFormatError& e) {
      throw TraceFormatError(fmt::format("{}: {}", p.filename().string(), e.what()));
    }
  }
  return out;
}

PlanResult run_plan(const BenchmarkPlan& plan, const std::filesystem::path& out_dir, int jobs, std::ostream* log) {
  plan.validate();
  const auto trace_dir = out_dir / "traces";
  std::error_code ec;
  std::filesystem::create_directories(trace_dir, ec);
  if (ec) throw PlanError(fmt::format("cannot create {}: {}", trace_dir.string(), ec.message()));
  {
    std::ofstream probe(out_dir / "summary.csv");
    if (!probe) throw PlanError(fmt::format("{} is not writable", out_dir.string()));
  }
  for (const auto& p : trace_files(trace_dir)) std::filesystem::remove(p);

  const std::vector<RunSpec> specs = expand(plan);
  std::map<std::pair<std::size_t, std::size_t>, std::shared_ptr<const jd::Instance>> instances;
  for (const auto& s : specs) {
    auto& slot = instances[{s.case_index, s.repetition}];
    if (!slot) slot = std::make_shared<const jd::Instance>(jd::generate(s.c.n, s.c.d, s.c.r, s.instance_seed, plan.noise));
  }

  PlanResult result;
  result.runs = specs.size();
  std::vector<std::string> errors(specs.size());
  const auto count = static_cast<std::ptrdiff_t>(specs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, jobs)) if (jobs > 1)
  for (std::ptrdiff_t idx = 0; idx < count; ++idx) {
    const RunSpec& spec = specs[static_cast<std::size_t>(idx)];
    try {
      const RunTrace trace = run_one(plan, spec, instances.at({spec.case_index, spec.repetition}));
      std::ofstream out(trace_dir / spec.file_name());
      write_trace_csv(out, trace);
      if (!out) throw std::runtime_error("write failed");
      if (trace.outcome == Outcome::NumericalFailure)
        errors[static_cast<std::size_t>(idx)] = std::string(to_string(trace.outcome));
      if (log) {
#pragma omp critical(racr_bench_log)
        *log << fmt::format("{:<16} {:<6} rep {}  iters {:>5}  {}\n", spec.c.id(), to_string(spec.solver),
                            spec.repetition, trace.iterations(), to_string(trace.outcome));
      }
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(idx)] = e.what();
    }
  }
  for (std::size_t i = 0; i < specs.size(); ++i)
    if (!errors[i].empty()) result.failures.push_back({specs[i].file_name(), errors[i]});

  result.summary = summarize(load_traces(trace_dir));
  std::ofstream summary(out_dir / "summary.csv");
  write_summary_csv(summary, result.summary);
  return result;
}

VerifyReport verify_trace(const RunTrace& t, const std::string& name) {
  VerifyReport rep;
  rep.traces = 1;
  auto flag = [&](std::string what) { rep.violations.push_back({name, std::move(what)}); };
  auto meta_double = [&](const char* key) -> std::optional<double> {
    auto it = t.meta.find(key);
    if (it == t.meta.end()) {
      flag(fmt::format("missing meta '{}'", key));
      return std::nullopt;
    }
    return std::strtod(it->second.c_str(), nullptr);
  };

  const auto& R = t.records;
  std::size_t succ = 0;
  for (std::size_t i = 0; i < R.size(); ++i) {
    if (R[i].k != i) flag(fmt::format("record {} has k = {}", i, R[i].k));
    if (R[i].success) ++succ;
  }
  if (succ != t.n_succ || R.size() - succ != t.n_fail)
    flag(fmt::format("n_succ/n_fail = {}/{} but records show {}/{}", t.n_succ, t.n_fail, succ, R.size() - succ));

  const auto gamma = meta_double("gamma");
  const auto rho_th = meta_double("rho_th");
  if (gamma && !R.empty()) {
    if (t.kind == TraceKind::CubicRegularization) {
      const auto sigma0 = meta_double("sigma0");
      const auto floor = meta_double("sigma_floor");
      if (sigma0 && R.front().sigma != *sigma0) flag(fmt::format("sigma_0 = {} but meta sigma0 = {}", R.front().sigma, *sigma0));
      if (floor)
        for (std::size_t i = 0; i + 1 < R.size(); ++i) {
          const double expect = R[i].success ? std::max(R[i].sigma / *gamma, *floor) : *gamma * R[i].sigma;
          if (R[i + 1].sigma != expect)
            flag(fmt::format("sigma recurrence broken at k={}: expected {:.17g}, found {:.17g}", i + 1, expect,
                             R[i + 1].sigma));
        }
    } else {
      const auto delta0 = meta_double("delta0");
      const auto dmax = meta_double("delta_max");
      if (delta0 && R.front().sigma != *delta0) flag(fmt::format("Delta_0 = {} but meta delta0 = {}", R.front().sigma, *delta0));
      if (dmax)
        for (std::size_t i = 0; i + 1 < R.size(); ++i) {
          const double expect = update_radius(R[i].sigma, R[i].success, *gamma, *dmax);
          if (R[i + 1].sigma != expect)
            flag(fmt::format("radius rule broken at k={}: expected {:.17g}, found {:.17g}", i + 1, expect,
                             R[i + 1].sigma));
        }
    }
  }

  for (std::size_t i = 0; i < R.size(); ++i) {
    if (!(R[i].model_value < 0.0)) flag(fmt::format("k={}: model value {} is not negative", i, R[i].model_value));
    if (rho_th && (R[i].rho >= *rho_th) != R[i].success)
      flag(fmt::format("k={}: success flag disagrees with rho = {}", i, R[i].rho));
    if (i + 1 < R.size()) {
      if (R[i].success && !(R[i + 1].f < R[i].f)) flag(fmt::format("k={}: accepted step did not decrease f", i));
      if (!R[i].success && R[i + 1].f != R[i].f) flag(fmt::format("k={}: rejected step changed f", i));
    }
  }

  auto it = t.meta.find("grad_sample");
  auto ht = t.meta.find("hess_sample");
  if (it == t.meta.end() || ht == t.meta.end()) {
    flag("missing sample-size meta");
  } else {
    const std::uint64_t g = std::stoull(it->second);
    const std::uint64_t h = std::stoull(ht->second);
    std::uint64_t prev_h = 0;
    for (std::size_t i = 0; i < R.size(); ++i) {
      if (R[i].grad_evals != (i + 1) * g)
        flag(fmt::format("k={}: grad_evals = {} but {} iterations of |S_g| = {} give {}", i, R[i].grad_evals, i + 1, g,
                         (i + 1) * g));
      if (R[i].hess_evals < prev_h || (h > 0 && (R[i].hess_evals - prev_h) % h != 0))
        flag(fmt::format("k={}: hess_evals increment {} is not a multiple of |S_H| = {}", i,
                         static_cast<long long>(R[i].hess_evals) - static_cast<long long>(prev_h), h));
      prev_h = R[i].hess_evals;
    }
    const std::uint64_t expect_final = R.size() * g + (t.outcome == Outcome::MaxIters ? 0 : g);
    if (t.final_grad_evals != expect_final)
      flag(fmt::format("final_grad_evals = {} but expected {}", t.final_grad_evals, expect_final));
    if (t.final_hess_evals < prev_h) flag("final_hess_evals is below the last recorded value");
  }
  return rep;
}

VerifyReport verify_traces(const std::filesystem::path& dir) {
  VerifyReport rep;
  for (const auto& p : trace_files(dir)) {
    ++rep.traces;
    std::ifstream in(p);
    try {
      const RunTrace t = read_trace_csv(in);
      auto one = verify_trace(t, p.filename().string());
      rep.violations.insert(rep.violations.end(), one.violations.begin(), one.violations.end());
    } catch (const TraceFormatError& e) {
      rep.violations.push_back({p.filename().string(), fmt::format("schema error: {}", e.what())});
    }
  }
  return rep;
}

std::string strip_timing(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') {
      const auto pos = line.rfind(',');
      if (pos != std::string::npos) line.resize(pos);
    }
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace racr::bench
