#include "racr/trace.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace racr {

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::OptimalityReached:
      return "OptimalityReached";
    case Outcome::MaxIters:
      return "MaxIters";
    case Outcome::SubsolverFailure:
      return "SubsolverFailure";
    case Outcome::NumericalFailure:
      return "NumericalFailure";
  }
  return "?";
}

Outcome parse_outcome(std::string_view text) {
  for (Outcome o : {Outcome::OptimalityReached, Outcome::MaxIters, Outcome::SubsolverFailure, Outcome::NumericalFailure})
    if (text == to_string(o)) return o;
  throw TraceFormatError(fmt::format("unknown outcome '{}'", text));
}

double RunTrace::total_millis() const {
  double s = 0.0;
  for (const auto& r : records) s += r.millis;
  return s;
}

std::vector<std::string> trace_columns(TraceKind kind) {
  return {"k",   "f",       "grad_norm",  kind == TraceKind::TrustRegion ? "delta" : "sigma",
          "model_val", "rho", "success", "lambda_min", "grad_evals", "hess_evals", "millis"};
}

namespace {

std::string join(const std::vector<std::string>& cols) {
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  return out;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double to_double(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw TraceFormatError(fmt::format("line {}: '{}' is not a number", line_no, s));
  return v;
}

std::uint64_t to_uint(std::string_view s, std::size_t line_no) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw TraceFormatError(fmt::format("line {}: '{}' is not an unsigned integer", line_no, s));
  return v;
}

}  // namespace

void write_trace_csv(std::ostream& os, const RunTrace& trace) {
  auto meta = trace.meta;
  meta["kind"] = trace.kind == TraceKind::TrustRegion ? "trust-region" : "cubic";
  meta["outcome"] = std::string(to_string(trace.outcome));
  meta["n_succ"] = std::to_string(trace.n_succ);
  meta["n_fail"] = std::to_string(trace.n_fail);
  meta["final_grad_evals"] = std::to_string(trace.final_grad_evals);
  meta["final_hess_evals"] = std::to_string(trace.final_hess_evals);
  for (const auto& [key, value] : meta) os << "# " << key << '=' << value << '\n';
  os << join(trace_columns(trace.kind)) << '\n';
  for (const auto& r : trace.records) {
    os << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{},{},{},{:.3f}\n", r.k, r.f, r.grad_norm,
                      r.sigma, r.model_value, r.rho, r.success ? 1 : 0,
                      r.lambda_min ? fmt::format("{:.17g}", *r.lambda_min) : std::string(), r.grad_evals,
                      r.hess_evals, r.millis);
  }
}

RunTrace read_trace_csv(std::istream& is) {
  RunTrace trace;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto body = std::string_view(line).substr(line.size() > 1 && line[1] == ' ' ? 2 : 1);
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) throw TraceFormatError(fmt::format("line {}: malformed meta line", line_no));
      trace.meta[std::string(body.substr(0, eq))] = std::string(body.substr(eq + 1));
      continue;
    }
    if (!have_header) {
      if (line == join(trace_columns(TraceKind::CubicRegularization)))
        trace.kind = TraceKind::CubicRegularization;
      else if (line == join(trace_columns(TraceKind::TrustRegion)))
        trace.kind = TraceKind::TrustRegion;
      else
        throw TraceFormatError(fmt::format("line {}: unexpected header '{}'", line_no, line));
      have_header = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 11)
      throw TraceFormatError(fmt::format("line {}: expected 11 fields, found {}", line_no, f.size()));
    IterationRecord r;
    r.k = to_uint(f[0], line_no);
    r.f = to_double(f[1], line_no);
    r.grad_norm = to_double(f[2], line_no);
    r.sigma = to_double(f[3], line_no);
    r.model_value = to_double(f[4], line_no);
    r.rho = to_double(f[5], line_no);
    if (f[6] != "0" && f[6] != "1") throw TraceFormatError(fmt::format("line {}: success must be 0 or 1", line_no));
    r.success = f[6] == "1";
    if (!f[7].empty()) r.lambda_min = to_double(f[7], line_no);
    r.grad_evals = to_uint(f[8], line_no);
    r.hess_evals = to_uint(f[9], line_no);
    r.millis = to_double(f[10], line_no);
    trace.records.push_back(r);
  }
  if (!have_header) throw TraceFormatError("trace has no header row");

  auto take = [&](const char* key) -> std::string {
    auto it = trace.meta.find(key);
    if (it == trace.meta.end()) throw TraceFormatError(fmt::format("trace is missing '{}' meta line", key));
    std::string v = it->second;
    trace.meta.erase(it);
    return v;
  };
  const std::string kind = take("kind");
  if ((kind == "trust-region") != (trace.kind == TraceKind::TrustRegion))
    throw TraceFormatError("meta kind does not match header");
  trace.outcome = parse_outcome(take("outcome"));
  trace.n_succ = to_uint(take("n_succ"), 0);
  trace.n_fail = to_uint(take("n_fail"), 0);
  trace.final_grad_evals = to_uint(take("final_grad_evals"), 0);
  trace.final_hess_evals = to_uint(take("final_hess_evals"), 0);
  return trace;
}

}  // namespace racr
