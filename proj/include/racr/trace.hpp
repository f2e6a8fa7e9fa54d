#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "racr/manifold.hpp"

namespace racr {

enum class Outcome { OptimalityReached, MaxIters, SubsolverFailure, NumericalFailure };

std::string_view to_string(Outcome outcome);
Outcome parse_outcome(std::string_view text);

/// Which adaptive parameter the `sigma` field carries.
enum class TraceKind { CubicRegularization, TrustRegion };

struct IterationRecord {
  std::uint64_t k = 0;
  double f = 0.0;          // f(x_k), exact
  double grad_norm = 0.0;  // ||G_k||
  double sigma = 0.0;      // sigma_k, or Delta_k for trust region
  double model_value = 0.0;
  double rho = 0.0;
  bool success = false;
  std::optional<double> lambda_min;
  std::uint64_t grad_evals = 0;  // cumulative, after this iteration
  std::uint64_t hess_evals = 0;  // cumulative, after this iteration
  double millis = 0.0;

  // Diagnostics kept in memory only.
  double step_norm = 0.0;
  bool sigma_clamped = false;  // sigma_{k+1} hit the floor
  std::optional<double> lipschitz_sample;
};

struct RunTrace {
  TraceKind kind = TraceKind::CubicRegularization;
  std::vector<IterationRecord> records;
  Outcome outcome = Outcome::MaxIters;
  std::size_t n_succ = 0;
  std::size_t n_fail = 0;
  std::uint64_t final_grad_evals = 0;
  std::uint64_t final_hess_evals = 0;
  /// Free-form run parameters written as "# key=value" lines (gamma, sigma0, ...).
  std::map<std::string, std::string> meta;
  /// Last iterate (not serialized).
  ManifoldPoint final_point;

  std::size_t iterations() const { return records.size(); }
  double total_millis() const;
};

class TraceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fixed column order of the trace CSV; `sigma` reads `delta` for trust region.
std::vector<std::string> trace_columns(TraceKind kind);

/// Writes meta lines, the header, one row per record, then the outcome trailer.
void write_trace_csv(std::ostream& os, const RunTrace& trace);
RunTrace read_trace_csv(std::istream& is);

}  // namespace racr
