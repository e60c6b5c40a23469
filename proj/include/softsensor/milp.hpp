#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "softsensor/lp.hpp"

namespace softsensor {

/// A linear program in which the listed variables must take values in {0, 1}.
struct MixedIntegerProgram {
  LinearProgram base;
  std::vector<std::size_t> binary_vars;

  void validate() const;
};

struct MipLimits {
  double time_limit_s = 3600.0;
  double gap_target = 1e-6;
  std::size_t node_cap = 200000;
};

struct MipOptions {
  MipLimits limits;
  /// Depth-first dive after every this many best-bound nodes.
  std::size_t dive_every = 10;
  /// Optional known feasible point, used as the first incumbent if it
  /// checks out against every row, bound and integrality requirement.
  std::optional<Vector> initial_solution;
  /// Progress lines go here every `log_interval` nodes when non-null.
  std::ostream* log = nullptr;
  std::size_t log_interval = 1000;
};

/// Optimal: gap ≤ gap_target or the tree was exhausted with an incumbent.
/// Feasible: node cap reached. TimedOut: time limit reached. In both limit
/// cases `has_solution` tells whether an incumbent exists.
enum class MipStatus { Optimal, Feasible, Infeasible, TimedOut };

std::string to_string(MipStatus s);

struct MipResult {
  MipStatus status = MipStatus::Infeasible;
  bool has_solution = false;
  Vector values;
  double objective_value = kInf;
  double best_bound = -kInf;
  /// (incumbent − bound) / max(1, |incumbent|); infinite without incumbent.
  double gap = kInf;
  std::size_t nodes_explored = 0;
  std::size_t lp_iterations = 0;
  double elapsed_s = 0.0;
};

/// Best-bound branch-and-bound with periodic dives. Deterministic node order.
MipResult solve_milp(const MixedIntegerProgram& prob, const MipOptions& options = {});

/// Largest violation of rows, bounds, and binary integrality at `values`.
double max_violation(const MixedIntegerProgram& prob, const Vector& values);

/// One-line machine-readable summary (JSON object, schema 1).
std::string mip_summary_json(const MipResult& result);

}  // namespace softsensor
