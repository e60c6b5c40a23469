#pragma once

#include <cstddef>

#include "softsensor/linalg.hpp"
#include "softsensor/lp.hpp"

namespace softsensor {

/// min ½ vᵀQv + cᵀv + constant subject to linear rows and variable bounds.
struct QuadraticProgram {
  DenseMatrix q;
  Vector c;
  double constant = 0.0;
  std::vector<Constraint> constraints;
  Vector lower;
  Vector upper;

  explicit QuadraticProgram(std::size_t n = 0);

  std::size_t num_vars() const noexcept { return c.size(); }
  void add_constraint(std::vector<SparseEntry> row, Sense sense, double rhs);
  /// Checks shapes, symmetry and positive semidefiniteness (λ_min ≥ −1e−8).
  void validate() const;
};

enum class QpStatus { Optimal, Infeasible };

struct QpSolution {
  QpStatus status = QpStatus::Infeasible;
  Vector values;
  double objective_value = 0.0;
  /// Qv + c = Σ multipliers[i]·a_i + bound_multipliers. Rows written as ≥
  /// carry nonnegative multipliers, ≤ rows nonpositive; bound multipliers are
  /// nonnegative at a lower bound and nonpositive at an upper bound.
  Vector multipliers;
  Vector bound_multipliers;
  /// ‖Qv + c − Aᵀλ − μ‖∞ evaluated with the unlifted Q.
  double kkt_residual = 0.0;
  /// True when Q was singular and the solve used Q + 1e−9·I.
  bool lifted = false;
  std::size_t iterations = 0;
};

struct QpOptions {
  double feasibility_tol = 1e-7;
  double multiplier_tol = 1e-8;
  double lift = 1e-9;
  /// 0 selects 50·(n_v + n_constraints) + 100.
  std::size_t max_iterations = 0;
};

/// Primal active-set method. The starting point comes from a zero-cost LP
/// solve, so infeasible rows are reported as QpStatus::Infeasible.
QpSolution solve_qp(const QuadraticProgram& prob, const QpOptions& options = {});

}  // namespace softsensor
