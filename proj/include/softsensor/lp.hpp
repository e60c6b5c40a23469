#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "softsensor/linalg.hpp"

namespace softsensor {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { LessEqual, Equal, GreaterEqual };

struct SparseEntry {
  std::size_t index;
  double value;
};

struct Constraint {
  std::vector<SparseEntry> row;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

/// min cᵀv subject to row constraints and per-variable bounds.
struct LinearProgram {
  Vector objective;
  std::vector<Constraint> constraints;
  Vector lower;
  Vector upper;

  std::size_t num_vars() const noexcept { return objective.size(); }
  std::size_t num_constraints() const noexcept { return constraints.size(); }

  /// Appends a variable and returns its index.
  std::size_t add_variable(double lo, double hi, double cost = 0.0);
  void add_constraint(std::vector<SparseEntry> row, Sense sense, double rhs);

  /// Throws a validation error describing the first malformed item.
  void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

std::string to_string(LpStatus s);

/// Status of each column in the computational form: structural variables
/// first, then one logical (row activity) variable per constraint.
enum class VarStatus : std::uint8_t { Basic, AtLower, AtUpper, Free };

struct Basis {
  std::vector<VarStatus> status;
  bool empty() const noexcept { return status.empty(); }
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Vector values;
  double objective_value = 0.0;
  /// One multiplier per constraint, with c = Aᵀy + d at optimality.
  Vector dual_values;
  /// Reduced costs of the structural variables.
  Vector reduced_costs;
  /// yᵀrhs plus the bound contributions of nonbasic variables.
  double dual_objective = 0.0;
  Basis basis;
  std::size_t iterations = 0;
};

struct LpOptions {
  /// 0 selects 50·(n_v + n_constraints).
  std::size_t max_iterations = 0;
  std::size_t bland_after_degenerate = 1000;
  double primal_tol = 1e-7;
  double dual_tol = 1e-7;
  std::size_t refactor_interval = 100;
};

/// Revised simplex over bounded variables. The optional basis warm-starts
/// the solve; results never depend on it beyond tie-breaking.
LpSolution solve_lp(const LinearProgram& prob, const Basis* warm = nullptr,
                    const LpOptions& options = {});

/// Writes the instance in a fixed-order text format, one constraint per line.
void write_lp_text(const LinearProgram& prob, std::ostream& out);

/// Stateful simplex solver. Keeps its factorization between solves so that
/// bound changes followed by a re-solve only cost a few dual pivots.
class SimplexEngine {
 public:
  explicit SimplexEngine(const LinearProgram& prob, LpOptions options = {});

  std::size_t num_structural() const noexcept { return n_; }
  std::size_t num_rows() const noexcept { return m_; }

  void set_bounds(std::size_t var, double lo, double hi);
  /// Restores every structural bound to its value in the original program.
  void reset_bounds();
  void load_basis(const Basis& basis);
  Basis basis() const;

  LpSolution solve();

 private:
  enum class Phase { One, Two };
  enum class Outcome { Optimal, Infeasible, Unbounded, Continue };

  void build_columns(const LinearProgram& prob);
  void place_nonbasic(std::size_t j);
  void refactor();
  void slack_basis();
  void compute_primal();
  void compute_duals(Phase phase);
  bool primal_feasible() const;
  double infeasibility(std::size_t j) const;
  bool dual_feasible() const;
  void flip_for_dual_feasibility();
  Vector ftran(std::size_t j) const;
  void pivot(std::size_t row, std::size_t entering, const Vector& alpha);
  Outcome primal_iteration(Phase phase);
  Outcome dual_iteration();
  LpSolution extract(LpStatus status) const;
  void count_iteration(double step);

  LpOptions opts_;
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  // Column-wise storage of [A | -I].
  std::vector<std::vector<SparseEntry>> cols_;
  Vector cost_;
  Vector lo_, up_;
  Vector orig_lo_, orig_up_;
  std::vector<VarStatus> status_;
  std::vector<std::size_t> head_;   // basic variable at each basis position
  std::vector<std::ptrdiff_t> pos_;  // basis position or -1
  Vector x_;
  Vector y_;
  Vector d_;
  DenseMatrix binv_;
  bool factored_ = false;
  std::size_t since_refactor_ = 0;
  std::size_t iterations_ = 0;
  std::size_t max_iterations_ = 0;
  std::size_t degenerate_ = 0;
  bool bland_ = false;
};

}  // namespace softsensor
