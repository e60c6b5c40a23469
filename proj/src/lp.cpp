#include "softsensor/lp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "softsensor/error.hpp"
#include "softsensor/format.hpp"

namespace softsensor {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kDegenerateStep = 1e-12;

}  // namespace

std::size_t LinearProgram::add_variable(double lo, double hi, double cost) {
  objective.push_back(cost);
  lower.push_back(lo);
  upper.push_back(hi);
  return objective.size() - 1;
}

void LinearProgram::add_constraint(std::vector<SparseEntry> row, Sense sense,
                                   double rhs) {
  constraints.push_back(Constraint{std::move(row), sense, rhs});
}

void LinearProgram::validate() const {
  const std::size_t n = objective.size();
  if (lower.size() != n || upper.size() != n) {
    throw validation_error("LP: bound vectors do not match the variable count");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(objective[j]))
      throw validation_error("LP: non-finite cost on variable " + std::to_string(j));
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j] ||
        lower[j] == kInf || upper[j] == -kInf) {
      throw validation_error("LP: invalid bounds on variable " + std::to_string(j));
    }
  }
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const auto& c = constraints[i];
    if (!std::isfinite(c.rhs))
      throw validation_error("LP: non-finite rhs in constraint " + std::to_string(i));
    for (const auto& e : c.row) {
      if (e.index >= n)
        throw validation_error("LP: constraint " + std::to_string(i) +
                               " references variable " + std::to_string(e.index));
      if (!std::isfinite(e.value))
        throw validation_error("LP: non-finite coefficient in constraint " +
                               std::to_string(i));
    }
  }
}

std::string to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
  }
  return "?";
}

// ---------------------------------------------------------------------------

SimplexEngine::SimplexEngine(const LinearProgram& prob, LpOptions options)
    : opts_(options) {
  prob.validate();
  n_ = prob.num_vars();
  m_ = prob.num_constraints();
  build_columns(prob);
  max_iterations_ =
      opts_.max_iterations > 0 ? opts_.max_iterations : 50 * (n_ + m_) + 50;
  slack_basis();
}

void SimplexEngine::build_columns(const LinearProgram& prob) {
  const std::size_t total = n_ + m_;
  cols_.assign(total, {});
  cost_.assign(total, 0.0);
  lo_.assign(total, 0.0);
  up_.assign(total, 0.0);
  for (std::size_t j = 0; j < n_; ++j) {
    cost_[j] = prob.objective[j];
    lo_[j] = prob.lower[j];
    up_[j] = prob.upper[j];
  }
  for (std::size_t i = 0; i < m_; ++i) {
    const auto& c = prob.constraints[i];
    std::map<std::size_t, double> merged;
    for (const auto& e : c.row) merged[e.index] += e.value;
    for (const auto& [j, v] : merged)
      if (v != 0.0) cols_[j].push_back({i, v});
    cols_[n_ + i].push_back({i, -1.0});
    switch (c.sense) {
      case Sense::LessEqual:
        lo_[n_ + i] = -kInf;
        up_[n_ + i] = c.rhs;
        break;
      case Sense::GreaterEqual:
        lo_[n_ + i] = c.rhs;
        up_[n_ + i] = kInf;
        break;
      case Sense::Equal:
        lo_[n_ + i] = c.rhs;
        up_[n_ + i] = c.rhs;
        break;
    }
  }
  orig_lo_ = lo_;
  orig_up_ = up_;
}

void SimplexEngine::place_nonbasic(std::size_t j) {
  VarStatus s = status_[j];
  if (s == VarStatus::AtLower && std::isfinite(lo_[j])) {
    x_[j] = lo_[j];
    return;
  }
  if (s == VarStatus::AtUpper && std::isfinite(up_[j])) {
    x_[j] = up_[j];
    return;
  }
  if (std::isfinite(lo_[j])) {
    status_[j] = VarStatus::AtLower;
    x_[j] = lo_[j];
  } else if (std::isfinite(up_[j])) {
    status_[j] = VarStatus::AtUpper;
    x_[j] = up_[j];
  } else {
    status_[j] = VarStatus::Free;
    x_[j] = 0.0;
  }
}

void SimplexEngine::slack_basis() {
  const std::size_t total = n_ + m_;
  status_.assign(total, VarStatus::AtLower);
  x_.assign(total, 0.0);
  pos_.assign(total, -1);
  head_.assign(m_, 0);
  for (std::size_t j = 0; j < n_; ++j) place_nonbasic(j);
  for (std::size_t i = 0; i < m_; ++i) {
    head_[i] = n_ + i;
    pos_[n_ + i] = static_cast<std::ptrdiff_t>(i);
    status_[n_ + i] = VarStatus::Basic;
  }
  binv_ = DenseMatrix(m_, m_);
  for (std::size_t i = 0; i < m_; ++i) binv_(i, i) = -1.0;
  factored_ = true;
  since_refactor_ = 0;
}

void SimplexEngine::set_bounds(std::size_t var, double lo, double hi) {
  if (var >= n_) throw validation_error("set_bounds: variable out of range");
  if (lo > hi) throw validation_error("set_bounds: lo > hi");
  lo_[var] = lo;
  up_[var] = hi;
  if (status_[var] != VarStatus::Basic) place_nonbasic(var);
}

void SimplexEngine::reset_bounds() {
  for (std::size_t j = 0; j < n_; ++j) {
    lo_[j] = orig_lo_[j];
    up_[j] = orig_up_[j];
    if (status_[j] != VarStatus::Basic) place_nonbasic(j);
  }
}

void SimplexEngine::load_basis(const Basis& basis) {
  const std::size_t total = n_ + m_;
  if (basis.status.size() != total) {
    throw validation_error("load_basis: basis size " +
                           std::to_string(basis.status.size()) + " != " +
                           std::to_string(total));
  }
  if (basis.status == status_) return;  // current factorization still valid
  const auto basic = static_cast<std::size_t>(
      std::count(basis.status.begin(), basis.status.end(), VarStatus::Basic));
  if (basic != m_) {
    slack_basis();
    return;
  }
  status_ = basis.status;
  pos_.assign(total, -1);
  std::size_t p = 0;
  for (std::size_t j = 0; j < total; ++j) {
    if (status_[j] == VarStatus::Basic) {
      head_[p] = j;
      pos_[j] = static_cast<std::ptrdiff_t>(p);
      ++p;
    } else {
      place_nonbasic(j);
    }
  }
  factored_ = false;
}

Basis SimplexEngine::basis() const { return Basis{status_}; }

void SimplexEngine::refactor() {
  // Slack columns are -e_i, so only the block of structural basic columns on
  // the rows not covered by a basic slack needs a dense inversion.
  std::vector<std::ptrdiff_t> slack_pos_of_row(m_, -1);
  std::vector<std::size_t> structural_pos;
  for (std::size_t p = 0; p < m_; ++p) {
    const std::size_t j = head_[p];
    if (j >= n_) {
      slack_pos_of_row[j - n_] = static_cast<std::ptrdiff_t>(p);
    } else {
      structural_pos.push_back(p);
    }
  }
  std::vector<std::size_t> uncovered;
  std::vector<std::ptrdiff_t> row_to_k(m_, -1);
  for (std::size_t i = 0; i < m_; ++i) {
    if (slack_pos_of_row[i] < 0) {
      row_to_k[i] = static_cast<std::ptrdiff_t>(uncovered.size());
      uncovered.push_back(i);
    }
  }
  const std::size_t k = structural_pos.size();
  bool ok = uncovered.size() == k;
  DenseMatrix kinv(k, k);
  if (ok) {
    for (std::size_t s = 0; s < k; ++s) {
      for (const auto& e : cols_[head_[structural_pos[s]]]) {
        if (row_to_k[e.index] >= 0)
          kinv(static_cast<std::size_t>(row_to_k[e.index]), s) = e.value;
      }
    }
    ok = k == 0 || invert(kinv);
  }
  if (!ok) {
    // Singular basis: fall back to the all-logical basis.
    slack_basis();
    return;
  }
  binv_ = DenseMatrix(m_, m_);
  for (std::size_t s = 0; s < k; ++s) {
    auto dst = binv_.row(structural_pos[s]);
    for (std::size_t c = 0; c < k; ++c) dst[uncovered[c]] = kinv(s, c);
  }
  for (std::size_t s = 0; s < k; ++s) {
    const auto src = binv_.row(structural_pos[s]);
    for (const auto& e : cols_[head_[structural_pos[s]]]) {
      const std::ptrdiff_t p = slack_pos_of_row[e.index];
      if (p < 0) continue;
      auto dst = binv_.row(static_cast<std::size_t>(p));
      for (std::size_t c = 0; c < k; ++c) dst[uncovered[c]] += e.value * src[uncovered[c]];
    }
  }
  for (std::size_t i = 0; i < m_; ++i) {
    if (slack_pos_of_row[i] >= 0) binv_(static_cast<std::size_t>(slack_pos_of_row[i]), i) -= 1.0;
  }
  factored_ = true;
  since_refactor_ = 0;
}

void SimplexEngine::compute_primal() {
  Vector r(m_, 0.0);
  for (std::size_t j = 0; j < n_ + m_; ++j) {
    if (status_[j] == VarStatus::Basic || x_[j] == 0.0) continue;
    for (const auto& e : cols_[j]) r[e.index] += e.value * x_[j];
  }
  for (std::size_t p = 0; p < m_; ++p) x_[head_[p]] = -dot(binv_.row(p), r);
}

double SimplexEngine::infeasibility(std::size_t j) const {
  if (x_[j] < lo_[j]) return lo_[j] - x_[j];
  if (x_[j] > up_[j]) return x_[j] - up_[j];
  return 0.0;
}

bool SimplexEngine::primal_feasible() const {
  for (std::size_t p = 0; p < m_; ++p)
    if (infeasibility(head_[p]) > opts_.primal_tol) return false;
  return true;
}

void SimplexEngine::compute_duals(Phase phase) {
  Vector cb(m_, 0.0);
  for (std::size_t p = 0; p < m_; ++p) {
    const std::size_t j = head_[p];
    if (phase == Phase::Two) {
      cb[p] = cost_[j];
    } else if (x_[j] < lo_[j] - opts_.primal_tol) {
      cb[p] = -1.0;
    } else if (x_[j] > up_[j] + opts_.primal_tol) {
      cb[p] = 1.0;
    }
  }
  y_ = transpose_times(binv_, cb);
  d_.assign(n_ + m_, 0.0);
  for (std::size_t j = 0; j < n_ + m_; ++j) {
    if (status_[j] == VarStatus::Basic) continue;
    double v = phase == Phase::Two ? cost_[j] : 0.0;
    for (const auto& e : cols_[j]) v -= y_[e.index] * e.value;
    d_[j] = v;
  }
}

bool SimplexEngine::dual_feasible() const {
  for (std::size_t j = 0; j < n_ + m_; ++j) {
    if (lo_[j] == up_[j]) continue;
    switch (status_[j]) {
      case VarStatus::Basic: break;
      case VarStatus::AtLower:
        if (d_[j] < -opts_.dual_tol) return false;
        break;
      case VarStatus::AtUpper:
        if (d_[j] > opts_.dual_tol) return false;
        break;
      case VarStatus::Free:
        if (std::abs(d_[j]) > opts_.dual_tol) return false;
        break;
    }
  }
  return true;
}

void SimplexEngine::flip_for_dual_feasibility() {
  bool moved = false;
  for (std::size_t j = 0; j < n_ + m_; ++j) {
    if (!std::isfinite(lo_[j]) || !std::isfinite(up_[j]) || lo_[j] == up_[j]) continue;
    if (status_[j] == VarStatus::AtLower && d_[j] < -opts_.dual_tol) {
      status_[j] = VarStatus::AtUpper;
      x_[j] = up_[j];
      moved = true;
    } else if (status_[j] == VarStatus::AtUpper && d_[j] > opts_.dual_tol) {
      status_[j] = VarStatus::AtLower;
      x_[j] = lo_[j];
      moved = true;
    }
  }
  if (moved) compute_primal();
}

Vector SimplexEngine::ftran(std::size_t j) const {
  Vector alpha(m_, 0.0);
  for (const auto& e : cols_[j]) {
    const double v = e.value;
    for (std::size_t p = 0; p < m_; ++p) alpha[p] += binv_(p, e.index) * v;
  }
  return alpha;
}

void SimplexEngine::pivot(std::size_t row, std::size_t entering, const Vector& alpha) {
  const std::size_t leaving = head_[row];
  pos_[leaving] = -1;
  head_[row] = entering;
  pos_[entering] = static_cast<std::ptrdiff_t>(row);
  status_[entering] = VarStatus::Basic;

  auto pivot_row = binv_.row(row);
  const double inv = 1.0 / alpha[row];
  for (double& v : pivot_row) v *= inv;
  for (std::size_t p = 0; p < m_; ++p) {
    if (p == row || alpha[p] == 0.0) continue;
    const double f = alpha[p];
    auto r = binv_.row(p);
    for (std::size_t c = 0; c < m_; ++c) r[c] -= f * pivot_row[c];
  }
  if (++since_refactor_ >= opts_.refactor_interval) {
    refactor();
    compute_primal();
  }
}

void SimplexEngine::count_iteration(double step) {
  ++iterations_;
  if (step < kDegenerateStep) {
    if (++degenerate_ >= opts_.bland_after_degenerate) bland_ = true;
  }
  if (iterations_ > max_iterations_) {
    throw solver_error("LP stalled: iteration cap " + std::to_string(max_iterations_) +
                       " exceeded");
  }
}

SimplexEngine::Outcome SimplexEngine::primal_iteration(Phase phase) {
  compute_duals(phase);
  const double tol = opts_.dual_tol;
  std::ptrdiff_t q = -1;
  int dir = 0;
  double best = 0.0;
  for (std::size_t j = 0; j < n_ + m_; ++j) {
    const VarStatus s = status_[j];
    if (s == VarStatus::Basic || lo_[j] == up_[j]) continue;
    int jd = 0;
    if (s == VarStatus::AtLower && d_[j] < -tol) jd = 1;
    else if (s == VarStatus::AtUpper && d_[j] > tol) jd = -1;
    else if (s == VarStatus::Free && std::abs(d_[j]) > tol) jd = d_[j] < 0 ? 1 : -1;
    if (jd == 0) continue;
    if (bland_) {
      q = static_cast<std::ptrdiff_t>(j);
      dir = jd;
      break;
    }
    if (std::abs(d_[j]) > best) {
      best = std::abs(d_[j]);
      q = static_cast<std::ptrdiff_t>(j);
      dir = jd;
    }
  }
  if (q < 0) return Outcome::Optimal;
  const auto qi = static_cast<std::size_t>(q);
  const Vector alpha = ftran(qi);
  const double ptol = opts_.primal_tol;

  // Target bound each basic variable moves towards, or none.
  struct Candidate {
    std::size_t p;
    double bound;
    double delta;
  };
  std::vector<Candidate> cands;
  for (std::size_t p = 0; p < m_; ++p) {
    if (std::abs(alpha[p]) <= kPivotTol) continue;
    const std::size_t j = head_[p];
    const double delta = -dir * alpha[p];
    const double x = x_[j];
    double bound = kInf;
    if (delta > 0) {
      if (phase == Phase::One && x < lo_[j] - ptol) bound = lo_[j];
      else if (x <= up_[j] + ptol) bound = up_[j];
    } else {
      if (phase == Phase::One && x > up_[j] + ptol) bound = up_[j];
      else if (x >= lo_[j] - ptol) bound = lo_[j];
    }
    if (std::isfinite(bound)) cands.push_back({p, bound, delta});
  }

  std::ptrdiff_t leave = -1;
  double theta = kInf;
  if (bland_) {
    for (const auto& c : cands) {
      const double r = std::max(0.0, (c.bound - x_[head_[c.p]]) / c.delta);
      if (r < theta - 1e-12 ||
          (std::abs(r - theta) <= 1e-12 && leave >= 0 &&
           head_[c.p] < head_[static_cast<std::size_t>(leave)])) {
        theta = r;
        leave = static_cast<std::ptrdiff_t>(c.p);
      }
    }
  } else {
    double relaxed = kInf;
    for (const auto& c : cands) {
      const double slack = c.delta > 0 ? ptol : -ptol;
      relaxed = std::min(relaxed, (c.bound + slack - x_[head_[c.p]]) / c.delta);
    }
    double best_alpha = 0.0;
    for (const auto& c : cands) {
      const double r = (c.bound - x_[head_[c.p]]) / c.delta;
      if (r <= relaxed && std::abs(alpha[c.p]) > best_alpha) {
        best_alpha = std::abs(alpha[c.p]);
        theta = std::max(0.0, r);
        leave = static_cast<std::ptrdiff_t>(c.p);
      }
    }
  }

  const double range = up_[qi] - lo_[qi];
  const bool flip = std::isfinite(range) && range <= theta;
  if (leave < 0 && !flip) {
    if (phase == Phase::Two) return Outcome::Unbounded;
    throw solver_error("LP phase 1 found an unbounded ray; numerical trouble");
  }
  const double step = flip ? range : theta;
  x_[qi] += dir * step;
  for (std::size_t p = 0; p < m_; ++p) x_[head_[p]] -= dir * step * alpha[p];
  if (flip) {
    status_[qi] = dir > 0 ? VarStatus::AtUpper : VarStatus::AtLower;
    x_[qi] = dir > 0 ? up_[qi] : lo_[qi];
    count_iteration(step);
    return Outcome::Continue;
  }
  const auto r = static_cast<std::size_t>(leave);
  const std::size_t out = head_[r];
  const double bound = [&] {
    for (const auto& c : cands)
      if (c.p == r) return c.bound;
    return x_[out];
  }();
  x_[out] = bound;
  status_[out] = bound == lo_[out] ? VarStatus::AtLower : VarStatus::AtUpper;
  pivot(r, qi, alpha);
  count_iteration(step);
  return Outcome::Continue;
}

SimplexEngine::Outcome SimplexEngine::dual_iteration() {
  const double ptol = opts_.primal_tol;
  std::ptrdiff_t leave = -1;
  double worst = ptol;
  for (std::size_t p = 0; p < m_; ++p) {
    const double inf = infeasibility(head_[p]);
    if (inf <= ptol) continue;
    if (bland_) {
      if (leave < 0 || head_[p] < head_[static_cast<std::size_t>(leave)])
        leave = static_cast<std::ptrdiff_t>(p);
    } else if (inf > worst) {
      worst = inf;
      leave = static_cast<std::ptrdiff_t>(p);
    }
  }
  if (leave < 0) return Outcome::Optimal;
  const auto r = static_cast<std::size_t>(leave);
  const std::size_t out = head_[r];
  const bool below = x_[out] < lo_[out];
  const double target = below ? lo_[out] : up_[out];
  const auto rho = binv_.row(r);

  // The leaving variable moves up when below, which needs -alpha_rj·Δx_j > 0.
  const int need = below ? 1 : -1;
  std::ptrdiff_t q = -1;
  double relaxed = kInf;
  std::vector<std::pair<std::size_t, double>> elig;
  for (std::size_t j = 0; j < n_ + m_; ++j) {
    const VarStatus s = status_[j];
    if (s == VarStatus::Basic || lo_[j] == up_[j]) continue;
    double a = 0.0;
    for (const auto& e : cols_[j]) a += rho[e.index] * e.value;
    if (std::abs(a) <= kPivotTol) continue;
    // Sign of Δx_j that pushes the leaving variable the right way.
    const int move = (-a * need) > 0 ? 1 : -1;
    if (s == VarStatus::AtLower && move < 0) continue;
    if (s == VarStatus::AtUpper && move > 0) continue;
    elig.emplace_back(j, a);
    relaxed = std::min(relaxed, (std::abs(d_[j]) + opts_.dual_tol) / std::abs(a));
  }
  if (elig.empty()) return Outcome::Infeasible;
  double best_alpha = 0.0;
  double dual_step = 0.0;
  for (const auto& [j, a] : elig) {
    const double ratio = std::abs(d_[j]) / std::abs(a);
    if (bland_) {
      if (q < 0 || ratio < dual_step - 1e-12) {
        q = static_cast<std::ptrdiff_t>(j);
        dual_step = ratio;
      }
    } else if (ratio <= relaxed && std::abs(a) > best_alpha) {
      best_alpha = std::abs(a);
      q = static_cast<std::ptrdiff_t>(j);
      dual_step = ratio;
    }
  }
  const auto qi = static_cast<std::size_t>(q);
  const Vector alpha = ftran(qi);
  if (std::abs(alpha[r]) <= kPivotTol) {
    // Row and column disagree; refresh the factorization and retry later.
    refactor();
    compute_primal();
    count_iteration(0.0);
    return Outcome::Continue;
  }
  const double dq = (x_[out] - target) / alpha[r];
  x_[qi] += dq;
  for (std::size_t p = 0; p < m_; ++p) x_[head_[p]] -= dq * alpha[p];
  x_[out] = target;
  status_[out] = below ? VarStatus::AtLower : VarStatus::AtUpper;
  pivot(r, qi, alpha);
  compute_duals(Phase::Two);
  count_iteration(dual_step);
  return Outcome::Continue;
}

LpSolution SimplexEngine::extract(LpStatus status) const {
  LpSolution sol;
  sol.status = status;
  sol.values.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
  sol.basis = Basis{status_};
  sol.iterations = iterations_;
  double obj = 0.0;
  for (std::size_t j = 0; j < n_; ++j) obj += cost_[j] * x_[j];
  sol.objective_value = obj;
  sol.dual_values = y_;
  sol.reduced_costs.assign(d_.begin(), d_.begin() + static_cast<std::ptrdiff_t>(n_));
  double dual_obj = 0.0;
  for (std::size_t j = 0; j < n_ + m_; ++j)
    if (status_[j] != VarStatus::Basic) dual_obj += d_[j] * x_[j];
  sol.dual_objective = dual_obj;
  return sol;
}

LpSolution SimplexEngine::solve() {
  iterations_ = 0;
  degenerate_ = 0;
  bland_ = false;
  if (!factored_) refactor();
  compute_primal();
  int verify_rounds = 0;
  while (true) {
    if (primal_feasible()) {
      const Outcome o = primal_iteration(Phase::Two);
      if (o == Outcome::Unbounded) {
        compute_duals(Phase::Two);
        return extract(LpStatus::Unbounded);
      }
      if (o == Outcome::Optimal) {
        refactor();
        compute_primal();
        if (primal_feasible() || ++verify_rounds > 3) {
          compute_duals(Phase::Two);
          if (dual_feasible() || verify_rounds > 3) return extract(LpStatus::Optimal);
        }
      }
      continue;
    }
    compute_duals(Phase::Two);
    flip_for_dual_feasibility();
    if (primal_feasible()) continue;
    if (dual_feasible()) {
      const Outcome o = dual_iteration();
      if (o == Outcome::Infeasible) {
        refactor();
        compute_primal();
        if (primal_feasible()) continue;
        compute_duals(Phase::Two);
        if (dual_feasible()) return extract(LpStatus::Infeasible);
        // Lost dual feasibility while refactoring; finish with phase 1.
      } else {
        continue;
      }
    }
    const Outcome o = primal_iteration(Phase::One);
    if (o == Outcome::Optimal) {
      refactor();
      compute_primal();
      if (primal_feasible()) continue;
      compute_duals(Phase::One);
      if (++verify_rounds > 3) return extract(LpStatus::Infeasible);
      // Re-run pricing on the fresh factorization before concluding.
      if (primal_iteration(Phase::One) == Outcome::Optimal)
        return extract(LpStatus::Infeasible);
    }
  }
}

// ---------------------------------------------------------------------------

LpSolution solve_lp(const LinearProgram& prob, const Basis* warm,
                    const LpOptions& options) {
  SimplexEngine engine(prob, options);
  if (warm != nullptr && !warm->empty()) engine.load_basis(*warm);
  return engine.solve();
}

void write_lp_text(const LinearProgram& prob, std::ostream& out) {
  auto term = [&](double coef, std::size_t var) {
    out << ' ' << (coef < 0 ? "- " : "+ ") << format_number(std::abs(coef)) << " x"
        << var;
  };
  out << "minimize\n  obj:";
  for (std::size_t j = 0; j < prob.num_vars(); ++j)
    if (prob.objective[j] != 0.0) term(prob.objective[j], j);
  out << "\nsubject to\n";
  for (std::size_t i = 0; i < prob.num_constraints(); ++i) {
    const auto& c = prob.constraints[i];
    out << "  c" << i << ':';
    for (const auto& e : c.row) term(e.value, e.index);
    const char* sense = c.sense == Sense::LessEqual ? "<=" : c.sense == Sense::Equal ? "=" : ">=";
    out << ' ' << sense << ' ' << format_number(c.rhs) << '\n';
  }
  out << "bounds\n";
  for (std::size_t j = 0; j < prob.num_vars(); ++j) {
    const double lo = prob.lower[j];
    const double hi = prob.upper[j];
    if (!std::isfinite(lo) && !std::isfinite(hi)) {
      out << "  x" << j << " free\n";
    } else {
      out << "  " << (std::isfinite(lo) ? format_number(lo) : "-inf") << " <= x" << j
          << " <= " << (std::isfinite(hi) ? format_number(hi) : "inf") << '\n';
    }
  }
  out << "end\n";
}

}  // namespace softsensor
