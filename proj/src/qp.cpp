#include "softsensor/qp.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "softsensor/error.hpp"

namespace softsensor {

QuadraticProgram::QuadraticProgram(std::size_t n)
    : q(n, n), c(n, 0.0), lower(n, -kInf), upper(n, kInf) {}

void QuadraticProgram::add_constraint(std::vector<SparseEntry> row, Sense sense,
                                      double rhs) {
  constraints.push_back(Constraint{std::move(row), sense, rhs});
}

namespace {

// Cholesky that reports failure instead of throwing; pivots below
// `rel_tol`·max diag count as zero.
bool is_positive_definite(const DenseMatrix& s, double shift, double rel_tol) {
  const std::size_t n = s.rows();
  double diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) diag = std::max(diag, std::abs(s(i, i)));
  const double floor = rel_tol * std::max(diag, 1e-300);
  DenseMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = s(j, j) + shift;
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > floor)) return false;
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / ljj;
    }
  }
  return true;
}

}  // namespace

void QuadraticProgram::validate() const {
  const std::size_t n = c.size();
  if (q.rows() != n || q.cols() != n)
    throw validation_error("QP: Q must be n_v×n_v with n_v = " + std::to_string(n));
  if (lower.size() != n || upper.size() != n)
    throw validation_error("QP: bound vectors do not match the variable count");
  q.check_finite();
  const double scale = std::max(1.0, max_abs(q));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(q(i, j) - q(j, i)) > 1e-10 * scale)
        throw validation_error("QP: Q is not symmetric at (" + std::to_string(i) + ", " +
                               std::to_string(j) + ")");
  if (n > 0 && !is_positive_definite(q, 1e-8, 0.0))
    throw validation_error("QP: Q is not positive semidefinite (eigenvalue below -1e-8)");
  LinearProgram shape;
  shape.objective = c;
  shape.lower = lower;
  shape.upper = upper;
  shape.constraints = constraints;
  shape.validate();
}

namespace {

enum BoundState : signed char { kFree = 0, kAtLower = -1, kAtUpper = 1, kFixed = 2 };

class ActiveSet {
 public:
  ActiveSet(const QuadraticProgram& prob, const QpOptions& opts)
      : prob_(prob), opts_(opts), n_(prob.num_vars()) {
    q_ = prob.q;
    lifted_ = n_ > 0 && !is_positive_definite(q_, 0.0, 1e-12);
    if (lifted_)
      for (std::size_t i = 0; i < n_; ++i) q_(i, i) += opts_.lift;
    for (const auto& con : prob.constraints) {
      Vector a(n_, 0.0);
      for (const auto& e : con.row) a[e.index] += e.value;
      double b = con.rhs;
      double sign = 1.0;
      if (con.sense == Sense::LessEqual) {
        for (double& v : a) v = -v;
        b = -b;
        sign = -1.0;
      }
      rows_.push_back(a);
      rhs_.push_back(b);
      equality_.push_back(con.sense == Sense::Equal);
      sign_.push_back(sign);
    }
    in_w_.assign(rows_.size(), false);
    bound_.assign(n_, kFree);
  }

  QpSolution run() {
    QpSolution sol;
    sol.lifted = lifted_;
    if (!find_feasible_start()) {
      sol.status = QpStatus::Infeasible;
      return sol;
    }
    const std::size_t cap = opts_.max_iterations > 0
                                ? opts_.max_iterations
                                : 50 * (n_ + rows_.size()) + 100;
    std::set<std::vector<int>> seen;
    double last_obj = objective(x_);
    Vector lambda;
    for (std::size_t it = 0;; ++it) {
      if (it > cap) throw solver_error("QP: iteration cap exceeded");
      const Vector g = gradient(x_);
      Vector p;
      if (!solve_eqp(g, p, lambda)) {
        throw solver_error("QP: singular KKT system on the working set");
      }
      sol.iterations = it;
      // After an unblocked step x already minimizes over the working
      // subspace; any remaining p is rounding noise amplified by the lift.
      if (subspace_min_ || norm_inf(p) <= 1e-11 * std::max(1.0, norm_inf(x_))) {
        subspace_min_ = false;
        const Vector mu = bound_multipliers(g, lambda);
        if (!release(lambda, mu)) {
          finish(sol, lambda, mu);
          return sol;
        }
      } else {
        take_step(p);
      }
      const double obj = objective(x_);
      if (obj < last_obj - 1e-14 * std::max(1.0, std::abs(last_obj))) {
        seen.clear();
        last_obj = obj;
        smallest_index_ = false;
      }
      if (!seen.insert(signature()).second) {
        // Degenerate vertex: fall back to smallest-index choices, which
        // cannot cycle. A repeat after that is a genuine failure.
        if (smallest_index_)
          throw solver_error("QP: active set revisited without progress (cycling)");
        smallest_index_ = true;
        seen.clear();
        seen.insert(signature());
      }
    }
  }

 private:
  bool find_feasible_start() {
    LinearProgram lp;
    lp.objective.assign(n_, 0.0);
    lp.lower = prob_.lower;
    lp.upper = prob_.upper;
    lp.constraints = prob_.constraints;
    const LpSolution feas = solve_lp(lp);
    if (feas.status != LpStatus::Optimal) return false;
    x_ = feas.values;
    for (std::size_t j = 0; j < n_; ++j) {
      x_[j] = std::clamp(x_[j], prob_.lower[j], prob_.upper[j]);
      if (prob_.lower[j] == prob_.upper[j]) bound_[j] = kFixed;
    }
    // Working normals are kept linearly independent by Gram-Schmidt against
    // the fixed-variable directions and the rows already taken.
    std::vector<Vector> basis;
    auto independent = [&](Vector v) {
      const double orig = norm2(v);
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) {
          const double proj = dot(v, b);
          for (std::size_t j = 0; j < n_; ++j) v[j] -= proj * b[j];
        }
      const double rem = norm2(v);
      if (!(rem > 1e-9 * std::max(1.0, orig))) return false;
      for (double& e : v) e /= rem;
      basis.push_back(std::move(v));
      return true;
    };
    auto unit = [&](std::size_t j) {
      Vector e(n_, 0.0);
      e[j] = 1.0;
      return e;
    };
    for (std::size_t j = 0; j < n_; ++j)
      if (bound_[j] == kFixed) independent(unit(j));
    // Equality rows always belong to the working set; dependent ones stay
    // satisfied because the start point satisfies them.
    for (std::size_t r = 0; r < rows_.size(); ++r)
      if (equality_[r] && independent(rows_[r])) in_w_[r] = true;
    // The rest of the LP vertex: nonbasic structurals and rows.
    const auto& st = feas.basis.status;
    if (st.size() == n_ + rows_.size()) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (bound_[j] == kFixed) continue;
        const BoundState side = st[j] == VarStatus::AtLower   ? kAtLower
                                : st[j] == VarStatus::AtUpper ? kAtUpper
                                                              : kFree;
        if (side == kFree) continue;
        const double target = side == kAtLower ? prob_.lower[j] : prob_.upper[j];
        if (!std::isfinite(target) || !independent(unit(j))) continue;
        bound_[j] = side;
        x_[j] = target;
      }
      for (std::size_t r = 0; r < rows_.size(); ++r) {
        if (equality_[r] || st[n_ + r] == VarStatus::Basic) continue;
        if (std::abs(dot(rows_[r], x_) - rhs_[r]) > opts_.feasibility_tol) continue;
        if (independent(rows_[r])) in_w_[r] = true;
      }
    }
    return true;
  }

  double objective(const Vector& x) const {
    const Vector qx = q_ * x;
    return 0.5 * dot(x, qx) + dot(prob_.c, x);
  }

  Vector gradient(const Vector& x) const {
    Vector g = q_ * x;
    for (std::size_t j = 0; j < n_; ++j) g[j] += prob_.c[j];
    return g;
  }

  bool solve_eqp(const Vector& g, Vector& p, Vector& lambda) {
    std::vector<std::size_t> free_vars;
    for (std::size_t j = 0; j < n_; ++j)
      if (bound_[j] == kFree) free_vars.push_back(j);
    std::vector<std::size_t> work;
    for (std::size_t r = 0; r < rows_.size(); ++r)
      if (in_w_[r]) work.push_back(r);
    const std::size_t nf = free_vars.size();
    const std::size_t nw = work.size();
    DenseMatrix kkt(nf + nw, nf + nw);
    Vector rhs(nf + nw, 0.0);
    for (std::size_t a = 0; a < nf; ++a) {
      for (std::size_t b = 0; b < nf; ++b) kkt(a, b) = q_(free_vars[a], free_vars[b]);
      rhs[a] = -g[free_vars[a]];
    }
    for (std::size_t k = 0; k < nw; ++k) {
      const Vector& row = rows_[work[k]];
      for (std::size_t a = 0; a < nf; ++a) {
        kkt(nf + k, a) = row[free_vars[a]];
        kkt(a, nf + k) = -row[free_vars[a]];
      }
    }
    p.assign(n_, 0.0);
    lambda.assign(rows_.size(), 0.0);
    if (nf + nw == 0) return true;
    const PivotedLu lu(std::move(kkt));
    if (lu.singular()) return false;
    const Vector sol = lu.solve(rhs);
    Vector pf(sol.begin(), sol.begin() + static_cast<std::ptrdiff_t>(nf));
    if (nw > 0 && nf > 0) {
      // Remove the component of p along the working normals; with a lifted
      // Q the raw step is large and its rounding error would otherwise make
      // dependent rows look like blocking constraints.
      DenseMatrix nt(nf, nw);
      for (std::size_t k = 0; k < nw; ++k)
        for (std::size_t a = 0; a < nf; ++a) nt(a, k) = rows_[work[k]][free_vars[a]];
      const HouseholderQr qr(nt);
      const DenseMatrix q1 = qr.thin_q();
      for (int pass = 0; pass < 2; ++pass) {
        const Vector coef = transpose_times(q1, pf);
        const Vector along = q1 * coef;
        for (std::size_t a = 0; a < nf; ++a) pf[a] -= along[a];
      }
    }
    for (std::size_t a = 0; a < nf; ++a) p[free_vars[a]] = pf[a];
    for (std::size_t k = 0; k < nw; ++k) lambda[work[k]] = sol[nf + k];
    return true;
  }

  Vector bound_multipliers(const Vector& g, const Vector& lambda) const {
    Vector mu(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      if (bound_[j] == kFree) continue;
      double v = g[j];
      for (std::size_t r = 0; r < rows_.size(); ++r)
        if (lambda[r] != 0.0) v -= rows_[r][j] * lambda[r];
      mu[j] = v;
    }
    return mu;
  }

  // Drops an inequality with a negative multiplier: the most negative one,
  // or the first one in smallest-index mode. False means optimal.
  bool release(const Vector& lambda, const Vector& mu) {
    double worst = -opts_.multiplier_tol;
    std::ptrdiff_t row = -1;
    std::ptrdiff_t var = -1;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      if (in_w_[r] && !equality_[r] && lambda[r] < worst) {
        worst = lambda[r];
        row = static_cast<std::ptrdiff_t>(r);
        var = -1;
        if (smallest_index_) break;
      }
    }
    if (!(smallest_index_ && row >= 0)) {
      for (std::size_t j = 0; j < n_; ++j) {
        double signed_mu = 0.0;
        if (bound_[j] == kAtLower) signed_mu = mu[j];
        else if (bound_[j] == kAtUpper) signed_mu = -mu[j];
        else continue;
        if (signed_mu < worst) {
          worst = signed_mu;
          var = static_cast<std::ptrdiff_t>(j);
          row = -1;
          if (smallest_index_) break;
        }
      }
    }
    if (row >= 0) {
      in_w_[static_cast<std::size_t>(row)] = false;
      return true;
    }
    if (var >= 0) {
      bound_[static_cast<std::size_t>(var)] = kFree;
      return true;
    }
    return false;
  }

  void take_step(const Vector& p) {
    double alpha = 1.0;
    std::ptrdiff_t block_row = -1;
    std::ptrdiff_t block_var = -1;
    BoundState block_side = kFree;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      if (in_w_[r] || equality_[r]) continue;
      const double ap = dot(rows_[r], p);
      if (ap >= -1e-12 * std::max(1.0, norm_inf(rows_[r]) * norm_inf(p))) continue;
      const double slack = dot(rows_[r], x_) - rhs_[r];
      const double step = std::max(0.0, slack) / -ap;
      if (step < alpha) {
        alpha = step;
        block_row = static_cast<std::ptrdiff_t>(r);
        block_var = -1;
      }
    }
    for (std::size_t j = 0; j < n_; ++j) {
      if (bound_[j] != kFree || p[j] == 0.0) continue;
      double step = kInf;
      BoundState side = kFree;
      if (p[j] < 0 && std::isfinite(prob_.lower[j])) {
        step = std::max(0.0, x_[j] - prob_.lower[j]) / -p[j];
        side = kAtLower;
      } else if (p[j] > 0 && std::isfinite(prob_.upper[j])) {
        step = std::max(0.0, prob_.upper[j] - x_[j]) / p[j];
        side = kAtUpper;
      }
      if (step < alpha) {
        alpha = step;
        block_var = static_cast<std::ptrdiff_t>(j);
        block_row = -1;
        block_side = side;
      }
    }
    for (std::size_t j = 0; j < n_; ++j) x_[j] += alpha * p[j];
    subspace_min_ = block_row < 0 && block_var < 0;
    if (block_row >= 0) {
      in_w_[static_cast<std::size_t>(block_row)] = true;
    } else if (block_var >= 0) {
      const auto j = static_cast<std::size_t>(block_var);
      bound_[j] = block_side;
      x_[j] = block_side == kAtLower ? prob_.lower[j] : prob_.upper[j];
    }
  }

  std::vector<int> signature() const {
    std::vector<int> sig;
    for (std::size_t r = 0; r < rows_.size(); ++r)
      if (in_w_[r]) sig.push_back(static_cast<int>(r));
    sig.push_back(-1);
    for (std::size_t j = 0; j < n_; ++j) sig.push_back(bound_[j]);
    return sig;
  }

  void finish(QpSolution& sol, const Vector& lambda, const Vector& mu) const {
    sol.status = QpStatus::Optimal;
    sol.values = x_;
    const Vector qx = prob_.q * x_;
    sol.objective_value = 0.5 * dot(x_, qx) + dot(prob_.c, x_) + prob_.constant;
    sol.multipliers.assign(rows_.size(), 0.0);
    for (std::size_t r = 0; r < rows_.size(); ++r) sol.multipliers[r] = sign_[r] * lambda[r];
    sol.bound_multipliers = mu;
    Vector res = qx;
    for (std::size_t j = 0; j < n_; ++j) res[j] += prob_.c[j] - mu[j];
    for (std::size_t r = 0; r < rows_.size(); ++r)
      if (lambda[r] != 0.0)
        for (std::size_t j = 0; j < n_; ++j) res[j] -= rows_[r][j] * lambda[r];
    sol.kkt_residual = norm_inf(res);
  }

  const QuadraticProgram& prob_;
  QpOptions opts_;
  std::size_t n_;
  DenseMatrix q_;
  bool lifted_ = false;
  std::vector<Vector> rows_;
  Vector rhs_;
  std::vector<bool> equality_;
  Vector sign_;
  std::vector<bool> in_w_;
  std::vector<BoundState> bound_;
  Vector x_;
  bool smallest_index_ = false;
  bool subspace_min_ = false;
};

}  // namespace

QpSolution solve_qp(const QuadraticProgram& prob, const QpOptions& options) {
  prob.validate();
  return ActiveSet(prob, options).run();
}

}  // namespace softsensor
