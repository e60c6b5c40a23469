// Acceptance suite: runs each numbered criterion and prints one PASS/FAIL line
// per criterion. Optional arguments select a subset, e.g. `acceptance 1 2 9`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "softsensor/classify.hpp"
#include "softsensor/cli.hpp"
#include "softsensor/design.hpp"
#include "softsensor/error.hpp"
#include "softsensor/io.hpp"
#include "softsensor/lp.hpp"
#include "softsensor/milp.hpp"
#include "softsensor/qp.hpp"
#include "softsensor/rng.hpp"
#include "softsensor/study.hpp"

using namespace softsensor;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------
// Dense Gaussian elimination with partial pivoting; independent of the
// library's factorizations.
std::optional<std::vector<double>> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    if (std::abs(a[p][c]) < 1e-11) return std::nullopt;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

// ---------------------------------------------------------------------------
// Continuity collector shared by every criterion that trains a sensor.

struct TrainedSensor {
  std::string origin;
  SensorModel sensor;
};
std::vector<TrainedSensor> g_sensors;

void collect(const std::string& origin, const DesignReport& rep) {
  if (rep.method == Method::MisCon || rep.method == Method::MisConLab) g_sensors.push_back({origin, rep.sensor});
}

double affine(const AffineModel& m, const std::vector<double>& x) {
  double v = m.b_p;
  for (std::size_t d = 0; d < x.size(); ++d) v += m.p[d] * x[d];
  return v;
}

// Largest |model_r − model_s| over `samples` points drawn uniformly in the
// unit box and projected onto each switching hyperplane.
double continuity_error(const SensorModel& s, std::size_t samples, std::uint64_t seed) {
  if (!s.switching) return 0.0;
  const std::size_t n_p = s.num_inputs();
  double worst = 0.0;
  for (std::size_t k = 0; k < s.switching->hyperplanes.size(); ++k) {
    const auto& h = s.switching->hyperplanes[k];
    const auto [r, q] = s.switching->pairs[k];
    Rng rng = Rng::stream(seed, k);
    double ww = 0.0;
    for (double v : h.w) ww += v * v;
    for (std::size_t t = 0; t < samples; ++t) {
      std::vector<double> x(n_p);
      for (double& v : x) v = rng.uniform();
      if (ww > 1e-24) {
        double g = h.b_w;
        for (std::size_t d = 0; d < n_p; ++d) g += h.w[d] * x[d];
        for (std::size_t d = 0; d < n_p; ++d) x[d] -= g / ww * h.w[d];
      }
      worst = std::max(worst, std::abs(affine(s.models[r], x) - affine(s.models[q], x)));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// L1 labeling program for a fixed labeling, written without big-M terms:
// every row a labeling activates is present and nothing else. Returns
// nullopt when the labeling violates the class-size rule or the LP is
// infeasible.
std::optional<double> direct_l1(const Dataset& d, const std::vector<ClassIndex>& lab, std::size_t n_cl,
                                double pb) {
  const std::size_t n = d.size(), n_p = d.num_inputs();
  std::vector<std::size_t> size(n_cl, 0);
  for (auto c : lab) ++size[c];
  for (auto s : size)
    if (s < n_p + 1) return std::nullopt;

  LinearProgram lp;
  std::vector<std::vector<std::size_t>> p(n_cl);  // n_p slopes then offset
  for (auto& pj : p)
    for (std::size_t q = 0; q <= n_p; ++q) pj.push_back(lp.add_variable(-pb, pb));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t t = lp.add_variable(0.0, kInf, 1.0);
    std::vector<SparseEntry> up{{t, 1.0}}, down{{t, 1.0}};
    for (std::size_t q = 0; q < n_p; ++q) {
      up.push_back({p[lab[i]][q], d.inputs(i, q)});
      down.push_back({p[lab[i]][q], -d.inputs(i, q)});
    }
    up.push_back({p[lab[i]][n_p], 1.0});
    down.push_back({p[lab[i]][n_p], -1.0});
    lp.add_constraint(up, Sense::GreaterEqual, d.outputs[i]);
    lp.add_constraint(down, Sense::GreaterEqual, -d.outputs[i]);
  }
  for (std::size_t r = 0; r < n_cl; ++r)
    for (std::size_t s = r + 1; s < n_cl; ++s) {
      std::vector<std::size_t> w;
      for (std::size_t q = 0; q <= n_p; ++q) w.push_back(lp.add_variable(-pb, pb));
      for (std::size_t q = 0; q <= n_p; ++q)
        lp.add_constraint({{p[r][q], 1.0}, {p[s][q], -1.0}, {w[q], -1.0}}, Sense::Equal, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (lab[i] != r && lab[i] != s) continue;
        const double sign = lab[i] == r ? 1.0 : -1.0;
        const std::size_t e = lp.add_variable(0.0, pb);
        std::vector<SparseEntry> row{{e, 1.0}, {w[n_p], sign}};
        for (std::size_t q = 0; q < n_p; ++q) row.push_back({w[q], sign * d.inputs(i, q)});
        lp.add_constraint(row, Sense::GreaterEqual, 1.0);
      }
    }
  for (std::size_t j = 0; j + 1 < n_cl; ++j)
    lp.add_constraint({{p[j][n_p], 1.0}, {p[j + 1][n_p], -1.0}}, Sense::LessEqual, 0.0);
  const auto sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal) return std::nullopt;
  return sol.objective_value;
}

// Minimum over class permutations: the same partition, feasible under the
// offset ordering for at least one naming of its classes.
std::optional<double> partition_l1(const Dataset& d, const std::vector<ClassIndex>& lab, std::size_t n_cl,
                                   double pb) {
  std::vector<ClassIndex> perm(n_cl);
  for (std::size_t j = 0; j < n_cl; ++j) perm[j] = j;
  std::optional<double> best;
  do {
    std::vector<ClassIndex> relabeled(lab.size());
    for (std::size_t i = 0; i < lab.size(); ++i) relabeled[i] = perm[lab[i]];
    if (auto v = direct_l1(d, relabeled, n_cl, pb); v && (!best || *v < *best)) best = v;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Dataset random_data(Rng& rng, std::size_t n) {
  DenseMatrix x(n, 2);
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform(), x(i, 1) = rng.uniform();
    // A fold plus noise so that labelings matter.
    y[i] = std::abs(x(i, 0) - 0.5) + 0.3 * x(i, 1) + 0.1 * rng.normal();
  }
  return Dataset(x, y);
}

// ---------------------------------------------------------------------------

Outcome criterion_1() {
  Rng rng(101);
  DesignConfig cfg;
  cfg.n_cl = 2;
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t ok = 0;
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 6 + rng.index(3);
    const auto d = random_data(rng, n);
    const auto prog = build_mis_con_lab_milp(d, cfg);
    const auto res = solve_milp(prog.mip);
    double oracle = kInf;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      std::vector<ClassIndex> lab(n);
      for (std::size_t i = 0; i < n; ++i) lab[i] = (mask >> i) & 1u;
      if (auto v = direct_l1(d, lab, 2, cfg.param_bound)) oracle = std::min(oracle, *v);
    }
    if (res.status != MipStatus::Optimal) continue;
    const double diff = std::abs(res.objective_value - oracle);
    worst = std::max(worst, diff);
    ok += diff <= 1e-6;
  }
  const double elapsed = seconds_since(t0);
  return {ok == 25 && elapsed < 60.0, std::to_string(ok) + "/25 match, max |diff| " + fmt(worst) + ", " +
                                          fmt(elapsed) + " s"};
}

// LP with boxed variables and mixed rows, kept densely for the oracle.
struct DenseLp {
  LinearProgram lp;
  std::vector<std::vector<double>> rows;
};

DenseLp random_lp(Rng& rng) {
  DenseLp out;
  const std::size_t n = 1 + rng.index(6), m = 1 + rng.index(6);
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = rng.uniform() < 0.3 ? rng.uniform(-2.0, 0.0) : 0.0;
    out.lp.add_variable(lo, lo + rng.uniform(0.5, 4.0), rng.uniform(-2.0, 2.0));
  }
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> row(n);
    std::vector<SparseEntry> sparse;
    for (std::size_t j = 0; j < n; ++j) {
      row[j] = rng.uniform() < 0.2 ? 0.0 : rng.uniform(-1.0, 1.0);
      if (row[j] != 0.0) sparse.push_back({j, row[j]});
    }
    const double u = rng.uniform();
    const Sense s = u < 0.6 ? Sense::LessEqual : u < 0.9 ? Sense::GreaterEqual : Sense::Equal;
    const double rhs = s == Sense::LessEqual ? rng.uniform(-0.5, 2.0)
                       : s == Sense::GreaterEqual ? rng.uniform(-2.0, 0.5)
                                                  : rng.uniform(-0.5, 0.5);
    out.lp.add_constraint(sparse, s, rhs);
    out.rows.push_back(row);
  }
  return out;
}

// Best feasible intersection of n linearly independent active planes.
std::optional<double> vertex_enumeration(const DenseLp& box) {
  const auto& lp = box.lp;
  const std::size_t n = lp.num_vars(), m = lp.num_constraints();
  std::vector<std::vector<double>> planes;
  std::vector<double> rhs;
  for (std::size_t i = 0; i < m; ++i) planes.push_back(box.rows[i]), rhs.push_back(lp.constraints[i].rhs);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    planes.push_back(e), rhs.push_back(lp.lower[j]);
    planes.push_back(e), rhs.push_back(lp.upper[j]);
  }
  std::vector<bool> pick(planes.size(), false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(n), true);
  std::optional<double> best;
  do {
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    for (std::size_t k = 0; k < planes.size(); ++k)
      if (pick[k]) a.push_back(planes[k]), b.push_back(rhs[k]);
    const auto x = gauss_solve(a, b);
    if (!x) continue;
    bool feasible = true;
    for (std::size_t j = 0; j < n && feasible; ++j)
      feasible = (*x)[j] >= lp.lower[j] - 1e-9 && (*x)[j] <= lp.upper[j] + 1e-9;
    for (std::size_t i = 0; i < m && feasible; ++i) {
      double act = 0.0;
      for (std::size_t j = 0; j < n; ++j) act += box.rows[i][j] * (*x)[j];
      const auto& c = lp.constraints[i];
      feasible = c.sense == Sense::LessEqual      ? act <= c.rhs + 1e-9
                 : c.sense == Sense::GreaterEqual ? act >= c.rhs - 1e-9
                                                  : std::abs(act - c.rhs) <= 1e-9;
    }
    if (!feasible) continue;
    double obj = 0.0;
    for (std::size_t j = 0; j < n; ++j) obj += lp.objective[j] * (*x)[j];
    if (!best || obj < *best) best = obj;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

// Dual objective rebuilt from the reported row multipliers: bound
// multipliers follow from c − Aᵀy and are charged at the bound they
// push against. Returns +inf when a sign condition fails.
double duality_gap(const LinearProgram& lp, const LpSolution& sol) {
  Vector d = lp.objective;
  double dual = 0.0;
  for (std::size_t i = 0; i < lp.num_constraints(); ++i) {
    const auto& c = lp.constraints[i];
    const double y = sol.dual_values[i];
    if ((c.sense == Sense::LessEqual && y > 1e-7) || (c.sense == Sense::GreaterEqual && y < -1e-7)) return kInf;
    for (const auto& e : c.row) d[e.index] -= y * e.value;
    dual += y * c.rhs;
  }
  for (std::size_t j = 0; j < lp.num_vars(); ++j) dual += d[j] > 0 ? d[j] * lp.lower[j] : d[j] * lp.upper[j];
  return std::abs(sol.objective_value - dual);
}

Outcome criterion_2() {
  Rng rng(202);
  std::size_t agree = 0, optimal = 0, infeasible = 0;
  double worst_obj = 0.0, worst_gap = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto box = random_lp(rng);
    const auto oracle = vertex_enumeration(box);
    const auto sol = solve_lp(box.lp);
    if (!oracle) {
      agree += sol.status == LpStatus::Infeasible;
      ++infeasible;
      continue;
    }
    if (sol.status != LpStatus::Optimal) continue;
    ++optimal;
    const double diff = std::abs(sol.objective_value - *oracle);
    const double gap = duality_gap(box.lp, sol);
    worst_obj = std::max(worst_obj, diff);
    worst_gap = std::max(worst_gap, gap);
    agree += diff <= 1e-6 && gap <= 1e-6;
  }
  return {agree == 200, std::to_string(agree) + "/200 agree (" + std::to_string(optimal) + " optimal, " +
                            std::to_string(infeasible) + " infeasible), max |diff| " + fmt(worst_obj) +
                            ", max duality gap " + fmt(worst_gap)};
}

DenseMatrix random_spd(Rng& rng, std::size_t n) {
  DenseMatrix g(n + 2, n);
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < n; ++j) g(i, j) = rng.uniform(-1, 1);
  DenseMatrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t r = 0; r < g.rows(); ++r) s(i, j) += g(r, i) * g(r, j);
      if (i == j) s(i, j) += 0.05;
    }
  return s;
}

// ‖Qv + c − Aᵀλ − μ‖∞ plus feasibility, sign and complementarity
// violations, all recomputed here from the returned primal-dual pair.
double kkt_violation(const QuadraticProgram& qp, const QpSolution& sol) {
  const std::size_t n = qp.num_vars();
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = qp.c[i];
    for (std::size_t j = 0; j < n; ++j) g[i] += qp.q(i, j) * sol.values[j];
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < qp.constraints.size(); ++k) {
    const auto& c = qp.constraints[k];
    const double lam = sol.multipliers[k];
    double act = 0.0;
    for (const auto& e : c.row) {
      g[e.index] -= lam * e.value;
      act += e.value * sol.values[e.index];
    }
    const double slack = act - c.rhs;
    if (c.sense == Sense::GreaterEqual) worst = std::max({worst, -slack, -lam});
    if (c.sense == Sense::LessEqual) worst = std::max({worst, slack, lam});
    if (c.sense == Sense::Equal) worst = std::max(worst, std::abs(slack));
    worst = std::max(worst, std::abs(lam * slack));
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double mu = sol.bound_multipliers[j], v = sol.values[j];
    g[j] -= mu;
    worst = std::max({worst, qp.lower[j] - v, v - qp.upper[j]});
    if (mu > 0) worst = std::max(worst, mu * std::abs(v - qp.lower[j]));
    if (mu < 0) worst = std::max(worst, -mu * std::abs(v - qp.upper[j]));
  }
  for (double r : g) worst = std::max(worst, std::abs(r));
  return worst;
}

Outcome criterion_3() {
  Rng rng(303);
  double worst_kkt = 0.0, worst_unc = 0.0, worst_eq = 0.0;
  std::size_t solved = 0, failures = 0;

  // Inequality and bound constrained instances with a known feasible point.
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng.index(7), m = rng.index(7);
    QuadraticProgram qp(n);
    qp.q = random_spd(rng, n);
    if (trial % 5 == 0)  // rank-deficient Q
      for (std::size_t i = 0; i < n; ++i) qp.q(i, n - 1) = qp.q(n - 1, i) = 0.0;
    for (double& v : qp.c) v = rng.uniform(-3, 3);
    std::vector<double> x0(n);
    for (std::size_t j = 0; j < n; ++j) {
      x0[j] = rng.uniform(-1, 1);
      qp.lower[j] = x0[j] - rng.uniform(0.1, 2.0);
      qp.upper[j] = x0[j] + rng.uniform(0.1, 2.0);
    }
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<SparseEntry> row;
      double act = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double a = rng.uniform(-1, 1);
        row.push_back({j, a});
        act += a * x0[j];
      }
      const double u = rng.uniform();
      if (u < 0.45) qp.add_constraint(row, Sense::LessEqual, act + rng.uniform(0, 0.5));
      else if (u < 0.9) qp.add_constraint(row, Sense::GreaterEqual, act - rng.uniform(0, 0.5));
      else qp.add_constraint(row, Sense::Equal, act);
    }
    const auto sol = solve_qp(qp);
    if (sol.status != QpStatus::Optimal) {
      ++failures;
      continue;
    }
    ++solved;
    worst_kkt = std::max(worst_kkt, kkt_violation(qp, sol));
  }

  // Unconstrained: Qv = −c by direct elimination.
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.index(8);
    QuadraticProgram qp(n);
    qp.q = random_spd(rng, n);
    for (double& v : qp.c) v = rng.uniform(-2, 2);
    const auto sol = solve_qp(qp);
    std::vector<std::vector<double>> a(n, std::vector<double>(n));
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) a[i][j] = qp.q(i, j);
      b[i] = -qp.c[i];
    }
    const auto x = gauss_solve(a, b);
    if (sol.status != QpStatus::Optimal || !x) {
      ++failures;
      continue;
    }
    ++solved;
    worst_kkt = std::max(worst_kkt, kkt_violation(qp, sol));
    for (std::size_t j = 0; j < n; ++j) worst_unc = std::max(worst_unc, std::abs(sol.values[j] - (*x)[j]));
  }

  // Equality-constrained least squares against the bordered KKT system.
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + rng.index(4), m = n + 4, k = 1 + rng.index(2);
    std::vector<std::vector<double>> a(m, std::vector<double>(n)), g(k, std::vector<double>(n));
    std::vector<double> b(m), h(k);
    for (std::size_t i = 0; i < m; ++i) {
      for (double& v : a[i]) v = rng.uniform(-1, 1);
      b[i] = rng.uniform(-1, 1);
    }
    for (std::size_t i = 0; i < k; ++i) {
      for (double& v : g[i]) v = rng.uniform(-1, 1);
      h[i] = rng.uniform(-1, 1);
    }
    QuadraticProgram qp(n);
    std::vector<std::vector<double>> kkt(n + k, std::vector<double>(n + k, 0.0));
    std::vector<double> rhs(n + k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t r = 0; r < m; ++r) s += a[r][i] * a[r][j];
        qp.q(i, j) = kkt[i][j] = 2.0 * s;
      }
      double s = 0.0;
      for (std::size_t r = 0; r < m; ++r) s += a[r][i] * b[r];
      qp.c[i] = -2.0 * s;
      rhs[i] = 2.0 * s;
    }
    for (std::size_t r = 0; r < k; ++r) {
      std::vector<SparseEntry> row;
      for (std::size_t j = 0; j < n; ++j) {
        row.push_back({j, g[r][j]});
        kkt[j][n + r] = kkt[n + r][j] = g[r][j];
      }
      qp.add_constraint(row, Sense::Equal, h[r]);
      rhs[n + r] = h[r];
    }
    const auto sol = solve_qp(qp);
    const auto x = gauss_solve(kkt, rhs);
    if (sol.status != QpStatus::Optimal || !x) {
      ++failures;
      continue;
    }
    ++solved;
    worst_kkt = std::max(worst_kkt, kkt_violation(qp, sol));
    for (std::size_t j = 0; j < n; ++j) worst_eq = std::max(worst_eq, std::abs(sol.values[j] - (*x)[j]));
  }

  const bool pass = failures == 0 && worst_kkt <= 1e-6 && worst_unc <= 1e-8 && worst_eq <= 1e-7;
  return {pass, std::to_string(solved) + " solved, " + std::to_string(failures) + " failed; max KKT " +
                    fmt(worst_kkt) + ", unconstrained " + fmt(worst_unc) + ", equality LS " + fmt(worst_eq)};
}

// Clustered instances small enough for the MILP to close its gap, plus
// any gap-closed instance from the other criteria.
struct LabRun {
  std::string origin;
  Dataset train;
  DesignConfig cfg;
  DesignReport report;
};
std::vector<LabRun> g_lab_runs;

Outcome criterion_5() {
  for (std::size_t n_total : {18, 24})
    for (std::uint64_t seed = 1; seed <= 4; ++seed)
      for (std::size_t n_cl : {2, 3}) {
        ScenarioConfig sc;
        sc.n_total = n_total;
        sc.seed = seed;
        DesignConfig cfg;
        cfg.n_cl = n_cl;
        cfg.milp_limits.time_limit_s = 120.0;
        const auto scenario = generate_scenario(sc);
        const std::string origin = "c5 n=" + std::to_string(n_total) + " seed=" + std::to_string(seed) +
                                   " n_cl=" + std::to_string(n_cl);
        try {
          auto rep = design_mis_con_lab(scenario.train, cfg);
          collect(origin, rep);
          g_lab_runs.push_back({origin, scenario.train, cfg, std::move(rep)});
        } catch (const Error& e) {
          std::cout << "  " << origin << ": " << e.what() << "\n";
        }
      }
  std::size_t closed = 0, dominated = 0;
  for (const auto& run : g_lab_runs) {
    const auto& m = *run.report.milp;
    if (!(m.gap <= 1e-6)) continue;
    ++closed;
    const auto km = kmeans(run.train.inputs, run.cfg.n_cl, run.cfg.seed, {run.cfg.kmeans_restarts, 300});
    const auto ref = partition_l1(run.train, km.labels.labels(), run.cfg.n_cl, run.cfg.param_bound);
    // An infeasible k-means labeling is dominated trivially.
    const bool ok = !ref || m.objective <= *ref + 1e-9 * std::max(1.0, std::abs(*ref));
    dominated += ok;
    std::cout << "  " << run.origin << ": milp " << fmt(m.objective) << ", k-means "
              << (ref ? fmt(*ref) : std::string("infeasible")) << (ok ? "" : "  VIOLATION") << "\n";
  }
  return {closed > 0 && dominated == closed, std::to_string(dominated) + "/" + std::to_string(closed) +
                                                 " gap-closed instances dominate k-means (" +
                                                 std::to_string(g_lab_runs.size()) + " solved)"};
}

Outcome criterion_6() {
  std::vector<double> sis_test, std_test, std_train, lab_train;
  std::size_t failures = 0;
  const auto t0 = Clock::now();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ScenarioConfig sc;
    sc.seed = seed;
    DesignConfig cfg;
    cfg.milp_limits.time_limit_s = 20.0;
    const auto scenario = generate_scenario(sc);
    const auto cmp =
        run_comparison(scenario, {Method::Sis, Method::MisStd, Method::MisCon, Method::MisConLab}, cfg);
    for (const auto& row : cmp.rows) {
      if (!row.ok) {
        ++failures;
        std::cout << "  seed " << seed << " " << to_string(row.method) << ": " << row.error << "\n";
        continue;
      }
      const std::string origin = "c6 seed=" + std::to_string(seed);
      collect(origin, *row.report);
      if (row.method == Method::Sis) sis_test.push_back(row.test_rmse);
      if (row.method == Method::MisStd) std_test.push_back(row.test_rmse), std_train.push_back(row.train_rmse);
      if (row.method == Method::MisConLab) {
        lab_train.push_back(row.train_rmse);
        g_lab_runs.push_back({origin, scenario.train, cfg, *row.report});
      }
    }
    std::cout << "  seed " << seed << ": sis test " << fmt(cmp.rows[0].test_rmse) << ", mis-std test "
              << fmt(cmp.rows[1].test_rmse) << " train " << fmt(cmp.rows[1].train_rmse)
              << ", mis-con-lab train " << fmt(cmp.rows[3].train_rmse) << "\n";
  }
  if (failures) return {false, std::to_string(failures) + " method failures"};
  const double ratio = median(sis_test) / median(std_test);
  const double lab = median(lab_train), stdm = median(std_train);
  return {ratio >= 3.0 && lab <= stdm, "median test SIS/MIS-std " + fmt(ratio) + ", median train mis-con-lab " +
                                           fmt(lab) + " vs mis-std " + fmt(stdm) + ", " +
                                           fmt(seconds_since(t0)) + " s"};
}

Outcome criterion_7() {
  const std::size_t runs = 30;
  std::size_t sis_worst = 0, failures = 0;
  std::map<std::string, std::size_t> worst_by;
  for (std::size_t r = 0; r < runs; ++r) {
    ScenarioConfig sc;
    sc.kind = ScenarioKind::Uniform;
    sc.n_total = 30;
    sc.seed = 1 + r;
    DesignConfig cfg;
    cfg.milp_limits.node_cap = 2000;
    const auto cmp = run_comparison(sc, {Method::Sis, Method::MisStd, Method::MisCon, Method::MisConLab}, cfg);
    std::string worst;
    double worst_v = -1.0;
    for (const auto& row : cmp.rows) {
      if (!row.ok) {
        ++failures;
        continue;
      }
      collect("c7 seed=" + std::to_string(sc.seed), *row.report);
      if (row.test_rmse > worst_v) worst_v = row.test_rmse, worst = to_string(row.method);
    }
    ++worst_by[worst];
    sis_worst += worst == "sis";
  }
  std::string tally;
  for (const auto& [m, c] : worst_by) tally += (tally.empty() ? "" : ", ") + m + " " + std::to_string(c);
  const double share = static_cast<double>(sis_worst) / runs;
  return {failures == 0 && share >= 0.9, "SIS worst in " + std::to_string(sis_worst) + "/" +
                                             std::to_string(runs) + " runs (worst: " + tally + ")"};
}

Outcome criterion_8() {
  Rng rng(808);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    // Truth: p2, b2 random; hyperplane w, b_w through the box; p1 = p2 + w.
    std::vector<double> w{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double c0 = rng.uniform(0.3, 0.7), c1 = rng.uniform(0.3, 0.7);
    const double b_w = -(w[0] * c0 + w[1] * c1);
    const std::vector<double> p2{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double b2 = rng.uniform(-0.5, 0.5);
    const std::vector<double> p1{p2[0] + w[0], p2[1] + w[1]};
    const double b1 = b2 + b_w;
    const double norm = std::hypot(w[0], w[1]);
    DenseMatrix x(40, 2);
    Vector y(40);
    std::vector<ClassIndex> lab(40);
    for (std::size_t i = 0; i < 40;) {
      const double a = rng.uniform(), b = rng.uniform();
      const double h = w[0] * a + w[1] * b + b_w;
      if (std::abs(h) < 0.05 * norm) continue;
      x(i, 0) = a, x(i, 1) = b;
      lab[i] = h > 0 ? 0 : 1;
      y[i] = h > 0 ? p1[0] * a + p1[1] * b + b1 : p2[0] * a + p2[1] * b + b2;
      ++i;
    }
    if (std::count(lab.begin(), lab.end(), 0) < 3 || std::count(lab.begin(), lab.end(), 1) < 3) continue;
    DesignConfig cfg;
    cfg.n_cl = 2;
    const auto rep = design_mis_con(Dataset(x, y), LabelingMatrix::from_labels(lab, 2), cfg);
    collect("c8 trial=" + std::to_string(trial), rep);
    const auto& m = rep.sensor.models;
    const auto& hp = rep.sensor.switching->hyperplanes[0];
    for (std::size_t d = 0; d < 2; ++d)
      worst = std::max({worst, std::abs(m[0].p[d] - p1[d]), std::abs(m[1].p[d] - p2[d]), std::abs(hp.w[d] - w[d])});
    worst = std::max({worst, std::abs(m[0].b_p - b1), std::abs(m[1].b_p - b2), std::abs(hp.b_w - b_w)});
  }
  return {worst <= 1e-6, "max parameter error " + fmt(worst)};
}

Outcome criterion_9() {
  Rng rng(909);
  double worst_slack = 0.0;
  std::size_t wrong = 0, total = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n_p = 2 + rng.index(2), n = 30 + rng.index(30);
    std::vector<double> a(n_p);
    for (double& v : a) v = rng.uniform(-1, 1);
    const double c = rng.uniform(-0.3, 0.3);
    double norm = 0.0;
    for (double v : a) norm += v * v;
    norm = std::sqrt(norm);
    DenseMatrix pts(n, n_p);
    std::vector<bool> pos(n);
    for (std::size_t i = 0; i < n;) {
      double v = c;
      for (std::size_t d = 0; d < n_p; ++d) v += a[d] * (pts(i, d) = rng.uniform());
      if (std::abs(v) < 0.05 * norm) continue;
      pos[i++] = v > 0;
    }
    const auto npos = static_cast<std::size_t>(std::count(pos.begin(), pos.end(), true));
    if (npos == 0 || npos == n) continue;
    const auto svm = train_binary_svm(pts, pos, SvmConfig{1e4});
    for (std::size_t i = 0; i < n; ++i) {
      worst_slack = std::max(worst_slack, svm.slacks[i]);
      const double v = svm.plane.value(pts.row(i));
      wrong += (v > 0) != pos[i];
      ++total;
    }
  }
  return {worst_slack <= 1e-6 && wrong == 0, "max slack " + fmt(worst_slack) + ", accuracy " +
                                                 std::to_string(total - wrong) + "/" + std::to_string(total)};
}

std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    files[e.path().filename().string()] = read_text_file(e.path().string());
  return files;
}

int cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"softsensor"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::cout << "  cli error: " << err.str();
  return code;
}

Outcome criterion_10() {
  const auto root = std::filesystem::temp_directory_path() / "softsensor_acceptance";
  const std::vector<std::vector<std::string>> commands{
      {"compare", "--no-timing", "--node-cap", "300", "--out", (root / "compare").string()},
      {"montecarlo", "--kind", "uniform", "--n-total", "30", "--runs", "6", "--jobs", "3", "--node-cap", "300",
       "--no-timing", "--out", (root / "montecarlo").string()}};
  std::size_t identical = 0, files = 0;
  for (const auto& args : commands) {
    std::filesystem::remove_all(root);
    if (cli(args) != 0) return {false, args[0] + " failed"};
    const auto first = snapshot(args.back());
    std::filesystem::remove_all(root);
    if (cli(args) != 0) return {false, args[0] + " failed on the second run"};
    const auto second = snapshot(args.back());
    for (const auto& [name, text] : first) {
      ++files;
      const auto it = second.find(name);
      if (it != second.end() && it->second == text) ++identical;
      else std::cout << "  " << args[0] << "/" << name << " differs\n";
    }
    if (first.size() != second.size()) return {false, args[0] + " wrote a different file set"};
  }
  std::filesystem::remove_all(root);
  return {identical == files && files > 0,
          std::to_string(identical) + "/" + std::to_string(files) + " output files byte-identical"};
}

Outcome criterion_4() {
  std::size_t ok = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < g_sensors.size(); ++k) {
    const double e = continuity_error(g_sensors[k].sensor, 1000, 4000 + k);
    worst = std::max(worst, e);
    if (e <= 1e-6) ++ok;
    else std::cout << "  " << g_sensors[k].origin << ": continuity error " << fmt(e) << "\n";
  }
  return {!g_sensors.empty() && ok == g_sensors.size(),
          std::to_string(ok) + "/" + std::to_string(g_sensors.size()) +
              " mis-con/mis-con-lab sensors continuous, max error " + fmt(worst)};
}

}  // namespace

int main(int argc, char** argv) {
  // Criterion 4 audits the sensors trained by the others, so it runs last.
  const std::vector<std::pair<int, std::function<Outcome()>>> all{
      {1, criterion_1}, {2, criterion_2}, {3, criterion_3}, {5, criterion_5}, {6, criterion_6},
      {7, criterion_7}, {8, criterion_8}, {9, criterion_9}, {10, criterion_10}, {4, criterion_4}};
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  std::map<int, Outcome> results;
  for (const auto& [id, fn] : all) {
    if (!wanted.empty() && !wanted.count(id)) continue;
    std::cout << "criterion " << id << " ...\n" << std::flush;
    const auto t0 = Clock::now();
    try {
      results[id] = fn();
    } catch (const std::exception& e) {
      results[id] = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "  (" << fmt(seconds_since(t0)) << " s) " << results[id].detail << "\n" << std::flush;
  }
  std::cout << "\n";
  bool all_pass = true;
  for (const auto& [id, r] : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << r.detail << "\n";
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 1;
}
