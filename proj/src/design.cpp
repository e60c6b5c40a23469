#include "softsensor/design.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "softsensor/error.hpp"
#include "softsensor/format.hpp"
#include "softsensor/qp.hpp"
#include "softsensor/rng.hpp"

namespace softsensor {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Least-squares affine fit on the given rows ([x | 1] design matrix).
AffineModel fit_affine(const Dataset& data, const std::vector<std::size_t>& rows) {
  const std::size_t n_p = data.num_inputs();
  DenseMatrix a(rows.size(), n_p + 1);
  Vector b(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t j = 0; j < n_p; ++j) a(k, j) = data.inputs(rows[k], j);
    a(k, n_p) = 1.0;
    b[k] = data.outputs[rows[k]];
  }
  const Vector sol = least_squares(a, b);
  AffineModel m;
  m.p.assign(sol.begin(), sol.begin() + static_cast<std::ptrdiff_t>(n_p));
  m.b_p = sol[n_p];
  return m;
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> r(n);
  std::iota(r.begin(), r.end(), std::size_t{0});
  return r;
}

void finish_report(DesignReport& rep, const Dataset& train) {
  rep.sensor.validate();
  rep.train_rmse = rmse(train.outputs, predict_all(train, rep.sensor));
}

std::optional<double> triple_dependency(const SwitchingLogic& sw) {
  if (sw.n_cl < 3) return std::nullopt;
  auto index_of = [&](ClassIndex r, ClassIndex s) {
    for (std::size_t k = 0; k < sw.pairs.size(); ++k)
      if (sw.pairs[k] == std::pair<ClassIndex, ClassIndex>{r, s}) return k;
    throw validation_error("switching: missing pair");
  };
  double worst = 0.0;
  for (ClassIndex r = 0; r < sw.n_cl; ++r)
    for (ClassIndex s = r + 1; s < sw.n_cl; ++s)
      for (ClassIndex t = s + 1; t < sw.n_cl; ++t) {
        const auto& rs = sw.hyperplanes[index_of(r, s)];
        const auto& rt = sw.hyperplanes[index_of(r, t)];
        const auto& st = sw.hyperplanes[index_of(s, t)];
        for (std::size_t d = 0; d < rs.w.size(); ++d)
          worst = std::max(worst, std::abs(rt.w[d] - rs.w[d] - st.w[d]));
        worst = std::max(worst, std::abs(rt.b_w - rs.b_w - st.b_w));
      }
  return worst;
}

SensorModel single_model_sensor(AffineModel m) {
  SensorModel s;
  s.scaler = Scaler::identity(m.p.size());
  s.models.push_back(std::move(m));
  return s;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::Sis: return "sis";
    case Method::MisStd: return "mis-std";
    case Method::MisCon: return "mis-con";
    case Method::MisConLab: return "mis-con-lab";
  }
  return "?";
}

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names{"sis", "mis-std", "mis-con", "mis-con-lab"};
  return names;
}

Method parse_method(const std::string& name) {
  if (name == "sis") return Method::Sis;
  if (name == "mis-std") return Method::MisStd;
  if (name == "mis-con") return Method::MisCon;
  if (name == "mis-con-lab") return Method::MisConLab;
  throw validation_error("unknown method '" + name + "'; valid methods: sis, mis-std, mis-con, mis-con-lab");
}

double DesignConfig::big_m_for(std::size_t n_p) const {
  return big_m.value_or(2.0 * (param_bound * static_cast<double>(n_p + 1) + 1.0));
}

void DesignConfig::validate(std::size_t n_p) const {
  if (n_cl < 1) throw validation_error("design: n_cl must be at least 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw validation_error("design: gamma must be positive");
  if (!(param_bound > 0.0) || !std::isfinite(param_bound))
    throw validation_error("design: param_bound must be positive");
  if (!(regularization_weight >= 0.0) || !std::isfinite(regularization_weight))
    throw validation_error("design: regularization_weight must be nonnegative");
  const double required = 2.0 * (param_bound * static_cast<double>(n_p + 1) + 1.0);
  const double m = big_m_for(n_p);
  if (!std::isfinite(m) || m < required)
    throw validation_error("design: big_m = " + format_number(m) + " is below the safe value " +
                           format_number(required) + " = 2·(param_bound·(n_p+1)+1)");
  if (!(milp_limits.time_limit_s >= 0.0)) throw validation_error("design: time limit must be nonnegative");
  if (!(milp_limits.gap_target >= 0.0)) throw validation_error("design: gap target must be nonnegative");
}

double DesignReport::total_seconds() const {
  double s = 0.0;
  for (const auto& t : timings) s += t.seconds;
  return s;
}

DesignReport design_sis(const Dataset& train) {
  train.validate();
  const auto t0 = Clock::now();
  if (train.size() < train.num_inputs() + 1)
    throw validation_error("sis: need at least n_p + 1 = " + std::to_string(train.num_inputs() + 1) +
                           " points");
  DesignReport rep;
  rep.method = Method::Sis;
  rep.sensor = single_model_sensor(fit_affine(train, all_rows(train.size())));
  rep.labels_used = LabelingMatrix(train.size(), 1);
  rep.timings.push_back({"regression", seconds_since(t0)});
  finish_report(rep, train);
  return rep;
}

DesignReport design_mis_std(const Dataset& train, const DesignConfig& cfg) {
  train.validate();
  const std::size_t n_p = train.num_inputs();
  cfg.validate(n_p);
  if (cfg.n_cl == 1) {
    auto rep = design_sis(train);
    rep.method = Method::MisStd;
    return rep;
  }
  if (train.size() < cfg.n_cl * (n_p + 1))
    throw validation_error("mis-std: need at least n_cl·(n_p+1) = " +
                           std::to_string(cfg.n_cl * (n_p + 1)) + " points");
  DesignReport rep;
  rep.method = Method::MisStd;

  auto t0 = Clock::now();
  const auto km = kmeans(train.inputs, cfg.n_cl, cfg.seed, {cfg.kmeans_restarts, 300});
  rep.timings.push_back({"kmeans", seconds_since(t0)});

  t0 = Clock::now();
  SwitchingLogic sw = train_multiclass_svm(train.inputs, km.labels, SvmConfig{cfg.gamma});
  rep.timings.push_back({"svm", seconds_since(t0)});

  t0 = Clock::now();
  std::vector<ClassIndex> routed(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) routed[i] = assign_region(train.x(i), sw);
  rep.labels_used = LabelingMatrix::from_labels(routed, cfg.n_cl);
  const AffineModel global = fit_affine(train, all_rows(train.size()));
  for (ClassIndex j = 0; j < cfg.n_cl; ++j) {
    const auto rows = rep.labels_used.members(j);
    std::optional<AffineModel> m;
    if (rows.size() >= n_p + 1) {
      try {
        m = fit_affine(train, rows);
      } catch (const Error&) {
        // collinear region: same fallback as an undersized one
      }
    }
    if (!m) {
      rep.fallback_regions.push_back(j);
      m = global;
    }
    rep.sensor.models.push_back(*m);
  }
  rep.timings.push_back({"regression", seconds_since(t0)});
  rep.sensor.switching = std::move(sw);
  rep.sensor.scaler = Scaler::identity(n_p);
  finish_report(rep, train);
  return rep;
}

DesignReport design_mis_con(const Dataset& train, const LabelingMatrix& labels,
                            const DesignConfig& cfg) {
  train.validate();
  const std::size_t n = train.size(), n_p = train.num_inputs(), n_cl = labels.num_classes();
  cfg.validate(n_p);
  labels.validate();
  if (labels.rows() != n) throw validation_error("mis-con: label count does not match the data");
  if (n_cl < 2) throw validation_error("mis-con: at least 2 classes required");
  const auto sizes = labels.class_sizes();
  for (ClassIndex j = 0; j < n_cl; ++j)
    if (sizes[j] == 0) throw validation_error("mis-con: class " + std::to_string(j + 1) + " is empty");

  const auto t0 = Clock::now();
  const std::size_t n_sp = num_pairs(n_cl);
  // Layout: [w_k, b_w,k]_k, then slacks per pair, then [p_j, b_p,j]_j.
  std::vector<std::vector<std::size_t>> pair_rows(n_sp);
  std::vector<std::size_t> e_offset(n_sp);
  std::size_t nv = n_sp * (n_p + 1);
  for (std::size_t k = 0; k < n_sp; ++k) {
    const auto [r, s] = combination(n_cl, k);
    for (std::size_t i = 0; i < n; ++i)
      if (labels(i, r) || labels(i, s)) pair_rows[k].push_back(i);
    e_offset[k] = nv;
    nv += pair_rows[k].size();
  }
  const std::size_t p_offset = nv;
  nv += n_cl * (n_p + 1);
  auto w_idx = [&](std::size_t k, std::size_t d) { return k * (n_p + 1) + d; };
  auto p_idx = [&](std::size_t j, std::size_t d) { return p_offset + j * (n_p + 1) + d; };

  QuadraticProgram qp(nv);
  for (std::size_t i = 0; i < n; ++i) {
    const ClassIndex j = labels.label(i);
    const double y = train.outputs[i];
    for (std::size_t a = 0; a <= n_p; ++a) {
      const double fa = a < n_p ? train.inputs(i, a) : 1.0;
      qp.c[p_idx(j, a)] += -2.0 * y * fa;
      for (std::size_t b = 0; b <= n_p; ++b) {
        const double fb = b < n_p ? train.inputs(i, b) : 1.0;
        qp.q(p_idx(j, a), p_idx(j, b)) += 2.0 * fa * fb;
      }
    }
    qp.constant += y * y;
  }
  for (std::size_t k = 0; k < n_sp; ++k) {
    for (std::size_t d = 0; d < n_p; ++d) qp.q(w_idx(k, d), w_idx(k, d)) += cfg.regularization_weight;
    for (std::size_t m = 0; m < pair_rows[k].size(); ++m) {
      qp.c[e_offset[k] + m] = cfg.regularization_weight * cfg.gamma;
      qp.lower[e_offset[k] + m] = 0.0;
    }
  }
  for (std::size_t k = 0; k < n_sp; ++k) {
    const auto [r, s] = combination(n_cl, k);
    for (std::size_t m = 0; m < pair_rows[k].size(); ++m) {
      const std::size_t i = pair_rows[k][m];
      const double sign = labels(i, r) ? 1.0 : -1.0;
      std::vector<SparseEntry> row;
      for (std::size_t d = 0; d < n_p; ++d) row.push_back({w_idx(k, d), sign * train.inputs(i, d)});
      row.push_back({w_idx(k, n_p), sign});
      row.push_back({e_offset[k] + m, 1.0});
      qp.add_constraint(std::move(row), Sense::GreaterEqual, 1.0);
    }
    for (std::size_t d = 0; d <= n_p; ++d)
      qp.add_constraint({{p_idx(r, d), 1.0}, {p_idx(s, d), -1.0}, {w_idx(k, d), -1.0}}, Sense::Equal,
                        0.0);
  }
  const auto sol = solve_qp(qp);
  if (sol.status != QpStatus::Optimal) {
    std::string msg = "mis-con: QP infeasible";
    if (n_cl >= 3) msg += "; continuity couplings conflict within class triple (1,2,3)";
    throw solver_error(msg);
  }

  DesignReport rep;
  rep.method = Method::MisCon;
  rep.labels_used = labels;
  for (ClassIndex j = 0; j < n_cl; ++j) {
    AffineModel m;
    for (std::size_t d = 0; d < n_p; ++d) m.p.push_back(sol.values[p_idx(j, d)]);
    m.b_p = sol.values[p_idx(j, n_p)];
    rep.sensor.models.push_back(std::move(m));
  }
  SwitchingLogic sw;
  sw.n_cl = n_cl;
  for (std::size_t k = 0; k < n_sp; ++k) {
    const auto [r, s] = combination(n_cl, k);
    // The coupling rows make the hyperplane equal to the model difference;
    // it is rebuilt from the models so the identity holds to rounding.
    Hyperplane h;
    for (std::size_t d = 0; d < n_p; ++d)
      h.w.push_back(rep.sensor.models[r].p[d] - rep.sensor.models[s].p[d]);
    h.b_w = rep.sensor.models[r].b_p - rep.sensor.models[s].b_p;
    sw.hyperplanes.push_back(std::move(h));
    sw.pairs.emplace_back(r, s);
  }
  rep.triple_dependency = triple_dependency(sw);
  rep.sensor.switching = std::move(sw);
  rep.sensor.scaler = Scaler::identity(n_p);
  rep.timings.push_back({"qp", seconds_since(t0)});
  rep.continuity = check_continuity(rep.sensor, 1000, cfg.seed);
  if (rep.continuity->degenerate_hyperplanes > 0)
    rep.notes.push_back(std::to_string(rep.continuity->degenerate_hyperplanes) +
                        " switching hyperplane(s) have a zero normal: the two models coincide");
  finish_report(rep, train);
  return rep;
}

MisConLabProgram build_mis_con_lab_milp(const Dataset& train, const DesignConfig& cfg) {
  train.validate();
  const std::size_t n = train.size(), n_p = train.num_inputs(), n_cl = cfg.n_cl;
  cfg.validate(n_p);
  if (n_cl < 2) throw validation_error("mis-con-lab: n_cl must be at least 2");
  if (n < n_cl * (n_p + 1))
    throw validation_error("mis-con-lab: need at least n_cl·(n_p+1) = " +
                           std::to_string(n_cl * (n_p + 1)) + " points");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < n_p; ++d)
      if (train.inputs(i, d) < -1e-9 || train.inputs(i, d) > 1.0 + 1e-9)
        throw validation_error("mis-con-lab: inputs must be normalized to [0,1] for the big-M bound (row " +
                               std::to_string(i + 1) + ")");

  MisConLabProgram prog;
  auto& L = prog.layout;
  L.n = n, L.n_p = n_p, L.n_cl = n_cl, L.n_sp = num_pairs(n_cl);
  auto& lp = prog.mip.base;
  const double pb = cfg.param_bound;
  const double big_m = cfg.big_m_for(n_p);

  for (std::size_t k = 0; k < L.n_sp; ++k)
    for (std::size_t d = 0; d <= n_p; ++d) lp.add_variable(-pb, pb, 0.0);
  for (std::size_t k = 0; k < L.n_sp; ++k)
    for (std::size_t i = 0; i < n; ++i) lp.add_variable(0.0, pb, 0.0);
  for (std::size_t j = 0; j < n_cl; ++j)
    for (std::size_t d = 0; d <= n_p; ++d) lp.add_variable(-pb, pb, 0.0);
  for (std::size_t i = 0; i < n; ++i) lp.add_variable(0.0, kInf, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n_cl; ++j) {
      lp.add_variable(0.0, 1.0, 0.0);
      prog.mip.binary_vars.push_back(L.z(i, j));
    }

  // (a) one class per point
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<SparseEntry> row;
    for (std::size_t j = 0; j < n_cl; ++j) row.push_back({L.z(i, j), 1.0});
    lp.add_constraint(std::move(row), Sense::Equal, 1.0);
  }
  // (b) epigraph of |y − p_jᵀx − b_p,j|, active when z_ij = 1
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n_cl; ++j) {
      const double y = train.outputs[i];
      for (double sign : {1.0, -1.0}) {
        // t_i + sign·(p_jᵀx_i + b_p,j) − M·z_ij ≥ sign·y − M
        std::vector<SparseEntry> row{{L.t(i), 1.0}};
        for (std::size_t d = 0; d < n_p; ++d)
          if (train.inputs(i, d) != 0.0) row.push_back({L.p(j, d), sign * train.inputs(i, d)});
        row.push_back({L.b_p(j), sign});
        row.push_back({L.z(i, j), -big_m});
        lp.add_constraint(std::move(row), Sense::GreaterEqual, sign * y - big_m);
      }
    }
  // (c) soft-margin rows, active for the pair's two classes
  for (std::size_t k = 0; k < L.n_sp; ++k) {
    const auto [r, s] = combination(n_cl, k);
    for (std::size_t i = 0; i < n; ++i)
      for (auto [sign, cls] : {std::pair{1.0, r}, std::pair{-1.0, s}}) {
        std::vector<SparseEntry> row;
        for (std::size_t d = 0; d < n_p; ++d)
          if (train.inputs(i, d) != 0.0) row.push_back({L.w(k, d), sign * train.inputs(i, d)});
        row.push_back({L.b_w(k), sign});
        row.push_back({L.e(k, i), 1.0});
        row.push_back({L.z(i, cls), -big_m});
        lp.add_constraint(std::move(row), Sense::GreaterEqual, 1.0 - big_m);
      }
  }
  // (d) continuity of slopes and offsets
  for (std::size_t k = 0; k < L.n_sp; ++k) {
    const auto [r, s] = combination(n_cl, k);
    for (std::size_t d = 0; d < n_p; ++d)
      lp.add_constraint({{L.p(r, d), 1.0}, {L.p(s, d), -1.0}, {L.w(k, d), -1.0}}, Sense::Equal, 0.0);
    lp.add_constraint({{L.b_p(r), 1.0}, {L.b_p(s), -1.0}, {L.b_w(k), -1.0}}, Sense::Equal, 0.0);
  }
  // (e) ordered offsets remove label permutations
  for (std::size_t j = 0; j + 1 < n_cl; ++j)
    lp.add_constraint({{L.b_p(j), 1.0}, {L.b_p(j + 1), -1.0}}, Sense::LessEqual, 0.0);
  // (f) minimum class size
  for (std::size_t j = 0; j < n_cl; ++j) {
    std::vector<SparseEntry> row;
    for (std::size_t i = 0; i < n; ++i) row.push_back({L.z(i, j), 1.0});
    lp.add_constraint(std::move(row), Sense::GreaterEqual, static_cast<double>(n_p + 1));
  }
  prog.mip.validate();
  return prog;
}

std::optional<double> fixed_labeling_objective(const MisConLabProgram& prog,
                                               const LabelingMatrix& labels, Vector* values) {
  const auto& L = prog.layout;
  if (labels.rows() != L.n || labels.num_classes() != L.n_cl)
    throw validation_error("fixed labeling: shape does not match the program");
  LinearProgram lp = prog.mip.base;
  for (std::size_t i = 0; i < L.n; ++i)
    for (std::size_t j = 0; j < L.n_cl; ++j) {
      const double v = labels(i, j) ? 1.0 : 0.0;
      lp.lower[L.z(i, j)] = lp.upper[L.z(i, j)] = v;
    }
  const auto sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal) return std::nullopt;
  if (values) {
    *values = sol.values;
    for (std::size_t i = 0; i < L.n; ++i)
      for (std::size_t j = 0; j < L.n_cl; ++j) (*values)[L.z(i, j)] = labels(i, j) ? 1.0 : 0.0;
  }
  return sol.objective_value;
}

namespace {

struct Candidate {
  double objective;
  Vector values;
  LabelingMatrix labels;
};

// Best class permutation of `labels` under the ordered-offset constraint.
std::optional<Candidate> score_permutations(const MisConLabProgram& prog,
                                            const std::vector<ClassIndex>& labels) {
  const std::size_t n_cl = prog.layout.n_cl;
  std::vector<ClassIndex> perm(n_cl);
  std::iota(perm.begin(), perm.end(), ClassIndex{0});
  std::optional<Candidate> best;
  std::size_t tried = 0;
  do {
    std::vector<ClassIndex> mapped(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) mapped[i] = perm[labels[i]];
    const auto z = LabelingMatrix::from_labels(mapped, n_cl);
    Vector v;
    const auto obj = fixed_labeling_objective(prog, z, &v);
    if (obj && (!best || *obj < best->objective - 1e-12)) best = Candidate{*obj, std::move(v), z};
  } while (++tried < 24 && std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Reassigns every point to its smallest-residual model and rescores until
// the L1 objective stops improving.
Candidate improve_labeling(const MisConLabProgram& prog, const Dataset& train, Candidate cur) {
  const auto& L = prog.layout;
  for (int round = 0; round < 50; ++round) {
    std::vector<ClassIndex> next(L.n);
    for (std::size_t i = 0; i < L.n; ++i) {
      double best = kInf;
      for (ClassIndex j = 0; j < L.n_cl; ++j) {
        double f = cur.values[L.b_p(j)];
        for (std::size_t d = 0; d < L.n_p; ++d) f += cur.values[L.p(j, d)] * train.inputs(i, d);
        const double r = std::abs(train.outputs[i] - f);
        if (r < best - 1e-12) best = r, next[i] = j;
      }
    }
    if (next == cur.labels.labels()) break;
    const auto sizes = LabelingMatrix::from_labels(next, L.n_cl).class_sizes();
    if (*std::min_element(sizes.begin(), sizes.end()) < L.n_p + 1) break;
    auto cand = score_permutations(prog, next);
    if (!cand || cand->objective >= cur.objective - 1e-9) break;
    cur = std::move(*cand);
  }
  return cur;
}

// Fits least squares per class and moves each point to the class whose
// model is largest there, which is how coupled hyperplanes route. Returns
// nullopt when a class becomes too small to fit.
std::optional<std::vector<ClassIndex>> max_affine_partition(const Dataset& train,
                                                            std::vector<ClassIndex> labels,
                                                            std::size_t n_cl) {
  const std::size_t n_p = train.num_inputs();
  for (int round = 0; round < 100; ++round) {
    const auto z = LabelingMatrix::from_labels(labels, n_cl);
    std::vector<AffineModel> models;
    for (ClassIndex j = 0; j < n_cl; ++j) {
      const auto rows = z.members(j);
      if (rows.size() < n_p + 1) return std::nullopt;
      try {
        models.push_back(fit_affine(train, rows));
      } catch (const Error&) {
        return std::nullopt;
      }
    }
    std::vector<ClassIndex> next(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
      double best = -kInf;
      for (ClassIndex j = 0; j < n_cl; ++j) {
        const double f = models[j].value(train.x(i));
        if (f > best) best = f, next[i] = j;
      }
    }
    if (next == labels) break;
    labels = std::move(next);
  }
  const auto sizes = LabelingMatrix::from_labels(labels, n_cl).class_sizes();
  if (*std::min_element(sizes.begin(), sizes.end()) < n_p + 1) return std::nullopt;
  return labels;
}

// Nearest-center labeling around n_cl distinct random training points.
std::vector<ClassIndex> random_voronoi(const Dataset& train, std::size_t n_cl, Rng& rng) {
  std::vector<std::size_t> idx(train.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  rng.shuffle(idx);
  std::vector<ClassIndex> labels(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    double best = kInf;
    for (ClassIndex j = 0; j < n_cl; ++j) {
      double d2 = 0.0;
      for (std::size_t d = 0; d < train.num_inputs(); ++d) {
        const double diff = train.inputs(i, d) - train.inputs(idx[j], d);
        d2 += diff * diff;
      }
      if (d2 < best) best = d2, labels[i] = j;
    }
  }
  return labels;
}

}  // namespace

DesignReport design_mis_con_lab(const Dataset& train, const DesignConfig& cfg) {
  auto t0 = Clock::now();
  const auto prog = build_mis_con_lab_milp(train, cfg);
  std::vector<StageTiming> timings{{"build", seconds_since(t0)}};

  MipOptions opts;
  opts.limits = cfg.milp_limits;
  opts.log = cfg.log;
  std::optional<double> kmeans_obj, start_obj;
  if (cfg.mip_start) {
    t0 = Clock::now();
    const auto km = kmeans(train.inputs, cfg.n_cl, cfg.seed, {cfg.kmeans_restarts, 300});
    std::optional<Candidate> best;
    auto consider = [&](const std::vector<ClassIndex>& labels) {
      auto cand = score_permutations(prog, labels);
      if (!cand) return std::optional<double>{};
      const double first = cand->objective;
      auto improved = improve_labeling(prog, train, std::move(*cand));
      if (!best || improved.objective < best->objective - 1e-12) best = std::move(improved);
      return std::optional<double>{first};
    };
    kmeans_obj = consider(km.labels.labels());
    // Max-affine partitions from the k-means labeling and from random
    // Voronoi splits; these often escape the k-means local optimum.
    std::vector<std::vector<ClassIndex>> seeds{km.labels.labels()};
    for (std::size_t r = 0; r < cfg.kmeans_restarts; ++r) {
      Rng rng = Rng::stream(cfg.seed, 0x6d6178ULL + r);
      seeds.push_back(random_voronoi(train, cfg.n_cl, rng));
    }
    for (const auto& s : seeds)
      if (auto part = max_affine_partition(train, s, cfg.n_cl)) consider(*part);
    if (best) {
      start_obj = best->objective;
      opts.initial_solution = std::move(best->values);
    }
    timings.push_back({"start", seconds_since(t0)});
  }

  t0 = Clock::now();
  const auto res = solve_milp(prog.mip, opts);
  timings.push_back({"milp", seconds_since(t0)});
  if (!res.has_solution) {
    if (res.status == MipStatus::Infeasible)
      throw solver_error("mis-con-lab: no feasible labeling found (program infeasible)");
    throw solver_error("mis-con-lab: no feasible labeling found within limits (" +
                       to_string(res.status) + ")");
  }

  const auto& L = prog.layout;
  std::vector<ClassIndex> labels(L.n, 0);
  for (std::size_t i = 0; i < L.n; ++i) {
    double best = -1.0;
    for (ClassIndex j = 0; j < L.n_cl; ++j)
      if (res.values[L.z(i, j)] > best) best = res.values[L.z(i, j)], labels[i] = j;
  }
  auto rep = design_mis_con(train, LabelingMatrix::from_labels(labels, L.n_cl), cfg);
  rep.method = Method::MisConLab;
  timings.push_back({"refit", rep.total_seconds()});
  rep.timings = std::move(timings);
  MilpStats stats;
  stats.status = res.status;
  stats.objective = res.objective_value;
  stats.best_bound = res.best_bound;
  stats.gap = res.gap;
  stats.nodes = res.nodes_explored;
  stats.lp_iterations = res.lp_iterations;
  stats.limit_hit = res.status == MipStatus::TimedOut || res.status == MipStatus::Feasible;
  stats.start_objective = start_obj;
  stats.kmeans_objective = kmeans_obj;
  rep.milp = stats;
  if (stats.limit_hit)
    rep.notes.push_back("MILP stopped at a limit (" + to_string(res.status) + "), gap " +
                        format_number(res.gap) + "; the incumbent labeling was refit");
  return rep;
}

DesignReport design(Method method, const Dataset& train, const DesignConfig& cfg) {
  switch (method) {
    case Method::Sis: return design_sis(train);
    case Method::MisStd: return design_mis_std(train, cfg);
    case Method::MisCon: {
      if (!train.labels.empty()) {
        std::size_t n_cl = cfg.n_cl;
        for (auto l : train.labels) n_cl = std::max(n_cl, l + 1);
        return design_mis_con(train, LabelingMatrix::from_labels(train.labels, n_cl), cfg);
      }
      train.validate();
      cfg.validate(train.num_inputs());
      const auto t0 = Clock::now();
      const auto km = kmeans(train.inputs, cfg.n_cl, cfg.seed, {cfg.kmeans_restarts, 300});
      const double t_km = seconds_since(t0);
      auto rep = design_mis_con(train, km.labels, cfg);
      rep.timings.insert(rep.timings.begin(), {"kmeans", t_km});
      return rep;
    }
    case Method::MisConLab: return design_mis_con_lab(train, cfg);
  }
  throw validation_error("unknown method");
}

ContinuityCheck check_continuity(const SensorModel& sensor, std::size_t per_hyperplane,
                                  std::uint64_t seed, double tol) {
  ContinuityCheck out;
  if (!sensor.switching) return out;
  const auto& sw = *sensor.switching;
  const std::size_t n_p = sensor.num_inputs();
  for (std::size_t k = 0; k < sw.hyperplanes.size(); ++k) {
    const auto& h = sw.hyperplanes[k];
    const auto& fr = sensor.models[sw.pairs[k].first];
    const auto& fs = sensor.models[sw.pairs[k].second];
    Rng rng = Rng::stream(seed, 0x636f6e74ULL + k);
    const double ww = dot(h.w, h.w);
    if (h.degenerate()) {
      ++out.degenerate_hyperplanes;
      // Zero normal: the null set is everything (b_w = 0) or empty.
      if (std::abs(h.b_w) > 1e-12) continue;
    }
    for (std::size_t m = 0; m < per_hyperplane; ++m) {
      Vector x(n_p);
      for (double& v : x) v = rng.uniform();
      if (!h.degenerate()) {
        const double shift = h.value(x) / ww;
        for (std::size_t d = 0; d < n_p; ++d) x[d] -= shift * h.w[d];
      }
      out.max_error = std::max(out.max_error, std::abs(fr.value(x) - fs.value(x)));
      ++out.samples;
    }
  }
  out.pass = out.max_error <= tol;
  return out;
}

}  // namespace softsensor
