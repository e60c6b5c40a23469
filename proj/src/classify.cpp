#include "softsensor/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "softsensor/error.hpp"
#include "softsensor/qp.hpp"
#include "softsensor/rng.hpp"

namespace softsensor {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

// Seeds centroids by D² sampling.
DenseMatrix seed_plus_plus(const DenseMatrix& pts, std::size_t k, Rng& rng) {
  const std::size_t n = pts.rows(), d = pts.cols();
  DenseMatrix c(k, d);
  std::size_t first = rng.index(n);
  std::copy(pts.row(first).begin(), pts.row(first).end(), c.row(0).begin());
  Vector dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = sq_dist(pts.row(i), c.row(0));
  for (std::size_t m = 1; m < k; ++m) {
    double total = 0.0;
    for (double v : dist) total += v;
    std::size_t pick = 0;
    if (total <= 0.0) {
      pick = rng.index(n);
    } else {
      double target = rng.uniform() * total;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        if (dist[i] <= 0.0) continue;
        if (target < dist[i]) {
          pick = i;
          break;
        }
        target -= dist[i];
      }
      while (dist[pick] <= 0.0) --pick;  // rounding at the tail
    }
    std::copy(pts.row(pick).begin(), pts.row(pick).end(), c.row(m).begin());
    for (std::size_t i = 0; i < n; ++i) dist[i] = std::min(dist[i], sq_dist(pts.row(i), c.row(m)));
  }
  return c;
}

struct LloydRun {
  DenseMatrix centroids;
  std::vector<ClassIndex> labels;
  double sse = 0.0;
  std::size_t iterations = 0;
  std::vector<double> trace;
};

// Nearest centroid for every point, ties to the smallest index; returns SSE.
double assign(const DenseMatrix& pts, const DenseMatrix& c, std::vector<ClassIndex>& labels,
              Vector& dist) {
  double sse = 0.0;
  for (std::size_t i = 0; i < pts.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    ClassIndex arg = 0;
    for (std::size_t j = 0; j < c.rows(); ++j) {
      const double d = sq_dist(pts.row(i), c.row(j));
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    labels[i] = arg;
    dist[i] = best;
    sse += best;
  }
  return sse;
}

LloydRun lloyd(const DenseMatrix& pts, DenseMatrix centroids, std::size_t max_iter) {
  const std::size_t n = pts.rows(), d = pts.cols(), k = centroids.rows();
  LloydRun run;
  std::vector<ClassIndex> labels(n, 0), previous;
  Vector dist(n);
  double sse = assign(pts, centroids, labels, dist);
  run.trace.push_back(sse);
  for (std::size_t it = 0; it < max_iter; ++it) {
    ++run.iterations;
    // Empty clusters take the point farthest from its centroid.
    while (true) {
      std::vector<std::size_t> count(k, 0);
      for (auto l : labels) ++count[l];
      auto empty = std::find(count.begin(), count.end(), std::size_t{0});
      if (empty == count.end()) break;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i)
        if (count[labels[i]] > 1 && (far == n || dist[i] > dist[far])) far = i;
      if (far == n) break;
      const auto j = static_cast<std::size_t>(empty - count.begin());
      std::copy(pts.row(far).begin(), pts.row(far).end(), centroids.row(j).begin());
      labels[far] = j;
      dist[far] = 0.0;
    }
    DenseMatrix next(k, d);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++count[labels[i]];
      for (std::size_t c = 0; c < d; ++c) next(labels[i], c) += pts(i, c);
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (count[j] == 0) {
        std::copy(centroids.row(j).begin(), centroids.row(j).end(), next.row(j).begin());
        continue;
      }
      for (std::size_t c = 0; c < d; ++c) next(j, c) /= static_cast<double>(count[j]);
    }
    centroids = std::move(next);
    previous = labels;
    const double updated = assign(pts, centroids, labels, dist);
    if (updated > sse * (1.0 + 1e-12) + 1e-15)
      throw solver_error("kmeans: SSE increased from " + std::to_string(sse) + " to " +
                         std::to_string(updated));
    sse = updated;
    run.trace.push_back(sse);
    if (labels == previous) break;
  }
  run.centroids = std::move(centroids);
  run.labels = std::move(labels);
  run.sse = sse;
  return run;
}

}  // namespace

KmeansResult kmeans(const DenseMatrix& points, std::size_t n_cl, std::uint64_t seed,
                    const KmeansOptions& options) {
  if (n_cl == 0) throw validation_error("kmeans: n_cl must be positive");
  if (points.rows() < n_cl)
    throw validation_error("kmeans: " + std::to_string(points.rows()) + " points for " +
                           std::to_string(n_cl) + " clusters");
  points.check_finite();
  std::optional<LloydRun> best;
  const std::size_t restarts = std::max<std::size_t>(1, options.restarts);
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng = Rng::stream(seed, r);
    auto run = lloyd(points, seed_plus_plus(points, n_cl, rng), options.max_iterations);
    if (!best || run.sse < best->sse) best = std::move(run);
  }
  KmeansResult res;
  res.centroids = std::move(best->centroids);
  res.labels = LabelingMatrix::from_labels(best->labels, n_cl);
  res.sse = best->sse;
  res.iterations = best->iterations;
  res.sse_trace = std::move(best->trace);
  return res;
}

void SvmConfig::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw validation_error("svm: gamma must be finite and positive");
  if (!(tolerance > 0.0)) throw validation_error("svm: tolerance must be positive");
}

BinarySvm train_binary_svm(const DenseMatrix& points, const std::vector<bool>& positive,
                           const SvmConfig& cfg) {
  cfg.validate();
  const std::size_t m = points.rows(), d = points.cols();
  if (positive.size() != m) throw validation_error("svm: label count mismatch");
  const auto pos = static_cast<std::size_t>(std::count(positive.begin(), positive.end(), true));
  if (pos == 0 || pos == m) throw validation_error("svm: both classes need at least one point");

  // Variables: w (d), b, e (m).
  QuadraticProgram qp(d + 1 + m);
  for (std::size_t j = 0; j < d; ++j) qp.q(j, j) = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    qp.c[d + 1 + i] = cfg.gamma;
    qp.lower[d + 1 + i] = 0.0;
  }
  for (std::size_t i = 0; i < m; ++i) {
    const double sign = positive[i] ? 1.0 : -1.0;
    std::vector<SparseEntry> row;
    for (std::size_t j = 0; j < d; ++j)
      if (points(i, j) != 0.0) row.push_back({j, sign * points(i, j)});
    row.push_back({d, sign});
    row.push_back({d + 1 + i, 1.0});
    qp.add_constraint(std::move(row), Sense::GreaterEqual, 1.0);
  }
  const auto sol = solve_qp(qp);
  if (sol.status != QpStatus::Optimal) throw solver_error("svm: QP reported infeasible");
  BinarySvm out;
  out.plane.w.assign(sol.values.begin(), sol.values.begin() + static_cast<std::ptrdiff_t>(d));
  out.plane.b_w = sol.values[d];
  out.slacks.assign(sol.values.begin() + static_cast<std::ptrdiff_t>(d + 1), sol.values.end());
  for (double& e : out.slacks) e = std::max(e, 0.0);
  out.objective = sol.objective_value;
  out.kkt_residual = sol.kkt_residual;
  return out;
}

BinarySvm train_binary_svm(const DenseMatrix& points, const LabelingMatrix& labels,
                           const SvmConfig& cfg) {
  if (labels.num_classes() != 2) throw validation_error("svm: binary training needs 2 classes");
  if (labels.rows() != points.rows()) throw validation_error("svm: label count mismatch");
  std::vector<bool> positive(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) positive[i] = labels(i, 0);
  return train_binary_svm(points, positive, cfg);
}

SwitchingLogic train_multiclass_svm(const DenseMatrix& points, const LabelingMatrix& labels,
                                    const SvmConfig& cfg) {
  const std::size_t n_cl = labels.num_classes();
  if (n_cl < 2) throw validation_error("svm: at least 2 classes required");
  if (labels.rows() != points.rows()) throw validation_error("svm: label count mismatch");
  labels.validate();
  const auto sizes = labels.class_sizes();
  for (std::size_t j = 0; j < n_cl; ++j)
    if (sizes[j] == 0) throw validation_error("svm: class " + std::to_string(j + 1) + " is empty");
  SwitchingLogic sw;
  sw.n_cl = n_cl;
  for (std::size_t k = 0; k < num_pairs(n_cl); ++k) {
    const auto [r, s] = combination(n_cl, k);
    std::vector<std::size_t> rows;
    std::vector<bool> positive;
    for (std::size_t i = 0; i < points.rows(); ++i) {
      if (labels(i, r) || labels(i, s)) {
        rows.push_back(i);
        positive.push_back(labels(i, r));
      }
    }
    DenseMatrix sub(rows.size(), points.cols());
    for (std::size_t a = 0; a < rows.size(); ++a)
      for (std::size_t c = 0; c < points.cols(); ++c) sub(a, c) = points(rows[a], c);
    sw.hyperplanes.push_back(train_binary_svm(sub, positive, cfg).plane);
    sw.pairs.emplace_back(r, s);
  }
  return sw;
}

}  // namespace softsensor
