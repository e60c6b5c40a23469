#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "doctest.h"
#include "softsensor/classify.hpp"
#include "softsensor/error.hpp"
#include "softsensor/rng.hpp"

using namespace softsensor;

namespace {

double sse_of(const DenseMatrix& pts, const std::vector<ClassIndex>& labels, std::size_t k) {
  const std::size_t d = pts.cols();
  DenseMatrix c(k, d);
  std::vector<double> count(k, 0.0);
  for (std::size_t i = 0; i < pts.rows(); ++i) {
    count[labels[i]] += 1.0;
    for (std::size_t j = 0; j < d; ++j) c(labels[i], j) += pts(i, j);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < pts.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = pts(i, j) - c(labels[i], j) / count[labels[i]];
      s += diff * diff;
    }
  return s;
}

DenseMatrix blobs(Rng& rng, const std::vector<std::pair<double, double>>& centers,
                  std::size_t per, double spread, std::vector<ClassIndex>& truth) {
  DenseMatrix pts(centers.size() * per, 2);
  for (std::size_t c = 0; c < centers.size(); ++c)
    for (std::size_t i = 0; i < per; ++i) {
      const std::size_t r = c * per + i;
      pts(r, 0) = centers[c].first + rng.uniform(-spread, spread);
      pts(r, 1) = centers[c].second + rng.uniform(-spread, spread);
      truth.push_back(c);
    }
  return pts;
}

}  // namespace

TEST_CASE("kmeans with one cluster returns the mean") {
  const auto pts = DenseMatrix::from_rows({{0, 0}, {1, 0}, {2, 3}});
  const auto res = kmeans(pts, 1, 7);
  CHECK(res.centroids(0, 0) == doctest::Approx(1.0));
  CHECK(res.centroids(0, 1) == doctest::Approx(1.0));
  CHECK(res.labels.labels() == std::vector<ClassIndex>{0, 0, 0});
}

TEST_CASE("kmeans with one cluster per point has zero SSE") {
  Rng rng(2);
  DenseMatrix pts(7, 2);
  for (std::size_t i = 0; i < 7; ++i) pts(i, 0) = rng.uniform(), pts(i, 1) = rng.uniform();
  const auto res = kmeans(pts, 7, 1);
  CHECK(res.sse == 0.0);
  auto sizes = res.labels.class_sizes();
  CHECK(std::all_of(sizes.begin(), sizes.end(), [](std::size_t s) { return s == 1; }));
}

TEST_CASE("kmeans groups two tight pairs like the best 2-partition") {
  const auto pts = DenseMatrix::from_rows({{0, 0}, {0.01, 0}, {1, 1}, {0.99, 1}});
  // Brute force over all 2-partitions with both parts nonempty.
  double best = std::numeric_limits<double>::infinity();
  std::vector<ClassIndex> arg;
  for (unsigned mask = 1; mask < 15; ++mask) {
    std::vector<ClassIndex> lab(4);
    for (unsigned i = 0; i < 4; ++i) lab[i] = (mask >> i) & 1U;
    const double s = sse_of(pts, lab, 2);
    if (s < best) best = s, arg = lab;
  }
  const auto res = kmeans(pts, 2, 11);
  CHECK(res.sse == doctest::Approx(best).epsilon(1e-12));
  const auto l = res.labels.labels();
  CHECK(l[0] == l[1]);
  CHECK(l[2] == l[3]);
  CHECK(l[0] != l[2]);
}

TEST_CASE("kmeans SSE trace is non-increasing and reproducible") {
  Rng rng(31);
  DenseMatrix pts(60, 2);
  for (std::size_t i = 0; i < 60; ++i) pts(i, 0) = rng.uniform(), pts(i, 1) = rng.uniform();
  const auto a = kmeans(pts, 4, 99);
  for (std::size_t t = 1; t < a.sse_trace.size(); ++t) CHECK(a.sse_trace[t] <= a.sse_trace[t - 1]);
  CHECK(a.sse == doctest::Approx(sse_of(pts, a.labels.labels(), 4)).epsilon(1e-12));
  const auto b = kmeans(pts, 4, 99);
  CHECK(a.labels == b.labels);
  CHECK(a.sse == b.sse);
  for (auto s : a.labels.class_sizes()) CHECK(s > 0);
  CHECK_THROWS_AS(kmeans(pts, 61, 1), Error);
}

TEST_CASE("kmeans reseeds empty clusters on duplicated points") {
  // Five copies of one point and one outlier; three clusters force a reseed path.
  const auto pts = DenseMatrix::from_rows({{0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {1, 1}, {1, 0}});
  const auto res = kmeans(pts, 3, 4);
  for (auto s : res.labels.class_sizes()) CHECK(s > 0);
  CHECK(res.sse == doctest::Approx(0.0));
}

TEST_CASE("one-dimensional SVM with two points") {
  const auto pts = DenseMatrix::from_rows({{2.0}, {0.0}});
  const auto svm = train_binary_svm(pts, std::vector<bool>{true, false}, SvmConfig{10.0});
  CHECK(svm.plane.w[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(svm.plane.b_w == doctest::Approx(-1.0).epsilon(1e-6));
  for (double e : svm.slacks) CHECK(e <= 1e-6);
  CHECK(svm.kkt_residual <= 1e-6);
}

TEST_CASE("separable data gives zero slacks and full accuracy") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1), c = rng.uniform(-0.3, 0.3);
    DenseMatrix pts(40, 2);
    std::vector<bool> pos(40);
    std::size_t i = 0;
    while (i < 40) {
      const double x = rng.uniform(), y = rng.uniform();
      const double v = a * x + b * y + c;
      if (std::abs(v) < 0.05 * std::hypot(a, b)) continue;  // keep a margin
      pts(i, 0) = x, pts(i, 1) = y;
      pos[i] = v > 0;
      ++i;
    }
    if (std::count(pos.begin(), pos.end(), true) % 40 == 0) continue;
    const auto svm = train_binary_svm(pts, pos, SvmConfig{1e4});
    CHECK(svm.kkt_residual <= 1e-6);
    for (std::size_t r = 0; r < 40; ++r) {
      CHECK(svm.slacks[r] <= 1e-6);
      const double v = svm.plane.value(pts.row(r));
      CHECK((pos[r] ? v : -v) >= 1.0 - 1e-6);
    }
  }
}

TEST_CASE("scaling inputs rescales the normal inversely") {
  const auto pts = DenseMatrix::from_rows({{0.1, 0.2}, {0.3, 0.1}, {0.8, 0.9}, {0.7, 0.6}});
  const std::vector<bool> pos{false, false, true, true};
  const auto base = train_binary_svm(pts, pos, SvmConfig{1e3});
  DenseMatrix scaled = pts;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 2; ++j) scaled(i, j) *= 3.0;
  const auto s = train_binary_svm(scaled, pos, SvmConfig{1e3});
  for (std::size_t j = 0; j < 2; ++j) CHECK(s.plane.w[j] * 3.0 == doctest::Approx(base.plane.w[j]).epsilon(1e-6));
  CHECK(s.plane.b_w == doctest::Approx(base.plane.b_w).epsilon(1e-6));
}

TEST_CASE("overlapping classes: slack appears and objective falls with gamma") {
  Rng rng(23);
  DenseMatrix pts(30, 2);
  std::vector<bool> pos(30);
  for (std::size_t i = 0; i < 30; ++i) {
    pos[i] = i % 2 == 0;
    pts(i, 0) = rng.uniform() + (pos[i] ? 0.2 : 0.0);
    pts(i, 1) = rng.uniform();
  }
  double prev = std::numeric_limits<double>::infinity();
  for (double gamma : {100.0, 10.0, 1.0, 0.1, 0.01}) {
    const auto svm = train_binary_svm(pts, pos, SvmConfig{gamma});
    CHECK(svm.kkt_residual <= 1e-6);
    CHECK(svm.objective <= prev + 1e-12);
    prev = svm.objective;
    if (gamma == 100.0) CHECK(*std::max_element(svm.slacks.begin(), svm.slacks.end()) > 1e-3);
  }
}

TEST_CASE("one-vs-one SVM recovers three separated clusters") {
  Rng rng(41);
  std::vector<ClassIndex> truth;
  const auto pts = blobs(rng, {{0.15, 0.2}, {0.5, 0.8}, {0.85, 0.3}}, 15, 0.08, truth);
  const auto km = kmeans(pts, 3, 5);
  const auto sw = train_multiclass_svm(pts, km.labels, SvmConfig{});
  CHECK(sw.pairs == std::vector<std::pair<ClassIndex, ClassIndex>>{{0, 1}, {0, 2}, {1, 2}});
  for (std::size_t i = 0; i < pts.rows(); ++i) CHECK(assign_region(pts.row(i), sw) == km.labels.label(i));

  // Two classes reduce to the binary trainer.
  std::vector<ClassIndex> two;
  for (std::size_t i = 0; i < 30; ++i) two.push_back(truth[i]);
  DenseMatrix sub(30, 2);
  for (std::size_t i = 0; i < 30; ++i) sub(i, 0) = pts(i, 0), sub(i, 1) = pts(i, 1);
  const auto z2 = LabelingMatrix::from_labels(two, 2);
  const auto sw2 = train_multiclass_svm(sub, z2, SvmConfig{});
  const auto bin = train_binary_svm(sub, z2, SvmConfig{});
  CHECK(sw2.hyperplanes.size() == 1);
  CHECK(sw2.hyperplanes[0].w == bin.plane.w);
  CHECK(sw2.hyperplanes[0].b_w == bin.plane.b_w);
}

TEST_CASE("permuting class indices induces the same partition") {
  Rng rng(43);
  std::vector<ClassIndex> truth;
  const auto pts = blobs(rng, {{0.2, 0.2}, {0.5, 0.7}, {0.8, 0.2}}, 12, 0.12, truth);
  const auto z = LabelingMatrix::from_labels(truth, 3);
  const std::vector<ClassIndex> perm{2, 0, 1};
  std::vector<ClassIndex> permuted;
  for (auto t : truth) permuted.push_back(perm[t]);
  const auto sw = train_multiclass_svm(pts, z, SvmConfig{});
  const auto swp = train_multiclass_svm(pts, LabelingMatrix::from_labels(permuted, 3), SvmConfig{});
  for (std::size_t i = 0; i < pts.rows(); ++i)
    CHECK(perm[assign_region(pts.row(i), sw)] == assign_region(pts.row(i), swp));
}

TEST_CASE("empty class is reported by index") {
  const auto pts = DenseMatrix::from_rows({{0.0}, {1.0}});
  const auto z = LabelingMatrix::from_labels({0, 2}, 3);
  try {
    train_multiclass_svm(pts, z, SvmConfig{});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("class 2") != std::string::npos);
  }
}

TEST_CASE("random soft-margin problems solve with small KKT residual") {
  Rng rng(61);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t m = 4 + rng.index(40);
    DenseMatrix pts(m, 2);
    std::vector<bool> pos(m);
    for (std::size_t i = 0; i < m; ++i) {
      pos[i] = i % 2 == 0 || rng.uniform() < 0.3;
      pts(i, 0) = rng.uniform() + (pos[i] ? 0.3 : 0.0);
      pts(i, 1) = rng.uniform();
    }
    pos[1] = false;
    const double gamma = std::pow(10.0, rng.uniform(-3, 4));
    const auto svm = train_binary_svm(pts, pos, SvmConfig{gamma});
    CHECK(svm.kkt_residual <= 1e-6);
    for (std::size_t i = 0; i < m; ++i) {
      const double v = svm.plane.value(pts.row(i));
      CHECK((pos[i] ? v : -v) + svm.slacks[i] >= 1.0 - 1e-7);
    }
  }
}
