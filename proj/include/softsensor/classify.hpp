#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "softsensor/core.hpp"
#include "softsensor/linalg.hpp"

namespace softsensor {

struct KmeansOptions {
  std::size_t restarts = 10;
  std::size_t max_iterations = 300;
};

struct KmeansResult {
  DenseMatrix centroids;  // n_cl × n_p
  LabelingMatrix labels;
  double sse = 0.0;
  std::size_t iterations = 0;
  /// SSE after every assignment step of the winning restart.
  std::vector<double> sse_trace;
};

/// Lloyd's algorithm with k-means++ seeding, best of `restarts` by SSE.
/// Restart r draws from Rng::stream(seed, r).
KmeansResult kmeans(const DenseMatrix& points, std::size_t n_cl, std::uint64_t seed,
                    const KmeansOptions& options = {});

struct SvmConfig {
  double gamma = 10.0;
  double tolerance = 1e-6;
  void validate() const;
};

struct BinarySvm {
  Hyperplane plane;
  Vector slacks;  // one per training point, in input order
  double objective = 0.0;
  double kkt_residual = 0.0;
};

/// min ½‖w‖² + γ·Σe subject to wᵀx + b ≥ 1 − e on `positive` rows,
/// wᵀx + b ≤ −1 + e on the others, e ≥ 0.
BinarySvm train_binary_svm(const DenseMatrix& points, const std::vector<bool>& positive,
                           const SvmConfig& cfg);
/// Two-class labeling: class 0 is the positive side.
BinarySvm train_binary_svm(const DenseMatrix& points, const LabelingMatrix& labels,
                           const SvmConfig& cfg);

/// One-vs-one: hyperplane k separates classes combination(n_cl, k) using
/// only the points of those two classes.
SwitchingLogic train_multiclass_svm(const DenseMatrix& points, const LabelingMatrix& labels,
                                    const SvmConfig& cfg);

}  // namespace softsensor
