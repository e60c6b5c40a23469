#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "softsensor/linalg.hpp"

namespace softsensor {

/// Class indices are 0-based in memory and 1-based in every file format.
using ClassIndex = std::size_t;

struct Dataset {
  DenseMatrix inputs;  // n × n_p
  Vector outputs;      // n
  std::vector<std::int64_t> ids;
  /// Optional per-row class labels (0-based); empty when absent.
  std::vector<ClassIndex> labels;
  std::vector<std::string> input_names;
  std::string output_name = "y";
  bool normalized = false;

  Dataset() = default;
  Dataset(DenseMatrix x, Vector y);

  std::size_t size() const noexcept { return outputs.size(); }
  std::size_t num_inputs() const noexcept { return inputs.cols(); }
  std::span<const double> x(std::size_t i) const { return inputs.row(i); }

  /// Throws a validation error on shape mismatch, non-finite entries, or a
  /// normalized flag with entries outside [0, 1].
  void validate() const;
  Dataset subset(const std::vector<std::size_t>& rows) const;
};

/// n × n_cl binary assignment with unit row sums.
class LabelingMatrix {
 public:
  LabelingMatrix() = default;
  LabelingMatrix(std::size_t n, std::size_t n_cl);
  static LabelingMatrix from_labels(const std::vector<ClassIndex>& labels, std::size_t n_cl);

  std::size_t rows() const noexcept { return n_; }
  std::size_t num_classes() const noexcept { return n_cl_; }
  bool operator()(std::size_t i, std::size_t j) const { return z_[i * n_cl_ + j] != 0; }
  /// Moves row i to class j.
  void assign(std::size_t i, ClassIndex j);
  ClassIndex label(std::size_t i) const;
  std::vector<ClassIndex> labels() const;
  std::vector<std::size_t> class_sizes() const;
  std::vector<std::size_t> members(ClassIndex j) const;
  /// Entries binary and each row summing to one.
  void validate() const;

  bool operator==(const LabelingMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::size_t n_cl_ = 0;
  std::vector<std::uint8_t> z_;
};

struct Hyperplane {
  Vector w;
  double b_w = 0.0;
  double value(std::span<const double> x) const { return dot(w, x) + b_w; }
  /// A zero normal can arise when two continuity-coupled models coincide.
  bool degenerate() const { return norm2(w) <= 1e-12; }
};

/// k-th lexicographic pair (r, s), r < s, of {0..n_cl-1}; k is 0-based.
std::pair<ClassIndex, ClassIndex> combination(std::size_t n_cl, std::size_t k);
inline std::size_t num_pairs(std::size_t n_cl) { return n_cl * (n_cl - 1) / 2; }

struct SwitchingLogic {
  std::size_t n_cl = 0;
  std::vector<Hyperplane> hyperplanes;
  std::vector<std::pair<ClassIndex, ClassIndex>> pairs;

  void validate(std::size_t n_p) const;
};

/// Pairwise voting: a nonnegative hyperplane value votes for the lower class
/// of its pair. Most votes wins; ties go to the smallest class index.
ClassIndex assign_region(std::span<const double> x, const SwitchingLogic& switching);

struct AffineModel {
  Vector p;
  double b_p = 0.0;
  double value(std::span<const double> x) const { return dot(p, x) + b_p; }
};

/// Per-column min-max map to [0, 1].
struct Scaler {
  Vector input_min;
  Vector input_max;
  double output_min = 0.0;
  double output_max = 1.0;

  static Scaler identity(std::size_t n_p);
  static Scaler fit(const Dataset& raw);
  void validate() const;

  Vector normalize_input(std::span<const double> x) const;
  Vector denormalize_input(std::span<const double> x) const;
  double normalize_output(double y) const;
  double denormalize_output(double y) const;
};

struct SensorModel {
  std::vector<AffineModel> models;
  std::optional<SwitchingLogic> switching;
  Scaler scaler;
  std::vector<std::pair<std::string, std::string>> metadata;

  std::size_t num_inputs() const { return models.empty() ? 0 : models.front().p.size(); }
  std::size_t num_classes() const { return models.size(); }
  void validate() const;
  ClassIndex region(std::span<const double> x) const;
};

/// Prediction in normalized units.
double predict(std::span<const double> x, const SensorModel& sensor);
/// Raw engineering units in and out, through the stored scaler.
double predict_raw(std::span<const double> x_raw, const SensorModel& sensor);
Vector predict_all(const Dataset& data, const SensorModel& sensor);

double rmse(std::span<const double> y_true, std::span<const double> y_pred);

std::pair<Dataset, Scaler> normalize(const Dataset& raw);
Dataset apply_scaler(const Dataset& raw, const Scaler& scaler);
Dataset denormalize(const Dataset& normalized, const Scaler& scaler);

}  // namespace softsensor
