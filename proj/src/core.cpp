#include "softsensor/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "softsensor/error.hpp"

namespace softsensor {

Dataset::Dataset(DenseMatrix x, Vector y) : inputs(std::move(x)), outputs(std::move(y)) {
  ids.resize(outputs.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::int64_t>(i);
  for (std::size_t j = 0; j < inputs.cols(); ++j) input_names.push_back("x" + std::to_string(j + 1));
}

void Dataset::validate() const {
  const std::size_t n = size();
  if (n == 0) throw validation_error("dataset: no rows");
  if (inputs.cols() == 0) throw validation_error("dataset: no input columns");
  if (inputs.rows() != n)
    throw validation_error("dataset: " + std::to_string(inputs.rows()) + " input rows but " +
                           std::to_string(n) + " outputs");
  if (ids.size() != n) throw validation_error("dataset: id count mismatch");
  if (!labels.empty() && labels.size() != n) throw validation_error("dataset: label count mismatch");
  if (!input_names.empty() && input_names.size() != inputs.cols())
    throw validation_error("dataset: input name count mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < inputs.cols(); ++j) {
      const double v = inputs(i, j);
      if (!std::isfinite(v))
        throw validation_error("dataset: non-finite input at row " + std::to_string(i + 1) +
                               ", column " + std::to_string(j + 1));
      if (normalized && (v < -1e-12 || v > 1.0 + 1e-12))
        throw validation_error("dataset: normalized input outside [0,1] at row " +
                               std::to_string(i + 1));
    }
    if (!std::isfinite(outputs[i]))
      throw validation_error("dataset: non-finite output at row " + std::to_string(i + 1));
    if (normalized && (outputs[i] < -1e-12 || outputs[i] > 1.0 + 1e-12))
      throw validation_error("dataset: normalized output outside [0,1] at row " +
                             std::to_string(i + 1));
  }
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.inputs = DenseMatrix(rows.size(), inputs.cols());
  out.input_names = input_names;
  out.output_name = output_name;
  out.normalized = normalized;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t i = rows.at(k);
    for (std::size_t j = 0; j < inputs.cols(); ++j) out.inputs(k, j) = inputs(i, j);
    out.outputs.push_back(outputs[i]);
    out.ids.push_back(ids[i]);
    if (!labels.empty()) out.labels.push_back(labels[i]);
  }
  return out;
}

LabelingMatrix::LabelingMatrix(std::size_t n, std::size_t n_cl)
    : n_(n), n_cl_(n_cl), z_(n * n_cl, 0) {
  if (n_cl == 0) throw validation_error("labeling: n_cl must be positive");
  for (std::size_t i = 0; i < n; ++i) z_[i * n_cl] = 1;
}

LabelingMatrix LabelingMatrix::from_labels(const std::vector<ClassIndex>& labels,
                                           std::size_t n_cl) {
  LabelingMatrix z(labels.size(), n_cl);
  for (std::size_t i = 0; i < labels.size(); ++i) z.assign(i, labels[i]);
  return z;
}

void LabelingMatrix::assign(std::size_t i, ClassIndex j) {
  if (i >= n_) throw validation_error("labeling: row " + std::to_string(i + 1) + " out of range");
  if (j >= n_cl_)
    throw validation_error("labeling: class " + std::to_string(j + 1) + " exceeds n_cl = " +
                           std::to_string(n_cl_));
  std::fill_n(z_.begin() + static_cast<std::ptrdiff_t>(i * n_cl_), n_cl_, 0);
  z_[i * n_cl_ + j] = 1;
}

ClassIndex LabelingMatrix::label(std::size_t i) const {
  for (std::size_t j = 0; j < n_cl_; ++j)
    if (z_[i * n_cl_ + j]) return j;
  throw validation_error("labeling: row " + std::to_string(i + 1) + " has no class");
}

std::vector<ClassIndex> LabelingMatrix::labels() const {
  std::vector<ClassIndex> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = label(i);
  return out;
}

std::vector<std::size_t> LabelingMatrix::class_sizes() const {
  std::vector<std::size_t> sizes(n_cl_, 0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_cl_; ++j) sizes[j] += z_[i * n_cl_ + j];
  return sizes;
}

std::vector<std::size_t> LabelingMatrix::members(ClassIndex j) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n_; ++i)
    if (z_[i * n_cl_ + j]) out.push_back(i);
  return out;
}

void LabelingMatrix::validate() const {
  for (std::size_t i = 0; i < n_; ++i) {
    unsigned sum = 0;
    for (std::size_t j = 0; j < n_cl_; ++j) {
      const auto v = z_[i * n_cl_ + j];
      if (v > 1) throw validation_error("labeling: non-binary entry");
      sum += v;
    }
    if (sum != 1)
      throw validation_error("labeling: row " + std::to_string(i + 1) + " sums to " +
                             std::to_string(sum));
  }
}

std::pair<ClassIndex, ClassIndex> combination(std::size_t n_cl, std::size_t k) {
  if (n_cl < 2 || k >= num_pairs(n_cl))
    throw validation_error("combination: k = " + std::to_string(k + 1) + " out of range for n_cl = " +
                           std::to_string(n_cl));
  for (ClassIndex r = 0; r + 1 < n_cl; ++r) {
    const std::size_t row_len = n_cl - 1 - r;
    if (k < row_len) return {r, r + 1 + k};
    k -= row_len;
  }
  throw validation_error("combination: unreachable");
}

void SwitchingLogic::validate(std::size_t n_p) const {
  if (n_cl < 2) throw validation_error("switching: n_cl must be at least 2");
  const std::size_t n_sp = num_pairs(n_cl);
  if (hyperplanes.size() != n_sp || pairs.size() != n_sp)
    throw validation_error("switching: expected " + std::to_string(n_sp) + " hyperplanes");
  for (std::size_t k = 0; k < n_sp; ++k) {
    if (pairs[k] != combination(n_cl, k))
      throw validation_error("switching: pair " + std::to_string(k + 1) + " out of order");
    if (hyperplanes[k].w.size() != n_p)
      throw validation_error("switching: hyperplane " + std::to_string(k + 1) + " has wrong dimension");
    for (double v : hyperplanes[k].w)
      if (!std::isfinite(v)) throw validation_error("switching: non-finite normal");
    if (!std::isfinite(hyperplanes[k].b_w)) throw validation_error("switching: non-finite offset");
  }
}

ClassIndex assign_region(std::span<const double> x, const SwitchingLogic& switching) {
  std::vector<std::size_t> votes(switching.n_cl, 0);
  for (std::size_t k = 0; k < switching.hyperplanes.size(); ++k) {
    const auto [r, s] = switching.pairs[k];
    ++votes[switching.hyperplanes[k].value(x) >= 0.0 ? r : s];
  }
  // max_element returns the first maximum, which is the smallest index.
  return static_cast<ClassIndex>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

Scaler Scaler::identity(std::size_t n_p) {
  Scaler s;
  s.input_min.assign(n_p, 0.0);
  s.input_max.assign(n_p, 1.0);
  return s;
}

Scaler Scaler::fit(const Dataset& raw) {
  raw.validate();
  Scaler s;
  const std::size_t n_p = raw.num_inputs();
  s.input_min.assign(n_p, std::numeric_limits<double>::infinity());
  s.input_max.assign(n_p, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < raw.size(); ++i)
    for (std::size_t j = 0; j < n_p; ++j) {
      s.input_min[j] = std::min(s.input_min[j], raw.inputs(i, j));
      s.input_max[j] = std::max(s.input_max[j], raw.inputs(i, j));
    }
  s.output_min = *std::min_element(raw.outputs.begin(), raw.outputs.end());
  s.output_max = *std::max_element(raw.outputs.begin(), raw.outputs.end());
  s.validate();
  return s;
}

void Scaler::validate() const {
  if (input_min.size() != input_max.size() || input_min.empty())
    throw validation_error("scaler: input range size mismatch");
  for (std::size_t j = 0; j < input_min.size(); ++j)
    if (!(input_max[j] > input_min[j]) || !std::isfinite(input_min[j]) || !std::isfinite(input_max[j]))
      throw validation_error("scaler: degenerate range for input column " + std::to_string(j + 1));
  if (!(output_max > output_min) || !std::isfinite(output_min) || !std::isfinite(output_max))
    throw validation_error("scaler: degenerate output range");
}

Vector Scaler::normalize_input(std::span<const double> x) const {
  if (x.size() != input_min.size())
    throw validation_error("scaler: expected " + std::to_string(input_min.size()) + " inputs, got " +
                           std::to_string(x.size()));
  Vector out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j)
    out[j] = (x[j] - input_min[j]) / (input_max[j] - input_min[j]);
  return out;
}

Vector Scaler::denormalize_input(std::span<const double> x) const {
  Vector out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j)
    out[j] = input_min[j] + x[j] * (input_max[j] - input_min[j]);
  return out;
}

double Scaler::normalize_output(double y) const {
  return (y - output_min) / (output_max - output_min);
}

double Scaler::denormalize_output(double y) const {
  return output_min + y * (output_max - output_min);
}

void SensorModel::validate() const {
  if (models.empty()) throw validation_error("sensor: no models");
  const std::size_t n_p = num_inputs();
  for (const auto& m : models)
    if (m.p.size() != n_p) throw validation_error("sensor: model dimension mismatch");
  if (switching) {
    if (switching->n_cl != models.size())
      throw validation_error("sensor: " + std::to_string(models.size()) + " models but n_cl = " +
                             std::to_string(switching->n_cl));
    switching->validate(n_p);
  } else if (models.size() != 1) {
    throw validation_error("sensor: several models need switching logic");
  }
  scaler.validate();
  if (scaler.input_min.size() != n_p) throw validation_error("sensor: scaler dimension mismatch");
}

ClassIndex SensorModel::region(std::span<const double> x) const {
  if (x.size() != num_inputs())
    throw validation_error("predict: expected " + std::to_string(num_inputs()) + " inputs, got " +
                           std::to_string(x.size()));
  return switching ? assign_region(x, *switching) : 0;
}

double predict(std::span<const double> x, const SensorModel& sensor) {
  return sensor.models[sensor.region(x)].value(x);
}

double predict_raw(std::span<const double> x_raw, const SensorModel& sensor) {
  const Vector x = sensor.scaler.normalize_input(x_raw);
  return sensor.scaler.denormalize_output(predict(x, sensor));
}

Vector predict_all(const Dataset& data, const SensorModel& sensor) {
  Vector out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = predict(data.x(i), sensor);
  return out;
}

double rmse(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size())
    throw validation_error("rmse: length mismatch (" + std::to_string(y_true.size()) + " vs " +
                           std::to_string(y_pred.size()) + ")");
  if (y_true.empty()) throw validation_error("rmse: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double d = y_true[i] - y_pred[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(y_true.size()));
}

Dataset apply_scaler(const Dataset& raw, const Scaler& scaler) {
  Dataset out = raw;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const Vector x = scaler.normalize_input(raw.x(i));
    for (std::size_t j = 0; j < x.size(); ++j) out.inputs(i, j) = x[j];
    out.outputs[i] = scaler.normalize_output(raw.outputs[i]);
  }
  out.normalized = false;
  return out;
}

std::pair<Dataset, Scaler> normalize(const Dataset& raw) {
  Scaler s = Scaler::fit(raw);
  Dataset out = apply_scaler(raw, s);
  // Min and max map to exactly 0 and 1 up to rounding.
  for (double& v : out.outputs) v = std::clamp(v, 0.0, 1.0);
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = 0; j < out.num_inputs(); ++j)
      out.inputs(i, j) = std::clamp(out.inputs(i, j), 0.0, 1.0);
  out.normalized = true;
  return {std::move(out), std::move(s)};
}

Dataset denormalize(const Dataset& normalized, const Scaler& scaler) {
  Dataset out = normalized;
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    const Vector x = scaler.denormalize_input(normalized.x(i));
    for (std::size_t j = 0; j < x.size(); ++j) out.inputs(i, j) = x[j];
    out.outputs[i] = scaler.denormalize_output(normalized.outputs[i]);
  }
  out.normalized = false;
  return out;
}

}  // namespace softsensor
