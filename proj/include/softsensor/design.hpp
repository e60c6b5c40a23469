#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "softsensor/classify.hpp"
#include "softsensor/core.hpp"
#include "softsensor/milp.hpp"

namespace softsensor {

enum class Method { Sis, MisStd, MisCon, MisConLab };

std::string to_string(Method m);
/// Accepts sis | mis-std | mis-con | mis-con-lab.
Method parse_method(const std::string& name);
const std::vector<std::string>& method_names();

struct DesignConfig {
  std::size_t n_cl = 3;
  double gamma = 10.0;
  double param_bound = 10.0;
  /// Unset means 2·(param_bound·(n_p + 1) + 1).
  std::optional<double> big_m;
  double regularization_weight = 0.0;
  MipLimits milp_limits;
  std::uint64_t seed = 1;
  std::size_t kmeans_restarts = 10;
  /// Seed the MILP with the best k-means labeling (and its local
  /// improvement) as the first incumbent.
  bool mip_start = true;
  std::ostream* log = nullptr;

  double big_m_for(std::size_t n_p) const;
  void validate(std::size_t n_p) const;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct MilpStats {
  MipStatus status = MipStatus::Infeasible;
  double objective = 0.0;
  double best_bound = 0.0;
  double gap = 0.0;
  std::size_t nodes = 0;
  std::size_t lp_iterations = 0;
  bool limit_hit = false;
  /// L1 objective of the starting labeling, when one was supplied.
  std::optional<double> start_objective;
  /// L1 objective of the k-means labeling under the same program.
  std::optional<double> kmeans_objective;
};

struct ContinuityCheck {
  double max_error = 0.0;
  std::size_t samples = 0;
  std::size_t degenerate_hyperplanes = 0;
  bool pass = true;
};

struct DesignReport {
  Method method = Method::Sis;
  SensorModel sensor;
  double train_rmse = 0.0;
  LabelingMatrix labels_used;
  std::vector<StageTiming> timings;
  std::optional<MilpStats> milp;
  std::optional<ContinuityCheck> continuity;
  /// MIS-std regions that fell back to the global affine model.
  std::vector<ClassIndex> fallback_regions;
  /// n_cl ≥ 3: max residual of w_(r,t) = w_(r,s) + w_(s,t) over triples,
  /// the dependency induced by coupling every pair.
  std::optional<double> triple_dependency;
  std::vector<std::string> notes;

  double total_seconds() const;
};

DesignReport design_sis(const Dataset& train);
DesignReport design_mis_std(const Dataset& train, const DesignConfig& cfg);
/// Joint QP with slope and offset continuity coupling for fixed labels.
DesignReport design_mis_con(const Dataset& train, const LabelingMatrix& labels,
                            const DesignConfig& cfg);

/// Variable layout of the labeling MILP.
struct MisConLabLayout {
  std::size_t n = 0, n_p = 0, n_cl = 0, n_sp = 0;
  std::size_t w(std::size_t k, std::size_t d) const { return k * (n_p + 1) + d; }
  std::size_t b_w(std::size_t k) const { return k * (n_p + 1) + n_p; }
  std::size_t e(std::size_t k, std::size_t i) const { return n_sp * (n_p + 1) + k * n + i; }
  std::size_t p(std::size_t j, std::size_t d) const {
    return n_sp * (n_p + 1 + n) + j * (n_p + 1) + d;
  }
  std::size_t b_p(std::size_t j) const { return p(j, n_p); }
  std::size_t t(std::size_t i) const { return n_sp * (n_p + 1 + n) + n_cl * (n_p + 1) + i; }
  std::size_t z(std::size_t i, std::size_t j) const { return num_continuous() + i * n_cl + j; }
  std::size_t num_continuous() const { return n_sp * (n_p + 1 + n) + n_cl * (n_p + 1) + n; }
  std::size_t num_binary() const { return n * n_cl; }
};

struct MisConLabProgram {
  MixedIntegerProgram mip;
  MisConLabLayout layout;
};

MisConLabProgram build_mis_con_lab_milp(const Dataset& train, const DesignConfig& cfg);

/// Optimal L1 objective with Z fixed to `labels` (an LP), or nullopt when
/// that labeling is infeasible for the program.
std::optional<double> fixed_labeling_objective(const MisConLabProgram& prog,
                                               const LabelingMatrix& labels,
                                               Vector* values = nullptr);

DesignReport design_mis_con_lab(const Dataset& train, const DesignConfig& cfg);

/// Runs the named method; mis-con uses the dataset's labels when present,
/// k-means labels otherwise.
DesignReport design(Method method, const Dataset& train, const DesignConfig& cfg);

/// Samples `per_hyperplane` points on every switching hyperplane inside the
/// unit box neighbourhood and measures |f_r(x) − f_s(x)|.
ContinuityCheck check_continuity(const SensorModel& sensor, std::size_t per_hyperplane,
                                 std::uint64_t seed, double tol = 1e-6);

}  // namespace softsensor
