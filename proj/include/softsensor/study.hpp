#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "softsensor/core.hpp"
#include "softsensor/design.hpp"

namespace softsensor {

struct PctGroundTruth {
  double R = 8.314;          // J/mol/K
  double H_v = 55940.550;    // J/mol
  double P_ref = 145325.0;   // Pa
};

/// Pseudo-critical temperature [K] at pressure P [Pa] and temperature T [K].
double pct(double P, double T, const PctGroundTruth& gt = {});

enum class ScenarioKind { Clustered, Uniform };
std::string to_string(ScenarioKind k);
ScenarioKind parse_scenario_kind(const std::string& s);

/// Cluster center as fractions of the (P, T) ranges; points are uniform in a
/// box of ±half_width (also a fraction of each range) around it.
struct ClusterSpec {
  double p_frac = 0.5;
  double t_frac = 0.5;
  double half_width = 0.08;
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::Clustered;
  std::size_t n_total = 90;
  double noise_sigma = 0.005;
  double train_fraction = 0.5;
  double p_min = 2000.0, p_max = 20000.0;
  double t_min = 523.15, t_max = 573.15;
  std::vector<ClusterSpec> clusters{{0.15, 0.25, 0.08}, {0.5, 0.75, 0.08}, {0.85, 0.4, 0.08}};
  std::uint64_t seed = 1;

  void validate() const;
};

struct Scenario {
  Dataset train;
  Dataset test;
  /// Maps raw (P, T, PCT) onto the normalized columns.
  Scaler scaler;
};

/// Samples (P, T), evaluates PCT, normalizes all columns over the full set,
/// adds noise to the training outputs and splits by the configured fraction.
Scenario generate_scenario(const ScenarioConfig& cfg);

struct ComparisonRow {
  Method method = Method::Sis;
  bool ok = false;
  std::string error;
  double train_rmse = 0.0;
  double test_rmse = 0.0;
  double t_comp = 0.0;
  std::optional<bool> continuity_pass;
  std::optional<DesignReport> report;
};

struct Comparison {
  std::vector<ComparisonRow> rows;
};

Comparison run_comparison(const Scenario& scenario, const std::vector<Method>& methods,
                          const DesignConfig& cfg);
Comparison run_comparison(const ScenarioConfig& scenario, const std::vector<Method>& methods,
                          const DesignConfig& cfg);

/// With `timing` false the wall-clock column is written as NA so the output
/// depends only on the inputs.
std::string comparison_csv(const Comparison& c, bool timing);
std::string comparison_json(const Comparison& c, bool timing);

/// Region and prediction on a grid over the normalized input square.
std::string surface_csv(const std::vector<std::pair<std::string, const SensorModel*>>& sensors,
                        std::size_t grid = 21);

struct MonteCarloRecord {
  std::size_t run = 0;
  Method method = Method::Sis;
  bool ok = false;
  double train_rmse = 0.0;
  double test_rmse = 0.0;
  double t_comp = 0.0;
};

struct BoxStats {
  Method method = Method::Sis;
  std::string split;  // train | test | t_comp
  std::size_t count = 0;
  std::size_t failures = 0;
  double q1 = 0.0, median = 0.0, q3 = 0.0;
  std::vector<double> outliers;
};

struct MonteCarloResult {
  std::vector<MonteCarloRecord> records;  // ordered by (run, method)
  std::vector<BoxStats> stats;
};

/// Linear-interpolation quantile of a sorted sample.
double quantile(const std::vector<double>& sorted, double q);
BoxStats box_stats(std::vector<double> values);

/// Run r uses scenario seed base.seed + r. Up to `jobs` runs execute at once;
/// aggregation is by run index, so results do not depend on scheduling.
MonteCarloResult run_montecarlo(const ScenarioConfig& base, std::size_t runs,
                                const std::vector<Method>& methods, const DesignConfig& cfg,
                                std::size_t jobs);

std::string montecarlo_csv(const MonteCarloResult& r, bool timing);
std::string boxplot_csv(const MonteCarloResult& r, bool timing);
std::string montecarlo_json(const MonteCarloResult& r, bool timing);

}  // namespace softsensor
