#include "softsensor/study.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "softsensor/error.hpp"
#include "softsensor/format.hpp"
#include "softsensor/rng.hpp"

namespace softsensor {

using ojson = nlohmann::ordered_json;

double pct(double P, double T, const PctGroundTruth& gt) {
  if (!(P > 0.0) || !(T > 0.0) || !std::isfinite(P) || !std::isfinite(T))
    throw validation_error("pct: P and T must be positive and finite");
  const double denom = (gt.R / gt.H_v) * std::log(P / gt.P_ref) + 1.0 / T;
  if (!(denom > 0.0))
    throw validation_error("pct: nonpositive denominator at P = " + format_number(P) +
                           ", T = " + format_number(T) + " (input out of domain)");
  return 1.0 / denom;
}

std::string to_string(ScenarioKind k) { return k == ScenarioKind::Clustered ? "clustered" : "uniform"; }

ScenarioKind parse_scenario_kind(const std::string& s) {
  if (s == "clustered") return ScenarioKind::Clustered;
  if (s == "uniform") return ScenarioKind::Uniform;
  throw validation_error("kind: unknown scenario kind '" + s + "' (clustered | uniform)");
}

void ScenarioConfig::validate() const {
  auto positive_range = [](const char* name, double lo, double hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo > 0.0) || !(hi > lo))
      throw validation_error(std::string(name) + ": need 0 < min < max, got [" + format_number(lo) +
                             ", " + format_number(hi) + "]");
  };
  positive_range("p_range", p_min, p_max);
  positive_range("t_range", t_min, t_max);
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw validation_error("noise_sigma: must be finite and nonnegative");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw validation_error("train_fraction: must lie in (0, 1)");
  if (n_total < 2) throw validation_error("n_total: need at least 2 points");
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n_total) * train_fraction));
  if (n_train == 0 || n_train == n_total)
    throw validation_error("train_fraction: leaves an empty split for n_total = " + std::to_string(n_total));
  if (kind == ScenarioKind::Clustered) {
    if (clusters.empty()) throw validation_error("clusters: at least one cluster required");
    if (n_total < clusters.size()) throw validation_error("n_total: fewer points than clusters");
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      const auto& s = clusters[c];
      if (!(s.half_width >= 0.0))
        throw validation_error("clusters[" + std::to_string(c) + "].half_width: must be nonnegative");
      for (double f : {s.p_frac, s.t_frac})
        if (!(f - s.half_width >= 0.0 && f + s.half_width <= 1.0))
          throw validation_error("clusters[" + std::to_string(c) +
                                 "]: spread leaves the operating box");
    }
  }
}

Scenario generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.n_total;
  Rng sample = Rng::stream(cfg.seed, 0), noise = Rng::stream(cfg.seed, 1),
      split = Rng::stream(cfg.seed, 2);
  DenseMatrix x(n, 2);
  const double dp = cfg.p_max - cfg.p_min, dt = cfg.t_max - cfg.t_min;
  if (cfg.kind == ScenarioKind::Uniform) {
    for (std::size_t i = 0; i < n; ++i) {
      x(i, 0) = sample.uniform(cfg.p_min, cfg.p_max);
      x(i, 1) = sample.uniform(cfg.t_min, cfg.t_max);
    }
  } else {
    const std::size_t m = cfg.clusters.size();
    std::size_t row = 0;
    for (std::size_t c = 0; c < m; ++c) {
      const auto& s = cfg.clusters[c];
      const std::size_t count = n / m + (c < n % m ? 1 : 0);
      for (std::size_t k = 0; k < count; ++k, ++row) {
        x(row, 0) = cfg.p_min + dp * sample.uniform(s.p_frac - s.half_width, s.p_frac + s.half_width);
        x(row, 1) = cfg.t_min + dt * sample.uniform(s.t_frac - s.half_width, s.t_frac + s.half_width);
      }
    }
  }
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = pct(x(i, 0), x(i, 1));
  Dataset raw(std::move(x), std::move(y));
  raw.input_names = {"P", "T"};
  raw.output_name = "PCT";
  auto [norm, scaler] = normalize(raw);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  split.shuffle(order);
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * cfg.train_fraction));
  std::vector<std::size_t> tr(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> te(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(tr.begin(), tr.end());
  std::sort(te.begin(), te.end());

  Scenario out;
  out.train = norm.subset(tr);
  out.test = norm.subset(te);
  out.scaler = std::move(scaler);
  if (cfg.noise_sigma > 0.0) {
    for (double& v : out.train.outputs) v += cfg.noise_sigma * noise.normal();
    // noisy outputs may leave [0, 1]
    out.train.normalized = false;
  }
  return out;
}

Comparison run_comparison(const Scenario& scenario, const std::vector<Method>& methods,
                          const DesignConfig& cfg) {
  if (methods.empty()) throw validation_error("methods: at least one method required");
  Comparison out;
  for (Method m : methods) {
    ComparisonRow row;
    row.method = m;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      auto rep = design(m, scenario.train, cfg);
      row.t_comp = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      row.train_rmse = rep.train_rmse;
      row.test_rmse = rmse(scenario.test.outputs, predict_all(scenario.test, rep.sensor));
      if (rep.continuity) row.continuity_pass = rep.continuity->pass;
      row.ok = true;
      row.report = std::move(rep);
    } catch (const Error& e) {
      row.t_comp = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      row.error = e.what();
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

Comparison run_comparison(const ScenarioConfig& scenario, const std::vector<Method>& methods,
                          const DesignConfig& cfg) {
  return run_comparison(generate_scenario(scenario), methods, cfg);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

ojson number_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

}  // namespace

std::string comparison_csv(const Comparison& c, bool timing) {
  std::ostringstream os;
  os << "method,status,train_rmse,test_rmse,t_comp,continuity,milp_status,milp_gap,milp_nodes,error\n";
  for (const auto& r : c.rows) {
    os << to_string(r.method) << ',' << (r.ok ? "ok" : "failed") << ',';
    if (r.ok)
      os << format_number(r.train_rmse) << ',' << format_number(r.test_rmse);
    else
      os << "NA,NA";
    os << ',' << (timing ? format_number(r.t_comp) : "NA") << ',';
    os << (r.continuity_pass ? (*r.continuity_pass ? "pass" : "fail") : "NA") << ',';
    if (r.report && r.report->milp) {
      const auto& m = *r.report->milp;
      os << to_string(m.status) << ',' << format_number(m.gap) << ',' << m.nodes;
    } else {
      os << "NA,NA,NA";
    }
    os << ',' << csv_field(r.error) << '\n';
  }
  return os.str();
}

std::string comparison_json(const Comparison& c, bool timing) {
  ojson rows = ojson::array();
  for (const auto& r : c.rows) {
    ojson j;
    j["method"] = to_string(r.method);
    j["ok"] = r.ok;
    if (r.ok) {
      j["train_rmse"] = r.train_rmse;
      j["test_rmse"] = r.test_rmse;
    }
    if (timing) j["t_comp"] = r.t_comp;
    if (r.continuity_pass) j["continuity_pass"] = *r.continuity_pass;
    if (r.report && r.report->milp) {
      const auto& m = *r.report->milp;
      j["milp"] = {{"status", to_string(m.status)},
                   {"objective", number_or_null(m.objective)},
                   {"best_bound", number_or_null(m.best_bound)},
                   {"gap", number_or_null(m.gap)},
                   {"nodes", m.nodes},
                   {"limit_hit", m.limit_hit}};
    }
    if (!r.ok) j["error"] = r.error;
    rows.push_back(std::move(j));
  }
  ojson doc;
  doc["schema"] = 1;
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

std::string surface_csv(const std::vector<std::pair<std::string, const SensorModel*>>& sensors,
                        std::size_t grid) {
  if (grid < 2) throw validation_error("surface: grid needs at least 2 points per axis");
  std::ostringstream os;
  os << "method,p_norm,t_norm,region,prediction\n";
  for (const auto& [name, s] : sensors) {
    if (s->num_inputs() != 2) throw validation_error("surface: needs a two-input sensor");
    for (std::size_t a = 0; a < grid; ++a)
      for (std::size_t b = 0; b < grid; ++b) {
        const double x[2] = {static_cast<double>(a) / static_cast<double>(grid - 1),
                             static_cast<double>(b) / static_cast<double>(grid - 1)};
        os << name << ',' << format_number(x[0]) << ',' << format_number(x[1]) << ','
           << s->region(x) + 1 << ',' << format_number(predict(x, *s)) << '\n';
      }
  }
  return os.str();
}

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw validation_error("quantile: empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BoxStats box_stats(std::vector<double> values) {
  BoxStats b;
  b.count = values.size();
  if (values.empty()) return b;
  std::sort(values.begin(), values.end());
  b.q1 = quantile(values, 0.25);
  b.median = quantile(values, 0.5);
  b.q3 = quantile(values, 0.75);
  const double iqr = b.q3 - b.q1;
  for (double v : values)
    if (v < b.q1 - 1.5 * iqr || v > b.q3 + 1.5 * iqr) b.outliers.push_back(v);
  return b;
}

MonteCarloResult run_montecarlo(const ScenarioConfig& base, std::size_t runs,
                                const std::vector<Method>& methods, const DesignConfig& cfg,
                                std::size_t jobs) {
  if (runs < 1) throw validation_error("runs: must be at least 1");
  if (methods.empty()) throw validation_error("methods: at least one method required");
  base.validate();
  std::vector<std::vector<MonteCarloRecord>> per_run(runs);
  std::vector<std::string> fatal(runs);
  DesignConfig run_cfg = cfg;
  if (jobs != 1) run_cfg.log = nullptr;

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r; (r = next.fetch_add(1)) < runs;) {
      ScenarioConfig sc = base;
      sc.seed = base.seed + r;
      try {
        const auto cmp = run_comparison(sc, methods, run_cfg);
        for (const auto& row : cmp.rows)
          per_run[r].push_back({r, row.method, row.ok, row.train_rmse, row.test_rmse, row.t_comp});
      } catch (const Error& e) {
        fatal[r] = e.what();
        for (Method m : methods) per_run[r].push_back({r, m, false, 0.0, 0.0, 0.0});
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(jobs, runs));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  MonteCarloResult out;
  for (auto& v : per_run)
    for (auto& rec : v) out.records.push_back(rec);
  for (Method m : methods)
    for (const char* split : {"train", "test", "t_comp"}) {
      std::vector<double> vals;
      std::size_t failures = 0;
      for (const auto& rec : out.records) {
        if (rec.method != m) continue;
        if (!rec.ok) {
          ++failures;
          continue;
        }
        const std::string s = split;
        vals.push_back(s == "train" ? rec.train_rmse : s == "test" ? rec.test_rmse : rec.t_comp);
      }
      auto b = box_stats(std::move(vals));
      b.method = m;
      b.split = split;
      b.failures = failures;
      out.stats.push_back(std::move(b));
    }
  return out;
}

std::string montecarlo_csv(const MonteCarloResult& r, bool timing) {
  std::ostringstream os;
  os << "run,method,split,rmse,t_comp\n";
  for (const auto& rec : r.records)
    for (const char* split : {"train", "test"}) {
      os << rec.run << ',' << to_string(rec.method) << ',' << split << ',';
      if (rec.ok)
        os << format_number(split[1] == 'r' ? rec.train_rmse : rec.test_rmse);
      else
        os << "NA";
      os << ',' << (timing && rec.ok ? format_number(rec.t_comp) : "NA") << '\n';
    }
  return os.str();
}

std::string boxplot_csv(const MonteCarloResult& r, bool timing) {
  std::ostringstream os;
  os << "method,split,count,failures,q1,median,q3,outliers\n";
  for (const auto& b : r.stats) {
    if (b.split == "t_comp" && !timing) continue;
    os << to_string(b.method) << ',' << b.split << ',' << b.count << ',' << b.failures << ',';
    if (b.count == 0) {
      os << "NA,NA,NA,";
    } else {
      os << format_number(b.q1) << ',' << format_number(b.median) << ',' << format_number(b.q3) << ',';
    }
    for (std::size_t k = 0; k < b.outliers.size(); ++k)
      os << (k ? ";" : "") << format_number(b.outliers[k]);
    os << '\n';
  }
  return os.str();
}

std::string montecarlo_json(const MonteCarloResult& r, bool timing) {
  ojson stats = ojson::array();
  for (const auto& b : r.stats) {
    if (b.split == "t_comp" && !timing) continue;
    ojson j;
    j["method"] = to_string(b.method);
    j["split"] = b.split;
    j["count"] = b.count;
    j["failures"] = b.failures;
    if (b.count > 0) {
      j["q1"] = b.q1;
      j["median"] = b.median;
      j["q3"] = b.q3;
    }
    j["outliers"] = b.outliers;
    stats.push_back(std::move(j));
  }
  std::size_t runs = 0;
  for (const auto& rec : r.records) runs = std::max(runs, rec.run + 1);
  ojson doc;
  doc["schema"] = 1;
  doc["runs"] = runs;
  doc["stats"] = std::move(stats);
  return doc.dump(2) + "\n";
}

}  // namespace softsensor
