#include "softsensor/cli.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "softsensor/error.hpp"
#include "softsensor/format.hpp"
#include "softsensor/io.hpp"

namespace softsensor {

using ojson = nlohmann::ordered_json;

void RunConfig::validate() const {
  scenario.validate();
  design.validate(2);
  if (methods.empty()) throw validation_error("methods: at least one method required");
  if (runs < 1) throw validation_error("runs: must be at least 1");
}

namespace {

// Typed reads of a config object with path-qualified errors.
class ConfigReader {
 public:
  ConfigReader(const ojson& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw validation_error(path_ + ": expected an object");
  }

  bool has(const char* key) {
    seen_.push_back(key);
    return j_.contains(key);
  }

  double number(const char* key) {
    const auto& v = j_.at(key);
    if (!v.is_number()) throw validation_error(at(key) + ": expected a number");
    return v.get<double>();
  }
  std::size_t count(const char* key) {
    const auto& v = j_.at(key);
    if (!v.is_number_unsigned()) throw validation_error(at(key) + ": expected a nonnegative integer");
    return v.get<std::size_t>();
  }
  bool boolean(const char* key) {
    const auto& v = j_.at(key);
    if (!v.is_boolean()) throw validation_error(at(key) + ": expected true or false");
    return v.get<bool>();
  }
  std::string string(const char* key) {
    const auto& v = j_.at(key);
    if (!v.is_string()) throw validation_error(at(key) + ": expected a string");
    return v.get<std::string>();
  }
  std::pair<double, double> range(const char* key) {
    const auto& v = j_.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw validation_error(at(key) + ": expected [min, max]");
    return {v[0].get<double>(), v[1].get<double>()};
  }
  const ojson& raw(const char* key) const { return j_.at(key); }
  std::string at(const std::string& key) const { return path_ + "." + key; }

  // Call after all reads: anything not asked for is a typo.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
        throw validation_error(at(it.key()) + ": unknown key");
  }

 private:
  const ojson& j_;
  std::string path_;
  std::vector<std::string> seen_;
};

template <typename F>
auto located(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Validation) throw;
    throw validation_error(where + ": " + e.what());
  }
}

std::vector<Method> parse_method_list(const std::string& csv) {
  std::vector<Method> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse_method(item));
  if (out.empty()) throw validation_error("methods: at least one method required");
  return out;
}

std::size_t resolved_jobs(std::size_t jobs) {
  if (jobs > 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

RunConfig run_config_from_json(const ojson& j, const std::string& source) {
  RunConfig cfg;
  ConfigReader top(j, source);
  if (top.has("schema") && !(top.raw("schema").is_number_integer() && top.raw("schema").get<int>() == kSchemaVersion))
    throw validation_error(source + ".schema: expected " + std::to_string(kSchemaVersion));
  if (top.has("scenario")) {
    ConfigReader r(top.raw("scenario"), source + ".scenario");
    auto& s = cfg.scenario;
    if (r.has("kind")) s.kind = located(r.at("kind"), [&] { return parse_scenario_kind(r.string("kind")); });
    if (r.has("n_total")) s.n_total = r.count("n_total");
    if (r.has("noise_sigma")) s.noise_sigma = r.number("noise_sigma");
    if (r.has("train_fraction")) s.train_fraction = r.number("train_fraction");
    if (r.has("p_range")) std::tie(s.p_min, s.p_max) = r.range("p_range");
    if (r.has("t_range")) std::tie(s.t_min, s.t_max) = r.range("t_range");
    if (r.has("seed")) s.seed = r.count("seed");
    if (r.has("clusters")) {
      const auto& arr = r.raw("clusters");
      if (!arr.is_array()) throw validation_error(r.at("clusters") + ": expected an array");
      s.clusters.clear();
      for (std::size_t k = 0; k < arr.size(); ++k) {
        ConfigReader c(arr[k], r.at("clusters") + "[" + std::to_string(k) + "]");
        ClusterSpec spec;
        if (c.has("p")) spec.p_frac = c.number("p");
        if (c.has("t")) spec.t_frac = c.number("t");
        if (c.has("half_width")) spec.half_width = c.number("half_width");
        c.finish();
        s.clusters.push_back(spec);
      }
    }
    r.finish();
    located(source + ".scenario", [&] { s.validate(); return 0; });
  }
  if (top.has("design")) {
    ConfigReader r(top.raw("design"), source + ".design");
    auto& d = cfg.design;
    if (r.has("n_cl")) d.n_cl = r.count("n_cl");
    if (r.has("gamma")) d.gamma = r.number("gamma");
    if (r.has("param_bound")) d.param_bound = r.number("param_bound");
    if (r.has("big_m")) {
      if (r.raw("big_m").is_null())
        d.big_m.reset();
      else
        d.big_m = r.number("big_m");
    }
    if (r.has("regularization_weight")) d.regularization_weight = r.number("regularization_weight");
    if (r.has("seed")) d.seed = r.count("seed");
    if (r.has("kmeans_restarts")) d.kmeans_restarts = r.count("kmeans_restarts");
    if (r.has("mip_start")) d.mip_start = r.boolean("mip_start");
    if (r.has("time_limit_s")) d.milp_limits.time_limit_s = r.number("time_limit_s");
    if (r.has("gap_target")) d.milp_limits.gap_target = r.number("gap_target");
    if (r.has("node_cap")) d.milp_limits.node_cap = r.count("node_cap");
    r.finish();
    located(source + ".design", [&] { d.validate(2); return 0; });
  }
  if (top.has("methods")) {
    const auto& arr = top.raw("methods");
    if (!arr.is_array()) throw validation_error(source + ".methods: expected an array of names");
    cfg.methods.clear();
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const std::string where = source + ".methods[" + std::to_string(k) + "]";
      if (!arr[k].is_string()) throw validation_error(where + ": expected a method name");
      cfg.methods.push_back(located(where, [&] { return parse_method(arr[k].get<std::string>()); }));
    }
  }
  if (top.has("runs")) cfg.runs = top.count("runs");
  if (top.has("jobs")) cfg.jobs = top.count("jobs");
  if (top.has("out_dir")) cfg.out_dir = top.string("out_dir");
  if (top.has("timing")) cfg.timing = top.boolean("timing");
  if (top.has("verbose")) cfg.verbose = top.boolean("verbose");
  top.finish();
  located(source, [&] { cfg.validate(); return 0; });
  return cfg;
}

ojson run_config_to_json(const RunConfig& cfg) {
  ojson j;
  j["schema"] = kSchemaVersion;
  const auto& s = cfg.scenario;
  ojson clusters = ojson::array();
  for (const auto& c : s.clusters) clusters.push_back({{"p", c.p_frac}, {"t", c.t_frac}, {"half_width", c.half_width}});
  j["scenario"] = {{"kind", to_string(s.kind)},
                   {"n_total", s.n_total},
                   {"noise_sigma", s.noise_sigma},
                   {"train_fraction", s.train_fraction},
                   {"p_range", {s.p_min, s.p_max}},
                   {"t_range", {s.t_min, s.t_max}},
                   {"clusters", clusters},
                   {"seed", s.seed}};
  const auto& d = cfg.design;
  ojson dj;
  dj["n_cl"] = d.n_cl;
  dj["gamma"] = d.gamma;
  dj["param_bound"] = d.param_bound;
  dj["big_m"] = d.big_m ? ojson(*d.big_m) : ojson(nullptr);
  dj["regularization_weight"] = d.regularization_weight;
  dj["seed"] = d.seed;
  dj["kmeans_restarts"] = d.kmeans_restarts;
  dj["mip_start"] = d.mip_start;
  dj["time_limit_s"] = d.milp_limits.time_limit_s;
  dj["gap_target"] = d.milp_limits.gap_target;
  dj["node_cap"] = d.milp_limits.node_cap;
  j["design"] = std::move(dj);
  std::vector<std::string> methods;
  for (Method m : cfg.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  j["runs"] = cfg.runs;
  j["jobs"] = cfg.jobs;
  j["out_dir"] = cfg.out_dir;
  j["timing"] = cfg.timing;
  j["verbose"] = cfg.verbose;
  return j;
}

namespace {

// Flag values are captured here and applied over the config file.
struct Overrides {
  std::string config_path;
  std::string kind;
  std::size_t n_total = 0, seed = 0, n_cl = 0, design_seed = 0, kmeans_restarts = 0, node_cap = 0;
  std::size_t runs = 0, jobs = 0;
  double noise_sigma = 0, train_fraction = 0, p_min = 0, p_max = 0, t_min = 0, t_max = 0;
  double gamma = 0, param_bound = 0, big_m = 0, reg_weight = 0, time_limit = 0, gap = 0;
  bool no_mip_start = false, no_timing = false, verbose = false;
  std::string methods, out_dir;
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> setters;

  template <typename T>
  void add(CLI::App* app, const std::string& name, T& target, const std::string& help,
           std::function<void(RunConfig&)> apply) {
    setters.emplace_back(app->add_option(name, target, help), std::move(apply));
  }
  void flag(CLI::App* app, const std::string& name, bool& target, const std::string& help,
            std::function<void(RunConfig&)> apply) {
    setters.emplace_back(app->add_flag(name, target, help), std::move(apply));
  }

  void common(CLI::App* app) {
    app->add_option("--config", config_path, "JSON configuration file; flags override it");
    add(app, "--out", out_dir, "output directory", [this](RunConfig& c) { c.out_dir = out_dir; });
    flag(app, "--no-timing", no_timing, "omit wall-clock fields so outputs are reproducible",
         [](RunConfig& c) { c.timing = false; });
    flag(app, "--verbose", verbose, "log solver progress to stderr", [](RunConfig& c) { c.verbose = true; });
  }
  void scenario(CLI::App* app) {
    add(app, "--kind", kind, "clustered | uniform",
        [this](RunConfig& c) { c.scenario.kind = parse_scenario_kind(kind); });
    add(app, "--n-total", n_total, "number of generated points", [this](RunConfig& c) { c.scenario.n_total = n_total; });
    add(app, "--noise-sigma", noise_sigma, "std of noise on normalized training outputs",
        [this](RunConfig& c) { c.scenario.noise_sigma = noise_sigma; });
    add(app, "--train-fraction", train_fraction, "share of points used for training",
        [this](RunConfig& c) { c.scenario.train_fraction = train_fraction; });
    add(app, "--p-min", p_min, "pressure lower bound [Pa]", [this](RunConfig& c) { c.scenario.p_min = p_min; });
    add(app, "--p-max", p_max, "pressure upper bound [Pa]", [this](RunConfig& c) { c.scenario.p_max = p_max; });
    add(app, "--t-min", t_min, "temperature lower bound [K]", [this](RunConfig& c) { c.scenario.t_min = t_min; });
    add(app, "--t-max", t_max, "temperature upper bound [K]", [this](RunConfig& c) { c.scenario.t_max = t_max; });
    add(app, "--seed", seed, "scenario seed", [this](RunConfig& c) { c.scenario.seed = seed; });
  }
  void design(CLI::App* app) {
    add(app, "--n-cl", n_cl, "number of classes", [this](RunConfig& c) { c.design.n_cl = n_cl; });
    add(app, "--gamma", gamma, "SVM slack weight", [this](RunConfig& c) { c.design.gamma = gamma; });
    add(app, "--param-bound", param_bound, "box on model and hyperplane parameters in the MILP",
        [this](RunConfig& c) { c.design.param_bound = param_bound; });
    add(app, "--big-m", big_m, "big-M constant (default 2·(param_bound·(n_p+1)+1))",
        [this](RunConfig& c) { c.design.big_m = big_m; });
    add(app, "--reg-weight", reg_weight, "weight of SVM terms in the continuity QP",
        [this](RunConfig& c) { c.design.regularization_weight = reg_weight; });
    add(app, "--design-seed", design_seed, "k-means seed", [this](RunConfig& c) { c.design.seed = design_seed; });
    add(app, "--kmeans-restarts", kmeans_restarts, "k-means restarts",
        [this](RunConfig& c) { c.design.kmeans_restarts = kmeans_restarts; });
    flag(app, "--no-mip-start", no_mip_start, "do not seed the MILP with a heuristic labeling",
         [](RunConfig& c) { c.design.mip_start = false; });
    add(app, "--time-limit", time_limit, "MILP time limit [s]",
        [this](RunConfig& c) { c.design.milp_limits.time_limit_s = time_limit; });
    add(app, "--gap", gap, "MILP relative gap target", [this](RunConfig& c) { c.design.milp_limits.gap_target = gap; });
    add(app, "--node-cap", node_cap, "MILP node limit", [this](RunConfig& c) { c.design.milp_limits.node_cap = node_cap; });
  }
  void method_list(CLI::App* app) {
    add(app, "--methods", methods, "comma-separated: sis,mis-std,mis-con,mis-con-lab",
        [this](RunConfig& c) { c.methods = parse_method_list(methods); });
  }

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_path.empty())
      cfg = run_config_from_json(parse_json_document(read_text_file(config_path), config_path), config_path);
    for (const auto& [opt, apply] : setters)
      if (opt->count() > 0) located(opt->get_name(), [&] { apply(cfg); return 0; });
    cfg.validate();
    return cfg;
  }
};

std::string out_path(const RunConfig& cfg, const std::string& file) {
  return (std::filesystem::path(cfg.out_dir) / file).string();
}

void write_manifest(const RunConfig& cfg, const std::string& command, ojson extra = ojson::object()) {
  ojson m;
  m["schema"] = kSchemaVersion;
  m["command"] = command;
  m["config"] = run_config_to_json(cfg);
  for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
  write_text_file(out_path(cfg, "manifest.json"), m.dump(2) + "\n");
}

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Validation: return kExitValidation;
    case ErrorKind::Solver: return kExitSolver;
    case ErrorKind::Io: return kExitIo;
  }
  return kExitValidation;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-model inferential sensor design"};
  app.require_subcommand(1);
  Overrides ov;
  std::string stage = "parse";

  auto* gen = app.add_subcommand("generate", "generate a PCT scenario: train.csv, test.csv, scaler.json");
  ov.common(gen);
  ov.scenario(gen);

  std::string train_path, method_name, scaler_path;
  auto* train = app.add_subcommand("train", "design a sensor: sensor.json, report.json");
  ov.common(train);
  ov.design(train);
  train->add_option("--train", train_path, "training CSV")->required();
  train->add_option("--method", method_name, "sis | mis-std | mis-con | mis-con-lab")->required();
  train->add_option("--scaler", scaler_path, "scaler.json to embed for raw-unit predictions");

  std::string sensor_path, data_path, eval_out;
  auto* evaluate = app.add_subcommand("evaluate", "evaluate a sensor on a CSV: metrics.json");
  evaluate->add_option("--sensor", sensor_path, "sensor.json")->required();
  evaluate->add_option("--data", data_path, "data CSV")->required();
  evaluate->add_option("--out", eval_out, "directory for metrics.json (stdout only when omitted)");

  auto* compare = app.add_subcommand("compare", "train all methods on one scenario: comparison.csv/json");
  ov.common(compare);
  ov.scenario(compare);
  ov.design(compare);
  ov.method_list(compare);

  auto* mc = app.add_subcommand("montecarlo", "repeat compare over seeds: montecarlo.csv, boxplot.csv");
  ov.common(mc);
  ov.scenario(mc);
  ov.design(mc);
  ov.method_list(mc);
  ov.add(mc, "--runs", ov.runs, "number of runs", [&ov](RunConfig& c) { c.runs = ov.runs; });
  ov.add(mc, "--jobs", ov.jobs, "worker threads (0: all cores)", [&ov](RunConfig& c) { c.jobs = ov.jobs; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    app.exit(e, out, err);
    return kExitValidation;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "evaluate") {
      stage = "load sensor";
      const auto sensor =
          sensor_from_json(parse_json_document(read_text_file(sensor_path), sensor_path), sensor_path);
      stage = "load data";
      const auto data = read_dataset_csv(data_path);
      if (data.num_inputs() != sensor.num_inputs())
        throw validation_error(data_path + ": has " + std::to_string(data.num_inputs()) +
                               " inputs, sensor expects " + std::to_string(sensor.num_inputs()));
      stage = "evaluate";
      const Vector pred = predict_all(data, sensor);
      double max_abs = 0.0;
      for (std::size_t i = 0; i < data.size(); ++i) max_abs = std::max(max_abs, std::abs(pred[i] - data.outputs[i]));
      ojson m;
      m["schema"] = kSchemaVersion;
      m["n"] = data.size();
      m["rmse"] = rmse(data.outputs, pred);
      m["max_abs_error"] = max_abs;
      const std::string text = m.dump(2) + "\n";
      out << text;
      if (!eval_out.empty()) {
        stage = "write";
        write_text_file((std::filesystem::path(eval_out) / "metrics.json").string(), text);
      }
      return kExitOk;
    }

    stage = "config";
    RunConfig cfg = ov.resolve();
    if (cfg.verbose) cfg.design.log = &err;

    if (command == "generate") {
      stage = "generate";
      const auto sc = generate_scenario(cfg.scenario);
      stage = "write";
      write_text_file(out_path(cfg, "train.csv"), dataset_csv(sc.train));
      write_text_file(out_path(cfg, "test.csv"), dataset_csv(sc.test));
      write_text_file(out_path(cfg, "scaler.json"), scaler_json(sc.scaler));
      write_manifest(cfg, command);
      out << "generated " << sc.train.size() << " train / " << sc.test.size() << " test points in "
          << cfg.out_dir << "\n";
      return kExitOk;
    }

    if (command == "train") {
      stage = "method";
      const Method method = parse_method(method_name);
      stage = "load train";
      const auto data = read_dataset_csv(train_path);
      std::optional<Scaler> scaler;
      if (!scaler_path.empty()) {
        stage = "load scaler";
        scaler = scaler_from_json(parse_json_document(read_text_file(scaler_path), scaler_path), scaler_path);
      }
      stage = "design " + to_string(method);
      auto rep = design(method, data, cfg.design);
      if (scaler) rep.sensor.scaler = *scaler;
      rep.sensor.metadata = {{"method", to_string(method)}, {"n_train", std::to_string(data.size())}};
      stage = "write";
      write_text_file(out_path(cfg, "sensor.json"), sensor_json(rep.sensor));
      write_text_file(out_path(cfg, "report.json"), report_json(rep, cfg.timing));
      if (rep.sensor.num_inputs() == 2)
        write_text_file(out_path(cfg, "surface.csv"), surface_csv({{to_string(method), &rep.sensor}}));
      write_manifest(cfg, command, {{"train", train_path}, {"method", to_string(method)}, {"scaler", scaler_path}});
      out << to_string(method) << ": train RMSE " << format_number(rep.train_rmse);
      if (rep.milp)
        out << ", MILP " << to_string(rep.milp->status) << " gap " << format_number(rep.milp->gap);
      out << "\n";
      return kExitOk;
    }

    if (command == "compare") {
      stage = "compare";
      const auto cmp = run_comparison(cfg.scenario, cfg.methods, cfg.design);
      stage = "write";
      write_text_file(out_path(cfg, "comparison.csv"), comparison_csv(cmp, cfg.timing));
      write_text_file(out_path(cfg, "comparison.json"), comparison_json(cmp, cfg.timing));
      std::vector<std::pair<std::string, const SensorModel*>> sensors;
      for (const auto& r : cmp.rows)
        if (r.report) sensors.emplace_back(to_string(r.method), &r.report->sensor);
      write_text_file(out_path(cfg, "surface.csv"), surface_csv(sensors));
      write_manifest(cfg, command);
      out << comparison_csv(cmp, cfg.timing);
      return kExitOk;
    }

    if (command == "montecarlo") {
      stage = "montecarlo";
      const auto res = run_montecarlo(cfg.scenario, cfg.runs, cfg.methods, cfg.design, resolved_jobs(cfg.jobs));
      stage = "write";
      write_text_file(out_path(cfg, "montecarlo.csv"), montecarlo_csv(res, cfg.timing));
      write_text_file(out_path(cfg, "boxplot.csv"), boxplot_csv(res, cfg.timing));
      write_text_file(out_path(cfg, "montecarlo.json"), montecarlo_json(res, cfg.timing));
      write_manifest(cfg, command);
      out << boxplot_csv(res, cfg.timing);
      return kExitOk;
    }
  } catch (const Error& e) {
    err << command << ": " << stage << ": " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    err << command << ": " << stage << ": " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace softsensor
