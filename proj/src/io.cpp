#include "softsensor/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "softsensor/error.hpp"
#include "softsensor/format.hpp"

namespace softsensor {

using ojson = nlohmann::ordered_json;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error(path + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw io_error(path + ": read failed");
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  if (ec) throw io_error(p.parent_path().string() + ": cannot create directory: " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error(path + ": cannot open for writing");
  out << content;
  out.flush();
  if (!out) throw io_error(path + ": write failed");
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s[0] == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    throw io_error(where + ": '" + s + "' is not a finite number");
  return v;
}

}  // namespace

Dataset parse_dataset_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<ClassIndex> labels;
  bool has_label = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto fields = split_line(line);
    const std::string where = source + ":" + std::to_string(line_no);
    if (header.empty()) {
      header = std::move(fields);
      has_label = header.back() == "label";
      const std::size_t data_cols = header.size() - (has_label ? 1 : 0);
      if (data_cols < 2) throw io_error(where + ": header needs at least one input and one output column");
      for (const auto& h : header)
        if (h.empty()) throw io_error(where + ": empty column name in header");
      continue;
    }
    if (fields.size() != header.size())
      throw io_error(where + ": expected " + std::to_string(header.size()) + " fields, found " +
                     std::to_string(fields.size()));
    std::vector<double> row;
    const std::size_t data_cols = header.size() - (has_label ? 1 : 0);
    for (std::size_t c = 0; c < data_cols; ++c)
      row.push_back(parse_double(fields[c], where + " column '" + header[c] + "'"));
    if (has_label) {
      const double l = parse_double(fields.back(), where + " column 'label'");
      if (l < 1.0 || l != std::floor(l))
        throw io_error(where + ": label must be a positive integer (classes are numbered from 1)");
      labels.push_back(static_cast<ClassIndex>(l) - 1);
    }
    rows.push_back(std::move(row));
  }
  if (header.empty()) throw io_error(source + ": missing header row");
  if (rows.empty()) throw io_error(source + ": no data rows");
  const std::size_t n_p = header.size() - (has_label ? 2 : 1);
  DenseMatrix x(rows.size(), n_p);
  Vector y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < n_p; ++j) x(i, j) = rows[i][j];
    y[i] = rows[i][n_p];
  }
  Dataset d(std::move(x), std::move(y));
  d.input_names.assign(header.begin(), header.begin() + static_cast<std::ptrdiff_t>(n_p));
  d.output_name = header[n_p];
  d.labels = std::move(labels);
  d.validate();
  return d;
}

Dataset read_dataset_csv(const std::string& path) { return parse_dataset_csv(read_text_file(path), path); }

std::string dataset_csv(const Dataset& d) {
  d.validate();
  std::ostringstream os;
  for (std::size_t j = 0; j < d.num_inputs(); ++j)
    os << (j < d.input_names.size() ? d.input_names[j] : "x" + std::to_string(j + 1)) << ',';
  os << d.output_name;
  if (!d.labels.empty()) os << ",label";
  os << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d.num_inputs(); ++j) os << format_number(d.inputs(i, j)) << ',';
    os << format_number(d.outputs[i]);
    if (!d.labels.empty()) os << ',' << d.labels[i] + 1;
    os << '\n';
  }
  return os.str();
}

ojson parse_json_document(const std::string& text, const std::string& source) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw io_error(source + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw io_error(source + ": expected a JSON object");
  if (!j.contains("schema")) throw validation_error(source + ": missing \"schema\" field");
  const auto& s = j["schema"];
  if (!s.is_number_integer() || s.get<long long>() != kSchemaVersion)
    throw validation_error(source + ": schema version mismatch: expected " +
                           std::to_string(kSchemaVersion) + ", found " + s.dump());
  return j;
}

namespace {

template <typename T>
T get_field(const ojson& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw validation_error(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw validation_error(where + "." + key + ": wrong type");
  }
}

}  // namespace

ojson scaler_to_json(const Scaler& s) {
  ojson j;
  j["input_min"] = s.input_min;
  j["input_max"] = s.input_max;
  j["output_min"] = s.output_min;
  j["output_max"] = s.output_max;
  return j;
}

Scaler scaler_from_json(const ojson& j, const std::string& where) {
  Scaler s;
  s.input_min = get_field<Vector>(j, "input_min", where);
  s.input_max = get_field<Vector>(j, "input_max", where);
  s.output_min = get_field<double>(j, "output_min", where);
  s.output_max = get_field<double>(j, "output_max", where);
  s.validate();
  return s;
}

ojson sensor_to_json(const SensorModel& s) {
  s.validate();
  ojson j;
  j["schema"] = kSchemaVersion;
  j["n_cl"] = s.num_classes();
  j["n_p"] = s.num_inputs();
  ojson models = ojson::array();
  for (const auto& m : s.models) models.push_back({{"p", m.p}, {"b_p", m.b_p}});
  j["models"] = std::move(models);
  ojson planes = ojson::array(), pairs = ojson::array();
  if (s.switching) {
    for (const auto& h : s.switching->hyperplanes) planes.push_back({{"w", h.w}, {"b_w", h.b_w}});
    for (const auto& [r, t] : s.switching->pairs) pairs.push_back({r + 1, t + 1});
  }
  j["hyperplanes"] = std::move(planes);
  j["pairs"] = std::move(pairs);
  j["scaler"] = scaler_to_json(s.scaler);
  ojson meta = ojson::object();
  for (const auto& [k, v] : s.metadata) meta[k] = v;
  j["metadata"] = std::move(meta);
  return j;
}

SensorModel sensor_from_json(const ojson& j, const std::string& source) {
  SensorModel s;
  const auto n_cl = get_field<std::size_t>(j, "n_cl", source);
  const auto n_p = get_field<std::size_t>(j, "n_p", source);
  const auto models = get_field<ojson>(j, "models", source);
  if (!models.is_array() || models.size() != n_cl)
    throw validation_error(source + ".models: expected " + std::to_string(n_cl) + " entries");
  for (std::size_t k = 0; k < models.size(); ++k) {
    const std::string where = source + ".models[" + std::to_string(k) + "]";
    AffineModel m;
    m.p = get_field<Vector>(models[k], "p", where);
    m.b_p = get_field<double>(models[k], "b_p", where);
    if (m.p.size() != n_p) throw validation_error(where + ".p: expected " + std::to_string(n_p) + " entries");
    s.models.push_back(std::move(m));
  }
  const auto planes = get_field<ojson>(j, "hyperplanes", source);
  const auto pairs = get_field<ojson>(j, "pairs", source);
  if (!planes.is_array() || !pairs.is_array() || planes.size() != pairs.size())
    throw validation_error(source + ": hyperplanes and pairs must be arrays of equal length");
  if (n_cl > 1) {
    SwitchingLogic sw;
    sw.n_cl = n_cl;
    for (std::size_t k = 0; k < planes.size(); ++k) {
      const std::string where = source + ".hyperplanes[" + std::to_string(k) + "]";
      Hyperplane h;
      h.w = get_field<Vector>(planes[k], "w", where);
      h.b_w = get_field<double>(planes[k], "b_w", where);
      sw.hyperplanes.push_back(std::move(h));
      const auto pr = pairs[k];
      if (!pr.is_array() || pr.size() != 2 || !pr[0].is_number_unsigned() || !pr[1].is_number_unsigned() ||
          pr[0].get<std::size_t>() < 1 || pr[1].get<std::size_t>() < 1)
        throw validation_error(source + ".pairs[" + std::to_string(k) + "]: expected [r, s] with r, s ≥ 1");
      sw.pairs.emplace_back(pr[0].get<std::size_t>() - 1, pr[1].get<std::size_t>() - 1);
    }
    s.switching = std::move(sw);
  } else if (!planes.empty()) {
    throw validation_error(source + ": a single-model sensor has no hyperplanes");
  }
  s.scaler = scaler_from_json(get_field<ojson>(j, "scaler", source), source + ".scaler");
  const auto meta = get_field<ojson>(j, "metadata", source);
  if (!meta.is_object()) throw validation_error(source + ".metadata: expected an object");
  for (auto it = meta.begin(); it != meta.end(); ++it) {
    if (!it.value().is_string()) throw validation_error(source + ".metadata." + it.key() + ": expected a string");
    s.metadata.emplace_back(it.key(), it.value().get<std::string>());
  }
  s.validate();
  return s;
}

std::string scaler_json(const Scaler& s) {
  ojson j;
  j["schema"] = kSchemaVersion;
  j["input_min"] = s.input_min;
  j["input_max"] = s.input_max;
  j["output_min"] = s.output_min;
  j["output_max"] = s.output_max;
  return j.dump(2) + "\n";
}

std::string sensor_json(const SensorModel& s) { return sensor_to_json(s).dump(2) + "\n"; }

namespace {

ojson finite_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

}  // namespace

std::string report_json(const DesignReport& r, bool timing) {
  ojson j;
  j["schema"] = kSchemaVersion;
  j["method"] = to_string(r.method);
  j["train_rmse"] = r.train_rmse;
  std::vector<std::size_t> labels;
  for (auto l : r.labels_used.labels()) labels.push_back(l + 1);
  j["labels_used"] = labels;
  if (timing) {
    ojson t = ojson::array();
    for (const auto& s : r.timings) t.push_back({{"stage", s.stage}, {"seconds", s.seconds}});
    j["timings"] = std::move(t);
    j["total_seconds"] = r.total_seconds();
  }
  if (r.milp) {
    const auto& m = *r.milp;
    ojson mj;
    mj["status"] = to_string(m.status);
    mj["objective"] = finite_or_null(m.objective);
    mj["best_bound"] = finite_or_null(m.best_bound);
    mj["gap"] = finite_or_null(m.gap);
    mj["nodes"] = m.nodes;
    mj["lp_iterations"] = m.lp_iterations;
    mj["limit_hit"] = m.limit_hit;
    mj["timed_out"] = m.status == MipStatus::TimedOut;
    if (m.start_objective) mj["start_objective"] = *m.start_objective;
    if (m.kmeans_objective) mj["kmeans_objective"] = *m.kmeans_objective;
    j["milp"] = std::move(mj);
  }
  if (r.continuity) {
    const auto& c = *r.continuity;
    j["continuity"] = {{"max_error", c.max_error},
                       {"samples", c.samples},
                       {"degenerate_hyperplanes", c.degenerate_hyperplanes},
                       {"pass", c.pass}};
  }
  std::vector<std::size_t> fb;
  for (auto f : r.fallback_regions) fb.push_back(f + 1);
  j["fallback_regions"] = fb;
  if (r.triple_dependency) j["triple_dependency"] = *r.triple_dependency;
  j["notes"] = r.notes;
  j["sensor"] = sensor_to_json(r.sensor);
  return j.dump(2) + "\n";
}

}  // namespace softsensor
