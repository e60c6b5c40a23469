#pragma once

#include <string>

#include "softsensor/core.hpp"
#include "softsensor/design.hpp"
#include "json.hpp"

namespace softsensor {

inline constexpr int kSchemaVersion = 1;

std::string read_text_file(const std::string& path);
/// Creates missing parent directories.
void write_text_file(const std::string& path, const std::string& content);

/// Header row required. Columns: inputs…, output, optional trailing `label`
/// (1-based class index). `source` prefixes error messages.
Dataset parse_dataset_csv(const std::string& text, const std::string& source);
Dataset read_dataset_csv(const std::string& path);
std::string dataset_csv(const Dataset& d);

nlohmann::ordered_json scaler_to_json(const Scaler& s);
Scaler scaler_from_json(const nlohmann::ordered_json& j, const std::string& source);
nlohmann::ordered_json sensor_to_json(const SensorModel& s);
SensorModel sensor_from_json(const nlohmann::ordered_json& j, const std::string& source);

/// Parses a document and checks its `"schema"` field.
nlohmann::ordered_json parse_json_document(const std::string& text, const std::string& source);

std::string scaler_json(const Scaler& s);
std::string sensor_json(const SensorModel& s);
/// With `timing` false, wall-clock fields are omitted.
std::string report_json(const DesignReport& r, bool timing);

}  // namespace softsensor
