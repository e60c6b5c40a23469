#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "softsensor/design.hpp"
#include "softsensor/study.hpp"
#include "json.hpp"

namespace softsensor {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitSolver = 3, kExitIo = 4 };

struct RunConfig {
  ScenarioConfig scenario;
  DesignConfig design;
  std::vector<Method> methods{Method::Sis, Method::MisStd, Method::MisCon, Method::MisConLab};
  std::size_t runs = 100;
  /// 0 selects the available hardware parallelism.
  std::size_t jobs = 0;
  std::string out_dir = ".";
  bool timing = true;
  bool verbose = false;

  void validate() const;
};

/// Reads a configuration document; unknown keys and type errors are
/// reported with their path (e.g. `config.design.gamma`).
RunConfig run_config_from_json(const nlohmann::ordered_json& j, const std::string& source);
nlohmann::ordered_json run_config_to_json(const RunConfig& cfg);

/// Entry point of the command-line tool; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace softsensor
