#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "softsensor/cli.hpp"
#include "softsensor/io.hpp"

using namespace softsensor;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "softsensor");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("softsensor_test_cli_" + name);
  fs::remove_all(dir);
  return dir.string();
}

std::size_t count_rows(const std::string& csv_path) {
  const auto text = read_text_file(csv_path);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) - 1;
}

}  // namespace

TEST_CASE("generate writes the split and a manifest") {
  const auto dir = fresh_dir("gen");
  const auto r = run({"generate", "--out", dir});
  REQUIRE_MESSAGE(r.code == kExitOk, r.err);
  CHECK(count_rows(dir + "/train.csv") == 45);
  CHECK(count_rows(dir + "/test.csv") == 45);
  for (const char* f : {"/scaler.json", "/manifest.json"})
    CHECK(read_text_file(dir + f).find("\"schema\": 1") != std::string::npos);
  const auto uni = run({"generate", "--kind", "uniform", "--n-total", "30", "--out", dir});
  REQUIRE(uni.code == kExitOk);
  CHECK(count_rows(dir + "/train.csv") == 15);
}

TEST_CASE("invalid ranges exit with a validation code") {
  const auto r = run({"generate", "--p-min", "5", "--p-max", "1", "--out", fresh_dir("bad")});
  CHECK(r.code == kExitValidation);
  CHECK(r.err.find("p_range") != std::string::npos);
  CHECK(run({"generate", "--bogus"}).code == kExitValidation);
  CHECK(run({}).code == kExitValidation);
}

TEST_CASE("unknown method lists the valid names") {
  const auto dir = fresh_dir("method");
  REQUIRE(run({"generate", "--out", dir}).code == kExitOk);
  const auto r = run({"train", "--train", dir + "/train.csv", "--method", "svm", "--out", dir});
  CHECK(r.code == kExitValidation);
  CHECK(r.err.find("mis-con-lab") != std::string::npos);
}

TEST_CASE("train then evaluate reproduces the training error") {
  const auto dir = fresh_dir("train");
  REQUIRE(run({"generate", "--out", dir}).code == kExitOk);
  const auto t = run({"train", "--train", dir + "/train.csv", "--method", "mis-std", "--out", dir});
  REQUIRE_MESSAGE(t.code == kExitOk, t.err);
  const auto report = nlohmann::json::parse(read_text_file(dir + "/report.json"));
  CHECK(report["schema"] == 1);
  CHECK(fs::exists(dir + "/surface.csv"));
  const auto e = run({"evaluate", "--sensor", dir + "/sensor.json", "--data", dir + "/train.csv", "--out", dir});
  REQUIRE_MESSAGE(e.code == kExitOk, e.err);
  const auto metrics = nlohmann::json::parse(e.out);
  CHECK(metrics["schema"] == 1);
  CHECK(metrics["n"] == 45);
  CHECK(metrics["rmse"].get<double>() == doctest::Approx(report["train_rmse"].get<double>()).epsilon(1e-12));
  CHECK(read_text_file(dir + "/metrics.json") == e.out);
}

TEST_CASE("schema mismatch and missing files map to their exit codes") {
  const auto dir = fresh_dir("schema");
  REQUIRE(run({"generate", "--out", dir}).code == kExitOk);
  REQUIRE(run({"train", "--train", dir + "/train.csv", "--method", "sis", "--out", dir}).code == kExitOk);
  auto text = read_text_file(dir + "/sensor.json");
  text.replace(text.find("\"schema\": 1"), 11, "\"schema\": 2");
  write_text_file(dir + "/old.json", text);
  const auto r = run({"evaluate", "--sensor", dir + "/old.json", "--data", dir + "/test.csv"});
  CHECK(r.code == kExitValidation);
  CHECK(r.err.find("expected 1, found 2") != std::string::npos);
  CHECK(run({"evaluate", "--sensor", dir + "/none.json", "--data", dir + "/test.csv"}).code == kExitIo);
  CHECK(run({"train", "--train", dir + "/none.csv", "--method", "sis"}).code == kExitIo);
}

TEST_CASE("solver failures exit with code 3") {
  const auto dir = fresh_dir("solver");
  REQUIRE(run({"generate", "--n-total", "24", "--out", dir}).code == kExitOk);
  const auto r = run({"train", "--train", dir + "/train.csv", "--method", "mis-con-lab", "--time-limit", "0",
                      "--no-mip-start", "--out", dir});
  CHECK(r.code == kExitSolver);
  CHECK(r.err.find("no feasible labeling") != std::string::npos);
}

TEST_CASE("a binding node cap still emits the incumbent") {
  const auto dir = fresh_dir("cap");
  REQUIRE(run({"generate", "--n-total", "24", "--out", dir}).code == kExitOk);
  const auto r =
      run({"train", "--train", dir + "/train.csv", "--method", "mis-con-lab", "--node-cap", "1", "--out", dir});
  REQUIRE_MESSAGE(r.code == kExitOk, r.err);
  const auto report = nlohmann::json::parse(read_text_file(dir + "/report.json"));
  CHECK(report["milp"]["limit_hit"] == true);
  CHECK(report["continuity"]["pass"] == true);
}

TEST_CASE("config files are checked and flags override them") {
  const auto dir = fresh_dir("config");
  write_text_file(dir + "/bad.json", R"({"schema": 1, "design": {"gama": 1}})");
  const auto bad = run({"generate", "--config", dir + "/bad.json", "--out", dir});
  CHECK(bad.code == kExitValidation);
  CHECK(bad.err.find("gama") != std::string::npos);

  write_text_file(dir + "/cfg.json", R"({"schema": 1, "scenario": {"kind": "uniform", "n_total": 30}})");
  REQUIRE(run({"generate", "--config", dir + "/cfg.json", "--n-total", "20", "--out", dir}).code == kExitOk);
  CHECK(count_rows(dir + "/train.csv") == 10);
  const auto manifest = nlohmann::json::parse(read_text_file(dir + "/manifest.json"));
  CHECK(manifest.dump().find("uniform") != std::string::npos);

  write_text_file(dir + "/v2.json", R"({"schema": 2})");
  CHECK(run({"generate", "--config", dir + "/v2.json", "--out", dir}).code == kExitValidation);
}

TEST_CASE("compare and montecarlo are reproducible without timing") {
  const auto a = fresh_dir("rep_a"), b = fresh_dir("rep_b");
  for (const auto& dir : {a, b}) {
    const std::vector<std::string> common{"--kind", "uniform", "--n-total", "20", "--seed", "4",
                                          "--node-cap", "50", "--no-timing", "--out", dir};
    auto cmp = common;
    cmp.insert(cmp.begin(), "compare");
    REQUIRE(run(cmp).code == kExitOk);
    auto mc = common;
    mc.insert(mc.begin(), "montecarlo");
    mc.insert(mc.end(), {"--runs", "3", "--methods", "sis,mis-std,mis-con-lab", "--jobs", dir == a ? "1" : "2"});
    const auto r = run(mc);
    REQUIRE_MESSAGE(r.code == kExitOk, r.err);
  }
  for (const char* f : {"/comparison.csv", "/comparison.json", "/surface.csv", "/montecarlo.csv",
                        "/boxplot.csv", "/montecarlo.json"})
    CHECK_MESSAGE(read_text_file(a + f) == read_text_file(b + f), f);
  CHECK(read_text_file(a + "/comparison.json").find("\"schema\": 1") != std::string::npos);
  CHECK(read_text_file(a + "/montecarlo.json").find("\"schema\": 1") != std::string::npos);
}
