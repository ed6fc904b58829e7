#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <string>

#include "fockbench/fockbench.h"

namespace {

const char* kLinear = R"(name: lin
engine: decay
loss: {kind: linear, kappa: 1.0}
initial: {kind: coherent, n_bar: 20}
numerics: {t_final: 1.0, report_count: 5}
)";

}  // namespace

TEST_CASE("parse failures return the parse status and a located message") {
  fb_scenario* s = reinterpret_cast<fb_scenario*>(0x1);
  CHECK(fb_scenario_parse("engine: decay\nbogus: 1\n", "bad.cfg", &s) == FB_ERR_PARSE);
  CHECK(s == nullptr);
  CHECK(std::string(fb_last_error()).find("bad.cfg:2") != std::string::npos);
  CHECK(fb_scenario_parse(nullptr, "x", &s) == FB_ERR_INTERNAL);
  CHECK(fb_scenario_load("/nonexistent/file.cfg", &s) == FB_ERR_PARSE);
}

TEST_CASE("a scenario runs and exposes its tables") {
  fb_scenario* s = nullptr;
  REQUIRE(fb_scenario_parse(kLinear, "lin.cfg", &s) == FB_OK);
  CHECK(std::string(fb_scenario_name(s)) == "lin");
  CHECK(std::string(fb_scenario_engine(s)) == "decay");
  CHECK(fb_scenario_has_sweep(s) == 0);
  CHECK(fb_scenario_budget_seconds(s) < 0);
  fb_result* r = nullptr;
  REQUIRE(fb_run(s, 1, &r) == FB_OK);
  REQUIRE(fb_result_table_count(r) >= 2);
  CHECK(std::string(fb_result_table_name(r, 0)) == "summary");
  CHECK(fb_result_table_rows(r, 1) == 5);
  CHECK(fb_result_table_name(r, 99) == nullptr);
  char* csv = nullptr;
  REQUIRE(fb_result_table_csv(r, 1, &csv) == FB_OK);
  CHECK(std::strncmp(csv, "time,mean,variance,fano", 23) == 0);
  fb_string_free(csv);
  CHECK(std::string(fb_result_failure(r)).empty());

  const auto dir = std::filesystem::temp_directory_path() / "fockbench_capi_out";
  std::filesystem::remove_all(dir);
  CHECK(fb_result_write(r, s, dir.c_str(), "test", 0.1, 1, 0) == FB_OK);
  CHECK(std::filesystem::exists(dir / "manifest.yaml"));
  std::filesystem::remove_all(dir);
  fb_result_free(r);
  fb_scenario_free(s);
}

TEST_CASE("engine failures map to their status") {
  fb_scenario* s = nullptr;
  const std::string text = std::string(kLinear) + "gain: {kind: saturable, A: 5.0, n_s: 1.0e6}\n";
  std::string pinned = text;
  pinned.replace(pinned.find("t_final"), 0, "n_max: 100, ");
  REQUIRE(fb_scenario_parse(pinned.c_str(), "grow.cfg", &s) == FB_OK);
  fb_result* r = nullptr;
  CHECK(fb_run(s, 1, &r) == FB_ERR_TRUNCATION);
  CHECK(r == nullptr);
  CHECK(std::string(fb_last_error()).find("n_max") != std::string::npos);
  fb_scenario_free(s);
}

TEST_CASE("validation reports as text") {
  fb_scenario* s = nullptr;
  REQUIRE(fb_scenario_parse(kLinear, "lin.cfg", &s) == FB_OK);
  char* report = nullptr;
  CHECK(fb_validate(s, 1, &report) == FB_OK);
  REQUIRE(report != nullptr);
  CHECK(std::string(report).find("parsed and checked") != std::string::npos);
  fb_string_free(report);
  fb_scenario_free(s);
}

TEST_CASE("presets are listed and loadable") {
  REQUIRE(fb_preset_count() == 5);
  for (size_t i = 0; i < fb_preset_count(); ++i) {
    const char* name = fb_preset_name(i);
    REQUIRE(name != nullptr);
    CHECK(fb_preset_text(name) != nullptr);
    fb_scenario* s = nullptr;
    CHECK(fb_scenario_from_preset(name, &s) == FB_OK);
    CHECK(fb_scenario_budget_seconds(s) > 0);
    fb_scenario_free(s);
  }
  CHECK(fb_preset_name(99) == nullptr);
  CHECK(fb_preset_text("nope") == nullptr);
  fb_scenario* s = nullptr;
  CHECK(fb_scenario_from_preset("nope", &s) == FB_ERR_PARSE);
}

TEST_CASE("null handles are tolerated") {
  fb_scenario_free(nullptr);
  fb_result_free(nullptr);
  fb_string_free(nullptr);
  CHECK(fb_result_table_count(nullptr) == 0);
  CHECK(std::strlen(fb_version()) > 0);
}
