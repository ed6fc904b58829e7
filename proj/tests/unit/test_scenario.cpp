#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "fockbench/csv.hpp"
#include "fockbench/presets.hpp"
#include "fockbench/scenario.hpp"

using namespace fockbench;

namespace {

const char* kLinear = R"(name: lin
engine: decay
loss:
  kind: linear
  kappa: 2.0
initial:
  kind: coherent
  n_bar: 20
numerics:
  t_final: 1.0
  report_count: 4
)";

std::string table_text(const Table& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

int parse_error_line(const std::string& text) {
  try {
    parse_scenario(text, "case.cfg");
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

std::string parse_error_message(const std::string& text) {
  try {
    parse_scenario(text, "case.cfg");
  } catch (const ParseError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("numbers print in shortest round-trip form") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-300, 300);
  for (int i = 0; i < 20000; ++i) {
    const double x = mant(rng) * std::pow(10.0, expo(rng));
    REQUIRE(std::stod(format_number(x)) == x);
  }
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(5000.0) == "5000");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("CSV quoting and record separators follow RFC 4180") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  Table t{"x", {"a", "b"}, {{1.5, std::string("q,r")}, {Cell{}, std::int64_t{7}}}};
  CHECK(table_text(t) == "a,b\r\n1.5,\"q,r\"\r\n,7\r\n");
}

TEST_CASE("rates scale with the time unit and times with its inverse") {
  std::string text = kLinear;
  text = "time_unit: 1.0e-3\n" + text;
  const auto sc = parse_scenario(text);
  CHECK(sc.loss.per_photon(1.0) == doctest::Approx(2.0e-3));
  CHECK(sc.numerics.t_final == doctest::Approx(1000.0));
  const auto r = run_scenario(sc);
  const auto& moments = r.tables[1];
  CHECK(std::get<double>(moments.rows.back()[0]) == doctest::Approx(1.0));
  CHECK(std::get<double>(moments.rows.back()[1]) == doctest::Approx(20.0 * std::exp(-2.0)).epsilon(1e-6));
}

TEST_CASE("unknown keys are reported with their line") {
  std::string text = kLinear;
  text.replace(text.find("  kappa: 2.0"), 12, "  kappa: 2.0\n  kapa: 3.0");
  CHECK(parse_error_line(text) == 6);
  CHECK(parse_error_message(text).find("case.cfg:6") != std::string::npos);
  CHECK(parse_error_line(std::string(kLinear) + "extra: 1\n") == 12);
}

TEST_CASE("missing sections and bad values are parse errors") {
  CHECK(parse_error_line("engine: decay\n") > 0);
  CHECK(parse_error_message("engine: warp\nloss: {kind: linear, kappa: 1}\n").find("unknown engine") != std::string::npos);
  std::string text = kLinear;
  text.replace(text.find("kappa: 2.0"), 10, "kappa: fast");
  CHECK(parse_error_line(text) == 5);
  text = kLinear;
  text.replace(text.find("t_final: 1.0"), 12, "t_final: -1");
  CHECK(parse_error_line(text) > 0);
  CHECK(parse_error_line("engine: decay\nloss: [1, 2\n") > 0);
}

TEST_CASE("engines reject gains and states they cannot use") {
  std::string text = std::string(kLinear) + "gain: {kind: saturable, A: 1}\n";
  text.replace(text.find("engine: decay"), 13, "engine: cumulant");
  CHECK(parse_error_message(text).find("needs gain kind none") != std::string::npos);
  text = kLinear;
  text.replace(text.find("engine: decay"), 13, "engine: laser-steady");
  CHECK(parse_error_line(text) > 0);
}

TEST_CASE("sweeps re-parse the document with one value replaced") {
  const auto sc = parse_scenario(std::string(kLinear) + "sweep:\n  parameter: loss.kappa\n  values: [1, 2, 4]\n");
  REQUIRE(sc.sweep);
  const auto one = with_parameter(sc, "loss.kappa", 4.0);
  CHECK(one.loss.per_photon(1.0) == doctest::Approx(4.0));
  CHECK_FALSE(one.sweep);
  const auto r = sweep_scenario(sc, {1});
  CHECK_FALSE(r.failure);
  CHECK(r.tables[0].rows.size() == 3);
  CHECK(r.tables[0].columns[0] == "loss.kappa");
  CHECK(r.tables[1].rows.size() == 12);
  CHECK(parse_error_line(std::string(kLinear) + "sweep:\n  parameter: loss.nope\n  values: [1]\n") == 13);
}

TEST_CASE("failed sweep instances are recorded per row") {
  const std::string text = std::string(kLinear) + "sweep:\n  parameter: initial.n_bar\n  values: [20, 1e9]\n";
  std::string pinned = text;
  pinned.replace(pinned.find("  t_final"), 0, "  n_max: 200\n");
  const auto r = sweep_scenario(parse_scenario(pinned), {1});
  REQUIRE(r.failure);
  CHECK(*r.failure == ErrorKind::truncation);
  CHECK(std::get<std::string>(r.tables[0].rows[0][1]) == "ok");
  CHECK(std::get<std::string>(r.tables[0].rows[1][1]) != "ok");
}

TEST_CASE("runs are deterministic") {
  const auto sc = parse_scenario(kLinear);
  const auto a = run_scenario(sc), b = run_scenario(sc);
  REQUIRE(a.tables.size() == b.tables.size());
  for (std::size_t i = 0; i < a.tables.size(); ++i) CHECK(table_text(a.tables[i]) == table_text(b.tables[i]));
  CHECK(scenario_hash(kLinear) == scenario_hash(kLinear));
  CHECK(scenario_hash(kLinear).size() == 16);
}

TEST_CASE("results are written as CSV files plus a manifest") {
  const auto sc = parse_scenario(kLinear);
  const auto r = run_scenario(sc);
  const auto dir = std::filesystem::temp_directory_path() / "fockbench_unit_out";
  std::filesystem::remove_all(dir);
  write_results(r, sc, dir.string(), {"test", 0.5, 1, 0});
  CHECK(std::filesystem::exists(dir / "summary.csv"));
  CHECK(std::filesystem::exists(dir / "moments.csv"));
  std::ifstream manifest(dir / "manifest.yaml");
  std::stringstream ss;
  ss << manifest.rdbuf();
  CHECK(ss.str().find("hash: " + scenario_hash(kLinear)) != std::string::npos);
  CHECK(ss.str().find("engine: decay") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("every shipped preset parses") {
  const auto names = preset_names();
  CHECK(names.size() == 5);
  for (const auto& name : names) {
    INFO(name);
    const auto sc = parse_scenario(*preset_text(name), name + ".cfg");
    CHECK(sc.name == name);
    CHECK(sc.budget_seconds);
    if (sc.sweep) {
      for (double v : sc.sweep->values) CHECK_NOTHROW(with_parameter(sc, sc.sweep->parameter, v));
    }
  }
  CHECK_FALSE(preset_text("nope"));
}
