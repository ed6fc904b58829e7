#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "fockbench/fockbench.h"

namespace {

struct ScenarioDeleter {
  void operator()(fb_scenario* s) const { fb_scenario_free(s); }
};
struct ResultDeleter {
  void operator()(fb_result* r) const { fb_result_free(r); }
};
struct StringDeleter {
  void operator()(char* s) const { fb_string_free(s); }
};
using ScenarioPtr = std::unique_ptr<fb_scenario, ScenarioDeleter>;
using ResultPtr = std::unique_ptr<fb_result, ResultDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

int report_error(fb_status status) {
  std::cerr << "fockbench: " << fb_last_error() << "\n";
  return static_cast<int>(status);
}

// A path that does not exist but names a shipped preset loads that preset.
fb_status open_scenario(const std::string& cfg, ScenarioPtr& out) {
  fb_scenario* raw = nullptr;
  fb_status status;
  std::error_code ec;
  const std::string stem = std::filesystem::path(cfg).stem().string();
  if (!std::filesystem::exists(cfg, ec) && fb_preset_text(stem.c_str())) {
    std::cerr << "fockbench: using shipped preset '" << stem << "'\n";
    status = fb_scenario_from_preset(stem.c_str(), &raw);
  } else {
    status = fb_scenario_load(cfg.c_str(), &raw);
  }
  out.reset(raw);
  return status;
}

void print_summary(const fb_result* result) {
  if (fb_result_table_count(result) == 0) return;
  char* csv = nullptr;
  if (fb_result_table_csv(result, 0, &csv) == FB_OK) {
    StringPtr owned(csv);
    std::string text(csv);
    for (std::size_t pos; (pos = text.find('\r')) != std::string::npos;) text.erase(pos, 1);
    std::cout << text;
  }
}

int execute(const std::string& cfg, const std::string& out_dir, unsigned threads, bool sweep, const std::string& command) {
  ScenarioPtr scenario;
  if (fb_status s = open_scenario(cfg, scenario); s != FB_OK) return report_error(s);
  if (sweep && !fb_scenario_has_sweep(scenario.get())) {
    std::cerr << "fockbench: scenario has no 'sweep' section\n";
    return FB_ERR_PARSE;
  }
  const std::string dir = out_dir.empty() ? "fockbench-out/" + std::string(fb_scenario_name(scenario.get())) : out_dir;

  const auto start = std::chrono::steady_clock::now();
  fb_result* raw = nullptr;
  const fb_status status = sweep ? fb_sweep(scenario.get(), threads, &raw) : fb_run(scenario.get(), threads, &raw);
  ResultPtr result(raw);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!result) return report_error(status);

  for (std::size_t i = 0; i < fb_result_warning_count(result.get()); ++i) {
    std::cerr << "warning: " << fb_result_warning(result.get(), i) << "\n";
  }
  for (std::size_t i = 0; i < fb_result_note_count(result.get()); ++i) std::cerr << fb_result_note(result.get(), i) << "\n";
  print_summary(result.get());

  const fb_status written = fb_result_write(result.get(), scenario.get(), dir.c_str(), command.c_str(), wall, threads,
                                            static_cast<int>(status));
  if (written != FB_OK) return report_error(written);
  std::cerr << "wrote " << fb_result_table_count(result.get()) << " tables and manifest.yaml to " << dir << " in " << wall
            << " s\n";
  const double budget = fb_scenario_budget_seconds(scenario.get());
  if (budget >= 0 && wall > budget) std::cerr << "warning: run exceeded its " << budget << " s budget\n";
  if (status != FB_OK) return report_error(status);
  return 0;
}

int validate(const std::string& cfg, unsigned threads) {
  ScenarioPtr scenario;
  if (fb_status s = open_scenario(cfg, scenario); s != FB_OK) return report_error(s);
  char* raw = nullptr;
  const fb_status status = fb_validate(scenario.get(), threads, &raw);
  StringPtr report(raw);
  if (report) std::cout << report.get();
  if (status != FB_OK) return report_error(status);
  return 0;
}

int list_presets() {
  for (std::size_t i = 0; i < fb_preset_count(); ++i) {
    const char* name = fb_preset_name(i);
    fb_scenario* raw = nullptr;
    const fb_status status = fb_scenario_from_preset(name, &raw);
    ScenarioPtr scenario(raw);
    std::cout << name;
    if (status == FB_OK) {
      std::cout << "  [" << fb_scenario_engine(scenario.get()) << "]  " << fb_scenario_description(scenario.get());
    } else {
      std::cout << "  (does not parse: " << fb_last_error() << ")";
    }
    std::cout << "\n";
  }
  return 0;
}

int show_preset(const std::string& name) {
  const char* text = fb_preset_text(name.c_str());
  if (!text) {
    std::cerr << "fockbench: unknown preset '" << name << "'; try 'fockbench presets list'\n";
    return FB_ERR_PARSE;
  }
  std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fockbench: photon-number statistics of cavities with sharp, intensity-dependent loss"};
  app.set_version_flag("--version", fb_version());
  app.require_subcommand(1);

  std::string cfg, out_dir, preset;
  unsigned threads = 0;

  auto* run = app.add_subcommand("run", "Run one scenario and write its CSV tables");
  run->add_option("cfg", cfg, "Scenario file (or the name of a shipped preset)")->required();
  run->add_option("--out", out_dir, "Output directory (default fockbench-out/<scenario name>)");
  run->add_option("--threads", threads, "Worker threads, 0 for all hardware threads");

  auto* sweep = app.add_subcommand("sweep", "Run every value of the scenario's sweep section");
  sweep->add_option("cfg", cfg, "Scenario file (or the name of a shipped preset)")->required();
  sweep->add_option("--out", out_dir, "Output directory (default fockbench-out/<scenario name>)");
  sweep->add_option("--threads", threads, "Worker threads, 0 for all hardware threads");

  auto* check = app.add_subcommand("validate", "Parse a scenario and run its consistency checks");
  check->add_option("cfg", cfg, "Scenario file (or the name of a shipped preset)")->required();
  check->add_option("--threads", threads, "Worker threads, 0 for all hardware threads");

  auto* presets = app.add_subcommand("presets", "List or print the shipped scenarios");
  presets->require_subcommand(1);
  presets->add_subcommand("list", "List preset names");
  auto* show = presets->add_subcommand("show", "Print a preset's scenario text");
  show->add_option("name", preset, "Preset name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : FB_ERR_PARSE;
  }

  std::string command;
  for (int i = 0; i < argc; ++i) command += (i ? " " : "") + std::string(argv[i]);

  if (run->parsed()) return execute(cfg, out_dir, threads, false, command);
  if (sweep->parsed()) return execute(cfg, out_dir, threads, true, command);
  if (check->parsed()) return validate(cfg, threads);
  if (show->parsed()) return show_preset(preset);
  return list_presets();
}
