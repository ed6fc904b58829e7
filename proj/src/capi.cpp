#include "fockbench/fockbench.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <sstream>
#include <string>

#include "fockbench/csv.hpp"
#include "fockbench/presets.hpp"
#include "fockbench/scenario.hpp"

struct fb_scenario {
  fockbench::Scenario scenario;
};

struct fb_result {
  fockbench::RunResult result;
};

namespace {

thread_local std::string last_error;

fb_status remember(fb_status status, const std::string& message) {
  last_error = message;
  return status;
}

fb_status to_status(fockbench::ErrorKind kind) { return static_cast<fb_status>(static_cast<int>(kind)); }

// Runs body and converts any exception into a status plus last_error.
template <class Body>
fb_status guarded(Body&& body) {
  last_error.clear();
  try {
    return body();
  } catch (const fockbench::Error& e) {
    return remember(to_status(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return remember(FB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return remember(FB_ERR_INTERNAL, e.what());
  } catch (...) {
    return remember(FB_ERR_INTERNAL, "unknown exception");
  }
}

char* duplicate(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

fb_status finish_run(fockbench::RunResult&& result, fb_result** out) {
  const fb_status status = result.failure ? remember(to_status(*result.failure), result.failure_message) : FB_OK;
  *out = new fb_result{std::move(result)};
  return status;
}

bool valid_table(const fb_result* r, size_t i) { return r && i < r->result.tables.size(); }

}  // namespace

extern "C" {

const char* fb_version(void) { return FOCKBENCH_VERSION; }

const char* fb_last_error(void) { return last_error.c_str(); }

void fb_string_free(char* text) { std::free(text); }

fb_status fb_scenario_parse(const char* text, const char* origin, fb_scenario** out) {
  if (!text || !out) return remember(FB_ERR_INTERNAL, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new fb_scenario{fockbench::parse_scenario(text, origin ? origin : "<input>")};
    return FB_OK;
  });
}

fb_status fb_scenario_load(const char* path, fb_scenario** out) {
  if (!path || !out) return remember(FB_ERR_INTERNAL, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new fb_scenario{fockbench::load_scenario(path)};
    return FB_OK;
  });
}

fb_status fb_scenario_from_preset(const char* name, fb_scenario** out) {
  if (!name || !out) return remember(FB_ERR_INTERNAL, "null argument");
  *out = nullptr;
  return guarded([&] {
    const auto text = fockbench::preset_text(name);
    if (!text) return remember(FB_ERR_PARSE, std::string("unknown preset '") + name + "'");
    *out = new fb_scenario{fockbench::parse_scenario(*text, std::string(name) + ".cfg")};
    return FB_OK;
  });
}

void fb_scenario_free(fb_scenario* scenario) { delete scenario; }

const char* fb_scenario_name(const fb_scenario* s) { return s ? s->scenario.name.c_str() : ""; }
const char* fb_scenario_description(const fb_scenario* s) { return s ? s->scenario.description.c_str() : ""; }
const char* fb_scenario_engine(const fb_scenario* s) { return s ? fockbench::engine_name(s->scenario.engine) : ""; }
int fb_scenario_has_sweep(const fb_scenario* s) { return s && s->scenario.sweep ? 1 : 0; }
double fb_scenario_budget_seconds(const fb_scenario* s) {
  return s && s->scenario.budget_seconds ? *s->scenario.budget_seconds : -1.0;
}

fb_status fb_run(const fb_scenario* scenario, unsigned threads, fb_result** out) {
  if (!scenario || !out) return remember(FB_ERR_INTERNAL, "null argument");
  *out = nullptr;
  return guarded([&] { return finish_run(fockbench::run_scenario(scenario->scenario, {threads}), out); });
}

fb_status fb_sweep(const fb_scenario* scenario, unsigned threads, fb_result** out) {
  if (!scenario || !out) return remember(FB_ERR_INTERNAL, "null argument");
  *out = nullptr;
  return guarded([&] { return finish_run(fockbench::sweep_scenario(scenario->scenario, {threads}), out); });
}

fb_status fb_validate(const fb_scenario* scenario, unsigned threads, char** report) {
  if (!scenario || !report) return remember(FB_ERR_INTERNAL, "null argument");
  *report = nullptr;
  return guarded([&] {
    const auto rep = fockbench::validate_scenario(scenario->scenario, {threads});
    std::string text;
    for (const auto& line : rep.lines) text += line + "\n";
    *report = duplicate(text);
    if (rep.failure) return remember(to_status(*rep.failure), rep.lines.back());
    return FB_OK;
  });
}

void fb_result_free(fb_result* result) { delete result; }

size_t fb_result_table_count(const fb_result* r) { return r ? r->result.tables.size() : 0; }

const char* fb_result_table_name(const fb_result* r, size_t i) {
  return valid_table(r, i) ? r->result.tables[i].name.c_str() : nullptr;
}

size_t fb_result_table_rows(const fb_result* r, size_t i) { return valid_table(r, i) ? r->result.tables[i].rows.size() : 0; }

fb_status fb_result_table_csv(const fb_result* r, size_t i, char** csv) {
  if (!valid_table(r, i) || !csv) return remember(FB_ERR_INTERNAL, "invalid table index");
  *csv = nullptr;
  return guarded([&] {
    std::ostringstream os;
    fockbench::write_csv(os, r->result.tables[i]);
    *csv = duplicate(os.str());
    return FB_OK;
  });
}

size_t fb_result_warning_count(const fb_result* r) { return r ? r->result.warnings.size() : 0; }
const char* fb_result_warning(const fb_result* r, size_t i) {
  return r && i < r->result.warnings.size() ? r->result.warnings[i].c_str() : nullptr;
}

size_t fb_result_note_count(const fb_result* r) { return r ? r->result.notes.size() : 0; }
const char* fb_result_note(const fb_result* r, size_t i) {
  return r && i < r->result.notes.size() ? r->result.notes[i].c_str() : nullptr;
}

const char* fb_result_failure(const fb_result* r) { return r ? r->result.failure_message.c_str() : ""; }

fb_status fb_result_write(const fb_result* result, const fb_scenario* scenario, const char* dir, const char* command,
                          double wall_seconds, unsigned threads, int exit_code) {
  if (!result || !scenario || !dir) return remember(FB_ERR_INTERNAL, "null argument");
  return guarded([&] {
    fockbench::ManifestInfo info;
    info.command = command ? command : "";
    info.wall_seconds = wall_seconds;
    info.threads = threads;
    info.exit_code = exit_code;
    try {
      fockbench::write_results(result->result, scenario->scenario, dir, info);
    } catch (const fockbench::Error& e) {
      return remember(FB_ERR_INTERNAL, e.what());
    }
    return FB_OK;
  });
}

size_t fb_preset_count(void) { return fockbench::detail::embedded_presets().size(); }

const char* fb_preset_name(size_t index) {
  const auto& all = fockbench::detail::embedded_presets();
  return index < all.size() ? all[index].name : nullptr;
}

const char* fb_preset_text(const char* name) {
  if (!name) return nullptr;
  for (const auto& p : fockbench::detail::embedded_presets()) {
    if (std::strcmp(p.name, name) == 0) return p.text;
  }
  return nullptr;
}

}  // extern "C"
