#pragma once

#include <optional>
#include <string>
#include <vector>

namespace fockbench {

namespace detail {
struct EmbeddedPreset {
  const char* name;
  const char* text;
};
const std::vector<EmbeddedPreset>& embedded_presets();
}  // namespace detail

std::vector<std::string> preset_names();
// Scenario text of a shipped preset, or nothing for an unknown name.
std::optional<std::string> preset_text(const std::string& name);

}  // namespace fockbench
