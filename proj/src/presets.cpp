#include "fockbench/presets.hpp"

namespace fockbench {

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& p : detail::embedded_presets()) names.emplace_back(p.name);
  return names;
}

std::optional<std::string> preset_text(const std::string& name) {
  for (const auto& p : detail::embedded_presets()) {
    if (name == p.name) return std::string(p.text);
  }
  return std::nullopt;
}

}  // namespace fockbench
