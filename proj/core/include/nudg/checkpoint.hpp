#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "nudg/models.hpp"

namespace nudg {

/// JSON checkpoint: {"kind": "linear", "rows", "cols", "feature_map": [row-major], "head": [...]}
/// or {"kind": "theory", "d", "w": [...], "support": [...] | null}. Doubles round-trip exactly.
std::string checkpoint_json(const Model& model);
Model model_from_json(std::string_view text);

void save_checkpoint(const std::filesystem::path& path, const Model& model);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace nudg
