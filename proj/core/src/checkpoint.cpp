#include "nudg/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nudg/csv.hpp"
#include "nudg/error.hpp"

namespace nudg {

using nlohmann::json;

std::string checkpoint_json(const Model& model) {
  json j;
  if (const auto* lin = std::get_if<LinearModel>(&model)) {
    j["kind"] = "linear";
    j["rows"] = lin->feature_map.rows();
    j["cols"] = lin->feature_map.cols();
    j["feature_map"] = std::vector<double>(lin->feature_map.entries().begin(), lin->feature_map.entries().end());
    j["head"] = lin->head;
  } else {
    const auto& t = std::get<TheoryModel>(model);
    j["kind"] = "theory";
    j["d"] = t.w.size();
    j["w"] = t.w;
    j["support"] = t.support ? json(*t.support) : json(nullptr);
  }
  return j.dump(2) + "\n";
}

Model model_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "linear") {
      const auto rows = j.at("rows").get<std::size_t>();
      const auto cols = j.at("cols").get<std::size_t>();
      LinearModel m{Matrix(rows, cols, j.at("feature_map").get<std::vector<double>>()),
                    j.at("head").get<std::vector<double>>()};
      if (m.head.size() != rows) throw ValidationError("checkpoint: head length != rows");
      return m;
    }
    if (kind == "theory") {
      TheoryModel m{j.at("w").get<std::vector<double>>(), std::nullopt};
      if (m.w.size() != j.at("d").get<std::size_t>()) throw ValidationError("checkpoint: w length != d");
      if (!j.at("support").is_null()) m.support = j.at("support").get<std::vector<std::size_t>>();
      return m;
    }
    throw ValidationError("checkpoint: unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw ValidationError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Model& model) {
  csv::write_file(path, checkpoint_json(model));
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace nudg
