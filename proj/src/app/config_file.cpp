#include "motifrep/app/config_file.h"

#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "motifrep/error.h"

namespace motifrep {
namespace {

nlohmann::json typed(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  std::size_t used = 0;
  try {
    const long long v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  try {
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  return s;
}

}  // namespace

nlohmann::json parse_toml_config(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::Error& e) {
    throw SchemaError(source, e.what());
  }
  nlohmann::json out = nlohmann::json::object();
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    nlohmann::json* node = &out;
    for (const auto& parent : item.parents) {
      if (!node->contains(parent)) (*node)[parent] = nlohmann::json::object();
      node = &(*node)[parent];
      if (!node->is_object()) throw SchemaError(source + ":" + item.fullname(), "key is both a value and a section");
    }
    if (item.inputs.size() == 1) {
      (*node)[item.name] = typed(item.inputs[0]);
    } else {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& v : item.inputs) arr.push_back(typed(v));
      (*node)[item.name] = std::move(arr);
    }
  }
  return out;
}

nlohmann::json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  if (path.extension() == ".json") {
    try {
      return nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(path.string() + ": byte " + std::to_string(e.byte), e.what());
    }
  }
  return parse_toml_config(buf.str(), path.string());
}

const nlohmann::json& config_section(const nlohmann::json& j, const std::string& section) {
  if (j.contains(section) && j.at(section).is_object()) return j.at(section);
  return j;
}

}  // namespace motifrep
