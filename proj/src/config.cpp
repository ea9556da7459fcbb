#include "absurd/config.hpp"

#include "absurd/error.hpp"
#include "absurd/io_util.hpp"
#include "absurd/json_util.hpp"

namespace absurd {

RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorKind::kConfig, "config must be a JSON object");
  RunConfig config;
  config.world = get_string(j, "world", config.world);
  config.world_file = get_string(j, "world_file", "");
  if (j.contains("world_params") && !j.at("world_params").is_null()) {
    const auto& params = j.at("world_params");
    if (!params.is_object()) fail(ErrorKind::kConfig, "world_params must be an object");
    for (const auto& [key, value] : params.items()) {
      if (!value.is_number_integer()) {
        fail(ErrorKind::kConfig, "world_params." + key + " must be an integer");
      }
      config.world_params[key] = value.get<int>();
    }
  }
  if (j.contains("rulesets") && !j.at("rulesets").is_null()) {
    const auto& names = j.at("rulesets");
    if (!names.is_array()) fail(ErrorKind::kConfig, "rulesets must be an array");
    for (const auto& name : names) {
      if (!name.is_string()) fail(ErrorKind::kConfig, "ruleset names must be strings");
      config.rulesets.push_back(name.get<std::string>());
    }
  }
  config.prompts_per_ruleset =
      static_cast<int>(get_int(j, "prompts_per_ruleset", config.prompts_per_ruleset));
  if (j.contains("master_seed") && !j.at("master_seed").is_null()) {
    const auto& seed = j.at("master_seed");
    if (!seed.is_number_integer()) fail(ErrorKind::kConfig, "master_seed must be an integer");
    config.master_seed = seed.get<uint64_t>();
  }
  if (j.contains("models") && !j.at("models").is_null()) {
    const auto& models = j.at("models");
    if (!models.is_array()) fail(ErrorKind::kConfig, "models must be an array");
    for (const auto& model : models) {
      config.models.push_back(model_spec_from_json(model));
    }
  }
  if (j.contains("backend") && !j.at("backend").is_null()) {
    config.backend = backend_config_from_json(j.at("backend"));
  }
  config.out_dir = get_string(j, "out_dir", config.out_dir);
  config.journal = get_string(j, "journal", "");
  if (j.contains("fewshot") && !j.at("fewshot").is_null()) {
    config.fewshot.query_from_pool =
        get_bool(j.at("fewshot"), "query_from_pool", config.fewshot.query_from_pool);
  }
  validate_config(config);
  return config;
}

nlohmann::json config_to_json(const RunConfig& config) {
  nlohmann::json models = nlohmann::json::array();
  for (const ModelSpec& model : config.models) models.push_back(model_spec_to_json(model));
  nlohmann::json j = {
      {"world", config.world},
      {"prompts_per_ruleset", config.prompts_per_ruleset},
      {"master_seed", config.master_seed},
      {"models", models},
      {"backend", backend_config_to_json(config.backend)},
      {"out_dir", config.out_dir},
      {"fewshot", {{"query_from_pool", config.fewshot.query_from_pool}}},
  };
  if (!config.world_file.empty()) j["world_file"] = config.world_file;
  if (!config.world_params.empty()) j["world_params"] = config.world_params;
  if (!config.rulesets.empty()) j["rulesets"] = config.rulesets;
  if (!config.journal.empty()) j["journal"] = config.journal;
  return j;
}

RunConfig load_config(const std::string& path) {
  return config_from_json(parse_json(read_text_file(path), "config " + path));
}

void validate_config(const RunConfig& config) {
  if (config.prompts_per_ruleset < 1) {
    fail(ErrorKind::kConfig, "prompts_per_ruleset must be at least 1");
  }
  if (config.out_dir.empty()) {
    fail(ErrorKind::kConfig, "out_dir must not be empty");
  }
  if (config.world.empty() && config.world_file.empty()) {
    fail(ErrorKind::kConfig, "either world or world_file must be set");
  }
}

}  // namespace absurd
