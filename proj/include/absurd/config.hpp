#pragma once
// Run configuration: one JSON document drives the whole pipeline.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "absurd/harness.hpp"

namespace absurd {

struct FewShotConfig {
  // When true the few-shot query is drawn from the low-performing pool;
  // when false it is a freshly generated instance.
  bool query_from_pool = true;
};

struct RunConfig {
  std::string world = "soccer";
  std::string world_file;  // optional path to a world JSON; wins over `world`
  std::map<std::string, int> world_params;
  std::vector<std::string> rulesets;  // empty = every registry ruleset
  int prompts_per_ruleset = 100;
  uint64_t master_seed = 1729;
  std::vector<ModelSpec> models;
  BackendConfig backend;
  std::string out_dir = "out";
  std::string journal;  // default <out_dir>/journal.jsonl
  FewShotConfig fewshot;

  std::string journal_path() const {
    return journal.empty() ? out_dir + "/journal.jsonl" : journal;
  }
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);
RunConfig load_config(const std::string& path);
void validate_config(const RunConfig& config);

}  // namespace absurd
