#pragma once
// Pipeline commands: generate, run, select-fewshot, score, analyze, report.

#include <string>
#include <vector>

#include "json.hpp"

#include "absurd/analysis.hpp"
#include "absurd/config.hpp"
#include "absurd/world.hpp"

namespace absurd {

// The world and its ruleset registry named by the config (builtin or file).
WorldFile resolve_world(const RunConfig& config);

// The variants the config selects, validated against the registry.
std::vector<RulesetVariant> resolve_rulesets(const RunConfig& config, const WorldFile& world);

std::string batch_path(const RunConfig& config, Mode mode, const std::string& ruleset_name);

// One zero-shot JSONL batch per ruleset, deterministic in master_seed.
nlohmann::json cmd_generate(const RunConfig& config);

// Runs the suite for one mode over the configured models and backend,
// appending to the journal. backend_name empty means the live HTTP backend.
nlohmann::json cmd_run(const RunConfig& config, Mode mode, const std::string& backend_name);

// Selects the low-performing pools from the zero-shot journal and assembles
// the few-shot batches (three exemplars plus a query each).
nlohmann::json cmd_select_fewshot(const RunConfig& config);

nlohmann::json cmd_score(const RunConfig& config);
nlohmann::json cmd_analyze(const RunConfig& config);
nlohmann::json cmd_report(const RunConfig& config);

// Built-in world descriptions as a JSON document.
std::string worlds_json_text();

}  // namespace absurd
