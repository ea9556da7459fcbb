#include "absurd/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "absurd/error.hpp"
#include "absurd/generator.hpp"
#include "absurd/io_util.hpp"
#include "absurd/oracle.hpp"
#include "absurd/rng.hpp"
#include "absurd/scoring.hpp"

namespace absurd {

namespace {

int param_or(const std::map<std::string, int>& params, const std::string& key, int fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

// Per-ruleset seed: master_seed split by the hashed ruleset name.
uint64_t ruleset_seed(const RunConfig& config, const std::string& ruleset_name) {
  return derive_seed(config.master_seed, fnv1a(ruleset_name));
}

std::vector<PromptInstance> read_existing_batches(const RunConfig& config,
                                                  const std::vector<RulesetVariant>& rulesets) {
  std::vector<PromptInstance> all;
  for (const RulesetVariant& variant : rulesets) {
    for (const Mode mode : {Mode::kZeroShot, Mode::kFewShot}) {
      const std::string path = batch_path(config, mode, variant.name);
      if (!std::filesystem::exists(path)) continue;
      const auto batch = read_batch_jsonl(path);
      all.insert(all.end(), batch.begin(), batch.end());
    }
  }
  if (all.empty()) {
    fail(ErrorKind::kConfig,
         "no batch files found under " + config.out_dir + "/batches; run generate first");
  }
  return all;
}

std::vector<PromptInstance> require_mode_batches(const RunConfig& config,
                                                 const std::vector<RulesetVariant>& rulesets,
                                                 Mode mode) {
  std::vector<PromptInstance> all;
  for (const RulesetVariant& variant : rulesets) {
    const std::string path = batch_path(config, mode, variant.name);
    if (!std::filesystem::exists(path)) {
      const char* hint = mode == Mode::kZeroShot ? "run generate first"
                                                 : "run select-fewshot first";
      fail(ErrorKind::kConfig, "missing batch file " + path + "; " + hint);
    }
    const auto batch = read_batch_jsonl(path);
    all.insert(all.end(), batch.begin(), batch.end());
  }
  return all;
}

// A fresh zero-shot instance built by the same per-index recipe as
// generate_batch, for configs whose few-shot query is not pool-drawn.
PromptInstance fresh_instance(const WorldSpec& spec, const RulesetVariant& variant,
                              uint64_t seed, int index) {
  const SymbolBinding binding = sample_binding(spec, variant, derive_seed(seed, 0));
  std::vector<EventRecord> events;
  if (spec.oracle_id == "door_outcome") {
    events = sample_door_game(spec, variant, derive_seed(seed, 1)).events;
  } else {
    events = sample_commentary(derive_seed(seed, 1));
  }
  return render_zero_shot(spec, variant, binding, events, seed, index);
}

struct AnalysisBundle {
  ScoreTable table;
  std::map<CategoryKey, double> categories;
  std::vector<TTestResult> ttests;
  EntropyReport entropy;
};

AnalysisBundle analyze_journal(const RunConfig& config, const WorldFile& world,
                               const std::vector<RulesetVariant>& rulesets) {
  const std::vector<RunRecord> records = read_journal(config.journal_path());
  if (records.empty()) {
    fail(ErrorKind::kInvalidArg, "journal is empty: " + config.journal_path());
  }
  const PromptIndex index = build_prompt_index(read_existing_batches(config, rulesets));

  AnalysisBundle bundle;
  bundle.table = score_runs(records, index);
  bundle.categories = category_averages(bundle.table, config.models);

  std::set<std::string> names;
  for (const auto& [key, cell] : bundle.table) names.insert(key.ruleset_name);
  for (const std::string& name :
       canonical_ruleset_order(std::vector<std::string>(names.begin(), names.end()))) {
    std::map<std::string, double> do0;
    std::map<std::string, double> dofs;
    for (const ModelSpec& model : config.models) {
      const auto zs = bundle.table.find({model.model_id, name, Mode::kZeroShot});
      const auto fs = bundle.table.find({model.model_id, name, Mode::kFewShot});
      if (zs == bundle.table.end() || fs == bundle.table.end()) continue;
      do0[model.model_id] = zs->second.accuracy();
      dofs[model.model_id] = fs->second.accuracy();
    }
    if (do0.size() >= 2) {
      bundle.ttests.push_back(paired_ttest(do0, dofs, name));
    }
  }
  bundle.entropy = entropy_report(records, index);
  return bundle;
}

nlohmann::json categories_json(const std::map<CategoryKey, double>& categories) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [key, value] : categories) {
    rows.push_back({{"category", key.category},
                    {"ruleset", key.ruleset_name},
                    {"mode", to_string(key.mode)},
                    {"accuracy", value}});
  }
  return rows;
}

}  // namespace

WorldFile resolve_world(const RunConfig& config) {
  if (!config.world_file.empty()) {
    return load_world_file(config.world_file);
  }
  if (config.world == "soccer") {
    return {builtin_soccer_world(), ruleset_registry("soccer")};
  }
  if (config.world == "door") {
    const int doors = param_or(config.world_params, "door_count", 5);
    const int goats = param_or(config.world_params, "goat_count", 2);
    const int players = param_or(config.world_params, "player_count", 3);
    const int opens = param_or(config.world_params, "opens_total", 5);
    return {builtin_door_world(doors, goats, players, opens), ruleset_registry("door")};
  }
  fail(ErrorKind::kConfig, "unknown world: " + config.world);
}

std::vector<RulesetVariant> resolve_rulesets(const RunConfig& config,
                                             const WorldFile& world) {
  if (config.rulesets.empty()) return world.rulesets;
  std::vector<RulesetVariant> selected;
  for (const std::string& name : config.rulesets) {
    const auto it = std::find_if(world.rulesets.begin(), world.rulesets.end(),
                                 [&](const RulesetVariant& v) { return v.name == name; });
    if (it == world.rulesets.end()) {
      fail(ErrorKind::kConfig, "unknown ruleset: " + name);
    }
    selected.push_back(*it);
  }
  return selected;
}

std::string batch_path(const RunConfig& config, Mode mode, const std::string& ruleset_name) {
  const char* prefix = mode == Mode::kZeroShot ? "do0-" : "dofs-";
  return config.out_dir + "/batches/" + prefix + ruleset_name + ".jsonl";
}

nlohmann::json cmd_generate(const RunConfig& config) {
  const WorldFile world = resolve_world(config);
  const std::vector<RulesetVariant> rulesets = resolve_rulesets(config, world);

  nlohmann::json files = nlohmann::json::array();
  int instances = 0;
  for (const RulesetVariant& variant : rulesets) {
    const auto batch = generate_batch(world.world, variant, config.prompts_per_ruleset,
                                      ruleset_seed(config, variant.name));
    const std::string path = batch_path(config, Mode::kZeroShot, variant.name);
    write_batch_jsonl(path, batch);
    files.push_back(path);
    instances += static_cast<int>(batch.size());
  }
  return {{"command", "generate"},
          {"world", world.world.world_id},
          {"files", files},
          {"instances", instances}};
}

nlohmann::json cmd_run(const RunConfig& config, Mode mode, const std::string& backend_name) {
  if (config.models.empty()) {
    fail(ErrorKind::kConfig, "no models configured");
  }
  const WorldFile world = resolve_world(config);
  const std::vector<RulesetVariant> rulesets = resolve_rulesets(config, world);
  const std::vector<PromptInstance> prompts = require_mode_batches(config, rulesets, mode);

  const std::unique_ptr<Backend> backend =
      make_backend(backend_name.empty() ? "http" : backend_name, config.backend);
  const RunSummary summary =
      run_suite(prompts, config.models, config.backend, config.journal_path(), *backend);
  return {{"command", "run"},
          {"mode", to_string(mode)},
          {"journal", config.journal_path()},
          {"total", summary.total},
          {"executed", summary.executed},
          {"skipped", summary.skipped},
          {"failed", summary.failed}};
}

nlohmann::json cmd_select_fewshot(const RunConfig& config) {
  const WorldFile world = resolve_world(config);
  const std::vector<RulesetVariant> rulesets = resolve_rulesets(config, world);

  const std::vector<PromptInstance> do0_prompts =
      require_mode_batches(config, rulesets, Mode::kZeroShot);
  const PromptIndex index = build_prompt_index(do0_prompts);

  std::vector<RunRecord> do0_records;
  for (RunRecord& record : read_journal(config.journal_path())) {
    if (record.mode == Mode::kZeroShot) do0_records.push_back(std::move(record));
  }
  if (do0_records.empty()) {
    fail(ErrorKind::kInvalidArg, "no zero-shot records in journal: " + config.journal_path());
  }
  const auto pools = select_fewshot_pool(do0_records, index);

  nlohmann::json pools_json = nlohmann::json::object();
  for (const auto& [ruleset, ids] : pools) pools_json[ruleset] = ids;
  const std::string pools_path = config.out_dir + "/fewshot_pools.json";
  write_text_file(pools_path, nlohmann::json{{"pools", pools_json}}.dump(2) + "\n");

  nlohmann::json files = nlohmann::json::array();
  for (const RulesetVariant& variant : rulesets) {
    const auto pool_it = pools.find(variant.name);
    if (pool_it == pools.end()) {
      fail(ErrorKind::kInvalidArg,
           "journal has no zero-shot records for ruleset " + variant.name);
    }
    const std::vector<std::string>& pool = pool_it->second;

    const uint64_t fs_seed = derive_seed(ruleset_seed(config, variant.name), 2);
    std::vector<PromptInstance> fs_batch;
    fs_batch.reserve(config.prompts_per_ruleset);
    for (int i = 0; i < config.prompts_per_ruleset; ++i) {
      const uint64_t seed = instance_seed(fs_seed, i);
      Rng rng(derive_seed(seed, 2));

      PromptInstance query;
      if (config.fewshot.query_from_pool) {
        query = index.at(pool[rng.next_below(pool.size())]);
      } else {
        query = fresh_instance(world.world, variant, seed, i);
      }

      std::vector<std::string> candidates;
      candidates.reserve(pool.size());
      for (const std::string& id : pool) {
        if (id != query.instance_id) candidates.push_back(id);
      }
      if (candidates.size() < 3) {
        fail(ErrorKind::kConfig, "few-shot pool too small for ruleset " + variant.name +
                                     ": need 3 exemplars besides the query");
      }
      const std::vector<int> picks =
          rng.sample_without_replacement(static_cast<int>(candidates.size()), 3);
      std::vector<PromptInstance> exemplars;
      exemplars.reserve(3);
      for (const int pick : picks) exemplars.push_back(index.at(candidates[pick]));

      PromptInstance fs = render_few_shot(query, exemplars);
      // Pool queries can repeat across slots; the slot index and seed keep
      // every few-shot instance id unique.
      fs.instance_id =
          make_instance_id(world.world.world_id, variant.name, Mode::kFewShot, i, seed);
      fs.seed = seed;
      fs_batch.push_back(std::move(fs));
    }
    const std::string path = batch_path(config, Mode::kFewShot, variant.name);
    write_batch_jsonl(path, fs_batch);
    files.push_back(path);
  }
  return {{"command", "select-fewshot"},
          {"pools_file", pools_path},
          {"files", files}};
}

nlohmann::json cmd_score(const RunConfig& config) {
  const WorldFile world = resolve_world(config);
  const std::vector<RulesetVariant> rulesets = resolve_rulesets(config, world);
  const std::vector<RunRecord> records = read_journal(config.journal_path());
  if (records.empty()) {
    fail(ErrorKind::kInvalidArg, "journal is empty: " + config.journal_path());
  }
  const PromptIndex index = build_prompt_index(read_existing_batches(config, rulesets));
  const ScoreTable table = score_runs(records, index);

  const std::string csv_path = config.out_dir + "/scores.csv";
  write_text_file(csv_path, score_table_csv(table, config.models));

  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [key, cell] : table) {
    rows.push_back({{"model_id", key.model_id},
                    {"ruleset", key.ruleset_name},
                    {"mode", to_string(key.mode)},
                    {"n", cell.n},
                    {"correct", cell.correct},
                    {"accuracy", cell.accuracy()}});
  }
  const std::string json_path = config.out_dir + "/scores.json";
  write_text_file(json_path, nlohmann::json{{"rows", rows}}.dump(2) + "\n");

  return {{"command", "score"},
          {"cells", static_cast<int>(table.size())},
          {"files", nlohmann::json::array({csv_path, json_path})}};
}

nlohmann::json cmd_analyze(const RunConfig& config) {
  const WorldFile world = resolve_world(config);
  const std::vector<RulesetVariant> rulesets = resolve_rulesets(config, world);
  const AnalysisBundle bundle = analyze_journal(config, world, rulesets);

  nlohmann::json ttest_rows = nlohmann::json::array();
  for (const TTestResult& t : bundle.ttests) {
    ttest_rows.push_back({{"ruleset", t.ruleset_name},
                          {"mean_do0", t.mean_do0},
                          {"mean_dofs", t.mean_dofs},
                          {"difference", t.difference},
                          {"t_statistic", std::isfinite(t.t_statistic) ? t.t_statistic : 0.0},
                          {"p_value", t.p_value},
                          {"degrees_of_freedom", t.degrees_of_freedom},
                          {"n_models", t.n_models},
                          {"degenerate", t.degenerate}});
  }
  nlohmann::json analysis = {{"categories", categories_json(bundle.categories)},
                             {"ttest", ttest_rows},
                             {"entropy_summaries",
                              static_cast<int>(bundle.entropy.summaries.size())}};
  const std::string path = config.out_dir + "/analysis.json";
  write_text_file(path, analysis.dump(2) + "\n");
  return {{"command", "analyze"},
          {"ttest_rows", static_cast<int>(bundle.ttests.size())},
          {"files", nlohmann::json::array({path})}};
}

nlohmann::json cmd_report(const RunConfig& config) {
  const WorldFile world = resolve_world(config);
  const std::vector<RulesetVariant> rulesets = resolve_rulesets(config, world);
  const AnalysisBundle bundle = analyze_journal(config, world, rulesets);

  write_text_file(config.out_dir + "/scores.csv",
                  score_table_csv(bundle.table, config.models));

  nlohmann::json manifest = emit_report(bundle.table, bundle.categories, bundle.ttests,
                                        bundle.entropy, config.models, config.out_dir);
  manifest["files"].push_back("scores.csv");
  write_text_file(config.out_dir + "/manifest.json", manifest.dump(2) + "\n");

  nlohmann::json result = manifest;
  result["command"] = "report";
  return result;
}

std::string worlds_json_text() { return builtin_worlds_json().dump(2) + "\n"; }

}  // namespace absurd
