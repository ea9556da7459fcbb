#pragma once
// Answer extraction, accuracy tables, and few-shot pool selection.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "absurd/generator.hpp"
#include "absurd/harness.hpp"
#include "absurd/types.hpp"

namespace absurd {

// Lowercase, trim, and collapse internal whitespace runs to single spaces.
std::string normalize_answer(const std::string& text);

// Contents of the last balanced, brace-free {...} pair in the response,
// normalized and matched against the binding's surface forms: the two player
// names, "both <group_noun>s", "no one", or any roster name. std::nullopt
// when nothing matches; such responses score as incorrect.
std::optional<ExpectedLabel> extract_answer(const std::string& raw_text,
                                            const SymbolBinding& binding);

struct ScoreKey {
  std::string model_id;
  std::string ruleset_name;
  Mode mode = Mode::kZeroShot;

  bool operator<(const ScoreKey& o) const;
  bool operator==(const ScoreKey& o) const;
};

struct ScoreCell {
  int n = 0;
  int correct = 0;
  double accuracy() const { return n == 0 ? 0.0 : static_cast<double>(correct) / n; }
};

using ScoreTable = std::map<ScoreKey, ScoreCell>;
using PromptIndex = std::map<std::string, PromptInstance>;

// Index prompts by instance_id; duplicate ids are an error.
PromptIndex build_prompt_index(const std::vector<PromptInstance>& prompts);

// Accuracy per (model, ruleset, mode). Every record is re-graded from its
// raw text; a record whose instance_id is not in the index is an error.
ScoreTable score_runs(const std::vector<RunRecord>& records, const PromptIndex& index);

struct CategoryKey {
  std::string category;  // CHEAP, EXPENSIVE, REASONING, or TOTAL
  std::string ruleset_name;
  Mode mode = Mode::kZeroShot;

  bool operator<(const CategoryKey& o) const;
};

// Unweighted mean of per-model accuracies within each category, plus a
// TOTAL series over all models. Every model in the table must appear in
// the roster.
std::map<CategoryKey, double> category_averages(const ScoreTable& table,
                                                const std::vector<ModelSpec>& models);

struct PromptScore {
  std::string instance_id;
  int models_correct = 0;
};

// Per-prompt difficulty (number of models answering correctly), grouped by
// ruleset and ordered by instance_id.
std::map<std::string, std::vector<PromptScore>> prompt_scores(
    const std::vector<RunRecord>& records, const PromptIndex& index);

// Median; for an even count, the midpoint of the two middle values.
double median_threshold(std::vector<int> scores);

// Instance ids at or below the median difficulty score of their ruleset.
std::map<std::string, std::vector<std::string>> select_fewshot_pool(
    const std::vector<RunRecord>& records, const PromptIndex& index);

// CSV with columns model_id,category,ruleset,mode,n,correct,accuracy.
// Rows follow roster order, then canonical ruleset order, then mode.
std::string score_table_csv(const ScoreTable& table, const std::vector<ModelSpec>& models);

// REAL, MISSING, LEAST, ICE_CREAM, CAR, SWITCH, MISS_SWITCH first, in that
// order, then any other names alphabetically.
std::vector<std::string> canonical_ruleset_order(const std::vector<std::string>& names);

}  // namespace absurd
