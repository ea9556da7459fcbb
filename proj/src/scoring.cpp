#include "absurd/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>
#include <sstream>

#include "absurd/error.hpp"

namespace absurd {

namespace {

// Text of the last {...} whose contents hold no brace. Each '{' restarts the
// candidate, each '}' closes the open one; the final closed pair wins.
std::optional<std::string> last_braced_candidate(const std::string& text) {
  std::optional<std::string> candidate;
  std::optional<size_t> start;
  for (size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '{') {
      start = i + 1;
    } else if (text[i] == '}' && start) {
      candidate = text.substr(*start, i - *start);
      start.reset();
    }
  }
  return candidate;
}

bool grade(const RunRecord& record, const PromptInstance& prompt) {
  const auto label = extract_answer(record.raw_text, prompt.binding);
  return label && label->matches(prompt.expected);
}

const PromptInstance& resolve(const PromptIndex& index, const std::string& instance_id) {
  const auto it = index.find(instance_id);
  if (it == index.end()) {
    fail(ErrorKind::kInvalidArg, "record references unknown instance: " + instance_id);
  }
  return it->second;
}

}  // namespace

std::string normalize_answer(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::isspace(u)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(u)));
  }
  return out;
}

std::optional<ExpectedLabel> extract_answer(const std::string& raw_text,
                                            const SymbolBinding& binding) {
  const auto candidate = last_braced_candidate(raw_text);
  if (!candidate) return std::nullopt;
  const std::string norm = normalize_answer(*candidate);
  if (norm.empty()) return std::nullopt;

  const std::string one = normalize_answer(binding.player_one_name);
  const std::string two = normalize_answer(binding.player_two_name);
  if (!one.empty() && norm == one) return ExpectedLabel::player_one();
  if (!two.empty() && norm == two) return ExpectedLabel::player_two();
  const std::string group = normalize_answer(binding.group_noun);
  if (!group.empty() && norm == "both " + group + "s") return ExpectedLabel::tie();
  if (norm == "no one") return ExpectedLabel::no_winner();
  for (size_t i = 0; i < binding.player_names.size(); ++i) {
    const std::string name = normalize_answer(binding.player_names[i]);
    if (!name.empty() && norm == name) {
      return ExpectedLabel::named(static_cast<int>(i) + 1);
    }
  }
  return std::nullopt;
}

bool ScoreKey::operator<(const ScoreKey& o) const {
  if (model_id != o.model_id) return model_id < o.model_id;
  if (ruleset_name != o.ruleset_name) return ruleset_name < o.ruleset_name;
  return static_cast<int>(mode) < static_cast<int>(o.mode);
}

bool ScoreKey::operator==(const ScoreKey& o) const {
  return model_id == o.model_id && ruleset_name == o.ruleset_name && mode == o.mode;
}

bool CategoryKey::operator<(const CategoryKey& o) const {
  if (category != o.category) return category < o.category;
  if (ruleset_name != o.ruleset_name) return ruleset_name < o.ruleset_name;
  return static_cast<int>(mode) < static_cast<int>(o.mode);
}

PromptIndex build_prompt_index(const std::vector<PromptInstance>& prompts) {
  PromptIndex index;
  for (const PromptInstance& prompt : prompts) {
    if (!index.emplace(prompt.instance_id, prompt).second) {
      fail(ErrorKind::kInvalidArg, "duplicate instance_id: " + prompt.instance_id);
    }
  }
  return index;
}

ScoreTable score_runs(const std::vector<RunRecord>& records, const PromptIndex& index) {
  ScoreTable table;
  for (const RunRecord& record : records) {
    const PromptInstance& prompt = resolve(index, record.instance_id);
    ScoreCell& cell = table[{record.model_id, prompt.ruleset_name, prompt.mode}];
    ++cell.n;
    if (grade(record, prompt)) ++cell.correct;
  }
  return table;
}

std::map<CategoryKey, double> category_averages(const ScoreTable& table,
                                                const std::vector<ModelSpec>& models) {
  std::map<std::string, std::string> category_of;
  for (const ModelSpec& model : models) {
    category_of[model.model_id] = to_string(model.category);
  }

  std::map<CategoryKey, std::pair<double, int>> sums;
  for (const auto& [key, cell] : table) {
    const auto it = category_of.find(key.model_id);
    if (it == category_of.end()) {
      fail(ErrorKind::kInvalidArg, "model has no category in roster: " + key.model_id);
    }
    auto& by_category = sums[{it->second, key.ruleset_name, key.mode}];
    by_category.first += cell.accuracy();
    by_category.second += 1;
    auto& total = sums[{"TOTAL", key.ruleset_name, key.mode}];
    total.first += cell.accuracy();
    total.second += 1;
  }

  std::map<CategoryKey, double> averages;
  for (const auto& [key, sum] : sums) {
    averages[key] = sum.first / sum.second;
  }
  return averages;
}

std::map<std::string, std::vector<PromptScore>> prompt_scores(
    const std::vector<RunRecord>& records, const PromptIndex& index) {
  std::map<std::string, std::map<std::string, int>> counts;  // ruleset -> id -> correct
  for (const RunRecord& record : records) {
    const PromptInstance& prompt = resolve(index, record.instance_id);
    int& n = counts[prompt.ruleset_name][record.instance_id];
    if (grade(record, prompt)) ++n;
  }
  std::map<std::string, std::vector<PromptScore>> scores;
  for (const auto& [ruleset, by_id] : counts) {
    auto& list = scores[ruleset];
    list.reserve(by_id.size());
    for (const auto& [id, n] : by_id) list.push_back({id, n});
  }
  return scores;
}

double median_threshold(std::vector<int> scores) {
  if (scores.empty()) fail(ErrorKind::kInvalidArg, "median of empty score list");
  std::sort(scores.begin(), scores.end());
  const size_t n = scores.size();
  if (n % 2 == 1) return scores[n / 2];
  return (scores[n / 2 - 1] + scores[n / 2]) / 2.0;
}

std::map<std::string, std::vector<std::string>> select_fewshot_pool(
    const std::vector<RunRecord>& records, const PromptIndex& index) {
  const auto scored = prompt_scores(records, index);
  if (scored.empty()) {
    fail(ErrorKind::kInvalidArg, "no graded records to select a few-shot pool from");
  }
  std::map<std::string, std::vector<std::string>> pools;
  for (const auto& [ruleset, list] : scored) {
    std::vector<int> values;
    values.reserve(list.size());
    for (const PromptScore& ps : list) values.push_back(ps.models_correct);
    const double threshold = median_threshold(values);
    auto& pool = pools[ruleset];
    for (const PromptScore& ps : list) {
      if (ps.models_correct <= threshold) pool.push_back(ps.instance_id);
    }
  }
  return pools;
}

std::string score_table_csv(const ScoreTable& table, const std::vector<ModelSpec>& models) {
  std::set<std::string> roster;
  std::set<std::string> ruleset_set;
  for (const ModelSpec& model : models) roster.insert(model.model_id);
  for (const auto& [key, cell] : table) {
    if (!roster.count(key.model_id)) {
      fail(ErrorKind::kInvalidArg, "model not in roster: " + key.model_id);
    }
    ruleset_set.insert(key.ruleset_name);
  }
  const std::vector<std::string> order = canonical_ruleset_order(
      std::vector<std::string>(ruleset_set.begin(), ruleset_set.end()));

  std::ostringstream out;
  out << "model_id,category,ruleset,mode,n,correct,accuracy\n";
  for (const ModelSpec& model : models) {
    for (const std::string& ruleset : order) {
      for (const Mode mode : {Mode::kZeroShot, Mode::kFewShot}) {
        const auto it = table.find({model.model_id, ruleset, mode});
        if (it == table.end()) continue;
        char accuracy[32];
        std::snprintf(accuracy, sizeof(accuracy), "%.6f", it->second.accuracy());
        out << model.model_id << ',' << to_string(model.category) << ',' << ruleset << ','
            << to_string(mode) << ',' << it->second.n << ',' << it->second.correct << ','
            << accuracy << '\n';
      }
    }
  }
  return out.str();
}

std::vector<std::string> canonical_ruleset_order(const std::vector<std::string>& names) {
  static const std::vector<std::string> canonical = {
      "REAL", "MISSING", "LEAST", "ICE_CREAM", "CAR", "SWITCH", "MISS_SWITCH"};
  std::set<std::string> present(names.begin(), names.end());
  std::vector<std::string> order;
  for (const std::string& name : canonical) {
    if (present.erase(name)) order.push_back(name);
  }
  order.insert(order.end(), present.begin(), present.end());
  return order;
}

}  // namespace absurd
