#include "absurd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>

#include "absurd/error.hpp"
#include "absurd/io_util.hpp"

namespace absurd {

namespace {

constexpr double kPFloor = 1e-300;

double betacf(double a, double b, double x) {
  constexpr double kEps = 1e-12;
  constexpr double kTiny = 1e-300;
  constexpr int kMaxIterations = 300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) return h;
  }
  fail(ErrorKind::kInternal, "incomplete beta continued fraction did not converge");
}

double mean_of(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

bool graded_correct(const RunRecord& record, const PromptInstance& prompt) {
  const auto label = extract_answer(record.raw_text, prompt.binding);
  return label && label->matches(prompt.expected);
}

std::string mode_suffix(Mode mode) {
  return mode == Mode::kZeroShot ? "do0" : "dofs";
}

std::string fixed6(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

std::string general6(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

}  // namespace

double reg_inc_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    fail(ErrorKind::kInvalidArg, "beta parameters must be positive");
  }
  if (x < 0.0 || x > 1.0) {
    fail(ErrorKind::kInvalidArg, "beta argument outside [0,1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_prefactor = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                              a * std::log(x) + b * std::log1p(-x);
  const double prefactor = std::exp(ln_prefactor);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return prefactor * betacf(a, b, x) / a;
  }
  return 1.0 - prefactor * betacf(b, a, 1.0 - x) / b;
}

double student_t_upper_tail(double t, double df) {
  if (!(df > 0.0)) fail(ErrorKind::kInvalidArg, "degrees of freedom must be positive");
  if (std::isnan(t)) fail(ErrorKind::kInvalidArg, "t statistic is NaN");
  if (std::isinf(t)) return t > 0.0 ? 0.0 : 1.0;
  const double x = df / (df + t * t);
  const double half = 0.5 * reg_inc_beta(0.5 * df, 0.5, x);
  return t >= 0.0 ? half : 1.0 - half;
}

TTestResult paired_ttest(const std::map<std::string, double>& do0,
                         const std::map<std::string, double>& dofs,
                         const std::string& ruleset_name) {
  if (do0.size() != dofs.size()) {
    fail(ErrorKind::kInvalidArg, "paired t-test inputs have mismatched model sets");
  }
  if (do0.size() < 2) {
    fail(ErrorKind::kInvalidArg, "paired t-test needs at least two models");
  }

  std::vector<double> diffs;
  diffs.reserve(do0.size());
  double sum0 = 0.0;
  double sum1 = 0.0;
  for (const auto& [model_id, a] : do0) {
    const auto it = dofs.find(model_id);
    if (it == dofs.end()) {
      fail(ErrorKind::kInvalidArg, "model missing from second input: " + model_id);
    }
    diffs.push_back(a - it->second);
    sum0 += a;
    sum1 += it->second;
  }

  const auto n = static_cast<double>(diffs.size());
  TTestResult result;
  result.ruleset_name = ruleset_name;
  result.n_models = static_cast<int>(diffs.size());
  result.degrees_of_freedom = result.n_models - 1;
  result.mean_do0 = sum0 / n;
  result.mean_dofs = sum1 / n;

  double mean_diff = 0.0;
  for (double d : diffs) mean_diff += d;
  mean_diff /= n;
  result.difference = mean_diff;

  double ss = 0.0;
  for (double d : diffs) ss += (d - mean_diff) * (d - mean_diff);
  const double sd = std::sqrt(ss / (n - 1.0));

  if (sd == 0.0) {
    result.degenerate = true;
    if (mean_diff == 0.0) {
      result.t_statistic = 0.0;
      result.p_value = 0.5;
    } else if (mean_diff > 0.0) {
      result.t_statistic = std::numeric_limits<double>::infinity();
      result.p_value = kPFloor;
    } else {
      result.t_statistic = -std::numeric_limits<double>::infinity();
      result.p_value = 1.0 - 1e-16;
    }
    return result;
  }

  result.t_statistic = mean_diff / (sd / std::sqrt(n));
  double p = student_t_upper_tail(result.t_statistic, result.degrees_of_freedom);
  if (p <= 0.0) p = kPFloor;
  if (p >= 1.0) p = 1.0 - 1e-16;
  result.p_value = p;
  return result;
}

double response_entropy(const TokenLogprobs& token_logprobs) {
  if (token_logprobs.empty()) {
    fail(ErrorKind::kInvalidArg, "entropy of an empty token list");
  }
  double total = 0.0;
  for (const auto& alternatives : token_logprobs) {
    if (alternatives.empty()) {
      fail(ErrorKind::kInvalidArg, "token without alternatives");
    }
    double max_lp = -std::numeric_limits<double>::infinity();
    for (const TokenAlt& alt : alternatives) {
      if (alt.logprob > 1e-9) {
        fail(ErrorKind::kInvalidArg, "log probability above zero");
      }
      max_lp = std::max(max_lp, alt.logprob);
    }
    double z = 0.0;
    for (const TokenAlt& alt : alternatives) z += std::exp(alt.logprob - max_lp);
    double h = 0.0;
    for (const TokenAlt& alt : alternatives) {
      const double p = std::exp(alt.logprob - max_lp) / z;
      h -= p * std::log(p);
    }
    total += h;
  }
  return total / static_cast<double>(token_logprobs.size());
}

EntropyReport entropy_report(const std::vector<RunRecord>& records,
                             const PromptIndex& index) {
  struct Group {
    int n = 0;
    int correct = 0;
    std::vector<double> all;
    std::vector<double> when_correct;
    std::vector<double> when_incorrect;
  };
  std::map<std::tuple<std::string, std::string, Mode>, Group> groups;

  for (const RunRecord& record : records) {
    const auto it = index.find(record.instance_id);
    if (it == index.end()) {
      fail(ErrorKind::kInvalidArg, "record references unknown instance: " + record.instance_id);
    }
    const PromptInstance& prompt = it->second;
    const bool ok = graded_correct(record, prompt);
    Group& group = groups[{record.model_id, prompt.ruleset_name, prompt.mode}];
    ++group.n;
    if (ok) ++group.correct;
    if (record.token_logprobs && !record.token_logprobs->empty()) {
      const double h = response_entropy(*record.token_logprobs);
      group.all.push_back(h);
      (ok ? group.when_correct : group.when_incorrect).push_back(h);
    }
  }

  EntropyReport report;
  for (const auto& [key, group] : groups) {
    if (group.all.empty()) continue;
    EntropySummary summary;
    summary.model_id = std::get<0>(key);
    summary.ruleset_name = std::get<1>(key);
    summary.mode = std::get<2>(key);
    summary.records_with_logprobs = static_cast<int>(group.all.size());
    summary.mean_entropy_all = mean_of(group.all);
    if (!group.when_correct.empty()) {
      summary.mean_entropy_correct = mean_of(group.when_correct);
    }
    if (!group.when_incorrect.empty()) {
      summary.mean_entropy_incorrect = mean_of(group.when_incorrect);
    }
    report.summaries.push_back(summary);

    if (!group.when_correct.empty() && !group.when_incorrect.empty()) {
      report.scatter.push_back({summary.model_id, summary.ruleset_name, summary.mode,
                                *summary.mean_entropy_correct,
                                *summary.mean_entropy_incorrect});
    }
    report.accuracy_series.push_back(
        {summary.model_id, summary.ruleset_name, summary.mode,
         static_cast<double>(group.correct) / group.n, *summary.mean_entropy_all});
  }
  return report;
}

namespace {

std::vector<std::string> rulesets_in_scope(const ScoreTable& table,
                                           const std::map<CategoryKey, double>& categories,
                                           const std::vector<TTestResult>& ttests) {
  std::set<std::string> names;
  for (const auto& [key, cell] : table) names.insert(key.ruleset_name);
  for (const auto& [key, value] : categories) names.insert(key.ruleset_name);
  for (const TTestResult& t : ttests) names.insert(t.ruleset_name);
  return canonical_ruleset_order(std::vector<std::string>(names.begin(), names.end()));
}

std::string per_model_csv(const ScoreTable& table, const std::vector<ModelSpec>& models,
                          const std::vector<std::string>& rulesets, Mode mode) {
  std::ostringstream out;
  out << "model_id,category";
  for (const std::string& r : rulesets) out << ',' << r;
  out << '\n';
  for (const ModelSpec& model : models) {
    bool any = false;
    for (const std::string& r : rulesets) {
      if (table.count({model.model_id, r, mode})) any = true;
    }
    if (!any) continue;
    out << model.model_id << ',' << to_string(model.category);
    for (const std::string& r : rulesets) {
      out << ',';
      const auto it = table.find({model.model_id, r, mode});
      if (it != table.end()) out << fixed6(it->second.accuracy());
    }
    out << '\n';
  }
  return out.str();
}

nlohmann::json per_model_json(const ScoreTable& table, const std::vector<ModelSpec>& models,
                              const std::vector<std::string>& rulesets, Mode mode) {
  nlohmann::json rows = nlohmann::json::array();
  for (const ModelSpec& model : models) {
    nlohmann::json accuracy = nlohmann::json::object();
    for (const std::string& r : rulesets) {
      const auto it = table.find({model.model_id, r, mode});
      if (it != table.end()) accuracy[r] = it->second.accuracy();
    }
    if (accuracy.empty()) continue;
    rows.push_back({{"model_id", model.model_id},
                    {"category", to_string(model.category)},
                    {"accuracy", accuracy}});
  }
  return {{"mode", to_string(mode)}, {"rulesets", rulesets}, {"models", rows}};
}

std::string category_csv(const std::map<CategoryKey, double>& categories,
                         const std::vector<std::string>& rulesets, Mode mode) {
  static const std::vector<std::string> category_order = {"CHEAP", "EXPENSIVE", "REASONING",
                                                          "TOTAL"};
  std::ostringstream out;
  out << "category";
  for (const std::string& r : rulesets) out << ',' << r;
  out << '\n';
  for (const std::string& category : category_order) {
    bool any = false;
    for (const std::string& r : rulesets) {
      if (categories.count({category, r, mode})) any = true;
    }
    if (!any) continue;
    out << category;
    for (const std::string& r : rulesets) {
      out << ',';
      const auto it = categories.find({category, r, mode});
      if (it != categories.end()) out << fixed6(it->second);
    }
    out << '\n';
  }
  return out.str();
}

std::string ttest_csv(const std::vector<TTestResult>& ttests) {
  std::ostringstream out;
  out << "ruleset,mean_do0,mean_dofs,difference,t_statistic,p_value,degrees_of_freedom,"
         "n_models\n";
  double sum0 = 0.0;
  double sum1 = 0.0;
  double sum_diff = 0.0;
  for (const TTestResult& t : ttests) {
    out << t.ruleset_name << ',' << fixed6(t.mean_do0) << ',' << fixed6(t.mean_dofs) << ','
        << fixed6(t.difference) << ',' << general6(t.t_statistic) << ','
        << general6(t.p_value) << ',' << t.degrees_of_freedom << ',' << t.n_models << '\n';
    sum0 += t.mean_do0;
    sum1 += t.mean_dofs;
    sum_diff += t.difference;
  }
  if (!ttests.empty()) {
    const auto n = static_cast<double>(ttests.size());
    out << "AVERAGE," << fixed6(sum0 / n) << ',' << fixed6(sum1 / n) << ','
        << fixed6(sum_diff / n) << ",,,,\n";
  }
  return out.str();
}

nlohmann::json ttest_json(const std::vector<TTestResult>& ttests) {
  nlohmann::json rows = nlohmann::json::array();
  for (const TTestResult& t : ttests) {
    rows.push_back({{"ruleset", t.ruleset_name},
                    {"mean_do0", t.mean_do0},
                    {"mean_dofs", t.mean_dofs},
                    {"difference", t.difference},
                    {"t_statistic", std::isfinite(t.t_statistic)
                                        ? nlohmann::json(t.t_statistic)
                                        : nlohmann::json(general6(t.t_statistic))},
                    {"p_value", t.p_value},
                    {"degrees_of_freedom", t.degrees_of_freedom},
                    {"n_models", t.n_models},
                    {"degenerate", t.degenerate}});
  }
  return {{"rows", rows}};
}

std::string entropy_summary_csv(const EntropyReport& entropy) {
  std::ostringstream out;
  out << "model_id,ruleset,mode,records_with_logprobs,mean_entropy_all,"
         "mean_entropy_correct,mean_entropy_incorrect\n";
  for (const EntropySummary& s : entropy.summaries) {
    out << s.model_id << ',' << s.ruleset_name << ',' << to_string(s.mode) << ','
        << s.records_with_logprobs << ',';
    if (s.mean_entropy_all) out << fixed6(*s.mean_entropy_all);
    out << ',';
    if (s.mean_entropy_correct) out << fixed6(*s.mean_entropy_correct);
    out << ',';
    if (s.mean_entropy_incorrect) out << fixed6(*s.mean_entropy_incorrect);
    out << '\n';
  }
  return out.str();
}

std::string scatter_csv(const EntropyReport& entropy, Mode mode) {
  std::ostringstream out;
  out << "model_id,ruleset,correct_entropy,incorrect_entropy\n";
  for (const ScatterPoint& p : entropy.scatter) {
    if (p.mode != mode) continue;
    out << p.model_id << ',' << p.ruleset_name << ',' << fixed6(p.correct_entropy) << ','
        << fixed6(p.incorrect_entropy) << '\n';
  }
  return out.str();
}

std::string accuracy_entropy_csv(const EntropyReport& entropy, Mode mode) {
  std::ostringstream out;
  out << "model_id,ruleset,accuracy,mean_entropy\n";
  for (const AccuracyEntropyPoint& p : entropy.accuracy_series) {
    if (p.mode != mode) continue;
    out << p.model_id << ',' << p.ruleset_name << ',' << fixed6(p.accuracy) << ','
        << fixed6(p.mean_entropy) << '\n';
  }
  return out.str();
}

nlohmann::json entropy_json(const EntropyReport& entropy) {
  nlohmann::json summaries = nlohmann::json::array();
  for (const EntropySummary& s : entropy.summaries) {
    nlohmann::json row = {{"model_id", s.model_id},
                          {"ruleset", s.ruleset_name},
                          {"mode", to_string(s.mode)},
                          {"records_with_logprobs", s.records_with_logprobs}};
    if (s.mean_entropy_all) row["mean_entropy_all"] = *s.mean_entropy_all;
    if (s.mean_entropy_correct) row["mean_entropy_correct"] = *s.mean_entropy_correct;
    if (s.mean_entropy_incorrect) row["mean_entropy_incorrect"] = *s.mean_entropy_incorrect;
    summaries.push_back(std::move(row));
  }
  nlohmann::json scatter = nlohmann::json::array();
  for (const ScatterPoint& p : entropy.scatter) {
    scatter.push_back({{"model_id", p.model_id},
                       {"ruleset", p.ruleset_name},
                       {"mode", to_string(p.mode)},
                       {"correct_entropy", p.correct_entropy},
                       {"incorrect_entropy", p.incorrect_entropy}});
  }
  nlohmann::json accuracy = nlohmann::json::array();
  for (const AccuracyEntropyPoint& p : entropy.accuracy_series) {
    accuracy.push_back({{"model_id", p.model_id},
                        {"ruleset", p.ruleset_name},
                        {"mode", to_string(p.mode)},
                        {"accuracy", p.accuracy},
                        {"mean_entropy", p.mean_entropy}});
  }
  return {{"summaries", summaries}, {"scatter", scatter}, {"accuracy_series", accuracy}};
}

std::string radar_csv(const std::map<CategoryKey, double>& categories,
                      const std::vector<std::string>& rulesets, Mode mode) {
  static const std::vector<std::string> category_order = {"CHEAP", "EXPENSIVE", "REASONING",
                                                          "TOTAL"};
  std::ostringstream out;
  out << "category,ruleset,value\n";
  for (const std::string& category : category_order) {
    for (const std::string& r : rulesets) {
      const auto it = categories.find({category, r, mode});
      if (it == categories.end()) continue;
      out << category << ',' << r << ',' << fixed6(it->second) << '\n';
    }
  }
  return out.str();
}

nlohmann::json radar_json(const std::map<CategoryKey, double>& categories,
                          const std::vector<std::string>& rulesets, Mode mode) {
  static const std::vector<std::string> category_order = {"CHEAP", "EXPENSIVE", "REASONING",
                                                          "TOTAL"};
  nlohmann::json series = nlohmann::json::array();
  for (const std::string& category : category_order) {
    nlohmann::json points = nlohmann::json::array();
    for (const std::string& r : rulesets) {
      const auto it = categories.find({category, r, mode});
      if (it == categories.end()) continue;
      points.push_back({{"ruleset", r}, {"value", it->second}});
    }
    if (points.empty()) continue;
    series.push_back({{"category", category}, {"points", points}});
  }
  return {{"mode", to_string(mode)}, {"series", series}};
}

void append_text_table(std::ostringstream& out, const std::string& title,
                       const std::map<CategoryKey, double>& categories,
                       const std::vector<std::string>& rulesets, Mode mode) {
  static const std::vector<std::string> category_order = {"CHEAP", "EXPENSIVE", "REASONING",
                                                          "TOTAL"};
  out << title << '\n';
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%-12s", "category");
  out << buf;
  for (const std::string& r : rulesets) {
    std::snprintf(buf, sizeof(buf), " %11s", r.c_str());
    out << buf;
  }
  out << '\n';
  for (const std::string& category : category_order) {
    bool any = false;
    for (const std::string& r : rulesets) {
      if (categories.count({category, r, mode})) any = true;
    }
    if (!any) continue;
    std::snprintf(buf, sizeof(buf), "%-12s", category.c_str());
    out << buf;
    for (const std::string& r : rulesets) {
      const auto it = categories.find({category, r, mode});
      if (it != categories.end()) {
        std::snprintf(buf, sizeof(buf), " %11.3f", it->second);
      } else {
        std::snprintf(buf, sizeof(buf), " %11s", "-");
      }
      out << buf;
    }
    out << '\n';
  }
  out << '\n';
}

std::string summary_text(const std::map<CategoryKey, double>& categories,
                         const std::vector<TTestResult>& ttests,
                         const std::vector<std::string>& rulesets) {
  std::ostringstream out;
  out << "Absurd World evaluation summary\n\n";
  append_text_table(out, "Category accuracy, zero-shot", categories, rulesets,
                    Mode::kZeroShot);
  append_text_table(out, "Category accuracy, few-shot", categories, rulesets,
                    Mode::kFewShot);
  out << "Paired one-sided t-test (zero-shot minus few-shot)\n";
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-12s %10s %10s %10s %10s %12s\n", "ruleset", "mean_do0",
                "mean_dofs", "diff", "t", "p");
  out << buf;
  for (const TTestResult& t : ttests) {
    std::snprintf(buf, sizeof(buf), "%-12s %10.3f %10.3f %10.3f %10.3f %12.4g\n",
                  t.ruleset_name.c_str(), t.mean_do0, t.mean_dofs, t.difference,
                  t.t_statistic, t.p_value);
    out << buf;
  }
  if (ttests.empty()) out << "(no t-test rows)\n";
  return out.str();
}

}  // namespace

nlohmann::json emit_report(const ScoreTable& table,
                           const std::map<CategoryKey, double>& categories,
                           const std::vector<TTestResult>& ttests,
                           const EntropyReport& entropy,
                           const std::vector<ModelSpec>& models,
                           const std::string& out_dir) {
  const std::vector<std::string> rulesets = rulesets_in_scope(table, categories, ttests);

  std::vector<std::string> files;
  const auto emit = [&](const std::string& name, const std::string& content) {
    write_text_file(out_dir + "/" + name, content);
    files.push_back(name);
  };

  for (const Mode mode : {Mode::kZeroShot, Mode::kFewShot}) {
    const std::string suffix = mode_suffix(mode);
    emit("per_model_" + suffix + ".csv", per_model_csv(table, models, rulesets, mode));
    emit("per_model_" + suffix + ".json",
         per_model_json(table, models, rulesets, mode).dump(2) + "\n");
    emit("category_" + suffix + ".csv", category_csv(categories, rulesets, mode));
    emit("radar_" + suffix + ".csv", radar_csv(categories, rulesets, mode));
    emit("radar_" + suffix + ".json", radar_json(categories, rulesets, mode).dump(2) + "\n");
    emit("entropy_scatter_" + suffix + ".csv", scatter_csv(entropy, mode));
    emit("entropy_accuracy_" + suffix + ".csv", accuracy_entropy_csv(entropy, mode));
  }
  emit("ttest.csv", ttest_csv(ttests));
  emit("ttest.json", ttest_json(ttests).dump(2) + "\n");
  emit("entropy_summary.csv", entropy_summary_csv(entropy));
  emit("entropy.json", entropy_json(entropy).dump(2) + "\n");
  emit("summary.txt", summary_text(categories, ttests, rulesets));

  nlohmann::json manifest = {{"out_dir", out_dir},
                             {"generated_at", utc_timestamp_now()},
                             {"files", files}};
  write_text_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

}  // namespace absurd
