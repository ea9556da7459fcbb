#pragma once
// One-sided paired t-test, response-entropy metrics, and report emission.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "absurd/harness.hpp"
#include "absurd/scoring.hpp"

namespace absurd {

struct TTestResult {
  std::string ruleset_name;
  double mean_do0 = 0.0;
  double mean_dofs = 0.0;
  double difference = 0.0;  // mean_do0 - mean_dofs
  double t_statistic = 0.0;
  double p_value = 0.5;
  int degrees_of_freedom = 0;
  int n_models = 0;
  bool degenerate = false;  // zero-variance difference vector
};

// Regularized incomplete beta function I_x(a, b), evaluated by a modified
// Lentz continued fraction. Accurate to well under 1e-9 on the t-test range.
double reg_inc_beta(double a, double b, double x);

// P(T > t) for Student's t distribution with df degrees of freedom.
double student_t_upper_tail(double t, double df);

// One-sided paired test of whether the first condition's mean accuracy
// exceeds the second's, paired per model: t = mean(d) / (sd(d)/sqrt(n)),
// df = n - 1. Zero-variance inputs are reported as degenerate, not errors.
TTestResult paired_ttest(const std::map<std::string, double>& do0,
                         const std::map<std::string, double>& dofs,
                         const std::string& ruleset_name);

// Mean per-token Shannon entropy in nats. Each token's top-k alternatives
// are renormalized (max-shifted softmax over the returned log probabilities)
// before computing H = -sum p ln p.
double response_entropy(const TokenLogprobs& token_logprobs);

struct EntropySummary {
  std::string model_id;
  std::string ruleset_name;
  Mode mode = Mode::kZeroShot;
  std::optional<double> mean_entropy_all;
  std::optional<double> mean_entropy_correct;
  std::optional<double> mean_entropy_incorrect;
  int records_with_logprobs = 0;
};

struct ScatterPoint {
  std::string model_id;
  std::string ruleset_name;
  Mode mode = Mode::kZeroShot;
  double correct_entropy = 0.0;
  double incorrect_entropy = 0.0;
};

struct AccuracyEntropyPoint {
  std::string model_id;
  std::string ruleset_name;
  Mode mode = Mode::kZeroShot;
  double accuracy = 0.0;       // over all records in the group
  double mean_entropy = 0.0;   // over records carrying logprobs
};

struct EntropyReport {
  std::vector<EntropySummary> summaries;
  // Correct-vs-incorrect entropy; only groups with both subsets nonempty.
  std::vector<ScatterPoint> scatter;
  std::vector<AccuracyEntropyPoint> accuracy_series;
};

// Per (model, ruleset, mode) entropy statistics, re-graded from raw text.
// Groups without any logprob-carrying records are omitted.
EntropyReport entropy_report(const std::vector<RunRecord>& records,
                             const PromptIndex& index);

// Writes every table and chart series under out_dir (CSV plus JSON mirrors,
// a plain-text summary, and manifest.json) and returns the manifest.
nlohmann::json emit_report(const ScoreTable& table,
                           const std::map<CategoryKey, double>& categories,
                           const std::vector<TTestResult>& ttests,
                           const EntropyReport& entropy,
                           const std::vector<ModelSpec>& models,
                           const std::string& out_dir);

}  // namespace absurd
