#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "absurd/generator.hpp"
#include "absurd/types.hpp"

namespace absurd {

enum class ModelCategory { kCheap, kExpensive, kReasoning };

const char* to_string(ModelCategory category);
ModelCategory parse_category(const std::string& s);

struct RequestOptions {
  double temperature = 0.0;
  int max_tokens = 1024;
  bool logprobs = false;
  int top_logprobs = 0;
};

struct ModelSpec {
  std::string model_id;
  ModelCategory category = ModelCategory::kCheap;
  std::string endpoint_url;
  RequestOptions request_options;
};

// One alternative for one output token.
struct TokenAlt {
  std::string token;
  double logprob = 0.0;
};
// Per output token, the returned top-k alternatives (at least one each).
using TokenLogprobs = std::vector<std::vector<TokenAlt>>;

// One model response to one prompt. extracted/correct are present together
// or absent together (absent means unparseable or failed, scored incorrect).
struct RunRecord {
  std::string instance_id;
  std::string model_id;
  Mode mode = Mode::kZeroShot;
  std::string ruleset_name;
  std::string raw_text;
  std::optional<TokenLogprobs> token_logprobs;
  std::optional<ExpectedLabel> extracted;
  std::optional<bool> correct;
  double latency_ms = 0.0;
  int attempt_count = 1;
  std::string timestamp;
};

struct BackendConfig {
  int max_parallel_requests = 4;
  int retry_limit = 3;
  std::vector<int> backoff_ms = {250, 1000, 4000};
  int timeout_ms = 120000;
  std::string credential_env = "ABSURD_API_KEY";
};

// Backend failures carry a retry hint; auth failures are never retried.
class BackendError : public Error {
 public:
  BackendError(ErrorKind kind, const std::string& message, bool retryable)
      : Error(kind, message), retryable_(retryable) {}
  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

struct BackendResult {
  std::string raw_text;
  std::optional<TokenLogprobs> token_logprobs;
};

// A model backend: one completion per call. Implementations must be safe to
// call from multiple threads at once.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendResult complete(const ModelSpec& model, const PromptInstance& prompt) = 0;
};

// Live chat-completion backend. Reads the bearer token from the environment
// variable named in the config at construction time; a missing credential is
// an authentication error raised before any network traffic.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(const BackendConfig& config);
  BackendResult complete(const ModelSpec& model, const PromptInstance& prompt) override;

 private:
  BackendConfig config_;
  std::string token_;
};

// Offline agent that reads the rules out of the prompt text and applies them
// to the commentary; always correct (up to an optional seeded error rate).
class MockRuleFollower : public Backend {
 public:
  explicit MockRuleFollower(double error_rate = 0.0);
  BackendResult complete(const ModelSpec& model, const PromptInstance& prompt) override;

 private:
  double error_rate_;
};

// Offline agent that ignores the stated rules and answers by real-world
// semantics (hits score, most wins; first goat wins).
class MockPriorBiased : public Backend {
 public:
  BackendResult complete(const ModelSpec& model, const PromptInstance& prompt) override;
};

// "mock:rule-follower", "mock:rule-follower:<error-rate>", "mock:prior-biased",
// or "http". Unknown names are a config error.
std::unique_ptr<Backend> make_backend(const std::string& name, const BackendConfig& config);

// The raw response text each mock would produce for a prompt.
std::string mock_rule_follower_text(const PromptInstance& prompt);
std::string mock_prior_biased_text(const PromptInstance& prompt);

struct RunSummary {
  int total = 0;     // prompt-model pairs in the suite
  int skipped = 0;   // already journaled
  int executed = 0;  // actually requested this run
  int failed = 0;    // recorded with empty raw_text after retry exhaustion
};

// Runs every (prompt, model) pair not yet journaled, with bounded
// parallelism and per-request retries, appending one graded RunRecord per
// pair to the JSON Lines journal at journal_path.
RunSummary run_suite(const std::vector<PromptInstance>& prompts,
                     const std::vector<ModelSpec>& models, const BackendConfig& config,
                     const std::string& journal_path, Backend& backend);

nlohmann::json record_to_json(const RunRecord& record);
RunRecord record_from_json(const nlohmann::json& j);

// Reads a journal; any malformed line or duplicated (instance, model) pair
// is fatal. A missing file yields an empty vector when allow_missing is set.
std::vector<RunRecord> read_journal(const std::string& path, bool allow_missing = false);

void append_journal(const std::string& path, const std::vector<RunRecord>& records);

nlohmann::json model_spec_to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j);
nlohmann::json backend_config_to_json(const BackendConfig& config);
BackendConfig backend_config_from_json(const nlohmann::json& j);

std::string utc_timestamp_now();

}  // namespace absurd
