#include "absurd/harness.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "httplib.h"

#include "absurd/io_util.hpp"
#include "absurd/json_util.hpp"
#include "absurd/oracle.hpp"
#include "absurd/rng.hpp"
#include "absurd/scoring.hpp"

namespace absurd {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const size_t scheme = url.find("://");
  if (scheme == std::string::npos) {
    fail(ErrorKind::kConfig, "endpoint_url must include a scheme: " + url);
  }
  const size_t slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

// The word (letters only) directly after the last occurrence of marker.
std::string word_after(const std::string& text, const std::string& marker) {
  const size_t pos = text.rfind(marker);
  if (pos == std::string::npos) return "";
  size_t begin = pos + marker.size();
  size_t end = begin;
  while (end < text.size() && std::isalpha(static_cast<unsigned char>(text[end]))) ++end;
  return text.substr(begin, end - begin);
}

bool is_door_prompt(const PromptInstance& prompt) {
  return !prompt.events.empty() && prompt.events.front().kind == EventRecord::Kind::kDoorOpen;
}

// Recover the rules from the prompt text itself and apply them to the
// events. Falls back to the instance's label only if the text does not
// carry the built-in templates' rule sentences.
ExpectedLabel rule_following_label(const PromptInstance& prompt) {
  if (is_door_prompt(prompt)) {
    const size_t first_pos = prompt.text.rfind("behind it first wins");
    const size_t last_pos = prompt.text.rfind("behind it last wins");
    if (first_pos == std::string::npos && last_pos == std::string::npos) {
      return prompt.expected;
    }
    const WinnerOrder order =
        (last_pos != std::string::npos &&
         (first_pos == std::string::npos || last_pos > first_pos))
            ? WinnerOrder::kLast
            : WinnerOrder::kFirst;
    return door_outcome(prompt.events, order);
  }

  const std::string action = word_after(prompt.text, " makes the shot ");
  const std::string comparator = word_after(prompt.text, " having the ");
  if ((action != "hits" && action != "misses") ||
      (comparator != "most" && comparator != "least")) {
    return prompt.expected;
  }
  return soccer_outcome(prompt.events,
                        action == "hits" ? Outcome::kHit : Outcome::kMiss,
                        comparator == "most" ? Comparator::kMost : Comparator::kLeast);
}

ExpectedLabel prior_biased_label(const PromptInstance& prompt) {
  if (is_door_prompt(prompt)) {
    return door_outcome(prompt.events, WinnerOrder::kFirst);
  }
  return soccer_outcome(prompt.events, Outcome::kHit, Comparator::kMost);
}

// A deterministic wrong answer, used by the error-rate mock.
ExpectedLabel wrong_label(const ExpectedLabel& correct) {
  using Kind = ExpectedLabel::Kind;
  switch (correct.kind) {
    case Kind::kPlayerOne: return ExpectedLabel::player_two();
    case Kind::kPlayerTwo: return ExpectedLabel::tie();
    case Kind::kTie: return ExpectedLabel::player_one();
    case Kind::kNoWinner: return ExpectedLabel::named(1);
    case Kind::kNamed:
      return correct.player_index == 1 ? ExpectedLabel::named(2) : ExpectedLabel::named(1);
  }
  return ExpectedLabel::player_one();
}

nlohmann::json logprobs_to_json(const TokenLogprobs& logprobs) {
  nlohmann::json tokens = nlohmann::json::array();
  for (const auto& alts : logprobs) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& alt : alts) {
      row.push_back({{"token", alt.token}, {"logprob", alt.logprob}});
    }
    tokens.push_back(std::move(row));
  }
  return tokens;
}

TokenLogprobs logprobs_from_json(const nlohmann::json& j) {
  if (!j.is_array()) fail(ErrorKind::kParse, "token_logprobs must be an array");
  TokenLogprobs out;
  for (const auto& row : j) {
    if (!row.is_array()) fail(ErrorKind::kParse, "token_logprobs rows must be arrays");
    std::vector<TokenAlt> alts;
    for (const auto& alt : row) {
      TokenAlt a;
      a.token = require_string(alt, "token");
      a.logprob = require_number(alt, "logprob");
      if (a.logprob > 1e-6) {
        fail(ErrorKind::kParse, "log probability above zero: " + std::to_string(a.logprob));
      }
      alts.push_back(std::move(a));
    }
    out.push_back(std::move(alts));
  }
  return out;
}

}  // namespace

const char* to_string(ModelCategory category) {
  switch (category) {
    case ModelCategory::kCheap: return "CHEAP";
    case ModelCategory::kExpensive: return "EXPENSIVE";
    case ModelCategory::kReasoning: return "REASONING";
  }
  return "CHEAP";
}

ModelCategory parse_category(const std::string& s) {
  if (s == "CHEAP") return ModelCategory::kCheap;
  if (s == "EXPENSIVE") return ModelCategory::kExpensive;
  if (s == "REASONING") return ModelCategory::kReasoning;
  fail(ErrorKind::kParse, "unknown model category: " + s);
}

std::string utc_timestamp_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

HttpBackend::HttpBackend(const BackendConfig& config) : config_(config) {
  if (config_.credential_env.empty()) {
    fail(ErrorKind::kConfig, "credential_env is empty");
  }
  const char* token = std::getenv(config_.credential_env.c_str());
  if (!token || !*token) {
    fail(ErrorKind::kAuth,
         "credential environment variable " + config_.credential_env + " is not set");
  }
  token_ = token;
}

BackendResult HttpBackend::complete(const ModelSpec& model, const PromptInstance& prompt) {
  if (model.endpoint_url.empty()) {
    fail(ErrorKind::kConfig, "model " + model.model_id + " has no endpoint_url");
  }
  const SplitUrl url = split_url(model.endpoint_url);

  nlohmann::json body = {
      {"model", model.model_id},
      {"messages", nlohmann::json::array({nlohmann::json{
                       {"role", "user"}, {"content", prompt.text}}})},
      {"temperature", model.request_options.temperature},
  };
  if (model.request_options.logprobs) {
    body["logprobs"] = true;
    body["top_logprobs"] = model.request_options.top_logprobs;
  }
  if (model.request_options.max_tokens > 0) {
    body["max_tokens"] = model.request_options.max_tokens;
  }

  httplib::Client client(url.origin);
  const time_t sec = config_.timeout_ms / 1000;
  const time_t usec = (config_.timeout_ms % 1000) * 1000;
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);

  const httplib::Headers headers = {{"Authorization", "Bearer " + token_}};
  auto res = client.Post(url.path, headers, body.dump(), "application/json");
  if (!res) {
    throw BackendError(ErrorKind::kBackend,
                       "request to " + model.endpoint_url + " failed: " +
                           httplib::to_string(res.error()),
                       /*retryable=*/true);
  }
  if (res->status == 401 || res->status == 403) {
    throw BackendError(ErrorKind::kAuth,
                       "authentication rejected (HTTP " + std::to_string(res->status) + ")",
                       /*retryable=*/false);
  }
  if (res->status == 429 || res->status >= 500) {
    throw BackendError(ErrorKind::kBackend,
                       "HTTP " + std::to_string(res->status) + " from provider",
                       /*retryable=*/true);
  }
  if (res->status != 200) {
    throw BackendError(ErrorKind::kBackend,
                       "HTTP " + std::to_string(res->status) + " from provider",
                       /*retryable=*/false);
  }

  nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
  if (j.is_discarded()) {
    throw BackendError(ErrorKind::kBackend, "malformed provider response: not JSON",
                       /*retryable=*/false);
  }
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
    throw BackendError(ErrorKind::kBackend, "malformed provider response: no choices",
                       /*retryable=*/false);
  }
  const auto& choice = j["choices"][0];
  if (!choice.contains("message") || !choice["message"].contains("content") ||
      !choice["message"]["content"].is_string()) {
    throw BackendError(ErrorKind::kBackend, "malformed provider response: no content",
                       /*retryable=*/false);
  }

  BackendResult result;
  result.raw_text = choice["message"]["content"].get<std::string>();
  if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
      choice["logprobs"].contains("content") && choice["logprobs"]["content"].is_array()) {
    TokenLogprobs logprobs;
    for (const auto& token : choice["logprobs"]["content"]) {
      std::vector<TokenAlt> alts;
      if (token.contains("top_logprobs") && token["top_logprobs"].is_array()) {
        for (const auto& alt : token["top_logprobs"]) {
          alts.push_back({require_string(alt, "token"), require_number(alt, "logprob")});
        }
      }
      if (alts.empty() && token.contains("token") && token.contains("logprob")) {
        alts.push_back({require_string(token, "token"), require_number(token, "logprob")});
      }
      if (!alts.empty()) logprobs.push_back(std::move(alts));
    }
    if (!logprobs.empty()) result.token_logprobs = std::move(logprobs);
  }
  return result;
}

std::string mock_rule_follower_text(const PromptInstance& prompt) {
  const ExpectedLabel label = rule_following_label(prompt);
  return "Working through the stated rules: tally each side's qualifying events, "
         "then apply the winning condition. The answer is {" +
         answer_surface_form(label, prompt.binding) + "}.";
}

std::string mock_prior_biased_text(const PromptInstance& prompt) {
  const ExpectedLabel label = prior_biased_label(prompt);
  return "Reading the commentary the usual way, the winner is {" +
         answer_surface_form(label, prompt.binding) + "}.";
}

MockRuleFollower::MockRuleFollower(double error_rate) : error_rate_(error_rate) {
  if (error_rate_ < 0.0 || error_rate_ >= 1.0) {
    fail(ErrorKind::kConfig, "mock error rate must be in [0, 1)");
  }
}

BackendResult MockRuleFollower::complete(const ModelSpec& model,
                                         const PromptInstance& prompt) {
  if (error_rate_ > 0.0) {
    Rng rng(mix64(fnv1a(prompt.instance_id + "|" + model.model_id)));
    if (rng.next_double() < error_rate_) {
      const ExpectedLabel label = wrong_label(rule_following_label(prompt));
      return {"I may have miscounted somewhere. The answer is {" +
                  answer_surface_form(label, prompt.binding) + "}.",
              std::nullopt};
    }
  }
  return {mock_rule_follower_text(prompt), std::nullopt};
}

BackendResult MockPriorBiased::complete(const ModelSpec&, const PromptInstance& prompt) {
  return {mock_prior_biased_text(prompt), std::nullopt};
}

std::unique_ptr<Backend> make_backend(const std::string& name, const BackendConfig& config) {
  if (name.empty() || name == "http") {
    return std::make_unique<HttpBackend>(config);
  }
  if (name == "mock:rule-follower") {
    return std::make_unique<MockRuleFollower>();
  }
  const std::string prefix = "mock:rule-follower:";
  if (name.rfind(prefix, 0) == 0) {
    double rate = 0.0;
    try {
      rate = std::stod(name.substr(prefix.size()));
    } catch (const std::exception&) {
      fail(ErrorKind::kConfig, "bad mock error rate in backend name: " + name);
    }
    return std::make_unique<MockRuleFollower>(rate);
  }
  if (name == "mock:prior-biased") {
    return std::make_unique<MockPriorBiased>();
  }
  fail(ErrorKind::kConfig, "unknown backend: " + name);
}

nlohmann::json record_to_json(const RunRecord& record) {
  nlohmann::json j = {
      {"instance_id", record.instance_id},
      {"model_id", record.model_id},
      {"mode", to_string(record.mode)},
      {"ruleset_name", record.ruleset_name},
      {"raw_text", record.raw_text},
      {"latency_ms", record.latency_ms},
      {"attempt_count", record.attempt_count},
      {"timestamp", record.timestamp},
  };
  if (record.token_logprobs) j["token_logprobs"] = logprobs_to_json(*record.token_logprobs);
  if (record.extracted) j["extracted"] = record.extracted->to_string();
  if (record.correct) j["correct"] = *record.correct;
  return j;
}

RunRecord record_from_json(const nlohmann::json& j) {
  RunRecord record;
  record.instance_id = require_string(j, "instance_id");
  record.model_id = require_string(j, "model_id");
  record.mode = parse_mode(require_string(j, "mode"));
  record.ruleset_name = require_string(j, "ruleset_name");
  record.raw_text = require_string(j, "raw_text");
  record.latency_ms = require_number(j, "latency_ms");
  record.attempt_count = static_cast<int>(require_int(j, "attempt_count"));
  record.timestamp = require_string(j, "timestamp");
  if (j.contains("token_logprobs") && !j.at("token_logprobs").is_null()) {
    record.token_logprobs = logprobs_from_json(j.at("token_logprobs"));
  }
  const bool has_extracted = j.contains("extracted") && !j.at("extracted").is_null();
  const bool has_correct = j.contains("correct") && !j.at("correct").is_null();
  if (has_extracted != has_correct) {
    fail(ErrorKind::kParse, "extracted and correct must be present together");
  }
  if (has_extracted) {
    record.extracted = ExpectedLabel::parse(require_string(j, "extracted"));
    record.correct = get_bool(j, "correct", false);
  }
  return record;
}

std::vector<RunRecord> read_journal(const std::string& path, bool allow_missing) {
  if (allow_missing && !std::filesystem::exists(path)) return {};
  std::vector<RunRecord> records;
  std::set<std::pair<std::string, std::string>> seen;
  std::istringstream in(read_text_file(path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      fail(ErrorKind::kParse,
           "corrupt journal " + path + ": invalid JSON at line " + std::to_string(line_no));
    }
    RunRecord record = record_from_json(j);
    if (!seen.insert({record.instance_id, record.model_id}).second) {
      fail(ErrorKind::kParse, "corrupt journal " + path + ": duplicate entry for (" +
                                  record.instance_id + ", " + record.model_id + ")");
    }
    records.push_back(std::move(record));
  }
  return records;
}

void append_journal(const std::string& path, const std::vector<RunRecord>& records) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) fail(ErrorKind::kIo, "cannot create directory: " + p.parent_path().string());
  }
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) fail(ErrorKind::kIo, "cannot open journal for append: " + path);
  for (const RunRecord& record : records) {
    out << record_to_json(record).dump() << '\n';
  }
  out.flush();
  if (!out) fail(ErrorKind::kIo, "journal write failed: " + path);
}

RunSummary run_suite(const std::vector<PromptInstance>& prompts,
                     const std::vector<ModelSpec>& models, const BackendConfig& config,
                     const std::string& journal_path, Backend& backend) {
  if (config.max_parallel_requests < 1) {
    fail(ErrorKind::kConfig, "max_parallel_requests must be at least 1");
  }

  std::set<std::pair<std::string, std::string>> done;
  for (const RunRecord& record : read_journal(journal_path, /*allow_missing=*/true)) {
    done.insert({record.instance_id, record.model_id});
  }

  struct Task {
    const PromptInstance* prompt;
    const ModelSpec* model;
  };
  std::vector<Task> tasks;
  for (const ModelSpec& model : models) {
    for (const PromptInstance& prompt : prompts) {
      if (!done.count({prompt.instance_id, model.model_id})) {
        tasks.push_back({&prompt, &model});
      }
    }
  }

  RunSummary summary;
  summary.total = static_cast<int>(prompts.size() * models.size());
  summary.skipped = summary.total - static_cast<int>(tasks.size());
  if (tasks.empty()) return summary;

  std::filesystem::path p(journal_path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) fail(ErrorKind::kIo, "cannot create directory: " + p.parent_path().string());
  }
  std::ofstream journal(journal_path, std::ios::binary | std::ios::app);
  if (!journal) fail(ErrorKind::kIo, "cannot open journal for append: " + journal_path);

  std::mutex journal_mutex;
  std::atomic<size_t> next_task{0};
  std::atomic<int> failed{0};
  std::atomic<bool> io_failed{false};

  auto execute_one = [&](const Task& task) {
    RunRecord record;
    record.instance_id = task.prompt->instance_id;
    record.model_id = task.model->model_id;
    record.mode = task.prompt->mode;
    record.ruleset_name = task.prompt->ruleset_name;
    record.timestamp = utc_timestamp_now();

    const auto start = std::chrono::steady_clock::now();
    int attempts = 0;
    bool success = false;
    for (;;) {
      ++attempts;
      try {
        BackendResult result = backend.complete(*task.model, *task.prompt);
        record.raw_text = std::move(result.raw_text);
        record.token_logprobs = std::move(result.token_logprobs);
        success = true;
        break;
      } catch (const Error& e) {
        const auto* backend_error = dynamic_cast<const BackendError*>(&e);
        const bool retryable = backend_error ? backend_error->retryable()
                                             : e.kind() == ErrorKind::kBackend;
        if (retryable && attempts <= config.retry_limit) {
          const size_t slot = std::min(static_cast<size_t>(attempts - 1),
                                       config.backoff_ms.empty()
                                           ? size_t{0}
                                           : config.backoff_ms.size() - 1);
          const int delay = config.backoff_ms.empty() ? 0 : config.backoff_ms[slot];
          if (delay > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay));
          continue;
        }
        break;
      } catch (const std::exception&) {
        break;
      }
    }
    record.attempt_count = attempts;
    record.latency_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    if (!success) {
      record.raw_text.clear();
      record.token_logprobs.reset();
      failed.fetch_add(1);
    }

    if (auto label = extract_answer(record.raw_text, task.prompt->binding)) {
      record.extracted = *label;
      record.correct = label->matches(task.prompt->expected);
    }

    {
      std::lock_guard<std::mutex> lock(journal_mutex);
      journal << record_to_json(record).dump() << '\n';
      journal.flush();
      if (!journal) io_failed.store(true);
    }
  };

  const size_t worker_count =
      std::min(static_cast<size_t>(config.max_parallel_requests), tasks.size());
  std::vector<std::thread> workers;
  workers.reserve(worker_count);
  for (size_t w = 0; w < worker_count; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        const size_t i = next_task.fetch_add(1);
        if (i >= tasks.size()) return;
        execute_one(tasks[i]);
      }
    });
  }
  for (auto& worker : workers) worker.join();

  if (io_failed.load()) fail(ErrorKind::kIo, "journal write failed: " + journal_path);
  summary.executed = static_cast<int>(tasks.size());
  summary.failed = failed.load();
  return summary;
}

nlohmann::json model_spec_to_json(const ModelSpec& spec) {
  return {
      {"model_id", spec.model_id},
      {"category", to_string(spec.category)},
      {"endpoint_url", spec.endpoint_url},
      {"request_options",
       {{"temperature", spec.request_options.temperature},
        {"max_tokens", spec.request_options.max_tokens},
        {"logprobs", spec.request_options.logprobs},
        {"top_logprobs", spec.request_options.top_logprobs}}},
  };
}

ModelSpec model_spec_from_json(const nlohmann::json& j) {
  ModelSpec spec;
  spec.model_id = require_string(j, "model_id");
  spec.category = parse_category(require_string(j, "category"));
  spec.endpoint_url =
      get_string(j, "endpoint_url", "https://openrouter.ai/api/v1/chat/completions");
  if (j.contains("request_options") && !j.at("request_options").is_null()) {
    const auto& options = j.at("request_options");
    spec.request_options.temperature = options.contains("temperature")
                                           ? require_number(options, "temperature")
                                           : 0.0;
    spec.request_options.max_tokens =
        static_cast<int>(get_int(options, "max_tokens", spec.request_options.max_tokens));
    spec.request_options.logprobs = get_bool(options, "logprobs", false);
    spec.request_options.top_logprobs =
        static_cast<int>(get_int(options, "top_logprobs", 0));
  }
  return spec;
}

nlohmann::json backend_config_to_json(const BackendConfig& config) {
  return {
      {"max_parallel_requests", config.max_parallel_requests},
      {"retry_limit", config.retry_limit},
      {"backoff_ms", config.backoff_ms},
      {"timeout_ms", config.timeout_ms},
      {"credential_env", config.credential_env},
  };
}

BackendConfig backend_config_from_json(const nlohmann::json& j) {
  BackendConfig config;
  config.max_parallel_requests =
      static_cast<int>(get_int(j, "max_parallel_requests", config.max_parallel_requests));
  config.retry_limit = static_cast<int>(get_int(j, "retry_limit", config.retry_limit));
  if (j.contains("backoff_ms") && !j.at("backoff_ms").is_null()) {
    const auto& arr = j.at("backoff_ms");
    if (!arr.is_array()) fail(ErrorKind::kParse, "backoff_ms must be an array");
    config.backoff_ms.clear();
    for (const auto& v : arr) {
      if (!v.is_number_integer()) fail(ErrorKind::kParse, "backoff_ms entries must be integers");
      config.backoff_ms.push_back(v.get<int>());
    }
  }
  config.timeout_ms = static_cast<int>(get_int(j, "timeout_ms", config.timeout_ms));
  config.credential_env = get_string(j, "credential_env", config.credential_env);
  if (config.max_parallel_requests < 1) {
    fail(ErrorKind::kConfig, "max_parallel_requests must be at least 1");
  }
  return config;
}

}  // namespace absurd
