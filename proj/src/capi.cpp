#include "absurd.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>
#include <vector>

#include "absurd/analysis.hpp"
#include "absurd/config.hpp"
#include "absurd/error.hpp"
#include "absurd/generator.hpp"
#include "absurd/json_util.hpp"
#include "absurd/oracle.hpp"
#include "absurd/pipeline.hpp"
#include "absurd/scoring.hpp"
#include "absurd/world.hpp"

struct absurd_ctx {
  absurd::RunConfig config;
};

namespace {

thread_local std::string g_last_error;

absurd_status status_of(absurd::ErrorKind kind) {
  using absurd::ErrorKind;
  switch (kind) {
    case ErrorKind::kInvalidArg: return ABSURD_ERR_INVALID_ARG;
    case ErrorKind::kConfig: return ABSURD_ERR_CONFIG;
    case ErrorKind::kParse: return ABSURD_ERR_PARSE;
    case ErrorKind::kIo: return ABSURD_ERR_IO;
    case ErrorKind::kBackend: return ABSURD_ERR_BACKEND;
    case ErrorKind::kAuth: return ABSURD_ERR_AUTH;
    case ErrorKind::kInternal: return ABSURD_ERR_INTERNAL;
  }
  return ABSURD_ERR_INTERNAL;
}

template <typename Fn>
absurd_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    return fn();
  } catch (const absurd::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ABSURD_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return ABSURD_ERR_INTERNAL;
  }
}

absurd_status invalid(const char* message) {
  g_last_error = message;
  return ABSURD_ERR_INVALID_ARG;
}

absurd_status out_string(const std::string& value, char** out) {
  char* copy = static_cast<char*>(std::malloc(value.size() + 1));
  if (!copy) {
    g_last_error = "allocation failure";
    return ABSURD_ERR_INTERNAL;
  }
  std::memcpy(copy, value.c_str(), value.size() + 1);
  *out = copy;
  return ABSURD_OK;
}

}  // namespace

extern "C" {

const char* absurd_version(void) { return "0.1.0"; }

const char* absurd_last_error(void) { return g_last_error.c_str(); }

absurd_ctx* absurd_ctx_new(void) { return new (std::nothrow) absurd_ctx(); }

void absurd_ctx_free(absurd_ctx* ctx) { delete ctx; }

absurd_status absurd_ctx_load_config(absurd_ctx* ctx, const char* path) {
  if (!ctx || !path) return invalid("null argument");
  return guarded([&] {
    ctx->config = absurd::load_config(path);
    return ABSURD_OK;
  });
}

absurd_status absurd_ctx_load_config_json(absurd_ctx* ctx, const char* json_text) {
  if (!ctx || !json_text) return invalid("null argument");
  return guarded([&] {
    ctx->config = absurd::config_from_json(absurd::parse_json(json_text, "config"));
    return ABSURD_OK;
  });
}

absurd_status absurd_ctx_set_seed(absurd_ctx* ctx, uint64_t seed) {
  if (!ctx) return invalid("null context");
  ctx->config.master_seed = seed;
  g_last_error.clear();
  return ABSURD_OK;
}

absurd_status absurd_ctx_set_out_dir(absurd_ctx* ctx, const char* out_dir) {
  if (!ctx || !out_dir || !*out_dir) return invalid("out_dir must be non-empty");
  ctx->config.out_dir = out_dir;
  g_last_error.clear();
  return ABSURD_OK;
}

absurd_status absurd_worlds_json(absurd_ctx* ctx, char** out_json) {
  if (!ctx || !out_json) return invalid("null argument");
  return guarded([&] { return out_string(absurd::worlds_json_text(), out_json); });
}

absurd_status absurd_generate(absurd_ctx* ctx, char** out_json) {
  if (!ctx || !out_json) return invalid("null argument");
  return guarded(
      [&] { return out_string(absurd::cmd_generate(ctx->config).dump(2), out_json); });
}

absurd_status absurd_run(absurd_ctx* ctx, const char* mode, const char* backend,
                         char** out_json) {
  if (!ctx || !mode || !out_json) return invalid("null argument");
  return guarded([&] {
    absurd::Mode m;
    const std::string mode_name = mode;
    if (mode_name == "do0") {
      m = absurd::Mode::kZeroShot;
    } else if (mode_name == "dofs") {
      m = absurd::Mode::kFewShot;
    } else {
      absurd::fail(absurd::ErrorKind::kInvalidArg,
                   "mode must be do0 or dofs, got: " + mode_name);
    }
    const std::string backend_name = backend ? backend : "";
    return out_string(absurd::cmd_run(ctx->config, m, backend_name).dump(2), out_json);
  });
}

absurd_status absurd_select_fewshot(absurd_ctx* ctx, char** out_json) {
  if (!ctx || !out_json) return invalid("null argument");
  return guarded(
      [&] { return out_string(absurd::cmd_select_fewshot(ctx->config).dump(2), out_json); });
}

absurd_status absurd_score(absurd_ctx* ctx, char** out_json) {
  if (!ctx || !out_json) return invalid("null argument");
  return guarded([&] { return out_string(absurd::cmd_score(ctx->config).dump(2), out_json); });
}

absurd_status absurd_analyze(absurd_ctx* ctx, char** out_json) {
  if (!ctx || !out_json) return invalid("null argument");
  return guarded(
      [&] { return out_string(absurd::cmd_analyze(ctx->config).dump(2), out_json); });
}

absurd_status absurd_report(absurd_ctx* ctx, char** out_json) {
  if (!ctx || !out_json) return invalid("null argument");
  return guarded(
      [&] { return out_string(absurd::cmd_report(ctx->config).dump(2), out_json); });
}

absurd_status absurd_extract_answer(const char* raw_text, const char* binding_json,
                                    char** out_label) {
  if (!raw_text || !binding_json || !out_label) return invalid("null argument");
  return guarded([&] {
    const absurd::SymbolBinding binding =
        absurd::binding_from_json(absurd::parse_json(binding_json, "binding"));
    const auto label = absurd::extract_answer(raw_text, binding);
    return out_string(label ? label->to_string() : "UNPARSEABLE", out_label);
  });
}

absurd_status absurd_response_entropy(const char* token_logprobs_json, double* out_nats) {
  if (!token_logprobs_json || !out_nats) return invalid("null argument");
  return guarded([&] {
    const nlohmann::json j = absurd::parse_json(token_logprobs_json, "token_logprobs");
    if (!j.is_array()) {
      absurd::fail(absurd::ErrorKind::kParse, "token_logprobs must be an array");
    }
    absurd::TokenLogprobs logprobs;
    for (const auto& row : j) {
      if (!row.is_array()) {
        absurd::fail(absurd::ErrorKind::kParse, "token_logprobs rows must be arrays");
      }
      std::vector<absurd::TokenAlt> alts;
      for (const auto& alt : row) {
        alts.push_back({absurd::get_string(alt, "token", ""),
                        absurd::require_number(alt, "logprob")});
      }
      logprobs.push_back(std::move(alts));
    }
    *out_nats = absurd::response_entropy(logprobs);
    return ABSURD_OK;
  });
}

absurd_status absurd_soccer_outcome(const char* events_json, const char* scoring_action,
                                    const char* comparator, char** out_label) {
  if (!events_json || !scoring_action || !comparator || !out_label) {
    return invalid("null argument");
  }
  return guarded([&] {
    const nlohmann::json j = absurd::parse_json(events_json, "events");
    if (!j.is_array()) absurd::fail(absurd::ErrorKind::kParse, "events must be an array");
    std::vector<absurd::EventRecord> events;
    for (const auto& e : j) events.push_back(absurd::event_from_json(e));

    const std::string action = scoring_action;
    absurd::Outcome scoring;
    if (action == "hits") {
      scoring = absurd::Outcome::kHit;
    } else if (action == "misses") {
      scoring = absurd::Outcome::kMiss;
    } else {
      absurd::fail(absurd::ErrorKind::kInvalidArg,
                   "scoring_action must be hits or misses, got: " + action);
    }
    const std::string cmp = comparator;
    absurd::Comparator c;
    if (cmp == "most") {
      c = absurd::Comparator::kMost;
    } else if (cmp == "least") {
      c = absurd::Comparator::kLeast;
    } else {
      absurd::fail(absurd::ErrorKind::kInvalidArg,
                   "comparator must be most or least, got: " + cmp);
    }
    return out_string(absurd::soccer_outcome(events, scoring, c).to_string(), out_label);
  });
}

absurd_status absurd_flip_equivalence(char** out_report_json) {
  if (!out_report_json) return invalid("null argument");
  return guarded([&] {
    const absurd::OracleReport report = absurd::flip_equivalence_check();
    return out_string(absurd::report_to_json(report).dump(2), out_report_json);
  });
}

absurd_status absurd_validate_world_json(const char* world_json) {
  if (!world_json) return invalid("null argument");
  return guarded([&] {
    const nlohmann::json j = absurd::parse_json(world_json, "world");
    std::vector<std::string> problems;
    auto take = [&problems](std::vector<std::string> found) {
      problems.insert(problems.end(), found.begin(), found.end());
    };
    if (j.contains("world")) {
      const absurd::WorldSpec spec = absurd::world_from_json(j.at("world"));
      take(absurd::validate_world(spec));
      if (j.contains("rulesets")) {
        for (const auto& v : j.at("rulesets")) {
          take(absurd::validate_variant(spec, absurd::variant_from_json(v)));
        }
      }
    } else {
      take(absurd::validate_world(absurd::world_from_json(j)));
    }
    if (!problems.empty()) {
      std::string joined;
      for (const auto& p : problems) {
        if (!joined.empty()) joined += "; ";
        joined += p;
      }
      absurd::fail(absurd::ErrorKind::kConfig, joined);
    }
    return ABSURD_OK;
  });
}

void absurd_string_free(char* s) { std::free(s); }

}  // extern "C"
