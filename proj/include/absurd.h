#ifndef ABSURD_H
#define ABSURD_H

/* C interface to the absurd benchmark toolchain.
 *
 * Every operation returns a status code; on failure a human-readable
 * message is available from absurd_last_error() until the next call on
 * the same thread. String outputs are heap copies owned by the caller
 * and released with absurd_string_free(). The context is not thread-safe;
 * use one per thread or serialize access.
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum absurd_status {
  ABSURD_OK = 0,
  ABSURD_ERR_INVALID_ARG = 1,
  ABSURD_ERR_CONFIG = 2,
  ABSURD_ERR_PARSE = 3,
  ABSURD_ERR_IO = 4,
  ABSURD_ERR_BACKEND = 5,
  ABSURD_ERR_AUTH = 6,
  ABSURD_ERR_INTERNAL = 7
} absurd_status;

typedef struct absurd_ctx absurd_ctx;

const char* absurd_version(void);

/* Message for the most recent failure on the calling thread ("" if none). */
const char* absurd_last_error(void);

absurd_ctx* absurd_ctx_new(void);
void absurd_ctx_free(absurd_ctx* ctx);

/* Configuration. A fresh context carries the defaults (soccer world, all
 * rulesets, 100 prompts per ruleset). */
absurd_status absurd_ctx_load_config(absurd_ctx* ctx, const char* path);
absurd_status absurd_ctx_load_config_json(absurd_ctx* ctx, const char* json_text);
absurd_status absurd_ctx_set_seed(absurd_ctx* ctx, uint64_t seed);
absurd_status absurd_ctx_set_out_dir(absurd_ctx* ctx, const char* out_dir);

/* Pipeline commands. Each returns a JSON result document in *out_json.
 * mode is "do0" (zero-shot) or "dofs" (few-shot); backend is "http",
 * "mock:rule-follower", "mock:rule-follower:<rate>", "mock:prior-biased",
 * or NULL/"" for the live HTTP backend. */
absurd_status absurd_worlds_json(absurd_ctx* ctx, char** out_json);
absurd_status absurd_generate(absurd_ctx* ctx, char** out_json);
absurd_status absurd_run(absurd_ctx* ctx, const char* mode, const char* backend,
                         char** out_json);
absurd_status absurd_select_fewshot(absurd_ctx* ctx, char** out_json);
absurd_status absurd_score(absurd_ctx* ctx, char** out_json);
absurd_status absurd_analyze(absurd_ctx* ctx, char** out_json);
absurd_status absurd_report(absurd_ctx* ctx, char** out_json);

/* Stateless helpers. */

/* Extracts the braced answer from a raw response given a symbol-binding
 * JSON object; *out_label receives the canonical label, or "UNPARSEABLE". */
absurd_status absurd_extract_answer(const char* raw_text, const char* binding_json,
                                    char** out_label);

/* Mean per-token entropy (nats) of a [[{"token","logprob"},...],...] array. */
absurd_status absurd_response_entropy(const char* token_logprobs_json, double* out_nats);

/* Outcome label for a 10-shot commentary under the given scoring action
 * ("hits"/"misses") and comparator ("most"/"least"). events_json is an
 * array of event objects as found in batch files. */
absurd_status absurd_soccer_outcome(const char* events_json, const char* scoring_action,
                                    const char* comparator, char** out_label);

/* Exhaustive oracle cross-check; *out_report_json carries the result. */
absurd_status absurd_flip_equivalence(char** out_report_json);

/* Validates a world JSON document (bare world object or {"world","rulesets"}). */
absurd_status absurd_validate_world_json(const char* world_json);

void absurd_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* ABSURD_H */
