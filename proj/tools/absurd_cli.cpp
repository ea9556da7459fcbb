// Command-line front end. Talks to the toolchain exclusively through the
// shared C interface.

#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"

#include "absurd.h"

namespace {

int status_exit_code(absurd_status status) {
  switch (status) {
    case ABSURD_OK:
      return 0;
    case ABSURD_ERR_INVALID_ARG:
    case ABSURD_ERR_CONFIG:
      return 1;
    default:
      return 2;
  }
}

int report_failure(absurd_status status) {
  std::fprintf(stderr, "error: %s\n", absurd_last_error());
  return status_exit_code(status);
}

struct ContextGuard {
  absurd_ctx* handle = nullptr;
  ~ContextGuard() { absurd_ctx_free(handle); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"absurd: counterfactual-ruleset benchmark toolchain"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::string mode = "do0";
  std::string backend;
  uint64_t seed = 0;

  app.add_option("--config", config_path, "path to a run-config JSON document");
  auto* seed_option = app.add_option("--seed", seed, "master seed override");
  app.add_option("--out", out_dir, "output directory override");

  auto* cmd_worlds = app.add_subcommand("worlds", "print the built-in world descriptions");
  auto* cmd_generate =
      app.add_subcommand("generate", "write one zero-shot batch per ruleset");
  auto* cmd_run = app.add_subcommand("run", "query every model over one mode's batches");
  cmd_run->add_option("--mode", mode, "do0 (zero-shot) or dofs (few-shot)")
      ->check(CLI::IsMember({"do0", "dofs"}));
  cmd_run->add_option("--backend", backend,
                      "http, mock:rule-follower[:rate], or mock:prior-biased");
  auto* cmd_select = app.add_subcommand(
      "select-fewshot", "select exemplar pools and assemble few-shot batches");
  auto* cmd_score = app.add_subcommand("score", "score the journal into accuracy tables");
  auto* cmd_analyze =
      app.add_subcommand("analyze", "score plus category averages, t-tests, and entropy");
  auto* cmd_report = app.add_subcommand("report", "write the full report bundle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  ContextGuard ctx;
  ctx.handle = absurd_ctx_new();
  if (!ctx.handle) {
    std::fprintf(stderr, "error: out of memory\n");
    return 2;
  }

  if (!config_path.empty()) {
    const absurd_status status = absurd_ctx_load_config(ctx.handle, config_path.c_str());
    if (status != ABSURD_OK) return report_failure(status);
  }
  if (seed_option->count() > 0) {
    const absurd_status status = absurd_ctx_set_seed(ctx.handle, seed);
    if (status != ABSURD_OK) return report_failure(status);
  }
  if (!out_dir.empty()) {
    const absurd_status status = absurd_ctx_set_out_dir(ctx.handle, out_dir.c_str());
    if (status != ABSURD_OK) return report_failure(status);
  }

  char* out = nullptr;
  absurd_status status = ABSURD_OK;
  if (cmd_worlds->parsed()) {
    status = absurd_worlds_json(ctx.handle, &out);
  } else if (cmd_generate->parsed()) {
    status = absurd_generate(ctx.handle, &out);
  } else if (cmd_run->parsed()) {
    status = absurd_run(ctx.handle, mode.c_str(), backend.empty() ? nullptr : backend.c_str(),
                        &out);
  } else if (cmd_select->parsed()) {
    status = absurd_select_fewshot(ctx.handle, &out);
  } else if (cmd_score->parsed()) {
    status = absurd_score(ctx.handle, &out);
  } else if (cmd_analyze->parsed()) {
    status = absurd_analyze(ctx.handle, &out);
  } else if (cmd_report->parsed()) {
    status = absurd_report(ctx.handle, &out);
  }

  if (status != ABSURD_OK) return report_failure(status);
  if (out) {
    std::printf("%s\n", out);
    absurd_string_free(out);
  }
  return 0;
}
