#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "absurd/types.hpp"
#include "absurd/world.hpp"

namespace absurd {

// Concrete surface strings for one instance: the player-name pair, the
// group noun used for plural answers, and every slot's resolved value.
// player_names covers worlds with more than two participants.
struct SymbolBinding {
  int pair_index = 0;
  std::string player_one_name;
  std::string player_two_name;
  std::string group_noun;
  std::vector<std::string> player_names;
  std::map<std::string, std::string> resolved;
};

// One fully rendered prompt with its provenance.
struct PromptInstance {
  std::string instance_id;
  std::string world_id;
  std::string ruleset_name;
  Mode mode = Mode::kZeroShot;
  std::string text;
  SymbolBinding binding;
  std::vector<EventRecord> events;
  ExpectedLabel expected;
  std::uint64_t seed = 0;
  std::vector<std::string> exemplar_ids;  // FEW_SHOT only
};

// Draw the player-name pair and every LEAVE_RANDOM slot. Deterministic in
// seed. Draw order: name pair first, then slots in declaration order
// (fixed assignments consume no randomness). Names are index-aligned
// across the two player-name slots; the group noun is "team" for Team-style
// names and "player" otherwise, unless the variant pins it.
SymbolBinding sample_binding(const WorldSpec& spec, const RulesetVariant& variant,
                             std::uint64_t seed);

// Ten alternating shots, player one first, each outcome a fair draw.
std::vector<EventRecord> sample_commentary(std::uint64_t seed);

// Seeded door game: goat placement, player turn order, and the opened-door
// sequence, plus the resulting label.
struct DoorGame {
  std::vector<EventRecord> events;
  ExpectedLabel expected;
};
DoorGame sample_door_game(const WorldSpec& spec, const RulesetVariant& variant,
                          std::uint64_t seed);

// Render one zero-shot instance; the expected label comes from the oracle.
PromptInstance render_zero_shot(const WorldSpec& spec, const RulesetVariant& variant,
                                const SymbolBinding& binding,
                                const std::vector<EventRecord>& events,
                                std::uint64_t seed = 0, int index = 0);

// Three worked Q/A exemplars followed by the query as an open question.
PromptInstance render_few_shot(const PromptInstance& query,
                               const std::vector<PromptInstance>& exemplars);

// n zero-shot instances with per-instance seeds split off master_seed.
std::vector<PromptInstance> generate_batch(const WorldSpec& spec,
                                           const RulesetVariant& variant, int n,
                                           std::uint64_t master_seed);

// The curly-brace answer text for a label under a binding (no braces).
std::string answer_surface_form(const ExpectedLabel& label, const SymbolBinding& binding);

// Recover the event list from a rendered prompt's commentary lines. For
// few-shot texts this reads the last commentary block (the query's).
std::vector<EventRecord> parse_commentary(const WorldSpec& spec,
                                          const SymbolBinding& binding,
                                          const std::string& text);

// Substitute [Name] placeholders; unresolved ones are an error.
std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& values);

// "{world}-{ruleset}-{do0|dofs}-{index:05}-{seed:016x}".
std::string make_instance_id(const std::string& world_id, const std::string& ruleset,
                             Mode mode, int index, std::uint64_t seed);

nlohmann::json binding_to_json(const SymbolBinding& binding);
SymbolBinding binding_from_json(const nlohmann::json& j);
nlohmann::json event_to_json(const EventRecord& event);
EventRecord event_from_json(const nlohmann::json& j);
nlohmann::json instance_to_json(const PromptInstance& instance);
PromptInstance instance_from_json(const nlohmann::json& j);

// JSON Lines persistence, one instance per line, deterministic bytes.
void write_batch_jsonl(const std::string& path, const std::vector<PromptInstance>& batch);
std::vector<PromptInstance> read_batch_jsonl(const std::string& path);

}  // namespace absurd
