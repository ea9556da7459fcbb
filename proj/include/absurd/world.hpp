#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "absurd/types.hpp"

namespace absurd {

// Which facet of the world a slot override perturbs.
enum class ChangeTag { kSymbols, kActions, kRules };

const char* to_string(ChangeTag tag);
ChangeTag parse_change_tag(const std::string& s);

// One symbol slot and the surface strings it may take.
struct SymbolDomain {
  std::string slot_name;
  std::vector<std::string> candidates;
};

// How a ruleset pins (or deliberately leaves free) one slot.
struct SlotAssignment {
  enum class Kind { kFixed, kRandom };

  Kind kind = Kind::kRandom;
  std::string value;                 // kFixed only
  std::vector<std::string> subset;   // kRandom; empty means the full domain

  static SlotAssignment fixed(std::string v) {
    SlotAssignment a;
    a.kind = Kind::kFixed;
    a.value = std::move(v);
    return a;
  }
  static SlotAssignment leave_random(std::vector<std::string> subset = {}) {
    SlotAssignment a;
    a.kind = Kind::kRandom;
    a.subset = std::move(subset);
    return a;
  }

  friend bool operator==(const SlotAssignment& a, const SlotAssignment& b) {
    return a.kind == b.kind && a.value == b.value && a.subset == b.subset;
  }
};

// A named perturbation of a world: slot assignments plus change-type tags.
struct RulesetVariant {
  std::string name;
  std::map<std::string, SlotAssignment> assignments;
  std::set<ChangeTag> change_tags;

  bool same_semantics(const RulesetVariant& other) const {
    return assignments == other.assignments && change_tags == other.change_tags;
  }
};

enum class SequencePolicy { kFixedAlternation, kRandomizedOrder };

const char* to_string(SequencePolicy p);
SequencePolicy parse_sequence_policy(const std::string& s);

// A game world: slot domains, prompt templates, an oracle id, and a
// sequence policy. Numeric shape parameters (door counts etc.) live in
// `params`; the templates already have those counts baked in.
struct WorldSpec {
  std::string world_id;
  std::vector<SymbolDomain> slots;
  std::string rules_template;
  std::string event_template;
  std::string question_template;
  std::string oracle_id;
  SequencePolicy sequence_policy = SequencePolicy::kFixedAlternation;
  std::map<std::string, int> params;

  const SymbolDomain* find_slot(const std::string& name) const;
  int param(const std::string& key, int fallback) const;
};

// Built-in worlds. The soccer world follows the published symbol lists and
// templates; the door world takes its shape from the four counts.
WorldSpec builtin_soccer_world();
WorldSpec builtin_door_world(int door_count, int goat_count, int player_count,
                             int opens_total);

// Named built-in variants for a world id ("soccer" or "door").
std::vector<RulesetVariant> ruleset_registry(const std::string& world_id);

// Look up one registry entry by name.
RulesetVariant find_ruleset(const std::string& world_id, const std::string& name);

// Base variant with overrides applied; change_tags grows by the tag implied
// by each overridden slot. Override keys/values are validated against `spec`.
RulesetVariant compose_variant(const WorldSpec& spec, const RulesetVariant& base,
                               const std::map<std::string, std::string>& overrides);

// Tag implied by overriding a slot.
ChangeTag change_tag_for_slot(const std::string& slot_name);

// Structural diagnostics: unbound template placeholders, unknown oracle ids,
// bad slot domains. Empty means the world is well-formed.
std::vector<std::string> validate_world(const WorldSpec& spec);

// Check a variant's assignments against a spec; returns diagnostics.
std::vector<std::string> validate_variant(const WorldSpec& spec,
                                          const RulesetVariant& variant);

// All [Placeholder] names appearing in a template string, in order.
std::vector<std::string> template_placeholders(const std::string& text);

// Oracle ids the outcome module implements.
const std::vector<std::string>& known_oracles();

// JSON round-trip. Worlds and variants are loadable from a document of the
// shape {"world": {...}, "rulesets": [...]} so custom worlds need no rebuild.
nlohmann::json world_to_json(const WorldSpec& spec);
WorldSpec world_from_json(const nlohmann::json& j);
nlohmann::json variant_to_json(const RulesetVariant& variant);
RulesetVariant variant_from_json(const nlohmann::json& j);

struct WorldFile {
  WorldSpec world;
  std::vector<RulesetVariant> rulesets;
};

WorldFile load_world_file(const std::string& path);

// Embedded worlds plus their registries as one JSON document (used by the
// CLI `worlds` listing).
nlohmann::json builtin_worlds_json();

}  // namespace absurd
