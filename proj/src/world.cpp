#include "absurd/world.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "absurd/io_util.hpp"
#include "absurd/json_util.hpp"

namespace absurd {

namespace {

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

const std::set<std::string>& reserved_event_fields() {
  static const std::set<std::string> kFields = {"Event_Actor", "Event_Outcome", "Event_Door"};
  return kFields;
}

}  // namespace

const char* to_string(ChangeTag tag) {
  switch (tag) {
    case ChangeTag::kSymbols: return "SYMBOLS";
    case ChangeTag::kActions: return "ACTIONS";
    case ChangeTag::kRules: return "RULES";
  }
  return "SYMBOLS";
}

ChangeTag parse_change_tag(const std::string& s) {
  if (s == "SYMBOLS") return ChangeTag::kSymbols;
  if (s == "ACTIONS") return ChangeTag::kActions;
  if (s == "RULES") return ChangeTag::kRules;
  fail(ErrorKind::kParse, "unknown change tag: " + s);
}

const char* to_string(SequencePolicy p) {
  return p == SequencePolicy::kFixedAlternation ? "FIXED_ALTERNATION" : "RANDOMIZED_ORDER";
}

SequencePolicy parse_sequence_policy(const std::string& s) {
  if (s == "FIXED_ALTERNATION") return SequencePolicy::kFixedAlternation;
  if (s == "RANDOMIZED_ORDER") return SequencePolicy::kRandomizedOrder;
  fail(ErrorKind::kParse, "unknown sequence policy: " + s);
}

const SymbolDomain* WorldSpec::find_slot(const std::string& name) const {
  for (const auto& slot : slots) {
    if (slot.slot_name == name) return &slot;
  }
  return nullptr;
}

int WorldSpec::param(const std::string& key, int fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

WorldSpec builtin_soccer_world() {
  WorldSpec spec;
  spec.world_id = "soccer";
  spec.oracle_id = "soccer_outcome";
  spec.sequence_policy = SequencePolicy::kFixedAlternation;
  spec.slots = {
      {"Symbol_Player", {"team", "player"}},
      {"Symbol_Player_1", {"Team A", "Team 1", "Adam"}},
      {"Symbol_Player_2", {"Team B", "Team 2", "Bob"}},
      {"Symbol_Ball", {"player", "ball", "net"}},
      {"Symbol_Net", {"net", "ball"}},
      {"Symbol_Action", {"hits", "misses"}},
      {"Symbol_Comparator", {"most", "least"}},
      {"Symbol_Score", {"score", "point", "car", "ice cream"}},
  };
  spec.rules_template =
      "Absurd soccer is played by two [Symbol_Player]s. In one match of this "
      "game, each [Symbol_Player] takes a turn to shoot a [Symbol_Ball] five "
      "times at a [Symbol_Net]. A [Symbol_Player] can shoot only once in a "
      "match. When one [Symbol_Player] shoots, the other team defends the "
      "[Symbol_Net]. If the [Symbol_Player] that makes the shot "
      "[Symbol_Action] the [Symbol_Net], that [Symbol_Player] gets one "
      "[Symbol_Score]. At the end of the match, the team having the "
      "[Symbol_Comparator] [Symbol_Score]s wins.\n"
      "\n"
      "Here is the match commentary for a game of absurd soccer:";
  spec.event_template = "[Event_Actor] shoots the [Symbol_Ball] and [Event_Outcome] the [Symbol_Net].";
  spec.question_template =
      "Who won the game? Answer '[Symbol_Player_1]' if [Symbol_Player_1] "
      "wins, '[Symbol_Player_2]' if [Symbol_Player_2] wins, and 'both "
      "[Symbol_Player]s' if both [Symbol_Player]s win. Please work out your "
      "reasoning process for the answer, and place your answer within two "
      "curly brackets (ex. {[Symbol_Player_1]}).";
  return spec;
}

WorldSpec builtin_door_world(int door_count, int goat_count, int player_count,
                             int opens_total) {
  if (door_count < 1 || goat_count < 1 || player_count < 1 || opens_total < 1) {
    fail(ErrorKind::kInvalidArg, "door world counts must be positive");
  }
  if (goat_count >= door_count) {
    fail(ErrorKind::kInvalidArg, "goat_count must be less than door_count");
  }
  if (opens_total > door_count) {
    fail(ErrorKind::kInvalidArg, "opens_total must not exceed door_count");
  }
  WorldSpec spec;
  spec.world_id = "door";
  spec.oracle_id = "door_outcome";
  spec.sequence_policy = SequencePolicy::kRandomizedOrder;
  spec.slots = {
      {"Symbol_Winner_Order", {"first", "last"}},
  };
  spec.params = {
      {"door_count", door_count},
      {"goat_count", goat_count},
      {"player_count", player_count},
      {"opens_total", opens_total},
  };
  spec.rules_template =
      "The door game is played by " + std::to_string(player_count) +
      " players. There are " + std::to_string(door_count) + " doors, and " +
      std::to_string(goat_count) +
      " of them have a goat behind them. The players take turns opening the "
      "doors one at a time, in a random order, until " +
      std::to_string(opens_total) +
      " doors have been opened. A door can be opened only once. The player "
      "who opens a door with a goat behind it [Symbol_Winner_Order] wins the "
      "game. If no player opens a door with a goat behind it, no one wins.\n"
      "\n"
      "Here is the commentary for a game of the door game:";
  spec.event_template = "[Event_Actor] opens door [Event_Door] and finds [Event_Outcome].";
  spec.question_template =
      "Who won the game? Answer with the name of the winning player, or 'no "
      "one' if no player wins. Please work out your reasoning process for the "
      "answer, and place your answer within two curly brackets (ex. {Player "
      "1}).";
  return spec;
}

std::vector<RulesetVariant> ruleset_registry(const std::string& world_id) {
  if (world_id == "soccer") {
    const SlotAssignment ball = SlotAssignment::fixed("ball");
    const SlotAssignment net = SlotAssignment::fixed("net");
    const SlotAssignment hits = SlotAssignment::fixed("hits");
    const SlotAssignment misses = SlotAssignment::fixed("misses");
    const SlotAssignment most = SlotAssignment::fixed("most");
    const SlotAssignment least = SlotAssignment::fixed("least");
    const SlotAssignment real_score = SlotAssignment::leave_random({"score", "point"});

    auto real_assignments = std::map<std::string, SlotAssignment>{
        {"Symbol_Ball", ball},       {"Symbol_Net", net},
        {"Symbol_Action", hits},     {"Symbol_Comparator", most},
        {"Symbol_Score", real_score},
    };

    std::vector<RulesetVariant> out;
    out.push_back({"REAL", real_assignments, {}});

    auto missing = real_assignments;
    missing["Symbol_Action"] = misses;
    out.push_back({"MISSING", missing, {ChangeTag::kActions}});

    auto least_assignments = real_assignments;
    least_assignments["Symbol_Comparator"] = least;
    out.push_back({"LEAST", least_assignments, {ChangeTag::kRules}});

    auto ice_cream = real_assignments;
    ice_cream["Symbol_Score"] = SlotAssignment::fixed("ice cream");
    out.push_back({"ICE_CREAM", ice_cream, {ChangeTag::kSymbols}});

    auto car = real_assignments;
    car["Symbol_Score"] = SlotAssignment::fixed("car");
    out.push_back({"CAR", car, {ChangeTag::kSymbols}});

    auto switched = real_assignments;
    switched["Symbol_Ball"] = net;
    switched["Symbol_Net"] = ball;
    out.push_back({"SWITCH", switched, {ChangeTag::kSymbols}});

    auto miss_switch = missing;
    miss_switch["Symbol_Ball"] = net;
    miss_switch["Symbol_Net"] = ball;
    out.push_back({"MISS_SWITCH", miss_switch, {ChangeTag::kActions, ChangeTag::kSymbols}});
    return out;
  }
  if (world_id == "door") {
    std::vector<RulesetVariant> out;
    out.push_back({"DO_RANDOM",
                   {{"Symbol_Winner_Order", SlotAssignment::fixed("first")}},
                   {}});
    out.push_back({"DO_RANDOM_LAST",
                   {{"Symbol_Winner_Order", SlotAssignment::fixed("last")}},
                   {ChangeTag::kRules}});
    return out;
  }
  fail(ErrorKind::kInvalidArg, "unknown world id: " + world_id);
}

RulesetVariant find_ruleset(const std::string& world_id, const std::string& name) {
  for (auto& variant : ruleset_registry(world_id)) {
    if (variant.name == name) return variant;
  }
  fail(ErrorKind::kInvalidArg, "unknown ruleset '" + name + "' for world " + world_id);
}

ChangeTag change_tag_for_slot(const std::string& slot_name) {
  if (slot_name == "Symbol_Action") return ChangeTag::kActions;
  if (slot_name == "Symbol_Comparator" || slot_name == "Symbol_Winner_Order") {
    return ChangeTag::kRules;
  }
  return ChangeTag::kSymbols;
}

RulesetVariant compose_variant(const WorldSpec& spec, const RulesetVariant& base,
                               const std::map<std::string, std::string>& overrides) {
  RulesetVariant out = base;
  for (const auto& [slot_name, value] : overrides) {
    const SymbolDomain* slot = spec.find_slot(slot_name);
    if (!slot) fail(ErrorKind::kInvalidArg, "unknown slot: " + slot_name);
    if (std::find(slot->candidates.begin(), slot->candidates.end(), value) ==
        slot->candidates.end()) {
      fail(ErrorKind::kInvalidArg,
           "value '" + value + "' is not a candidate of slot " + slot_name);
    }
    SlotAssignment next = SlotAssignment::fixed(value);
    auto it = out.assignments.find(slot_name);
    if (it != out.assignments.end() && it->second == next) continue;  // idempotent
    out.assignments[slot_name] = next;
    out.change_tags.insert(change_tag_for_slot(slot_name));
    out.name += "+" + slot_name + "=" + value;
  }
  return out;
}

std::vector<std::string> template_placeholders(const std::string& text) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '[') {
      ++i;
      continue;
    }
    size_t j = i + 1;
    while (j < text.size() && is_ident_char(text[j])) ++j;
    if (j > i + 1 && j < text.size() && text[j] == ']') {
      out.push_back(text.substr(i + 1, j - i - 1));
      i = j + 1;
    } else {
      ++i;
    }
  }
  return out;
}

const std::vector<std::string>& known_oracles() {
  static const std::vector<std::string> kOracles = {"soccer_outcome", "door_outcome"};
  return kOracles;
}

std::vector<std::string> validate_world(const WorldSpec& spec) {
  std::vector<std::string> diagnostics;
  if (spec.world_id.empty()) diagnostics.push_back("world_id is empty");

  std::set<std::string> slot_names;
  for (const auto& slot : spec.slots) {
    if (!slot_names.insert(slot.slot_name).second) {
      diagnostics.push_back("duplicate slot: " + slot.slot_name);
    }
    if (slot.candidates.empty()) {
      diagnostics.push_back("slot has no candidates: " + slot.slot_name);
    }
    std::set<std::string> seen;
    for (const auto& candidate : slot.candidates) {
      if (!seen.insert(candidate).second) {
        diagnostics.push_back("duplicate candidate '" + candidate + "' in slot " +
                              slot.slot_name);
      }
    }
  }

  auto check_template = [&](const std::string& which, const std::string& text) {
    for (const auto& placeholder : template_placeholders(text)) {
      if (reserved_event_fields().count(placeholder)) continue;
      if (!slot_names.count(placeholder)) {
        diagnostics.push_back("unbound placeholder " + placeholder + " in " + which);
      }
    }
  };
  check_template("rules_template", spec.rules_template);
  check_template("event_template", spec.event_template);
  check_template("question_template", spec.question_template);

  const auto& oracles = known_oracles();
  if (std::find(oracles.begin(), oracles.end(), spec.oracle_id) == oracles.end()) {
    diagnostics.push_back("unknown oracle: " + spec.oracle_id);
  }
  return diagnostics;
}

std::vector<std::string> validate_variant(const WorldSpec& spec,
                                          const RulesetVariant& variant) {
  std::vector<std::string> diagnostics;
  for (const auto& [slot_name, assignment] : variant.assignments) {
    const SymbolDomain* slot = spec.find_slot(slot_name);
    if (!slot) {
      diagnostics.push_back("variant " + variant.name + " assigns unknown slot " + slot_name);
      continue;
    }
    auto member = [&](const std::string& v) {
      return std::find(slot->candidates.begin(), slot->candidates.end(), v) !=
             slot->candidates.end();
    };
    if (assignment.kind == SlotAssignment::Kind::kFixed) {
      if (!member(assignment.value)) {
        diagnostics.push_back("variant " + variant.name + " assigns illegal value '" +
                              assignment.value + "' to slot " + slot_name);
      }
    } else {
      for (const auto& v : assignment.subset) {
        if (!member(v)) {
          diagnostics.push_back("variant " + variant.name + " lists illegal candidate '" + v +
                                "' for slot " + slot_name);
        }
      }
    }
  }
  return diagnostics;
}

nlohmann::json world_to_json(const WorldSpec& spec) {
  nlohmann::json slots = nlohmann::json::array();
  for (const auto& slot : spec.slots) {
    slots.push_back({{"slot_name", slot.slot_name}, {"candidates", slot.candidates}});
  }
  nlohmann::json j = {
      {"world_id", spec.world_id},
      {"slots", slots},
      {"rules_template", spec.rules_template},
      {"event_template", spec.event_template},
      {"question_template", spec.question_template},
      {"oracle_id", spec.oracle_id},
      {"sequence_policy", to_string(spec.sequence_policy)},
  };
  if (!spec.params.empty()) j["params"] = spec.params;
  return j;
}

WorldSpec world_from_json(const nlohmann::json& j) {
  WorldSpec spec;
  spec.world_id = require_string(j, "world_id");
  const auto& slots = require_field(j, "slots");
  if (!slots.is_array()) fail(ErrorKind::kParse, "slots must be an array");
  for (const auto& s : slots) {
    SymbolDomain slot;
    slot.slot_name = require_string(s, "slot_name");
    const auto& candidates = require_field(s, "candidates");
    if (!candidates.is_array()) fail(ErrorKind::kParse, "candidates must be an array");
    for (const auto& c : candidates) {
      if (!c.is_string()) fail(ErrorKind::kParse, "candidate must be a string");
      slot.candidates.push_back(c.get<std::string>());
    }
    spec.slots.push_back(std::move(slot));
  }
  spec.rules_template = require_string(j, "rules_template");
  spec.event_template = require_string(j, "event_template");
  spec.question_template = require_string(j, "question_template");
  spec.oracle_id = require_string(j, "oracle_id");
  spec.sequence_policy = parse_sequence_policy(require_string(j, "sequence_policy"));
  if (j.contains("params")) {
    for (const auto& [key, value] : j.at("params").items()) {
      if (!value.is_number_integer()) fail(ErrorKind::kParse, "param must be an integer: " + key);
      spec.params[key] = value.get<int>();
    }
  }
  return spec;
}

nlohmann::json variant_to_json(const RulesetVariant& variant) {
  nlohmann::json assignments = nlohmann::json::object();
  for (const auto& [slot_name, assignment] : variant.assignments) {
    if (assignment.kind == SlotAssignment::Kind::kFixed) {
      assignments[slot_name] = assignment.value;
    } else {
      assignments[slot_name] = {{"random", assignment.subset}};
    }
  }
  nlohmann::json tags = nlohmann::json::array();
  for (ChangeTag tag : variant.change_tags) tags.push_back(to_string(tag));
  return {{"name", variant.name}, {"assignments", assignments}, {"change_tags", tags}};
}

RulesetVariant variant_from_json(const nlohmann::json& j) {
  RulesetVariant variant;
  variant.name = require_string(j, "name");
  const auto& assignments = require_field(j, "assignments");
  if (!assignments.is_object()) fail(ErrorKind::kParse, "assignments must be an object");
  for (const auto& [slot_name, value] : assignments.items()) {
    if (value.is_string()) {
      variant.assignments[slot_name] = SlotAssignment::fixed(value.get<std::string>());
    } else if (value.is_object() && value.contains("random")) {
      std::vector<std::string> subset;
      for (const auto& c : value.at("random")) {
        if (!c.is_string()) fail(ErrorKind::kParse, "random subset entries must be strings");
        subset.push_back(c.get<std::string>());
      }
      variant.assignments[slot_name] = SlotAssignment::leave_random(std::move(subset));
    } else {
      fail(ErrorKind::kParse, "bad assignment for slot " + slot_name);
    }
  }
  if (j.contains("change_tags")) {
    for (const auto& tag : j.at("change_tags")) {
      if (!tag.is_string()) fail(ErrorKind::kParse, "change_tags entries must be strings");
      variant.change_tags.insert(parse_change_tag(tag.get<std::string>()));
    }
  }
  return variant;
}

WorldFile load_world_file(const std::string& path) {
  nlohmann::json doc = parse_json(read_text_file(path), path);
  WorldFile file;
  file.world = world_from_json(require_field(doc, "world"));

  std::vector<std::string> diagnostics = validate_world(file.world);
  if (doc.contains("rulesets")) {
    for (const auto& r : doc.at("rulesets")) {
      RulesetVariant variant = variant_from_json(r);
      auto more = validate_variant(file.world, variant);
      diagnostics.insert(diagnostics.end(), more.begin(), more.end());
      file.rulesets.push_back(std::move(variant));
    }
  }
  if (!diagnostics.empty()) {
    fail(ErrorKind::kConfig, "invalid world file " + path + ": " + join(diagnostics, "; "));
  }
  return file;
}

nlohmann::json builtin_worlds_json() {
  auto pack = [](const WorldSpec& spec) {
    nlohmann::json rulesets = nlohmann::json::array();
    for (const auto& variant : ruleset_registry(spec.world_id)) {
      rulesets.push_back(variant_to_json(variant));
    }
    return nlohmann::json{{"world", world_to_json(spec)}, {"rulesets", rulesets}};
  };
  return {{"worlds", {pack(builtin_soccer_world()), pack(builtin_door_world(5, 2, 3, 5))}}};
}

}  // namespace absurd
