#include "absurd/generator.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "absurd/io_util.hpp"
#include "absurd/json_util.hpp"
#include "absurd/oracle.hpp"
#include "absurd/rng.hpp"

namespace absurd {

namespace {

int index_of(const std::vector<std::string>& values, const std::string& v) {
  auto it = std::find(values.begin(), values.end(), v);
  return it == values.end() ? -1 : static_cast<int>(it - values.begin());
}

const std::string* fixed_value(const RulesetVariant& variant, const std::string& slot) {
  auto it = variant.assignments.find(slot);
  if (it != variant.assignments.end() && it->second.kind == SlotAssignment::Kind::kFixed) {
    return &it->second.value;
  }
  return nullptr;
}

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
  size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

std::string mode_segment(Mode mode) { return mode == Mode::kZeroShot ? "do0" : "dofs"; }

// A variant with every slot pinned to the binding's resolved value, so the
// oracle sees the semantics this instance was actually rendered with.
RulesetVariant pin_to_binding(const RulesetVariant& variant, const SymbolBinding& binding) {
  RulesetVariant pinned;
  pinned.name = variant.name;
  pinned.change_tags = variant.change_tags;
  for (const auto& [slot, value] : binding.resolved) {
    pinned.assignments[slot] = SlotAssignment::fixed(value);
  }
  return pinned;
}

// The rendered event line split into literal segments around Event_* fields:
// line = literals[0] + value_0 + literals[1] + ... + value_{k-1} + literals[k].
struct EventPattern {
  std::vector<std::string> literals;
  std::vector<std::string> fields;
};

EventPattern event_pattern(const WorldSpec& spec, const SymbolBinding& binding) {
  std::string tmpl = spec.event_template;
  for (const auto& [slot, value] : binding.resolved) {
    tmpl = replace_all(tmpl, "[" + slot + "]", value);
  }
  EventPattern pattern;
  std::string current;
  size_t i = 0;
  while (i < tmpl.size()) {
    bool matched = false;
    for (const char* field : {"Event_Actor", "Event_Outcome", "Event_Door"}) {
      const std::string token = std::string("[") + field + "]";
      if (tmpl.compare(i, token.size(), token) == 0) {
        pattern.literals.push_back(current);
        pattern.fields.push_back(field);
        current.clear();
        i += token.size();
        matched = true;
        break;
      }
    }
    if (!matched) {
      current += tmpl[i];
      ++i;
    }
  }
  pattern.literals.push_back(current);
  return pattern;
}

// Greedy left-to-right match of a line against the pattern; returns field
// values or empty on mismatch.
bool match_event_line(const EventPattern& pattern, const std::string& line,
                      std::vector<std::string>* values) {
  values->clear();
  if (line.compare(0, pattern.literals[0].size(), pattern.literals[0]) != 0) return false;
  size_t pos = pattern.literals[0].size();
  for (size_t i = 0; i < pattern.fields.size(); ++i) {
    const std::string& next = pattern.literals[i + 1];
    size_t found;
    if (i + 1 == pattern.fields.size() && !next.empty()) {
      if (line.size() < next.size() + pos) return false;
      found = line.size() - next.size();
      if (line.compare(found, next.size(), next) != 0) return false;
    } else if (next.empty()) {
      found = line.size();
    } else {
      found = line.find(next, pos);
      if (found == std::string::npos) return false;
    }
    values->push_back(line.substr(pos, found - pos));
    pos = found + next.size();
  }
  return pos == line.size();
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string current;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  lines.push_back(current);
  return lines;
}

int actor_index(const SymbolBinding& binding, const std::string& name) {
  for (size_t i = 0; i < binding.player_names.size(); ++i) {
    if (binding.player_names[i] == name) return static_cast<int>(i) + 1;
  }
  if (name == binding.player_one_name) return 1;
  if (name == binding.player_two_name) return 2;
  return 0;
}

}  // namespace

std::string make_instance_id(const std::string& world_id, const std::string& ruleset,
                             Mode mode, int index, std::uint64_t seed) {
  char tail[40];
  std::snprintf(tail, sizeof(tail), "%05d-%016llx", index,
                static_cast<unsigned long long>(seed));
  return world_id + "-" + ruleset + "-" + mode_segment(mode) + "-" + tail;
}

std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& values) {
  std::string out = tmpl;
  for (const auto& [key, value] : values) {
    out = replace_all(out, "[" + key + "]", value);
  }
  return out;
}

SymbolBinding sample_binding(const WorldSpec& spec, const RulesetVariant& variant,
                             std::uint64_t seed) {
  Rng rng(seed);
  SymbolBinding binding;

  const SymbolDomain* p1 = spec.find_slot("Symbol_Player_1");
  const SymbolDomain* p2 = spec.find_slot("Symbol_Player_2");
  if (p1 && p2) {
    if (p1->candidates.empty() || p2->candidates.empty()) {
      fail(ErrorKind::kConfig, "player-name slots need candidates");
    }
    const std::string* f1 = fixed_value(variant, "Symbol_Player_1");
    const std::string* f2 = fixed_value(variant, "Symbol_Player_2");
    const size_t pair_count = std::min(p1->candidates.size(), p2->candidates.size());
    int idx;
    if (f1) {
      idx = index_of(p1->candidates, *f1);
    } else if (f2) {
      idx = index_of(p2->candidates, *f2);
    } else {
      idx = static_cast<int>(rng.next_below(pair_count));
    }
    if (idx < 0) idx = 0;
    binding.pair_index = idx;
    binding.player_one_name =
        f1 ? *f1 : p1->candidates[static_cast<size_t>(idx) % p1->candidates.size()];
    binding.player_two_name =
        f2 ? *f2 : p2->candidates[static_cast<size_t>(idx) % p2->candidates.size()];
    binding.player_names = {binding.player_one_name, binding.player_two_name};
  } else {
    const int player_count = spec.param("player_count", 2);
    for (int i = 0; i < player_count; ++i) {
      binding.player_names.push_back("Player " + std::to_string(i + 1));
    }
    binding.player_one_name = binding.player_names.front();
    if (player_count > 1) binding.player_two_name = binding.player_names[1];
    binding.pair_index = 0;
  }

  if (const std::string* fixed_group = fixed_value(variant, "Symbol_Player")) {
    binding.group_noun = *fixed_group;
  } else {
    binding.group_noun =
        binding.player_one_name.rfind("Team", 0) == 0 ? "team" : "player";
  }

  for (const auto& slot : spec.slots) {
    if (slot.slot_name == "Symbol_Player") {
      binding.resolved[slot.slot_name] = binding.group_noun;
      continue;
    }
    if (slot.slot_name == "Symbol_Player_1") {
      binding.resolved[slot.slot_name] = binding.player_one_name;
      continue;
    }
    if (slot.slot_name == "Symbol_Player_2") {
      binding.resolved[slot.slot_name] = binding.player_two_name;
      continue;
    }
    auto it = variant.assignments.find(slot.slot_name);
    if (it != variant.assignments.end() &&
        it->second.kind == SlotAssignment::Kind::kFixed) {
      binding.resolved[slot.slot_name] = it->second.value;
      continue;
    }
    const std::vector<std::string>* pool = &slot.candidates;
    if (it != variant.assignments.end() && !it->second.subset.empty()) {
      pool = &it->second.subset;
    }
    if (pool->empty()) fail(ErrorKind::kConfig, "slot has no candidates: " + slot.slot_name);
    binding.resolved[slot.slot_name] = (*pool)[rng.next_below(pool->size())];
  }
  return binding;
}

std::vector<EventRecord> sample_commentary(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<EventRecord> events;
  events.reserve(10);
  for (int i = 0; i < 10; ++i) {
    const Outcome outcome = rng.next_bool() ? Outcome::kHit : Outcome::kMiss;
    events.push_back(EventRecord::shot(i % 2 == 0 ? 1 : 2, outcome, i + 1));
  }
  return events;
}

DoorGame sample_door_game(const WorldSpec& spec, const RulesetVariant& variant,
                          std::uint64_t seed) {
  const int doors = spec.param("door_count", 5);
  const int goats = spec.param("goat_count", 2);
  const int players = spec.param("player_count", 3);
  const int opens = spec.param("opens_total", doors);
  if (doors < 1 || goats < 1 || players < 1 || opens < 1 || goats >= doors ||
      opens > doors) {
    fail(ErrorKind::kConfig, "bad door world parameters");
  }

  Rng rng(seed);
  // Draw order: goat placement, player turn order, opened-door sequence.
  std::set<int> goat_doors;
  for (std::uint64_t g : rng.sample_without_replacement(doors, goats)) {
    goat_doors.insert(static_cast<int>(g) + 1);
  }
  std::vector<int> turn_order(players);
  for (int i = 0; i < players; ++i) turn_order[i] = i + 1;
  rng.shuffle(turn_order);
  const auto opened = rng.sample_without_replacement(doors, opens);

  DoorGame game;
  std::vector<std::pair<int, int>> openings;
  for (size_t i = 0; i < opened.size(); ++i) {
    const int door = static_cast<int>(opened[i]) + 1;
    const int player = turn_order[i % players];
    game.events.push_back(
        EventRecord::door_open(player, door, goat_doors.count(door) > 0,
                               static_cast<int>(i) + 1));
    openings.emplace_back(player, door);
  }
  game.expected = door_outcome(openings, goat_doors, winner_order_of(variant), doors);
  return game;
}

std::string answer_surface_form(const ExpectedLabel& label, const SymbolBinding& binding) {
  switch (label.kind) {
    case ExpectedLabel::Kind::kPlayerOne: return binding.player_one_name;
    case ExpectedLabel::Kind::kPlayerTwo: return binding.player_two_name;
    case ExpectedLabel::Kind::kTie: return "both " + binding.group_noun + "s";
    case ExpectedLabel::Kind::kNoWinner: return "no one";
    case ExpectedLabel::Kind::kNamed: {
      const int idx = label.player_index - 1;
      if (idx < 0 || idx >= static_cast<int>(binding.player_names.size())) {
        fail(ErrorKind::kInvalidArg, "player index out of range: " + label.to_string());
      }
      return binding.player_names[static_cast<size_t>(idx)];
    }
  }
  fail(ErrorKind::kInternal, "unreachable label kind");
}

PromptInstance render_zero_shot(const WorldSpec& spec, const RulesetVariant& variant,
                                const SymbolBinding& binding,
                                const std::vector<EventRecord>& events,
                                std::uint64_t seed, int index) {
  const std::string rules = render_template(spec.rules_template, binding.resolved);
  const std::string question = render_template(spec.question_template, binding.resolved);

  std::vector<std::string> lines;
  for (const EventRecord& event : events) {
    std::map<std::string, std::string> values = binding.resolved;
    if (event.kind == EventRecord::Kind::kShot) {
      values["Event_Actor"] =
          event.actor == 1 ? binding.player_one_name : binding.player_two_name;
      values["Event_Outcome"] = event.outcome == Outcome::kHit ? "hits" : "misses";
    } else {
      const int idx = event.actor - 1;
      if (idx < 0 || idx >= static_cast<int>(binding.player_names.size())) {
        fail(ErrorKind::kInvalidArg, "event actor out of range");
      }
      values["Event_Actor"] = binding.player_names[static_cast<size_t>(idx)];
      values["Event_Outcome"] = event.goat_found ? "a goat" : "nothing";
      values["Event_Door"] = std::to_string(event.door);
    }
    lines.push_back(render_template(spec.event_template, values));
  }

  std::string commentary;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (i) commentary += "\n";
    commentary += lines[i];
  }
  const std::string text = rules + "\n\n" + commentary + "\n\n" + question;

  for (const auto& leftover : template_placeholders(text)) {
    fail(ErrorKind::kConfig, "unresolved placeholder [" + leftover + "] in rendered text");
  }
  if (text.find('[') != std::string::npos) {
    fail(ErrorKind::kConfig, "rendered text contains a stray bracket");
  }

  PromptInstance instance;
  instance.world_id = spec.world_id;
  instance.ruleset_name = variant.name;
  instance.mode = Mode::kZeroShot;
  instance.text = text;
  instance.binding = binding;
  instance.events = events;
  instance.expected = expected_for(spec, pin_to_binding(variant, binding), events);
  instance.seed = seed;
  instance.instance_id =
      make_instance_id(spec.world_id, variant.name, Mode::kZeroShot, index, seed);
  return instance;
}

PromptInstance render_few_shot(const PromptInstance& query,
                               const std::vector<PromptInstance>& exemplars) {
  if (exemplars.size() != 3) {
    fail(ErrorKind::kInvalidArg, "few-shot rendering needs exactly 3 exemplars, got " +
                                     std::to_string(exemplars.size()));
  }
  for (const PromptInstance& exemplar : exemplars) {
    if (exemplar.instance_id == query.instance_id) {
      fail(ErrorKind::kInvalidArg, "exemplar equals the query: " + exemplar.instance_id);
    }
    if (exemplar.ruleset_name != query.ruleset_name) {
      fail(ErrorKind::kInvalidArg, "exemplar ruleset mismatch: " + exemplar.ruleset_name +
                                       " vs " + query.ruleset_name);
    }
    if (exemplar.mode != Mode::kZeroShot) {
      fail(ErrorKind::kInvalidArg, "exemplars must be zero-shot instances");
    }
  }
  if (query.mode != Mode::kZeroShot) {
    fail(ErrorKind::kInvalidArg, "few-shot query must be a zero-shot instance");
  }

  std::string text;
  for (const PromptInstance& exemplar : exemplars) {
    text += "Q: " + exemplar.text + "\nA: {" +
            answer_surface_form(exemplar.expected, exemplar.binding) + "}\n\n";
  }
  text += "Q: " + query.text + "\nA:";

  PromptInstance out = query;
  out.mode = Mode::kFewShot;
  out.text = text;
  const std::string needle = "-do0-";
  size_t pos = out.instance_id.find(needle);
  if (pos != std::string::npos) {
    out.instance_id.replace(pos, needle.size(), "-dofs-");
  } else {
    out.instance_id += "-dofs";
  }
  out.exemplar_ids.clear();
  for (const PromptInstance& exemplar : exemplars) {
    out.exemplar_ids.push_back(exemplar.instance_id);
  }
  return out;
}

std::vector<PromptInstance> generate_batch(const WorldSpec& spec,
                                           const RulesetVariant& variant, int n,
                                           std::uint64_t master_seed) {
  if (n < 1) fail(ErrorKind::kInvalidArg, "batch size must be at least 1");
  std::vector<PromptInstance> batch;
  batch.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const std::uint64_t seed = instance_seed(master_seed, static_cast<std::uint64_t>(i));
    const SymbolBinding binding = sample_binding(spec, variant, derive_seed(seed, 0));
    std::vector<EventRecord> events;
    if (spec.oracle_id == "door_outcome") {
      events = sample_door_game(spec, variant, derive_seed(seed, 1)).events;
    } else {
      events = sample_commentary(derive_seed(seed, 1));
    }
    batch.push_back(render_zero_shot(spec, variant, binding, events, seed, i));
  }
  return batch;
}

std::vector<EventRecord> parse_commentary(const WorldSpec& spec,
                                          const SymbolBinding& binding,
                                          const std::string& text) {
  const EventPattern pattern = event_pattern(spec, binding);
  const bool is_door = spec.oracle_id == "door_outcome";

  // Commentary lines are the last contiguous run of lines matching the
  // rendered event shape under this binding.
  std::vector<EventRecord> run;
  std::vector<EventRecord> last_run;
  std::vector<std::string> values;
  for (const std::string& line : split_lines(text)) {
    bool parsed = false;
    if (match_event_line(pattern, line, &values)) {
      EventRecord event;
      bool ok = true;
      int actor = 0;
      Outcome outcome = Outcome::kHit;
      int door = 0;
      bool goat = false;
      for (size_t i = 0; i < pattern.fields.size() && ok; ++i) {
        const std::string& field = pattern.fields[i];
        const std::string& value = values[i];
        if (field == "Event_Actor") {
          actor = actor_index(binding, value);
          ok = actor > 0;
        } else if (field == "Event_Outcome") {
          if (value == "hits") {
            outcome = Outcome::kHit;
          } else if (value == "misses") {
            outcome = Outcome::kMiss;
          } else if (value == "a goat") {
            goat = true;
          } else if (value == "nothing") {
            goat = false;
          } else {
            ok = false;
          }
        } else if (field == "Event_Door") {
          try {
            door = std::stoi(value);
          } catch (const std::exception&) {
            ok = false;
          }
        }
      }
      if (ok) {
        const int ordinal = static_cast<int>(run.size()) + 1;
        event = is_door ? EventRecord::door_open(actor, door, goat, ordinal)
                        : EventRecord::shot(actor, outcome, ordinal);
        run.push_back(event);
        parsed = true;
      }
    }
    if (!parsed && !run.empty()) {
      last_run = run;
      run.clear();
    }
  }
  if (!run.empty()) last_run = run;
  if (last_run.empty()) {
    fail(ErrorKind::kParse, "no commentary lines found in prompt text");
  }
  return last_run;
}

nlohmann::json binding_to_json(const SymbolBinding& binding) {
  nlohmann::json j = {
      {"pair_index", binding.pair_index},
      {"player_one_name", binding.player_one_name},
      {"player_two_name", binding.player_two_name},
      {"group_noun", binding.group_noun},
      {"resolved", binding.resolved},
  };
  if (!binding.player_names.empty()) j["player_names"] = binding.player_names;
  return j;
}

SymbolBinding binding_from_json(const nlohmann::json& j) {
  SymbolBinding binding;
  binding.pair_index = static_cast<int>(require_int(j, "pair_index"));
  binding.player_one_name = require_string(j, "player_one_name");
  binding.player_two_name = require_string(j, "player_two_name");
  binding.group_noun = require_string(j, "group_noun");
  for (const auto& [key, value] : require_field(j, "resolved").items()) {
    if (!value.is_string()) fail(ErrorKind::kParse, "resolved values must be strings");
    binding.resolved[key] = value.get<std::string>();
  }
  if (j.contains("player_names")) {
    for (const auto& name : j.at("player_names")) {
      if (!name.is_string()) fail(ErrorKind::kParse, "player_names entries must be strings");
      binding.player_names.push_back(name.get<std::string>());
    }
  }
  return binding;
}

nlohmann::json event_to_json(const EventRecord& event) {
  if (event.kind == EventRecord::Kind::kShot) {
    return {{"shooter", event.actor == 1 ? "ONE" : "TWO"},
            {"outcome", event.outcome == Outcome::kHit ? "HIT" : "MISS"},
            {"ordinal", event.ordinal}};
  }
  return {{"player_index", event.actor},
          {"opened_door", event.door},
          {"goat_found", event.goat_found},
          {"ordinal", event.ordinal}};
}

EventRecord event_from_json(const nlohmann::json& j) {
  if (j.contains("shooter")) {
    const std::string shooter = require_string(j, "shooter");
    const std::string outcome = require_string(j, "outcome");
    int actor;
    if (shooter == "ONE") {
      actor = 1;
    } else if (shooter == "TWO") {
      actor = 2;
    } else {
      fail(ErrorKind::kParse, "unknown shooter: " + shooter);
    }
    Outcome o;
    if (outcome == "HIT") {
      o = Outcome::kHit;
    } else if (outcome == "MISS") {
      o = Outcome::kMiss;
    } else {
      fail(ErrorKind::kParse, "unknown outcome: " + outcome);
    }
    return EventRecord::shot(actor, o, static_cast<int>(require_int(j, "ordinal")));
  }
  return EventRecord::door_open(static_cast<int>(require_int(j, "player_index")),
                                static_cast<int>(require_int(j, "opened_door")),
                                get_bool(j, "goat_found", false),
                                static_cast<int>(require_int(j, "ordinal")));
}

nlohmann::json instance_to_json(const PromptInstance& instance) {
  nlohmann::json events = nlohmann::json::array();
  for (const EventRecord& event : instance.events) events.push_back(event_to_json(event));
  nlohmann::json j = {
      {"instance_id", instance.instance_id},
      {"world_id", instance.world_id},
      {"ruleset_name", instance.ruleset_name},
      {"mode", to_string(instance.mode)},
      {"text", instance.text},
      {"binding", binding_to_json(instance.binding)},
      {"events", events},
      {"expected", instance.expected.to_string()},
      {"seed", instance.seed},
  };
  if (instance.mode == Mode::kFewShot) j["exemplar_ids"] = instance.exemplar_ids;
  return j;
}

PromptInstance instance_from_json(const nlohmann::json& j) {
  PromptInstance instance;
  instance.instance_id = require_string(j, "instance_id");
  instance.world_id = require_string(j, "world_id");
  instance.ruleset_name = require_string(j, "ruleset_name");
  instance.mode = parse_mode(require_string(j, "mode"));
  instance.text = require_string(j, "text");
  instance.binding = binding_from_json(require_field(j, "binding"));
  const auto& events = require_field(j, "events");
  if (!events.is_array()) fail(ErrorKind::kParse, "events must be an array");
  for (const auto& e : events) instance.events.push_back(event_from_json(e));
  instance.expected = ExpectedLabel::parse(require_string(j, "expected"));
  const auto& seed = require_field(j, "seed");
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
    fail(ErrorKind::kParse, "seed must be an integer");
  }
  instance.seed = seed.get<std::uint64_t>();
  if (j.contains("exemplar_ids")) {
    for (const auto& id : j.at("exemplar_ids")) {
      if (!id.is_string()) fail(ErrorKind::kParse, "exemplar_ids entries must be strings");
      instance.exemplar_ids.push_back(id.get<std::string>());
    }
  }
  return instance;
}

void write_batch_jsonl(const std::string& path, const std::vector<PromptInstance>& batch) {
  std::string out;
  for (const PromptInstance& instance : batch) {
    out += instance_to_json(instance).dump();
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<PromptInstance> read_batch_jsonl(const std::string& path) {
  std::vector<PromptInstance> batch;
  std::istringstream in(read_text_file(path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      fail(ErrorKind::kParse,
           path + ":" + std::to_string(line_no) + ": invalid JSON line");
    }
    batch.push_back(instance_from_json(j));
  }
  return batch;
}

}  // namespace absurd
