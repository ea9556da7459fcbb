#include "absurd/oracle.hpp"

#include <algorithm>

namespace absurd {

namespace {

const SlotAssignment& pinned_assignment(const RulesetVariant& variant,
                                        const std::string& slot_name) {
  auto it = variant.assignments.find(slot_name);
  if (it == variant.assignments.end()) {
    fail(ErrorKind::kInvalidArg,
         "variant " + variant.name + " does not assign " + slot_name);
  }
  if (it->second.kind != SlotAssignment::Kind::kFixed) {
    fail(ErrorKind::kInvalidArg,
         "variant " + variant.name + " leaves " + slot_name +
             " random; resolve it before asking for ground truth");
  }
  return it->second;
}

void validate_soccer_events(const std::vector<EventRecord>& events) {
  if (events.size() != 10) {
    fail(ErrorKind::kInvalidArg, "soccer game needs exactly 10 shots, got " +
                                     std::to_string(events.size()));
  }
  for (size_t i = 0; i < events.size(); ++i) {
    const EventRecord& e = events[i];
    if (e.kind != EventRecord::Kind::kShot) {
      fail(ErrorKind::kInvalidArg, "soccer event " + std::to_string(i + 1) + " is not a shot");
    }
    const int want_actor = (i % 2 == 0) ? 1 : 2;
    if (e.actor != want_actor) {
      fail(ErrorKind::kInvalidArg,
           "soccer shots must alternate starting with player one; shot " +
               std::to_string(i + 1) + " has shooter " + std::to_string(e.actor));
    }
    if (e.ordinal != static_cast<int>(i) + 1) {
      fail(ErrorKind::kInvalidArg, "soccer shot ordinals must run 1..10 in order");
    }
  }
}

std::string describe_sequence(const std::vector<EventRecord>& events) {
  std::string out;
  for (const EventRecord& e : events) {
    out += (e.outcome == Outcome::kHit) ? 'H' : 'M';
  }
  return out;
}

}  // namespace

nlohmann::json report_to_json(const OracleReport& report) {
  nlohmann::json violations = nlohmann::json::array();
  for (const auto& v : report.violations) {
    violations.push_back({{"input", v.input}, {"expected", v.expected}, {"got", v.got}});
  }
  return {{"checked_space_size", report.checked_space_size},
          {"violations", violations},
          {"ok", report.ok()}};
}

Outcome scoring_action_of(const RulesetVariant& variant) {
  const auto& a = pinned_assignment(variant, "Symbol_Action");
  if (a.value == "hits") return Outcome::kHit;
  if (a.value == "misses") return Outcome::kMiss;
  fail(ErrorKind::kInvalidArg, "unknown Symbol_Action value: " + a.value);
}

Comparator comparator_of(const RulesetVariant& variant) {
  const auto& a = pinned_assignment(variant, "Symbol_Comparator");
  if (a.value == "most") return Comparator::kMost;
  if (a.value == "least") return Comparator::kLeast;
  fail(ErrorKind::kInvalidArg, "unknown Symbol_Comparator value: " + a.value);
}

WinnerOrder winner_order_of(const RulesetVariant& variant) {
  const auto& a = pinned_assignment(variant, "Symbol_Winner_Order");
  if (a.value == "first") return WinnerOrder::kFirst;
  if (a.value == "last") return WinnerOrder::kLast;
  fail(ErrorKind::kInvalidArg, "unknown Symbol_Winner_Order value: " + a.value);
}

ExpectedLabel soccer_outcome(const std::vector<EventRecord>& events, Outcome scoring,
                             Comparator comparator) {
  validate_soccer_events(events);
  int score_one = 0;
  int score_two = 0;
  for (const EventRecord& e : events) {
    if (e.outcome != scoring) continue;
    (e.actor == 1 ? score_one : score_two) += 1;
  }
  if (score_one == score_two) return ExpectedLabel::tie();
  const bool one_wins =
      (comparator == Comparator::kMost) ? score_one > score_two : score_one < score_two;
  return one_wins ? ExpectedLabel::player_one() : ExpectedLabel::player_two();
}

ExpectedLabel soccer_outcome(const std::vector<EventRecord>& events,
                             const RulesetVariant& variant) {
  return soccer_outcome(events, scoring_action_of(variant), comparator_of(variant));
}

ExpectedLabel door_outcome(const std::vector<std::pair<int, int>>& openings,
                           const std::set<int>& goat_doors, WinnerOrder order,
                           int door_count) {
  std::set<int> seen_doors;
  for (const auto& [player, door] : openings) {
    if (player < 1) fail(ErrorKind::kInvalidArg, "door opening has bad player index");
    if (door < 1) fail(ErrorKind::kInvalidArg, "door opening has bad door index");
    if (door_count > 0 && door > door_count) {
      fail(ErrorKind::kInvalidArg, "door index out of range: " + std::to_string(door));
    }
    if (!seen_doors.insert(door).second) {
      fail(ErrorKind::kInvalidArg, "door opened twice: " + std::to_string(door));
    }
  }
  for (int goat : goat_doors) {
    if (goat < 1 || (door_count > 0 && goat > door_count)) {
      fail(ErrorKind::kInvalidArg, "goat door out of range: " + std::to_string(goat));
    }
  }
  int winner = 0;
  for (const auto& [player, door] : openings) {
    if (!goat_doors.count(door)) continue;
    winner = player;
    if (order == WinnerOrder::kFirst) break;
  }
  return winner == 0 ? ExpectedLabel::no_winner() : ExpectedLabel::named(winner);
}

ExpectedLabel door_outcome(const std::vector<EventRecord>& events, WinnerOrder order) {
  std::vector<std::pair<int, int>> openings;
  std::set<int> goat_doors;
  for (const EventRecord& e : events) {
    if (e.kind != EventRecord::Kind::kDoorOpen) {
      fail(ErrorKind::kInvalidArg, "door game event is not a door opening");
    }
    openings.emplace_back(e.actor, e.door);
    if (e.goat_found) goat_doors.insert(e.door);
  }
  return door_outcome(openings, goat_doors, order);
}

ExpectedLabel expected_for(const WorldSpec& spec, const RulesetVariant& variant,
                           const std::vector<EventRecord>& events) {
  if (spec.oracle_id == "soccer_outcome") return soccer_outcome(events, variant);
  if (spec.oracle_id == "door_outcome") {
    return door_outcome(events, winner_order_of(variant));
  }
  fail(ErrorKind::kInvalidArg, "unknown oracle: " + spec.oracle_id);
}

std::vector<EventRecord> soccer_sequence_from_mask(unsigned mask) {
  std::vector<EventRecord> events;
  events.reserve(10);
  for (int i = 0; i < 10; ++i) {
    const Outcome outcome = (mask >> i) & 1u ? Outcome::kHit : Outcome::kMiss;
    events.push_back(EventRecord::shot(i % 2 == 0 ? 1 : 2, outcome, i + 1));
  }
  return events;
}

OracleReport flip_equivalence_check_with(VariantOracleFn oracle) {
  const RulesetVariant real = find_ruleset("soccer", "REAL");
  const RulesetVariant missing = find_ruleset("soccer", "MISSING");
  const RulesetVariant switched = find_ruleset("soccer", "SWITCH");
  const RulesetVariant miss_switch = find_ruleset("soccer", "MISS_SWITCH");

  OracleReport report;
  report.checked_space_size = 1024;
  for (unsigned mask = 0; mask < 1024u; ++mask) {
    const auto events = soccer_sequence_from_mask(mask);
    const auto flipped = soccer_sequence_from_mask(~mask & 0x3FFu);
    const std::string input = describe_sequence(events);

    // Scoring misses is the same game as scoring hits on the flipped tape.
    const auto missing_label = oracle(events, missing);
    const auto real_of_flipped = oracle(flipped, real);
    if (missing_label != real_of_flipped) {
      report.violations.push_back({input + " MISSING=REAL(flip)",
                                   real_of_flipped.to_string(), missing_label.to_string()});
    }
    // The ball/net swap only renames nouns, so the labels must coincide.
    const auto miss_switch_label = oracle(events, miss_switch);
    if (miss_switch_label != missing_label) {
      report.violations.push_back({input + " MISS_SWITCH=MISSING",
                                   missing_label.to_string(), miss_switch_label.to_string()});
    }
    const auto switch_label = oracle(events, switched);
    const auto real_label = oracle(events, real);
    if (switch_label != real_label) {
      report.violations.push_back(
          {input + " SWITCH=REAL", real_label.to_string(), switch_label.to_string()});
    }
  }
  return report;
}

OracleReport flip_equivalence_check() {
  return flip_equivalence_check_with(
      [](const std::vector<EventRecord>& events, const RulesetVariant& variant) {
        return soccer_outcome(events, variant);
      });
}

}  // namespace absurd
