#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "absurd/types.hpp"
#include "absurd/world.hpp"

namespace absurd {

// Result of a brute-force self-check over the full event space.
struct OracleReport {
  struct Violation {
    std::string input;     // human-readable event sequence
    std::string expected;
    std::string got;
  };
  long checked_space_size = 0;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

nlohmann::json report_to_json(const OracleReport& report);

// Pinned rule semantics read out of a variant. These fail if the slot is
// absent or left random: ground truth needs concrete rule values.
Outcome scoring_action_of(const RulesetVariant& variant);
Comparator comparator_of(const RulesetVariant& variant);
WinnerOrder winner_order_of(const RulesetVariant& variant);

// Winner of a ten-shot soccer game under concrete rule semantics. Each
// player's score counts their events whose outcome equals `scoring`; the
// comparator picks the higher or lower score; equal scores tie.
ExpectedLabel soccer_outcome(const std::vector<EventRecord>& events, Outcome scoring,
                             Comparator comparator);

// Same, reading the scoring action and comparator from a variant.
ExpectedLabel soccer_outcome(const std::vector<EventRecord>& events,
                             const RulesetVariant& variant);

// Winner of a door game: the player of the earliest (kFirst) or latest
// (kLast) goat opening; NO_WINNER if no opened door has a goat.
// `openings` are (player_index, door_index) pairs in opening order.
// door_count > 0 additionally range-checks doors and goats.
ExpectedLabel door_outcome(const std::vector<std::pair<int, int>>& openings,
                           const std::set<int>& goat_doors, WinnerOrder order,
                           int door_count = 0);

// Same, over event records carrying goat_found flags.
ExpectedLabel door_outcome(const std::vector<EventRecord>& events, WinnerOrder order);

// Ground truth for any built-in oracle id. Door events must carry correct
// goat_found flags.
ExpectedLabel expected_for(const WorldSpec& spec, const RulesetVariant& variant,
                           const std::vector<EventRecord>& events);

// Enumerates all 2^10 soccer shot sequences and cross-checks the variant
// algebra: MISSING(e) = REAL(flip(e)), MISS_SWITCH(e) = MISSING(e),
// SWITCH(e) = REAL(e).
OracleReport flip_equivalence_check();

// Injectable form for sensitivity tests: the oracle under check resolves a
// variant to a label.
using VariantOracleFn = ExpectedLabel (*)(const std::vector<EventRecord>&,
                                          const RulesetVariant&);
OracleReport flip_equivalence_check_with(VariantOracleFn oracle);

// All 1024 ten-shot sequences (bit i of mask = shot i+1 hits).
std::vector<EventRecord> soccer_sequence_from_mask(unsigned mask);

}  // namespace absurd
