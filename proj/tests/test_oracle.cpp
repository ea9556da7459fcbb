#include <bit>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"

#include "absurd/oracle.hpp"
#include "absurd/world.hpp"

using absurd::Comparator;
using absurd::Error;
using absurd::ErrorKind;
using absurd::EventRecord;
using absurd::ExpectedLabel;
using absurd::Outcome;
using absurd::WinnerOrder;

namespace {

// Independent recount straight from the bitmask: bit i set means shot i+1
// hits; even bit positions are player one's shots.
constexpr unsigned kPlayerOneBits = 0x155;  // bits 0,2,4,6,8
constexpr unsigned kPlayerTwoBits = 0x2AA;  // bits 1,3,5,7,9

ExpectedLabel brute_force(unsigned mask, Outcome scoring, Comparator comparator) {
  int one = std::popcount(mask & kPlayerOneBits);
  int two = std::popcount(mask & kPlayerTwoBits);
  if (scoring == Outcome::kMiss) {
    one = 5 - one;
    two = 5 - two;
  }
  if (one == two) return ExpectedLabel::tie();
  const bool one_wins = comparator == Comparator::kMost ? one > two : one < two;
  return one_wins ? ExpectedLabel::player_one() : ExpectedLabel::player_two();
}

// Exchange the two players' shot outcomes (shot k of player one swaps with
// shot k of player two).
unsigned swap_teams(unsigned mask) {
  return ((mask & kPlayerOneBits) << 1) | ((mask & kPlayerTwoBits) >> 1);
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kInternal;
}

}  // namespace

TEST_CASE("soccer outcome agrees with a brute-force recount over all 1024 games") {
  for (unsigned mask = 0; mask < 1024; ++mask) {
    const auto events = absurd::soccer_sequence_from_mask(mask);
    for (Outcome scoring : {Outcome::kHit, Outcome::kMiss}) {
      for (Comparator cmp : {Comparator::kMost, Comparator::kLeast}) {
        CAPTURE(mask);
        CHECK(absurd::soccer_outcome(events, scoring, cmp) ==
              brute_force(mask, scoring, cmp));
      }
    }
  }
}

TEST_CASE("tie count over the full space is the central binomial term") {
  int ties = 0;
  int one = 0;
  int two = 0;
  for (unsigned mask = 0; mask < 1024; ++mask) {
    const auto label = absurd::soccer_outcome(absurd::soccer_sequence_from_mask(mask),
                                              Outcome::kHit, Comparator::kMost);
    if (label == ExpectedLabel::tie()) ++ties;
    if (label == ExpectedLabel::player_one()) ++one;
    if (label == ExpectedLabel::player_two()) ++two;
  }
  CHECK(ties == 252);  // C(10,5): both sides make the same number of shots
  CHECK(one == 386);
  CHECK(two == 386);
  CHECK(doctest::Approx(252.0 / 1024.0) == 0.24609375);

  // Scoring misses instead of hits relabels the games but keeps the split.
  int miss_ties = 0;
  for (unsigned mask = 0; mask < 1024; ++mask) {
    if (absurd::soccer_outcome(absurd::soccer_sequence_from_mask(mask), Outcome::kMiss,
                               Comparator::kMost) == ExpectedLabel::tie()) {
      ++miss_ties;
    }
  }
  CHECK(miss_ties == 252);
}

TEST_CASE("registry cross-equivalences hold over the full space") {
  const absurd::OracleReport report = absurd::flip_equivalence_check();
  CHECK(report.ok());
  CHECK(report.checked_space_size == 1024);
  CHECK(absurd::report_to_json(report)["ok"] == true);
}

TEST_CASE("the cross-check catches a corrupted oracle") {
  // Answers REAL semantics regardless of the variant: MISSING games no
  // longer match REAL on flipped outcomes, so violations must appear.
  absurd::VariantOracleFn broken = [](const std::vector<EventRecord>& events,
                                      const absurd::RulesetVariant&) {
    return absurd::soccer_outcome(events, Outcome::kHit, Comparator::kMost);
  };
  const absurd::OracleReport report = absurd::flip_equivalence_check_with(broken);
  CHECK_FALSE(report.ok());
  CHECK_FALSE(report.violations.empty());
  CHECK_FALSE(report.violations.front().input.empty());
}

TEST_CASE("LEAST inverts REAL except on ties") {
  for (unsigned mask = 0; mask < 1024; ++mask) {
    const auto events = absurd::soccer_sequence_from_mask(mask);
    const auto real = absurd::soccer_outcome(events, Outcome::kHit, Comparator::kMost);
    const auto least = absurd::soccer_outcome(events, Outcome::kHit, Comparator::kLeast);
    CAPTURE(mask);
    if (real == ExpectedLabel::tie()) {
      CHECK(least == ExpectedLabel::tie());
    } else if (real == ExpectedLabel::player_one()) {
      CHECK(least == ExpectedLabel::player_two());
    } else {
      CHECK(least == ExpectedLabel::player_one());
    }
  }
}

TEST_CASE("swapping the teams swaps the winner") {
  for (unsigned mask = 0; mask < 1024; ++mask) {
    const auto original = absurd::soccer_outcome(absurd::soccer_sequence_from_mask(mask),
                                                 Outcome::kHit, Comparator::kMost);
    const auto swapped = absurd::soccer_outcome(
        absurd::soccer_sequence_from_mask(swap_teams(mask)), Outcome::kHit,
        Comparator::kMost);
    CAPTURE(mask);
    if (original == ExpectedLabel::tie()) {
      CHECK(swapped == ExpectedLabel::tie());
    } else if (original == ExpectedLabel::player_one()) {
      CHECK(swapped == ExpectedLabel::player_two());
    } else {
      CHECK(swapped == ExpectedLabel::player_one());
    }
  }
}

TEST_CASE("soccer outcome validates the event sequence") {
  auto events = absurd::soccer_sequence_from_mask(0x1FF);

  auto short_game = events;
  short_game.pop_back();
  CHECK(kind_of([&] {
          absurd::soccer_outcome(short_game, Outcome::kHit, Comparator::kMost);
        }) == ErrorKind::kInvalidArg);

  auto bad_alternation = events;
  bad_alternation[1].actor = 1;
  CHECK(kind_of([&] {
          absurd::soccer_outcome(bad_alternation, Outcome::kHit, Comparator::kMost);
        }) == ErrorKind::kInvalidArg);

  auto bad_ordinal = events;
  bad_ordinal[4].ordinal = 99;
  CHECK(kind_of([&] {
          absurd::soccer_outcome(bad_ordinal, Outcome::kHit, Comparator::kMost);
        }) == ErrorKind::kInvalidArg);

  auto not_a_shot = events;
  not_a_shot[3] = EventRecord::door_open(1, 2, true, 4);
  CHECK(kind_of([&] {
          absurd::soccer_outcome(not_a_shot, Outcome::kHit, Comparator::kMost);
        }) == ErrorKind::kInvalidArg);
}

TEST_CASE("variant-driven soccer outcome reads the pinned semantics") {
  const auto events = absurd::soccer_sequence_from_mask(0b0000000101);  // P1: 2 hits, P2: 0
  const auto real = absurd::find_ruleset("soccer", "REAL");
  const auto least = absurd::find_ruleset("soccer", "LEAST");
  const auto missing = absurd::find_ruleset("soccer", "MISSING");
  CHECK(absurd::soccer_outcome(events, real) == ExpectedLabel::player_one());
  CHECK(absurd::soccer_outcome(events, least) == ExpectedLabel::player_two());
  CHECK(absurd::soccer_outcome(events, missing) == ExpectedLabel::player_two());
}

TEST_CASE("pinned rule readers reject unresolved slots") {
  const auto real = absurd::find_ruleset("soccer", "REAL");
  CHECK(absurd::scoring_action_of(real) == Outcome::kHit);
  CHECK(absurd::comparator_of(real) == Comparator::kMost);
  CHECK(absurd::scoring_action_of(absurd::find_ruleset("soccer", "MISSING")) ==
        Outcome::kMiss);
  CHECK(absurd::comparator_of(absurd::find_ruleset("soccer", "LEAST")) ==
        Comparator::kLeast);
  CHECK(absurd::winner_order_of(absurd::find_ruleset("door", "DO_RANDOM")) ==
        WinnerOrder::kFirst);
  CHECK(absurd::winner_order_of(absurd::find_ruleset("door", "DO_RANDOM_LAST")) ==
        WinnerOrder::kLast);

  absurd::RulesetVariant unresolved;
  unresolved.name = "UNRESOLVED";
  CHECK(kind_of([&] { absurd::scoring_action_of(unresolved); }) == ErrorKind::kInvalidArg);
  unresolved.assignments["Symbol_Comparator"] = absurd::SlotAssignment::leave_random();
  CHECK(kind_of([&] { absurd::comparator_of(unresolved); }) == ErrorKind::kInvalidArg);
}

TEST_CASE("door outcome picks the first or last goat opener") {
  const std::vector<std::pair<int, int>> openings = {{1, 1}, {2, 2}, {3, 3}};
  const std::set<int> goats = {2, 3};
  CHECK(absurd::door_outcome(openings, goats, WinnerOrder::kFirst, 5) ==
        ExpectedLabel::named(2));
  CHECK(absurd::door_outcome(openings, goats, WinnerOrder::kLast, 5) ==
        ExpectedLabel::named(3));

  const std::set<int> unopened_goats = {4, 5};
  CHECK(absurd::door_outcome({{1, 1}, {2, 2}}, unopened_goats, WinnerOrder::kFirst, 5) ==
        ExpectedLabel::no_winner());
  CHECK(absurd::door_outcome({{1, 1}, {2, 2}}, unopened_goats, WinnerOrder::kLast, 5) ==
        ExpectedLabel::no_winner());

  // Exactly one goat opened: the two orders agree.
  const std::set<int> one_goat = {2};
  CHECK(absurd::door_outcome(openings, one_goat, WinnerOrder::kFirst, 5) ==
        absurd::door_outcome(openings, one_goat, WinnerOrder::kLast, 5));
}

TEST_CASE("door outcome validates openings") {
  const std::set<int> goats = {2};
  CHECK(kind_of([&] {
          absurd::door_outcome({{1, 1}, {2, 1}}, goats, WinnerOrder::kFirst, 5);
        }) == ErrorKind::kInvalidArg);  // door opened twice
  CHECK(kind_of([&] {
          absurd::door_outcome({{0, 1}}, goats, WinnerOrder::kFirst, 5);
        }) == ErrorKind::kInvalidArg);  // bad player
  CHECK(kind_of([&] {
          absurd::door_outcome({{1, 6}}, goats, WinnerOrder::kFirst, 5);
        }) == ErrorKind::kInvalidArg);  // door out of range
  CHECK(kind_of([&] {
          absurd::door_outcome({{1, 1}}, std::set<int>{9}, WinnerOrder::kFirst, 5);
        }) == ErrorKind::kInvalidArg);  // goat out of range

  // Without a door_count the range checks are skipped.
  CHECK(absurd::door_outcome({{1, 9}}, std::set<int>{9}, WinnerOrder::kFirst) ==
        ExpectedLabel::named(1));
}

TEST_CASE("door outcome over event records uses the goat flags") {
  const std::vector<EventRecord> events = {
      EventRecord::door_open(3, 1, false, 1),
      EventRecord::door_open(1, 4, true, 2),
      EventRecord::door_open(2, 2, true, 3),
  };
  CHECK(absurd::door_outcome(events, WinnerOrder::kFirst) == ExpectedLabel::named(1));
  CHECK(absurd::door_outcome(events, WinnerOrder::kLast) == ExpectedLabel::named(2));

  std::vector<EventRecord> with_shot = events;
  with_shot.push_back(EventRecord::shot(1, Outcome::kHit, 4));
  CHECK(kind_of([&] { absurd::door_outcome(with_shot, WinnerOrder::kFirst); }) ==
        ErrorKind::kInvalidArg);
}

TEST_CASE("expected_for dispatches on the world's oracle id") {
  const auto soccer = absurd::builtin_soccer_world();
  const auto events = absurd::soccer_sequence_from_mask(0x3FF);
  CHECK(absurd::expected_for(soccer, absurd::find_ruleset("soccer", "REAL"), events) ==
        ExpectedLabel::tie());

  const auto door = absurd::builtin_door_world(5, 2, 3, 5);
  const std::vector<EventRecord> door_events = {
      EventRecord::door_open(2, 5, true, 1),
      EventRecord::door_open(3, 1, false, 2),
  };
  CHECK(absurd::expected_for(door, absurd::find_ruleset("door", "DO_RANDOM"), door_events) ==
        ExpectedLabel::named(2));

  auto unknown = soccer;
  unknown.oracle_id = "astrology";
  CHECK(kind_of([&] {
          absurd::expected_for(unknown, absurd::find_ruleset("soccer", "REAL"), events);
        }) == ErrorKind::kInvalidArg);
}

TEST_CASE("soccer_sequence_from_mask builds a canonical game") {
  const auto events = absurd::soccer_sequence_from_mask(0b1000000001);
  REQUIRE(events.size() == 10);
  for (int i = 0; i < 10; ++i) {
    CHECK(events[i].actor == (i % 2 == 0 ? 1 : 2));
    CHECK(events[i].ordinal == i + 1);
    const bool hit = i == 0 || i == 9;
    CHECK(events[i].outcome == (hit ? Outcome::kHit : Outcome::kMiss));
  }
}
