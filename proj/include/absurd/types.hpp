#pragma once

#include <cstdint>
#include <string>

#include "absurd/error.hpp"

namespace absurd {

// Outcome of a single soccer shot as reported by the commentary.
enum class Outcome { kHit, kMiss };

// Winner-comparison direction for score-based worlds.
enum class Comparator { kMost, kLeast };

// Which opening decides the winner in the door world.
enum class WinnerOrder { kFirst, kLast };

enum class Mode { kZeroShot, kFewShot };

// Ground-truth label for a prompt instance. PLAYER_ONE/PLAYER_TWO/TIE come
// from two-sided worlds; NAMED(index)/NO_WINNER come from the door world.
struct ExpectedLabel {
  enum class Kind { kPlayerOne, kPlayerTwo, kTie, kNoWinner, kNamed };

  Kind kind = Kind::kTie;
  int player_index = 0;  // 1-based, kNamed only

  static ExpectedLabel player_one() { return {Kind::kPlayerOne, 0}; }
  static ExpectedLabel player_two() { return {Kind::kPlayerTwo, 0}; }
  static ExpectedLabel tie() { return {Kind::kTie, 0}; }
  static ExpectedLabel no_winner() { return {Kind::kNoWinner, 0}; }
  static ExpectedLabel named(int index) { return {Kind::kNamed, index}; }

  // Exact structural equality.
  friend bool operator==(const ExpectedLabel& a, const ExpectedLabel& b) {
    return a.kind == b.kind && a.player_index == b.player_index;
  }
  friend bool operator!=(const ExpectedLabel& a, const ExpectedLabel& b) { return !(a == b); }

  // Grading equality: NAMED(1)/NAMED(2) are the same answer as
  // PLAYER_ONE/PLAYER_TWO (a two-player door configuration would otherwise
  // disagree with its extraction).
  bool matches(const ExpectedLabel& other) const;

  std::string to_string() const;
  static ExpectedLabel parse(const std::string& s);
};

inline bool ExpectedLabel::matches(const ExpectedLabel& other) const {
  auto canon = [](const ExpectedLabel& l) -> ExpectedLabel {
    if (l.kind == Kind::kNamed && l.player_index == 1) return player_one();
    if (l.kind == Kind::kNamed && l.player_index == 2) return player_two();
    return l;
  };
  return canon(*this) == canon(other);
}

inline std::string ExpectedLabel::to_string() const {
  switch (kind) {
    case Kind::kPlayerOne: return "PLAYER_ONE";
    case Kind::kPlayerTwo: return "PLAYER_TWO";
    case Kind::kTie: return "TIE";
    case Kind::kNoWinner: return "NO_WINNER";
    case Kind::kNamed: return "NAMED:" + std::to_string(player_index);
  }
  return "TIE";
}

inline ExpectedLabel ExpectedLabel::parse(const std::string& s) {
  if (s == "PLAYER_ONE") return player_one();
  if (s == "PLAYER_TWO") return player_two();
  if (s == "TIE") return tie();
  if (s == "NO_WINNER") return no_winner();
  if (s.rfind("NAMED:", 0) == 0) {
    int idx = 0;
    try {
      idx = std::stoi(s.substr(6));
    } catch (const std::exception&) {
      fail(ErrorKind::kParse, "bad NAMED label: " + s);
    }
    if (idx < 1) fail(ErrorKind::kParse, "bad NAMED index: " + s);
    return named(idx);
  }
  fail(ErrorKind::kParse, "unknown label: " + s);
}

// One interaction in a scenario: a soccer shot or a door opening.
struct EventRecord {
  enum class Kind { kShot, kDoorOpen };

  Kind kind = Kind::kShot;
  int actor = 0;                     // shooter (1|2) or door player index, 1-based
  Outcome outcome = Outcome::kHit;   // kShot only
  int door = 0;                      // kDoorOpen only, 1-based
  bool goat_found = false;           // kDoorOpen only
  int ordinal = 0;                   // 1-based position in the sequence

  static EventRecord shot(int shooter, Outcome outcome, int ordinal) {
    EventRecord e;
    e.kind = Kind::kShot;
    e.actor = shooter;
    e.outcome = outcome;
    e.ordinal = ordinal;
    return e;
  }
  static EventRecord door_open(int player, int door, bool goat, int ordinal) {
    EventRecord e;
    e.kind = Kind::kDoorOpen;
    e.actor = player;
    e.door = door;
    e.goat_found = goat;
    e.ordinal = ordinal;
    return e;
  }

  friend bool operator==(const EventRecord& a, const EventRecord& b) {
    return a.kind == b.kind && a.actor == b.actor && a.outcome == b.outcome &&
           a.door == b.door && a.goat_found == b.goat_found && a.ordinal == b.ordinal;
  }
};

inline const char* to_string(Mode m) { return m == Mode::kZeroShot ? "ZERO_SHOT" : "FEW_SHOT"; }

inline Mode parse_mode(const std::string& s) {
  if (s == "ZERO_SHOT") return Mode::kZeroShot;
  if (s == "FEW_SHOT") return Mode::kFewShot;
  fail(ErrorKind::kParse, "unknown mode: " + s);
}

}  // namespace absurd
