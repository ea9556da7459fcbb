#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"

#include "absurd/world.hpp"

using absurd::ChangeTag;
using absurd::Error;
using absurd::ErrorKind;
using absurd::RulesetVariant;
using absurd::SlotAssignment;
using absurd::WorldSpec;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kInternal;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("soccer registry carries the seven rulesets with their change tags") {
  const auto registry = absurd::ruleset_registry("soccer");
  REQUIRE(registry.size() == 7);

  std::vector<std::string> names;
  for (const auto& v : registry) names.push_back(v.name);
  CHECK(names == std::vector<std::string>{"REAL", "MISSING", "LEAST", "ICE_CREAM", "CAR",
                                          "SWITCH", "MISS_SWITCH"});

  auto tags = [&](const std::string& name) {
    return absurd::find_ruleset("soccer", name).change_tags;
  };
  CHECK(tags("REAL").empty());
  CHECK(tags("MISSING") == std::set<ChangeTag>{ChangeTag::kActions});
  CHECK(tags("LEAST") == std::set<ChangeTag>{ChangeTag::kRules});
  CHECK(tags("ICE_CREAM") == std::set<ChangeTag>{ChangeTag::kSymbols});
  CHECK(tags("CAR") == std::set<ChangeTag>{ChangeTag::kSymbols});
  CHECK(tags("SWITCH") == std::set<ChangeTag>{ChangeTag::kSymbols});
  CHECK(tags("MISS_SWITCH") == std::set<ChangeTag>{ChangeTag::kActions, ChangeTag::kSymbols});
}

TEST_CASE("soccer registry pins the slots each ruleset perturbs") {
  const RulesetVariant real = absurd::find_ruleset("soccer", "REAL");
  const auto& score = real.assignments.at("Symbol_Score");
  CHECK(score.kind == SlotAssignment::Kind::kRandom);
  CHECK(score.subset == std::vector<std::string>{"score", "point"});
  CHECK(real.assignments.at("Symbol_Action") == SlotAssignment::fixed("hits"));
  CHECK(real.assignments.at("Symbol_Comparator") == SlotAssignment::fixed("most"));
  CHECK(real.assignments.at("Symbol_Ball") == SlotAssignment::fixed("ball"));
  CHECK(real.assignments.at("Symbol_Net") == SlotAssignment::fixed("net"));

  CHECK(absurd::find_ruleset("soccer", "MISSING").assignments.at("Symbol_Action") ==
        SlotAssignment::fixed("misses"));
  CHECK(absurd::find_ruleset("soccer", "LEAST").assignments.at("Symbol_Comparator") ==
        SlotAssignment::fixed("least"));
  CHECK(absurd::find_ruleset("soccer", "ICE_CREAM").assignments.at("Symbol_Score") ==
        SlotAssignment::fixed("ice cream"));
  CHECK(absurd::find_ruleset("soccer", "CAR").assignments.at("Symbol_Score") ==
        SlotAssignment::fixed("car"));

  const RulesetVariant switched = absurd::find_ruleset("soccer", "SWITCH");
  CHECK(switched.assignments.at("Symbol_Ball") == SlotAssignment::fixed("net"));
  CHECK(switched.assignments.at("Symbol_Net") == SlotAssignment::fixed("ball"));

  const RulesetVariant miss_switch = absurd::find_ruleset("soccer", "MISS_SWITCH");
  CHECK(miss_switch.assignments.at("Symbol_Action") == SlotAssignment::fixed("misses"));
  CHECK(miss_switch.assignments.at("Symbol_Ball") == SlotAssignment::fixed("net"));
  CHECK(miss_switch.assignments.at("Symbol_Net") == SlotAssignment::fixed("ball"));
}

TEST_CASE("door registry has first- and last-goat rulesets") {
  const auto registry = absurd::ruleset_registry("door");
  REQUIRE(registry.size() == 2);
  CHECK(registry[0].name == "DO_RANDOM");
  CHECK(registry[0].assignments.at("Symbol_Winner_Order") == SlotAssignment::fixed("first"));
  CHECK(registry[0].change_tags.empty());
  CHECK(registry[1].name == "DO_RANDOM_LAST");
  CHECK(registry[1].assignments.at("Symbol_Winner_Order") == SlotAssignment::fixed("last"));
  CHECK(registry[1].change_tags == std::set<ChangeTag>{ChangeTag::kRules});
}

TEST_CASE("registry lookups reject unknown names") {
  CHECK(kind_of([] { absurd::ruleset_registry("pinball"); }) == ErrorKind::kInvalidArg);
  CHECK(kind_of([] { absurd::find_ruleset("soccer", "GOAL"); }) == ErrorKind::kInvalidArg);
}

TEST_CASE("builtin worlds validate cleanly") {
  CHECK(absurd::validate_world(absurd::builtin_soccer_world()).empty());
  CHECK(absurd::validate_world(absurd::builtin_door_world(5, 2, 3, 5)).empty());
  for (const auto& v : absurd::ruleset_registry("soccer")) {
    CHECK(absurd::validate_variant(absurd::builtin_soccer_world(), v).empty());
  }
}

TEST_CASE("validate_world flags structural problems") {
  WorldSpec spec = absurd::builtin_soccer_world();
  spec.rules_template += " And then [Bogus_Slot] happens.";
  spec.slots.push_back({"Symbol_Empty", {}});
  spec.slots.push_back({"Symbol_Player", {"again"}});  // duplicate slot name
  spec.slots.push_back({"Symbol_Dup", {"x", "x"}});
  spec.oracle_id = "tarot";

  const auto diagnostics = absurd::validate_world(spec);
  auto mentions = [&](const std::string& needle) {
    for (const auto& d : diagnostics) {
      if (d.find(needle) != std::string::npos) return true;
    }
    return false;
  };
  CHECK(mentions("Bogus_Slot"));
  CHECK(mentions("Symbol_Empty"));
  CHECK(mentions("duplicate slot"));
  CHECK(mentions("Symbol_Dup"));
  CHECK(mentions("tarot"));
}

TEST_CASE("validate_variant flags bad assignments") {
  const WorldSpec spec = absurd::builtin_soccer_world();

  RulesetVariant bad;
  bad.name = "BAD";
  bad.assignments["Symbol_Nowhere"] = SlotAssignment::fixed("x");
  bad.assignments["Symbol_Action"] = SlotAssignment::fixed("tickles");
  bad.assignments["Symbol_Score"] = SlotAssignment::leave_random({"score", "banana"});

  const auto diagnostics = absurd::validate_variant(spec, bad);
  CHECK(diagnostics.size() == 3);
}

TEST_CASE("compose_variant applies overrides and accumulates tags") {
  const WorldSpec spec = absurd::builtin_soccer_world();
  const RulesetVariant real = absurd::find_ruleset("soccer", "REAL");

  const RulesetVariant car = absurd::compose_variant(spec, real, {{"Symbol_Score", "car"}});
  CHECK(car.name == "REAL+Symbol_Score=car");
  CHECK(car.assignments.at("Symbol_Score") == SlotAssignment::fixed("car"));
  CHECK(car.change_tags == std::set<ChangeTag>{ChangeTag::kSymbols});
  CHECK(car.same_semantics(absurd::find_ruleset("soccer", "CAR")));

  const RulesetVariant multi = absurd::compose_variant(
      spec, real, {{"Symbol_Action", "misses"}, {"Symbol_Comparator", "least"}});
  CHECK(multi.change_tags == std::set<ChangeTag>{ChangeTag::kActions, ChangeTag::kRules});
}

TEST_CASE("compose_variant is idempotent for no-op overrides") {
  const WorldSpec spec = absurd::builtin_soccer_world();
  const RulesetVariant missing = absurd::find_ruleset("soccer", "MISSING");
  const RulesetVariant same =
      absurd::compose_variant(spec, missing, {{"Symbol_Action", "misses"}});
  CHECK(same.name == "MISSING");
  CHECK(same.same_semantics(missing));
}

TEST_CASE("compose_variant validates overrides against the world") {
  const WorldSpec spec = absurd::builtin_soccer_world();
  const RulesetVariant real = absurd::find_ruleset("soccer", "REAL");
  CHECK(kind_of([&] { absurd::compose_variant(spec, real, {{"Symbol_Nope", "x"}}); }) ==
        ErrorKind::kInvalidArg);
  CHECK(kind_of([&] { absurd::compose_variant(spec, real, {{"Symbol_Score", "banana"}}); }) ==
        ErrorKind::kInvalidArg);
}

TEST_CASE("change_tag_for_slot maps slots to their facet") {
  CHECK(absurd::change_tag_for_slot("Symbol_Action") == ChangeTag::kActions);
  CHECK(absurd::change_tag_for_slot("Symbol_Comparator") == ChangeTag::kRules);
  CHECK(absurd::change_tag_for_slot("Symbol_Winner_Order") == ChangeTag::kRules);
  CHECK(absurd::change_tag_for_slot("Symbol_Score") == ChangeTag::kSymbols);
  CHECK(absurd::change_tag_for_slot("Symbol_Ball") == ChangeTag::kSymbols);
}

TEST_CASE("builtin_door_world rejects impossible shapes") {
  CHECK(kind_of([] { absurd::builtin_door_world(0, 1, 3, 1); }) == ErrorKind::kInvalidArg);
  CHECK(kind_of([] { absurd::builtin_door_world(5, 5, 3, 3); }) == ErrorKind::kInvalidArg);
  CHECK(kind_of([] { absurd::builtin_door_world(5, 2, 0, 3); }) == ErrorKind::kInvalidArg);
  CHECK(kind_of([] { absurd::builtin_door_world(5, 2, 3, 6); }) == ErrorKind::kInvalidArg);
  CHECK_NOTHROW(absurd::builtin_door_world(5, 2, 3, 5));
}

TEST_CASE("world JSON round-trips") {
  for (const WorldSpec& spec :
       {absurd::builtin_soccer_world(), absurd::builtin_door_world(6, 3, 4, 4)}) {
    const WorldSpec back = absurd::world_from_json(absurd::world_to_json(spec));
    CHECK(back.world_id == spec.world_id);
    CHECK(back.oracle_id == spec.oracle_id);
    CHECK(back.sequence_policy == spec.sequence_policy);
    CHECK(back.rules_template == spec.rules_template);
    CHECK(back.event_template == spec.event_template);
    CHECK(back.question_template == spec.question_template);
    CHECK(back.params == spec.params);
    REQUIRE(back.slots.size() == spec.slots.size());
    for (std::size_t i = 0; i < spec.slots.size(); ++i) {
      CHECK(back.slots[i].slot_name == spec.slots[i].slot_name);
      CHECK(back.slots[i].candidates == spec.slots[i].candidates);
    }
  }
}

TEST_CASE("variant JSON round-trips") {
  for (const auto& variant : absurd::ruleset_registry("soccer")) {
    const RulesetVariant back = absurd::variant_from_json(absurd::variant_to_json(variant));
    CHECK(back.name == variant.name);
    CHECK(back.same_semantics(variant));
  }
}

TEST_CASE("template_placeholders finds bracketed names in order") {
  CHECK(absurd::template_placeholders("[A] beats [B_C] at [A]") ==
        std::vector<std::string>{"A", "B_C", "A"});
  CHECK(absurd::template_placeholders("nothing here").empty());
  CHECK(absurd::template_placeholders("[broken").empty());
  CHECK(absurd::template_placeholders("[[X]]") == std::vector<std::string>{"X"});
}

TEST_CASE("find_slot and param fall back sensibly") {
  const WorldSpec spec = absurd::builtin_door_world(5, 2, 3, 4);
  CHECK(spec.find_slot("Symbol_Winner_Order") != nullptr);
  CHECK(spec.find_slot("Symbol_Missing") == nullptr);
  CHECK(spec.param("door_count", 0) == 5);
  CHECK(spec.param("unset_param", 17) == 17);
}

TEST_CASE("load_world_file round-trips a world document") {
  const auto path = temp_file("absurd_test_world.json");
  {
    nlohmann::json doc = {{"world", absurd::world_to_json(absurd::builtin_soccer_world())},
                          {"rulesets", nlohmann::json::array()}};
    for (const auto& v : absurd::ruleset_registry("soccer")) {
      doc["rulesets"].push_back(absurd::variant_to_json(v));
    }
    std::ofstream out(path);
    out << doc.dump(2);
  }
  const absurd::WorldFile file = absurd::load_world_file(path.string());
  CHECK(file.world.world_id == "soccer");
  CHECK(file.rulesets.size() == 7);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(absurd::load_world_file("/nonexistent/world.json"), Error);
}

TEST_CASE("load_world_file rejects invalid documents") {
  const auto path = temp_file("absurd_test_bad_world.json");
  {
    nlohmann::json world = absurd::world_to_json(absurd::builtin_soccer_world());
    world["rules_template"] = std::string(world["rules_template"]) + " [Mystery_Slot]";
    std::ofstream out(path);
    out << nlohmann::json{{"world", world}, {"rulesets", nlohmann::json::array()}}.dump();
  }
  try {
    absurd::load_world_file(path.string());
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
    CHECK(std::string(e.what()).find("Mystery_Slot") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("builtin_worlds_json lists both worlds with their registries") {
  const nlohmann::json j = absurd::builtin_worlds_json();
  REQUIRE(j.contains("worlds"));
  REQUIRE(j["worlds"].size() == 2);
  CHECK(j["worlds"][0]["world"]["world_id"] == "soccer");
  CHECK(j["worlds"][0]["rulesets"].size() == 7);
  CHECK(j["worlds"][1]["world"]["world_id"] == "door");
  CHECK(j["worlds"][1]["rulesets"].size() == 2);
}

TEST_CASE("change tag and sequence policy names round-trip") {
  for (ChangeTag tag : {ChangeTag::kSymbols, ChangeTag::kActions, ChangeTag::kRules}) {
    CHECK(absurd::parse_change_tag(absurd::to_string(tag)) == tag);
  }
  CHECK_THROWS_AS(absurd::parse_change_tag("COLORS"), Error);
  for (absurd::SequencePolicy p :
       {absurd::SequencePolicy::kFixedAlternation, absurd::SequencePolicy::kRandomizedOrder}) {
    CHECK(absurd::parse_sequence_policy(absurd::to_string(p)) == p);
  }
}
