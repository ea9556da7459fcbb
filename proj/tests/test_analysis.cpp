#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "doctest.h"

#include "absurd/analysis.hpp"
#include "absurd/generator.hpp"
#include "absurd/scoring.hpp"
#include "absurd/world.hpp"

using absurd::Error;
using absurd::ErrorKind;
using absurd::ExpectedLabel;
using absurd::Mode;
using absurd::RunRecord;
using absurd::TokenLogprobs;
using absurd::TTestResult;

namespace {

const double kPi = std::acos(-1.0);

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kInternal;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::filesystem::path fresh_dir(const std::string& stem) {
  const auto dir =
      std::filesystem::temp_directory_path() / (stem + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

TokenLogprobs uniform_token(int k) {
  std::vector<absurd::TokenAlt> alts;
  for (int i = 0; i < k; ++i) alts.push_back({"t" + std::to_string(i), -1.25});
  return {alts};
}

}  // namespace

TEST_CASE("reg_inc_beta satisfies the standard identities") {
  CHECK(absurd::reg_inc_beta(2.5, 3.0, 0.0) == 0.0);
  CHECK(absurd::reg_inc_beta(2.5, 3.0, 1.0) == 1.0);
  for (double x : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    // I_x(1,1) is the identity; I_x(1/2,1/2) = (2/pi) asin(sqrt(x)).
    CHECK(absurd::reg_inc_beta(1.0, 1.0, x) == doctest::Approx(x).epsilon(1e-12));
    CHECK(absurd::reg_inc_beta(0.5, 0.5, x) ==
          doctest::Approx(2.0 / kPi * std::asin(std::sqrt(x))).epsilon(1e-10));
  }
  CHECK(absurd::reg_inc_beta(0.5, 0.5, 0.25) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  for (double a : {0.5, 1.0, 2.0, 6.5}) {
    for (double b : {0.5, 1.5, 4.0}) {
      for (double x : {0.05, 0.3, 0.6, 0.95}) {
        CHECK(absurd::reg_inc_beta(a, b, x) ==
              doctest::Approx(1.0 - absurd::reg_inc_beta(b, a, 1.0 - x)).epsilon(1e-10));
      }
    }
  }

  CHECK(kind_of([] { absurd::reg_inc_beta(0.0, 1.0, 0.5); }) == ErrorKind::kInvalidArg);
  CHECK(kind_of([] { absurd::reg_inc_beta(1.0, -2.0, 0.5); }) == ErrorKind::kInvalidArg);
  CHECK(kind_of([] { absurd::reg_inc_beta(1.0, 1.0, -0.1); }) == ErrorKind::kInvalidArg);
  CHECK(kind_of([] { absurd::reg_inc_beta(1.0, 1.0, 1.1); }) == ErrorKind::kInvalidArg);
}

TEST_CASE("student_t_upper_tail matches the low-df closed forms") {
  for (double t : {-6.0, -2.0, -1.0, -0.25, 0.0, 0.25, 1.0, 2.0, 6.0}) {
    // df=1 is a Cauchy tail, df=2 has an elementary antiderivative.
    CHECK(absurd::student_t_upper_tail(t, 1.0) ==
          doctest::Approx(0.5 - std::atan(t) / kPi).epsilon(1e-9));
    CHECK(absurd::student_t_upper_tail(t, 2.0) ==
          doctest::Approx(0.5 * (1.0 - t / std::sqrt(2.0 + t * t))).epsilon(1e-9));
  }
}

TEST_CASE("student_t_upper_tail behaves like a survival function") {
  CHECK(absurd::student_t_upper_tail(0.0, 7.0) == doctest::Approx(0.5).epsilon(1e-12));
  for (double t : {0.3, 1.1, 2.9}) {
    CHECK(absurd::student_t_upper_tail(t, 7.0) + absurd::student_t_upper_tail(-t, 7.0) ==
          doctest::Approx(1.0).epsilon(1e-10));
  }
  double previous = 1.0;
  for (double t = -4.0; t <= 4.0; t += 0.5) {
    const double p = absurd::student_t_upper_tail(t, 5.0);
    CHECK(p < previous);
    previous = p;
  }
  CHECK(absurd::student_t_upper_tail(std::numeric_limits<double>::infinity(), 3.0) == 0.0);
  CHECK(absurd::student_t_upper_tail(-std::numeric_limits<double>::infinity(), 3.0) == 1.0);
  CHECK(kind_of([] {
          absurd::student_t_upper_tail(std::numeric_limits<double>::quiet_NaN(), 3.0);
        }) == ErrorKind::kInvalidArg);
  CHECK(kind_of([] { absurd::student_t_upper_tail(1.0, 0.0); }) == ErrorKind::kInvalidArg);
  CHECK(kind_of([] { absurd::student_t_upper_tail(1.0, -2.0); }) == ErrorKind::kInvalidArg);
}

TEST_CASE("paired_ttest reproduces a worked example") {
  const std::map<std::string, double> do0 = {{"a", 1.0}, {"b", 1.0}, {"c", 1.0}};
  const std::map<std::string, double> dofs = {{"a", 0.9}, {"b", 0.8}, {"c", 1.0}};
  const TTestResult r = absurd::paired_ttest(do0, dofs, "REAL");

  CHECK(r.ruleset_name == "REAL");
  CHECK(r.n_models == 3);
  CHECK(r.degrees_of_freedom == 2);
  CHECK(r.mean_do0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.mean_dofs == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(r.difference == doctest::Approx(0.1).epsilon(1e-12));
  // d = {0.1, 0.2, 0.0}: mean 0.1, sd 0.1, so t = 0.1/(0.1/sqrt 3) = sqrt 3.
  CHECK(r.t_statistic == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));
  // df=2 closed form: p = (1 - sqrt(3)/sqrt(5)) / 2.
  CHECK(r.p_value ==
        doctest::Approx(0.5 * (1.0 - std::sqrt(3.0 / 5.0))).epsilon(1e-9));
  CHECK(r.p_value == doctest::Approx(0.11270166537925831).epsilon(1e-9));
  CHECK_FALSE(r.degenerate);
}

TEST_CASE("paired_ttest validates its inputs") {
  const std::map<std::string, double> two = {{"a", 1.0}, {"b", 0.9}};
  const std::map<std::string, double> three = {{"a", 1.0}, {"b", 0.9}, {"c", 0.8}};
  const std::map<std::string, double> renamed = {{"a", 1.0}, {"z", 0.9}};
  CHECK(kind_of([&] { absurd::paired_ttest(two, three, "REAL"); }) ==
        ErrorKind::kInvalidArg);
  CHECK(kind_of([&] { absurd::paired_ttest(two, renamed, "REAL"); }) ==
        ErrorKind::kInvalidArg);
  CHECK(kind_of([&] {
          absurd::paired_ttest({{"solo", 1.0}}, {{"solo", 0.9}}, "REAL");
        }) == ErrorKind::kInvalidArg);
}

TEST_CASE("paired_ttest reports zero-variance inputs as degenerate") {
  const std::map<std::string, double> base = {{"a", 0.8}, {"b", 0.9}, {"c", 0.7}};
  std::map<std::string, double> shifted_down;
  std::map<std::string, double> shifted_up;
  for (const auto& [k, v] : base) {
    shifted_down[k] = v - 0.1;
    shifted_up[k] = v + 0.1;
  }

  const TTestResult flat = absurd::paired_ttest(base, base, "REAL");
  CHECK(flat.degenerate);
  CHECK(flat.t_statistic == 0.0);
  CHECK(flat.p_value == doctest::Approx(0.5));

  const TTestResult better = absurd::paired_ttest(base, shifted_down, "REAL");
  CHECK(better.degenerate);
  CHECK(std::isinf(better.t_statistic));
  CHECK(better.t_statistic > 0.0);
  CHECK(better.p_value == doctest::Approx(1e-300));

  const TTestResult worse = absurd::paired_ttest(base, shifted_up, "REAL");
  CHECK(worse.degenerate);
  CHECK(std::isinf(worse.t_statistic));
  CHECK(worse.t_statistic < 0.0);
  CHECK(worse.p_value == doctest::Approx(1.0 - 1e-16));
}

TEST_CASE("response_entropy on known distributions") {
  CHECK(absurd::response_entropy({{{"a", 0.0}}}) == 0.0);
  // A single alternative renormalizes to probability one regardless of mass.
  CHECK(absurd::response_entropy({{{"a", -5.0}}}) == 0.0);
  CHECK(absurd::response_entropy(uniform_token(4)) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(absurd::response_entropy(uniform_token(2)) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // Two tokens: H = 0 and H = ln 2, averaged.
  TokenLogprobs two_tokens = {{{"a", 0.0}}, {{"b", -0.7}, {"c", -0.7}}};
  CHECK(absurd::response_entropy(two_tokens) ==
        doctest::Approx(std::log(2.0) / 2.0).epsilon(1e-12));

  // Unnormalized pair {-1, -3} against a hand softmax.
  const double z = 1.0 + std::exp(-2.0);
  const double p1 = 1.0 / z;
  const double p2 = std::exp(-2.0) / z;
  const double expected = -(p1 * std::log(p1) + p2 * std::log(p2));
  CHECK(absurd::response_entropy({{{"a", -1.0}, {"b", -3.0}}}) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("response_entropy never exceeds ln k") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> lp(-8.0, 0.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + static_cast<int>(gen() % 7);
    std::vector<absurd::TokenAlt> alts;
    for (int i = 0; i < k; ++i) alts.push_back({"t", lp(gen)});
    const double h = absurd::response_entropy({alts});
    CHECK(h >= 0.0);
    CHECK(h <= std::log(static_cast<double>(k)) + 1e-12);
  }
}

TEST_CASE("response_entropy rejects malformed inputs") {
  CHECK(kind_of([] { absurd::response_entropy({}); }) == ErrorKind::kInvalidArg);
  CHECK(kind_of([] { absurd::response_entropy({{}}); }) == ErrorKind::kInvalidArg);
  CHECK(kind_of([] { absurd::response_entropy({{{"a", 0.5}}}); }) == ErrorKind::kInvalidArg);
}

TEST_CASE("entropy_report groups, means, and scatter exclusions") {
  const absurd::WorldSpec world = absurd::builtin_soccer_world();
  const auto batch =
      absurd::generate_batch(world, absurd::find_ruleset("soccer", "REAL"), 4, 555);
  const auto index = absurd::build_prompt_index(batch);

  auto record_for = [&](std::size_t i, const std::string& model_id, bool right) {
    const absurd::PromptInstance& p = batch[i];
    const ExpectedLabel answer =
        right ? p.expected
              : (p.expected.matches(ExpectedLabel::player_one()) ? ExpectedLabel::player_two()
                                                                 : ExpectedLabel::player_one());
    RunRecord r;
    r.instance_id = p.instance_id;
    r.model_id = model_id;
    r.mode = p.mode;
    r.ruleset_name = p.ruleset_name;
    r.raw_text = "Final: {" + absurd::answer_surface_form(answer, p.binding) + "}";
    return r;
  };

  std::vector<RunRecord> records;
  RunRecord r0 = record_for(0, "mixed", true);
  r0.token_logprobs = TokenLogprobs{{{"x", 0.0}}};
  RunRecord r1 = record_for(1, "mixed", true);
  r1.token_logprobs = TokenLogprobs{{{"x", 0.0}}};
  RunRecord r2 = record_for(2, "mixed", false);
  r2.token_logprobs = uniform_token(4);
  RunRecord r3 = record_for(3, "mixed", true);  // no logprobs
  records.insert(records.end(), {r0, r1, r2, r3});

  // All-correct model: in summaries and the accuracy series, not in scatter.
  RunRecord s0 = record_for(0, "sure", true);
  s0.token_logprobs = uniform_token(2);
  RunRecord s1 = record_for(1, "sure", true);
  s1.token_logprobs = uniform_token(2);
  records.insert(records.end(), {s0, s1});

  // No logprobs anywhere: the whole group is omitted.
  records.push_back(record_for(0, "opaque", true));
  records.push_back(record_for(1, "opaque", false));

  const absurd::EntropyReport report = absurd::entropy_report(records, index);

  REQUIRE(report.summaries.size() == 2);
  const double ln4 = std::log(4.0);
  const auto& mixed = report.summaries[0];
  CHECK(mixed.model_id == "mixed");
  CHECK(mixed.ruleset_name == "REAL");
  CHECK(mixed.mode == Mode::kZeroShot);
  CHECK(mixed.records_with_logprobs == 3);
  CHECK(*mixed.mean_entropy_all == doctest::Approx(ln4 / 3.0).epsilon(1e-12));
  CHECK(*mixed.mean_entropy_correct == doctest::Approx(0.0));
  CHECK(*mixed.mean_entropy_incorrect == doctest::Approx(ln4).epsilon(1e-12));

  const auto& sure = report.summaries[1];
  CHECK(sure.model_id == "sure");
  CHECK(sure.records_with_logprobs == 2);
  CHECK(*sure.mean_entropy_correct == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK_FALSE(sure.mean_entropy_incorrect.has_value());

  REQUIRE(report.scatter.size() == 1);
  CHECK(report.scatter[0].model_id == "mixed");
  CHECK(report.scatter[0].correct_entropy == doctest::Approx(0.0));
  CHECK(report.scatter[0].incorrect_entropy == doctest::Approx(ln4).epsilon(1e-12));

  REQUIRE(report.accuracy_series.size() == 2);
  CHECK(report.accuracy_series[0].model_id == "mixed");
  CHECK(report.accuracy_series[0].accuracy == doctest::Approx(0.75));
  CHECK(report.accuracy_series[0].mean_entropy == doctest::Approx(ln4 / 3.0).epsilon(1e-12));
  CHECK(report.accuracy_series[1].model_id == "sure");
  CHECK(report.accuracy_series[1].accuracy == doctest::Approx(1.0));

  CHECK(absurd::entropy_report({}, index).summaries.empty());

  RunRecord stray = r0;
  stray.instance_id = "soccer-REAL-do0-99999-0000000000000042";
  CHECK(kind_of([&] { absurd::entropy_report({stray}, index); }) == ErrorKind::kInvalidArg);
}

TEST_CASE("emit_report writes every advertised file") {
  const auto dir = fresh_dir("absurd-report-test");
  const nlohmann::json manifest =
      absurd::emit_report({}, {}, {}, {}, {}, dir.string());

  CHECK(manifest.at("out_dir") == dir.string());
  CHECK(manifest.at("generated_at").get<std::string>().size() == 20);
  const auto files = manifest.at("files").get<std::vector<std::string>>();
  for (const std::string& wanted :
       {"per_model_do0.csv", "per_model_dofs.csv", "per_model_do0.json", "category_do0.csv",
        "category_dofs.csv", "radar_do0.csv", "radar_dofs.json", "entropy_scatter_do0.csv",
        "entropy_accuracy_dofs.csv", "ttest.csv", "ttest.json", "entropy_summary.csv",
        "entropy.json", "summary.txt"}) {
    CAPTURE(wanted);
    CHECK(std::count(files.begin(), files.end(), wanted) == 1);
  }
  for (const std::string& name : files) {
    CAPTURE(name);
    CHECK(std::filesystem::file_size(dir / name) > 0);
  }
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  CHECK(slurp(dir / "ttest.csv") ==
        "ruleset,mean_do0,mean_dofs,difference,t_statistic,p_value,degrees_of_freedom,"
        "n_models\n");
  std::filesystem::remove_all(dir);
}

TEST_CASE("ttest_csv rows and the trailing average") {
  const auto dir = fresh_dir("absurd-ttest-test");
  TTestResult a;
  a.ruleset_name = "REAL";
  a.mean_do0 = 0.96;
  a.mean_dofs = 0.84;
  a.difference = 0.12;
  a.t_statistic = 4.0;
  a.p_value = 0.0005;
  a.degrees_of_freedom = 13;
  a.n_models = 14;
  TTestResult b = a;
  b.ruleset_name = "CAR";
  b.mean_do0 = 0.90;
  b.mean_dofs = 0.80;
  b.difference = 0.10;

  absurd::emit_report({}, {}, {a, b}, {}, {}, dir.string());
  const std::string csv = slurp(dir / "ttest.csv");
  std::istringstream in(csv);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);

  REQUIRE(lines.size() == 4);
  CHECK(lines[0] ==
        "ruleset,mean_do0,mean_dofs,difference,t_statistic,p_value,degrees_of_freedom,"
        "n_models");
  CHECK(lines[1] == "REAL,0.960000,0.840000,0.120000,4,0.0005,13,14");
  CHECK(lines[2] == "CAR,0.900000,0.800000,0.100000,4,0.0005,13,14");
  CHECK(lines[3] == "AVERAGE,0.930000,0.820000,0.110000,,,,");
  std::filesystem::remove_all(dir);
}
