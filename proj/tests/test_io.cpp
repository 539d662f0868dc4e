#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ssp/gridworld.hpp"
#include "ssp/io.hpp"
#include "support.hpp"

using namespace ssp;
using namespace ssp::testing;

TEST_CASE("problem round trip") {
  std::mt19937_64 rng(10);
  for (int k = 0; k < 100; ++k) {
    const auto p = random_with_proper_policy(rng);
    for (auto c : {io::Convention::kCost, io::Convention::kReward}) {
      const auto text = io::problem_to_json(p, c).dump();
      const auto back = io::parse_problem(text);
      CHECK(back.convention == c);
      // Costs on zero-probability entries are not written.
      CHECK(back.problem.prob_tensor() == p.prob_tensor());
      for (std::size_t x = 0; x < p.prob_tensor().size(); ++x) {
        if (p.prob_tensor()[x] > 0.0) CHECK(back.problem.cost_tensor()[x] == p.cost_tensor()[x]);
        else CHECK(back.problem.cost_tensor()[x] == 0.0);
      }
      CHECK(io::problem_to_json(back.problem, c).dump() == text);
    }
  }
}

TEST_CASE("reward files are negated on load") {
  const char* text = R"({"num_states": 2, "num_actions": 1, "terminal": 0,
    "convention": "reward",
    "transitions": [{"from": 0, "action": 0, "to": 0, "prob": 1, "cost": 0},
                    {"from": 1, "action": 0, "to": 0, "prob": 1, "cost": -0.04}]})";
  const auto loaded = io::parse_problem(text);
  CHECK(loaded.problem.cost(1, 0, 0) == doctest::Approx(0.04));
  const auto out = io::problem_to_json(loaded.problem, io::Convention::kCost).dump();
  CHECK(out.find("-0.0,") == std::string::npos);
}

TEST_CASE("malformed problem files") {
  CHECK_THROWS_AS(io::parse_problem("{"), ParseError);
  CHECK_THROWS_AS(io::parse_problem("[]"), ParseError);
  CHECK_THROWS_AS(io::parse_problem(R"({"num_states": 2})"), ParseError);
  CHECK_THROWS_AS(io::parse_problem(R"({"num_states": 2, "num_actions": 1, "terminal": 5,
      "transitions": []})"),
                  ParseError);
  CHECK_THROWS_AS(io::parse_problem(R"({"num_states": 2, "num_actions": 1, "terminal": 0,
      "convention": "utility", "transitions": []})"),
                  ParseError);
  CHECK_THROWS_AS(io::parse_problem(R"({"num_states": 2, "num_actions": 1, "terminal": 0,
      "transitions": [{"from": 1, "action": 0, "to": 9, "prob": 1, "cost": 0}]})"),
                  ParseError);
  CHECK_THROWS_AS(io::parse_problem(R"({"num_states": 2, "num_actions": 1, "terminal": 0,
      "transitions": [{"from": 1, "action": 0, "to": 0, "prob": "x", "cost": 0}]})"),
                  ParseError);
  // Parses, but the rows do not sum to one.
  CHECK_THROWS_AS(io::parse_problem(R"({"num_states": 2, "num_actions": 1, "terminal": 0,
      "transitions": [{"from": 0, "action": 0, "to": 0, "prob": 1, "cost": 0},
                      {"from": 1, "action": 0, "to": 0, "prob": 0.5, "cost": 1}]})"),
                  ValidationError);
}

TEST_CASE("value files") {
  const auto bt = bt_instance();
  const auto J = io::parse_values(R"({"convention": "reward", "values": [0, -2]})", bt);
  CHECK(J[kBtState] == 2.0);
  CHECK(io::parse_values(io::values_to_json(J).dump(), bt) == J);
  CHECK(io::parse_values(io::values_to_json(J, io::Convention::kReward).dump(), bt) == J);
  CHECK_THROWS_AS(io::parse_values(R"({"values": [0]})", bt), ParseError);
  CHECK_THROWS_AS(io::parse_values(R"({"values": [1, 2]})", bt), ParseError);
}

TEST_CASE("report serialization") {
  const auto grid = build_gridworld();
  const auto J = policy_iteration(grid, uniform_random_policy(grid), 100).value;
  const auto report = bounds_report(grid, J);
  const auto j = io::to_json(report);
  CHECK(j["method"] == "positive-cost");
  CHECK(j["steps"]["method"] == "positive-cost");
  CHECK(j["steps"]["state_methods"][6] == "override");
  CHECK(j["steps"]["overrides"] == io::Json::array({3, 6}));
  CHECK(j["per_state"].size() == 12);
  CHECK(j.contains("expected_floor_steps"));

  const auto cert = io::to_json(horizon_m_general(grid, J));
  CHECK(cert["m"].get<std::size_t>() >= 1);
  CHECK(cert["terminating_sets"][0] == io::Json::array({11}));
  CHECK(cert["stage_values"][0][11].is_null());

  const auto proper = io::to_json(is_proper(bt_instance(), DeterministicPolicy({0, kStay})));
  CHECK(proper["proper"] == false);
  CHECK(proper["m_stages"].is_null());

  StepsBound infinite;
  infinite.method = StepsMethod::kGeneralLoose;
  infinite.steps = {0.0, kInfinity};
  CHECK(io::to_json(infinite)["steps"][1] == "inf");
}

TEST_CASE("trace csv") {
  std::vector<TraceRow> rows{{0, -1.5, 10.0, std::nullopt, std::nullopt},
                             {1, -0.0, 2.25, 0.5, 1.125}};
  CHECK(io::trace_csv(rows) == "iter,J_under,m,residual,error\n0,-1.5,10,-,-\n1,0,2.25,0.5,1.125\n");
  CHECK(io::format_number(1.0 / 3.0) == "0.333333");
}
