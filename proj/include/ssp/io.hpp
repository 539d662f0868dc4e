#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ssp/bounds.hpp"
#include "ssp/dp.hpp"
#include "ssp/problem.hpp"
#include "ssp/properness.hpp"

namespace ssp::io {

using Json = nlohmann::ordered_json;

enum class Convention { kCost, kReward };
std::string_view to_string(Convention convention);

struct LoadedProblem {
  SspProblem problem;  // always cost form
  Convention convention = Convention::kCost;
};

// Problem files:
//   {"num_states": n, "num_actions": m, "terminal": t,
//    "convention": "cost" | "reward",
//    "transitions": [{"from": i, "action": u, "to": j, "prob": p, "cost": g}, ...]}
// Omitted triples have probability 0; repeated triples add their
// probabilities and must agree on cost. Reward files are negated on load.
// Malformed input throws ParseError; the result is then validated
// (ValidationError).
LoadedProblem parse_problem(std::string_view text);
LoadedProblem load_problem(const std::filesystem::path& path);

// Positive-probability triples in (from, action, to) order. With
// Convention::kReward the costs are negated on output.
Json problem_to_json(const SspProblem& problem, Convention convention = Convention::kCost);

// Value files: {"convention": "cost" | "reward", "values": [...]}.
ValueFunction parse_values(std::string_view text, const SspProblem& problem);
ValueFunction load_values(const std::filesystem::path& path, const SspProblem& problem);
Json values_to_json(const ValueFunction& J, Convention convention = Convention::kCost);

Json to_json(const ResidualStats& stats);
Json to_json(const ProperCheckReport& report);
Json to_json(const AllProperResult& result);
Json to_json(const StepsBound& steps);
Json to_json(const HorizonCertificate& certificate);
Json to_json(const BoundsReport& report);
Json to_json(const MonteCarloEstimate& estimate);
Json to_json(const TraceRow& row);

// iter,J_under,m,residual,error with 6 significant digits; "-" where a
// cell has no value.
std::string trace_csv(const std::vector<TraceRow>& rows);

// %.6g, with negative zero printed as 0.
std::string format_number(double value);

std::string read_file(const std::filesystem::path& path);

}  // namespace ssp::io
