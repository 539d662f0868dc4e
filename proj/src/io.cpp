#include "ssp/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ssp::io {

namespace {

// JSON has no infinity or NaN; such values are written as strings.
Json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v == 0.0 ? 0.0 : v;
}

Json numbers(std::span<const double> values) {
  Json out = Json::array();
  for (double v : values) out.push_back(number(v));
  return out;
}

template <typename T>
Json list(const std::vector<T>& values) {
  Json out = Json::array();
  for (const auto& v : values) out.push_back(v);
  return out;
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

const Json& field(const Json& object, const char* name) {
  if (!object.is_object()) throw ParseError("expected a JSON object");
  const auto it = object.find(name);
  if (it == object.end()) throw ParseError(std::string("missing field '") + name + "'");
  return *it;
}

std::size_t index_field(const Json& object, const char* name) {
  const Json& v = field(object, name);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ParseError(std::string("field '") + name + "' must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

double number_field(const Json& object, const char* name) {
  const Json& v = field(object, name);
  if (!v.is_number()) throw ParseError(std::string("field '") + name + "' must be a number");
  return v.get<double>();
}

Convention convention_field(const Json& object) {
  const auto it = object.find("convention");
  if (it == object.end()) return Convention::kCost;
  if (it->is_string()) {
    if (*it == "cost") return Convention::kCost;
    if (*it == "reward") return Convention::kReward;
  }
  throw ParseError("field 'convention' must be \"cost\" or \"reward\"");
}

}  // namespace

std::string_view to_string(Convention convention) {
  return convention == Convention::kReward ? "reward" : "cost";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

LoadedProblem parse_problem(std::string_view text) {
  const Json doc = parse_json(text);
  const std::size_t n = index_field(doc, "num_states");
  const std::size_t m = index_field(doc, "num_actions");
  const std::size_t t = index_field(doc, "terminal");
  if (n == 0 || m == 0) throw ParseError("num_states and num_actions must be positive");
  if (t >= n) throw ParseError("terminal index out of range");
  const Convention convention = convention_field(doc);
  const Json& transitions = field(doc, "transitions");
  if (!transitions.is_array()) throw ParseError("field 'transitions' must be an array");

  ProblemBuilder builder(n, m, t);
  for (std::size_t k = 0; k < transitions.size(); ++k) {
    const Json& rec = transitions[k];
    try {
      builder.transition(index_field(rec, "from"), index_field(rec, "action"),
                         index_field(rec, "to"), number_field(rec, "prob"),
                         number_field(rec, "cost"));
    } catch (const ParseError& e) {
      throw ParseError("transition " + std::to_string(k) + ": " + e.what());
    } catch (const std::logic_error& e) {
      throw ParseError("transition " + std::to_string(k) + ": " + e.what());
    }
  }
  SspProblem problem = builder.build();
  if (convention == Convention::kReward) problem = negate_costs(problem);
  validate(problem);
  return {std::move(problem), convention};
}

LoadedProblem load_problem(const std::filesystem::path& path) {
  return parse_problem(read_file(path));
}

Json problem_to_json(const SspProblem& problem, Convention convention) {
  Json transitions = Json::array();
  const double sign = convention == Convention::kReward ? -1.0 : 1.0;
  for (StateIndex i = 0; i < problem.num_states(); ++i) {
    for (ActionIndex u = 0; u < problem.num_actions(); ++u) {
      for (StateIndex j = 0; j < problem.num_states(); ++j) {
        const double p = problem.prob(i, u, j);
        if (p == 0.0) continue;
        Json rec;
        rec["from"] = i;
        rec["action"] = u;
        rec["to"] = j;
        rec["prob"] = p;
        rec["cost"] = number(sign * problem.cost(i, u, j));
        transitions.push_back(std::move(rec));
      }
    }
  }
  Json out;
  out["num_states"] = problem.num_states();
  out["num_actions"] = problem.num_actions();
  out["terminal"] = problem.terminal();
  out["convention"] = to_string(convention);
  out["transitions"] = std::move(transitions);
  return out;
}

ValueFunction parse_values(std::string_view text, const SspProblem& problem) {
  const Json doc = parse_json(text);
  const Convention convention = convention_field(doc);
  const Json& values = field(doc, "values");
  if (!values.is_array() || values.size() != problem.num_states()) {
    throw ParseError("field 'values' must be an array with one number per state");
  }
  std::vector<double> out;
  for (const Json& v : values) {
    if (!v.is_number()) throw ParseError("value entries must be numbers");
    const double x = v.get<double>();
    out.push_back(convention == Convention::kReward ? -x : x);
  }
  try {
    return ValueFunction(std::move(out), problem.terminal());
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

ValueFunction load_values(const std::filesystem::path& path, const SspProblem& problem) {
  return parse_values(read_file(path), problem);
}

Json values_to_json(const ValueFunction& J, Convention convention) {
  Json values = Json::array();
  for (double v : J.values()) values.push_back(number(convention == Convention::kReward ? -v : v));
  Json out;
  out["convention"] = to_string(convention);
  out["values"] = std::move(values);
  return out;
}

Json to_json(const ResidualStats& stats) {
  Json out;
  out["residual"] = number(stats.residual);
  out["c_under"] = number(stats.c_under);
  out["c_bar"] = number(stats.c_bar);
  return out;
}

Json to_json(const ProperCheckReport& report) {
  Json out;
  out["proper"] = report.proper;
  out["unreachable_states"] = list(report.unreachable_states);
  out["m_stages"] = report.m_stages ? Json(*report.m_stages) : Json(nullptr);
  out["rho_m"] = report.rho_m ? number(*report.rho_m) : Json(nullptr);
  out["rho_method"] = report.rho_method;
  return out;
}

Json to_json(const AllProperResult& result) {
  Json out;
  out["all_proper"] = result.all_proper;
  out["witness_states"] = list(result.witness_states);
  out["witness_actions"] = list(result.witness_actions);
  return out;
}

Json to_json(const StepsBound& steps) {
  Json out;
  out["method"] = to_string(steps.method);
  out["steps"] = numbers(steps.steps);
  out["effective"] = numbers(steps.effective());
  out["overrides"] = list(steps.overrides);
  Json methods = Json::array();
  for (StateIndex i = 0; i < steps.steps.size(); ++i) {
    const bool overridden =
        std::find(steps.overrides.begin(), steps.overrides.end(), i) != steps.overrides.end();
    methods.push_back(overridden ? to_string(StepsMethod::kOverride) : to_string(steps.method));
  }
  out["state_methods"] = std::move(methods);
  out["clamped"] = list(steps.clamped);
  if (steps.terminal_cost_floor) out["terminal_cost_floor"] = number(*steps.terminal_cost_floor);
  if (steps.step_cost_floor) out["step_cost_floor"] = number(*steps.step_cost_floor);
  return out;
}

Json to_json(const HorizonCertificate& certificate) {
  Json out;
  out["m"] = certificate.m;
  out["terminal_cost_floor"] = number(certificate.terminal_cost_floor);
  Json sets = Json::array();
  for (const auto& s : certificate.terminating_sets) sets.push_back(list(s));
  out["terminating_sets"] = std::move(sets);
  Json stages = Json::array();
  for (const auto& s : certificate.stage_values) {
    Json row = Json::array();
    for (double v : s) row.push_back(std::isnan(v) ? Json(nullptr) : number(v));
    stages.push_back(std::move(row));
  }
  out["stage_values"] = std::move(stages);
  return out;
}

Json to_json(const BoundsReport& report) {
  Json out;
  out["method"] = to_string(report.method);
  out["stats"] = to_json(report.stats);
  out["steps"] = to_json(report.steps);
  out["per_state"] = numbers(report.per_state);
  out["global"] = number(report.global);
  out["vacuous"] = report.vacuous;
  if (report.expected_floor_steps) {
    out["expected_floor_steps"] = to_json(*report.expected_floor_steps);
  }
  if (report.certificate) out["certificate"] = to_json(*report.certificate);
  return out;
}

Json to_json(const MonteCarloEstimate& estimate) {
  Json out;
  out["mean"] = number(estimate.mean);
  out["std_error"] = number(estimate.std_error);
  out["ci95"] = number(estimate.ci95);
  out["completed"] = estimate.completed;
  out["capped"] = estimate.capped;
  return out;
}

Json to_json(const TraceRow& row) {
  Json out;
  out["iter"] = row.iteration;
  out["J_under"] = number(row.worst_value);
  out["m"] = number(row.m);
  out["residual"] = row.residual ? number(*row.residual) : Json(nullptr);
  out["error"] = row.error ? number(*row.error) : Json(nullptr);
  return out;
}

std::string format_number(double value) {
  if (value == 0.0) value = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

std::string trace_csv(const std::vector<TraceRow>& rows) {
  std::ostringstream out;
  out << "iter,J_under,m,residual,error\n";
  for (const auto& r : rows) {
    out << r.iteration << ',' << format_number(r.worst_value) << ',' << format_number(r.m)
        << ',' << (r.residual ? format_number(*r.residual) : "-") << ','
        << (r.error ? format_number(*r.error) : "-") << '\n';
  }
  return out.str();
}

}  // namespace ssp::io
