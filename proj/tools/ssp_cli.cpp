// ssp: solve, bound, check and convert stochastic shortest path instances.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ssp/bounds.hpp"
#include "ssp/dp.hpp"
#include "ssp/gridworld.hpp"
#include "ssp/io.hpp"
#include "ssp/properness.hpp"

namespace {

using ssp::io::Convention;
using ssp::io::Json;

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kInvalidInput = 2,
  kBadPolicyOrValues = 3,
  kHorizonCap = 4,
};

int exit_code_for(const ssp::Error& e) {
  if (dynamic_cast<const ssp::ParseError*>(&e) || dynamic_cast<const ssp::ValidationError*>(&e)) {
    return kInvalidInput;
  }
  if (dynamic_cast<const ssp::ImproperPolicyError*>(&e) ||
      dynamic_cast<const ssp::NotUniformlyImprovableError*>(&e)) {
    return kBadPolicyOrValues;
  }
  if (dynamic_cast<const ssp::HorizonCapExceededError*>(&e)) return kHorizonCap;
  return kFailure;
}

void print_error(std::string_view kind, std::string_view message) {
  Json err;
  err["error"] = kind;
  err["message"] = message;
  std::cerr << err.dump() << '\n';
}

struct SolveConfig {
  std::string input;
  std::string algorithm = "vi";
  std::string init = "uniform-random";
  double epsilon = 1e-6;
  std::size_t max_iters = 10'000;
  std::string bounds = "auto";
  std::uint64_t seed = 0;
  std::size_t mc_trials = 0;
  std::size_t mc_cap = 1'000'000;
  std::string format = "csv";
  std::string output;
};

struct BenchConfig {
  std::string table;
  std::string algorithm = "vi";
  std::string model = "published";
  std::string convention = "reward";
  std::string output;
};

struct CheckConfig {
  std::string input;
  std::string values;
  bool pseudocode = false;
};

struct ConvertConfig {
  std::string input;
  std::string to;
  std::string output;
};

ssp::BoundsMethod parse_bounds(const std::string& name) {
  if (name == "positive-cost") return ssp::BoundsMethod::kPositiveCost;
  if (name == "all-proper") return ssp::BoundsMethod::kAllProper;
  if (name == "general") return ssp::BoundsMethod::kGeneral;
  return ssp::BoundsMethod::kAuto;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::uint64_t effective_seed(std::uint64_t seed) {
  if (const char* env = std::getenv("SSP_SEED"); env && *env) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ssp::ParseError(std::string("SSP_SEED is not an unsigned integer: ") + env);
    }
  }
  return seed;
}

int cmd_solve(const SolveConfig& cfg) {
  const auto loaded = ssp::io::load_problem(cfg.input);
  const auto& problem = loaded.problem;
  const bool reward = loaded.convention == Convention::kReward;
  const double sign = reward ? -1.0 : 1.0;

  ssp::ValueFunction start;
  if (cfg.init == "uniform-random") {
    start = ssp::evaluate_policy(problem, ssp::uniform_random_policy(problem));
  } else if (cfg.init == "zero") {
    start = ssp::ValueFunction::zeros(problem);
  } else {
    start = ssp::io::load_values(cfg.init, problem);
  }

  const auto method = parse_bounds(cfg.bounds) == ssp::BoundsMethod::kAuto
                          ? ssp::resolve_bounds_method(problem)
                          : parse_bounds(cfg.bounds);
  // Bounds along the trace need TJ <= J from the first iterate on.
  if (method != ssp::BoundsMethod::kAllProper) ssp::require_uniformly_improvable(problem, start);

  ssp::IterationTrace trace;
  ssp::ValueFunction final_value;
  bool converged = false;
  if (cfg.algorithm == "pi") {
    const ssp::Policy initial =
        cfg.init == "uniform-random"
            ? ssp::Policy{ssp::uniform_random_policy(problem)}
            : ssp::Policy{ssp::greedy_policy(problem, start)};
    auto result = ssp::policy_iteration(problem, initial, cfg.max_iters);
    trace = std::move(result.trace);
    final_value = std::move(result.value);
    converged = result.converged;
  } else {
    auto result = ssp::value_iteration(problem, start, cfg.epsilon, cfg.max_iters);
    trace = std::move(result.trace);
    final_value = std::move(result.value);
    converged = result.converged;
  }

  const auto rows = ssp::summarize_trace(problem, trace, method, reward);
  const auto report = ssp::bounds_report(problem, final_value, method);
  const auto greedy = ssp::greedy_policy(problem, final_value);
  const auto effective = report.steps.effective();

  std::vector<std::optional<ssp::MonteCarloEstimate>> mc(problem.num_states());
  if (cfg.mc_trials > 0) {
    const auto seed = effective_seed(cfg.seed);
    for (ssp::StateIndex i = 0; i < problem.num_states(); ++i) {
      if (i == problem.terminal()) continue;
      mc[i] = ssp::monte_carlo_steps(problem, greedy, i, cfg.mc_trials, seed + i, cfg.mc_cap);
    }
  }

  std::ostringstream out;
  if (cfg.format == "json") {
    Json doc;
    doc["algorithm"] = cfg.algorithm;
    doc["convention"] = ssp::io::to_string(loaded.convention);
    doc["converged"] = converged;
    doc["iterations"] = trace.empty() ? 0 : trace.back().iteration;
    Json trace_json = Json::array();
    for (const auto& row : rows) trace_json.push_back(ssp::io::to_json(row));
    doc["trace"] = std::move(trace_json);
    doc["values"] = ssp::io::values_to_json(final_value, loaded.convention)["values"];
    Json policy = Json::array();
    for (auto a : greedy.actions()) policy.push_back(a);
    doc["greedy_policy"] = std::move(policy);
    doc["bounds"] = ssp::io::to_json(report);
    if (cfg.mc_trials > 0) {
      Json per_state = Json::array();
      for (const auto& est : mc) per_state.push_back(est ? ssp::io::to_json(*est) : Json(nullptr));
      doc["monte_carlo"] = std::move(per_state);
    }
    out << doc.dump(2) << '\n';
  } else {
    out << ssp::io::trace_csv(rows) << '\n';
    out << "state,value,action,steps,steps_method,bound";
    if (cfg.mc_trials > 0) out << ",mc_mean,mc_ci95";
    out << '\n';
    for (ssp::StateIndex i = 0; i < problem.num_states(); ++i) {
      if (i == problem.terminal()) continue;
      const bool overridden = std::find(report.steps.overrides.begin(),
                                        report.steps.overrides.end(),
                                        i) != report.steps.overrides.end();
      out << i << ',' << ssp::io::format_number(sign * final_value[i]) << ',' << greedy[i]
          << ',' << ssp::io::format_number(effective[i]) << ','
          << ssp::to_string(overridden ? ssp::StepsMethod::kOverride : report.steps.method)
          << ',' << ssp::io::format_number(report.per_state[i]);
      if (mc[i]) {
        out << ',' << ssp::io::format_number(mc[i]->mean) << ','
            << ssp::io::format_number(mc[i]->ci95);
      }
      out << '\n';
    }
  }
  emit(out.str(), cfg.output);
  return kOk;
}

int cmd_bench(const BenchConfig& cfg) {
  namespace gw = ssp::gridworld;
  const auto model = cfg.model == "textbook" ? gw::Model::kTextbook : gw::Model::kPublished;
  const auto problem = gw::build(model);

  if (cfg.table == "instance") {
    const auto convention = cfg.convention == "cost" ? Convention::kCost : Convention::kReward;
    emit(ssp::io::problem_to_json(problem, convention).dump(2) + "\n", cfg.output);
    return kOk;
  }

  std::string table;
  gw::Comparison comparison;
  if (cfg.table == "table1") {
    const auto algorithm =
        cfg.algorithm == "pi" ? gw::Algorithm::kPolicyIteration : gw::Algorithm::kValueIteration;
    const auto rows = gw::run_table1(problem, algorithm);
    table = gw::table1_csv(rows);
    comparison = gw::compare_table1(rows, gw::reference_table1(algorithm));
  } else {
    const auto rows = gw::run_table2(problem);
    table = gw::table2_csv(rows);
    comparison = gw::compare_table2(rows, gw::reference_table2());
  }
  emit(table + "\n" + gw::comparison_report(comparison), cfg.output);
  return comparison.pass() ? kOk : kFailure;
}

int cmd_check(const CheckConfig& cfg) {
  const auto loaded = ssp::io::load_problem(cfg.input);
  const auto& problem = loaded.problem;

  const auto all = ssp::all_policies_proper(problem);
  std::cout << "all_policies_proper: " << (all.all_proper ? "true" : "false");
  if (!all.all_proper) {
    std::cout << ", witness state" << (all.witness_states.size() > 1 ? "s" : "");
    for (std::size_t k = 0; k < all.witness_states.size(); ++k) {
      std::cout << (k ? ", " : " ") << all.witness_states[k];
    }
  }
  std::cout << '\n';
  std::cout << "witness: " << ssp::io::to_json(all).dump() << '\n';
  const auto uniform = ssp::is_proper(problem, ssp::uniform_random_policy(problem));
  std::cout << "uniform_random_policy: " << ssp::io::to_json(uniform).dump() << '\n';

  if (cfg.values.empty()) return kOk;
  const auto J = ssp::io::load_values(cfg.values, problem);
  const auto stats = ssp::bellman_residual(problem, J);
  const bool improvable = ssp::is_uniformly_improvable(problem, J);
  std::cout << "uniformly_improvable: " << (improvable ? "true" : "false") << '\n';
  std::cout << "residual: " << ssp::io::to_json(stats).dump() << '\n';
  if (!improvable) return kOk;
  ssp::HorizonOptions options;
  if (cfg.pseudocode) options.criterion = ssp::HorizonCriterion::kPseudocode;
  const auto cert = ssp::horizon_m_general(problem, J, options);
  std::cout << "horizon_m: " << cert.m << '\n';
  std::cout << "horizon_certificate: " << ssp::io::to_json(cert).dump() << '\n';
  return kOk;
}

int cmd_convert(const ConvertConfig& cfg) {
  const auto loaded = ssp::io::load_problem(cfg.input);
  Convention target;
  if (cfg.to.empty()) {
    target = loaded.convention == Convention::kCost ? Convention::kReward : Convention::kCost;
  } else {
    target = cfg.to == "reward" ? Convention::kReward : Convention::kCost;
  }
  emit(ssp::io::problem_to_json(loaded.problem, target).dump(2) + "\n", cfg.output);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solve stochastic shortest path problems with suboptimality bounds"};
  app.require_subcommand(1);

  SolveConfig solve;
  auto* solve_cmd = app.add_subcommand("solve", "Run value or policy iteration and report bounds");
  solve_cmd->add_option("input", solve.input, "Problem JSON file")->required();
  solve_cmd->add_option("--algorithm", solve.algorithm)
      ->check(CLI::IsMember({"vi", "pi"}))
      ->capture_default_str();
  solve_cmd->add_option("--init", solve.init, "uniform-random, zero, or a value-function JSON file")
      ->capture_default_str();
  solve_cmd->add_option("--epsilon", solve.epsilon)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  solve_cmd->add_option("--max-iters", solve.max_iters)
      ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()))
      ->capture_default_str();
  solve_cmd->add_option("--bounds", solve.bounds)
      ->check(CLI::IsMember({"auto", "positive-cost", "all-proper", "general"}))
      ->capture_default_str();
  solve_cmd->add_option("--seed", solve.seed, "Monte Carlo seed (SSP_SEED overrides)")
      ->capture_default_str();
  solve_cmd->add_option("--mc-trials", solve.mc_trials,
                        "Rollouts per state under the greedy policy (0 = none)")
      ->capture_default_str();
  solve_cmd->add_option("--mc-cap", solve.mc_cap, "Step cap per rollout")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  solve_cmd->add_option("--format", solve.format)
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  solve_cmd->add_option("--output,-o", solve.output, "Output file (default stdout)");

  BenchConfig bench;
  auto* bench_cmd = app.add_subcommand("bench", "Reproduce the gridworld reference tables");
  bench_cmd->add_option("table", bench.table)
      ->required()
      ->check(CLI::IsMember({"table1", "table2", "instance"}));
  bench_cmd->add_option("--algorithm", bench.algorithm)
      ->check(CLI::IsMember({"vi", "pi"}))
      ->capture_default_str();
  bench_cmd->add_option("--model", bench.model)
      ->check(CLI::IsMember({"published", "textbook"}))
      ->capture_default_str();
  bench_cmd->add_option("--convention", bench.convention, "Convention for `instance`")
      ->check(CLI::IsMember({"reward", "cost"}))
      ->capture_default_str();
  bench_cmd->add_option("--output,-o", bench.output);

  CheckConfig check;
  auto* check_cmd = app.add_subcommand("check", "Properness and horizon analysis");
  check_cmd->add_option("input", check.input)->required();
  check_cmd->add_option("--values", check.values, "Value-function JSON file");
  check_cmd->add_flag("--pseudocode-criterion", check.pseudocode,
                      "Stop the horizon recursion on J_k > J (no terminal cost term)");

  ConvertConfig convert;
  auto* convert_cmd = app.add_subcommand("convert", "Rewrite a problem in the other convention");
  convert_cmd->add_option("input", convert.input)->required();
  convert_cmd->add_option("--to", convert.to)->check(CLI::IsMember({"reward", "cost"}));
  convert_cmd->add_option("--output,-o", convert.output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("UsageError", e.what());
    return kInvalidInput;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve);
    if (*bench_cmd) return cmd_bench(bench);
    if (*check_cmd) return cmd_check(check);
    if (*convert_cmd) return cmd_convert(convert);
  } catch (const ssp::Error& e) {
    print_error(e.kind(), e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    print_error("Error", e.what());
    return kFailure;
  }
  return kFailure;
}
