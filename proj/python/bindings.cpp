#include <pybind11/pybind11.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>

#include "ssp/bounds.hpp"
#include "ssp/dp.hpp"
#include "ssp/gridworld.hpp"
#include "ssp/io.hpp"
#include "ssp/properness.hpp"

namespace py = pybind11;
using namespace ssp;

namespace {

ValueFunction to_values(const SspProblem& p, const std::vector<double>& v) {
  ValueFunction J(v, p.terminal());
  check_value_function(p, J);
  return J;
}

DeterministicPolicy to_policy(const SspProblem& p, const std::vector<ActionIndex>& actions) {
  DeterministicPolicy mu(actions);
  check_policy(p, mu);
  return mu;
}

std::vector<ActionIndex> actions_of(const DeterministicPolicy& mu) {
  return {mu.actions().begin(), mu.actions().end()};
}

std::vector<double> values_of(const ValueFunction& J) {
  return {J.values().begin(), J.values().end()};
}

BoundsMethod parse_method(const std::string& name) {
  if (name == "auto") return BoundsMethod::kAuto;
  if (name == "positive-cost") return BoundsMethod::kPositiveCost;
  if (name == "all-proper") return BoundsMethod::kAllProper;
  if (name == "general") return BoundsMethod::kGeneral;
  throw std::invalid_argument("unknown bounds method: " + name);
}

py::dict trace_dict(const IterationTrace& trace) {
  py::list values, residuals;
  for (const auto& rec : trace) {
    values.append(values_of(rec.value));
    residuals.append(rec.stats.residual);
  }
  py::dict out;
  out["values"] = values;
  out["residuals"] = residuals;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stochastic shortest path solvers with Bellman-residual bounds";

  // SspError(message).kind carries the error kind, e.g. "ImproperPolicy".
  m.attr("SspError") = py::reinterpret_steal<py::object>(
      PyErr_NewException("sspbounds._core.SspError", PyExc_RuntimeError, nullptr));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::module_::import("sspbounds._core").attr("SspError");
      py::object instance = exc(std::string(e.what()));
      instance.attr("kind") = std::string(e.kind());
      PyErr_SetObject(exc.ptr(), instance.ptr());
    }
  });

  py::class_<SspProblem>(m, "Problem")
      .def(py::init([](std::size_t n, std::size_t a, StateIndex t, std::vector<double> prob,
                       std::vector<double> cost) {
             SspProblem p(n, a, t, std::move(prob), std::move(cost));
             validate(p);
             return p;
           }),
           py::arg("num_states"), py::arg("num_actions"), py::arg("terminal"), py::arg("prob"),
           py::arg("cost"), "Flat row-major (state, action, successor) tensors.")
      .def_property_readonly("num_states", &SspProblem::num_states)
      .def_property_readonly("num_actions", &SspProblem::num_actions)
      .def_property_readonly("terminal", &SspProblem::terminal)
      .def_property_readonly("prob", &SspProblem::prob_tensor)
      .def_property_readonly("cost", &SspProblem::cost_tensor)
      .def("to_json", [](const SspProblem& p, const std::string& convention) {
             return io::problem_to_json(p, convention == "reward" ? io::Convention::kReward
                                                                  : io::Convention::kCost)
                 .dump(2);
           },
           py::arg("convention") = "cost")
      .def(py::self == py::self);

  m.def("parse_problem", [](const std::string& text) {
    auto loaded = io::parse_problem(text);
    return py::make_tuple(loaded.problem, std::string(io::to_string(loaded.convention)));
  });
  m.def("load_problem", [](const std::string& path) {
    auto loaded = io::load_problem(path);
    return py::make_tuple(loaded.problem, std::string(io::to_string(loaded.convention)));
  });
  m.def("gridworld", [](const std::string& model) {
    if (model != "published" && model != "textbook") throw std::invalid_argument("model: " + model);
    return gridworld::build(model == "textbook" ? gridworld::Model::kTextbook
                                                : gridworld::Model::kPublished);
  }, py::arg("model") = "published");
  m.def("from_discounted", [](std::size_t n, std::size_t a, std::vector<double> prob,
                              std::vector<double> cost, double beta) {
    return from_discounted(DiscountedMdp{n, a, std::move(prob), std::move(cost)}, beta);
  }, py::arg("num_states"), py::arg("num_actions"), py::arg("prob"), py::arg("cost"),
     py::arg("beta"));

  m.def("bellman_backup", [](const SspProblem& p, const std::vector<double>& J) {
    return values_of(bellman_backup(p, to_values(p, J)));
  });
  m.def("greedy_policy", [](const SspProblem& p, const std::vector<double>& J) {
    return actions_of(greedy_policy(p, to_values(p, J)));
  });
  m.def("bellman_residual", [](const SspProblem& p, const std::vector<double>& J) {
    const auto s = bellman_residual(p, to_values(p, J));
    return py::make_tuple(s.residual, s.c_under, s.c_bar);
  }, "Returns (residual, c_under, c_bar).");
  m.def("is_uniformly_improvable", [](const SspProblem& p, const std::vector<double>& J) {
    return is_uniformly_improvable(p, to_values(p, J));
  });
  m.def("evaluate_policy", [](const SspProblem& p, const std::vector<ActionIndex>& mu) {
    return values_of(evaluate_policy(p, to_policy(p, mu)));
  });
  m.def("evaluate_uniform_random", [](const SspProblem& p) {
    return values_of(evaluate_policy(p, uniform_random_policy(p)));
  });
  m.def("value_iteration", [](const SspProblem& p, const std::vector<double>& J0, double epsilon,
                              std::size_t max_iters) {
    const auto r = value_iteration(p, to_values(p, J0), epsilon, max_iters);
    auto out = trace_dict(r.trace);
    out["value"] = values_of(r.value);
    out["converged"] = r.converged;
    return out;
  }, py::arg("problem"), py::arg("initial"), py::arg("epsilon") = 1e-6,
     py::arg("max_iters") = 100000);
  m.def("policy_iteration", [](const SspProblem& p, std::optional<std::vector<ActionIndex>> mu0,
                               std::size_t max_iters) {
    const Policy initial = mu0 ? Policy(to_policy(p, *mu0)) : Policy(uniform_random_policy(p));
    const auto r = policy_iteration(p, initial, max_iters);
    auto out = trace_dict(r.trace);
    out["value"] = values_of(r.value);
    out["policy"] = actions_of(r.policy);
    out["improvements"] = r.improvements;
    out["converged"] = r.converged;
    return out;
  }, py::arg("problem"), py::arg("initial") = py::none(), py::arg("max_iters") = 1000,
     "Starts from the uniform random policy when `initial` is None.");

  m.def("is_proper", [](const SspProblem& p, const std::vector<ActionIndex>& mu) {
    return io::to_json(is_proper(p, to_policy(p, mu))).dump();
  });
  m.def("all_policies_proper", [](const SspProblem& p) {
    return io::to_json(all_policies_proper(p)).dump();
  });
  m.def("bounds_report", [](const SspProblem& p, const std::vector<double>& J,
                            const std::string& method) {
    return io::to_json(bounds_report(p, to_values(p, J), parse_method(method))).dump();
  }, py::arg("problem"), py::arg("values"), py::arg("method") = "auto");
  m.def("horizon_m_general", [](const SspProblem& p, const std::vector<double>& J,
                                bool pseudocode, std::size_t max_stages) {
    HorizonOptions options;
    options.criterion = pseudocode ? HorizonCriterion::kPseudocode
                                   : HorizonCriterion::kWithTerminalCost;
    options.max_stages = max_stages;
    return io::to_json(horizon_m_general(p, to_values(p, J), options)).dump();
  }, py::arg("problem"), py::arg("values"), py::arg("pseudocode_criterion") = false,
     py::arg("max_stages") = 1'000'000);
  m.def("loose_general_bound", [](const SspProblem& p, const std::vector<double>& J) {
    return loose_general_bound(p, horizon_m_general(p, to_values(p, J))).effective();
  });
  m.def("monte_carlo_steps", [](const SspProblem& p, const std::vector<ActionIndex>& mu,
                                StateIndex start, std::size_t trials, std::uint64_t seed,
                                std::size_t cap) {
    if (start >= p.num_states()) throw std::out_of_range("start state");
    return io::to_json(monte_carlo_steps(p, to_policy(p, mu), start, trials, seed, cap)).dump();
  }, py::arg("problem"), py::arg("policy"), py::arg("start"), py::arg("trials"),
     py::arg("seed") = 0, py::arg("cap") = 1'000'000);

  m.def("table1_csv", [](const std::string& algorithm) {
    const auto alg = algorithm == "vi" ? gridworld::Algorithm::kValueIteration
                                       : gridworld::Algorithm::kPolicyIteration;
    const auto rows = gridworld::run_table1(gridworld::build(), alg);
    const auto cmp = gridworld::compare_table1(rows, gridworld::reference_table1(alg));
    return py::make_tuple(gridworld::table1_csv(rows), cmp.pass());
  }, py::arg("algorithm") = "pi", "Returns (csv, matches_reference).");
  m.def("table2_csv", []() {
    const auto rows = gridworld::run_table2(gridworld::build());
    const auto cmp = gridworld::compare_table2(rows, gridworld::reference_table2());
    return py::make_tuple(gridworld::table2_csv(rows), cmp.pass());
  }, "Returns (csv, matches_reference).");
}
