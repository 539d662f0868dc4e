#include "ssp/gridworld.hpp"

#include <cmath>
#include <sstream>

#include "ssp/dp.hpp"
#include "ssp/io.hpp"
#include "ssp/properness.hpp"

namespace ssp::gridworld {

namespace {

constexpr int kRows = 3;
constexpr int kCols = 4;
constexpr int kDelta[kActions][2] = {{-1, 0}, {0, 1}, {1, 0}, {0, -1}};
constexpr double kIntended = 0.8;
constexpr double kSlip = 0.1;
constexpr ActionIndex kEast = 1;
constexpr ActionIndex kSouth = 2;

struct Redirect {
  StateIndex state;
  ActionIndex action;
  ActionIndex direction;  // direction actually moved
  StateIndex destination;
};
constexpr Redirect kPublishedRedirects[] = {{9, kEast, kSouth, 8}};

std::optional<StateIndex> state_at(int row, int col) {
  for (StateIndex s = 0; s < kCells; ++s) {
    if (kCellOf[s].row == row && kCellOf[s].col == col) return s;
  }
  return std::nullopt;
}

StateIndex move(StateIndex from, ActionIndex direction) {
  const int row = kCellOf[from].row + kDelta[direction][0];
  const int col = kCellOf[from].col + kDelta[direction][1];
  if (row < 0 || row >= kRows || col < 0 || col >= kCols) return from;
  return state_at(row, col).value_or(from);
}

void check(Comparison& out, std::size_t row, const std::string& column,
           double expected, double actual, double tolerance) {
  ++out.cells;
  if (!(std::abs(expected - actual) <= tolerance)) {
    out.mismatches.push_back({row, column, expected, actual});
  }
}

TraceRow ref(std::size_t k, double worst, double m, std::optional<double> residual = {},
             std::optional<double> error = {}) {
  return {k, worst, m, residual, error};
}

}  // namespace

SspProblem build(Model model) {
  ProblemBuilder builder(kStates, kActions, kTerminal);
  for (StateIndex s = 0; s < kCells; ++s) {
    for (ActionIndex u = 0; u < kActions; ++u) {
      if (s == kGoalState || s == kPitState) {
        builder.transition(s, u, kTerminal, 1.0, s == kGoalState ? -1.0 : 1.0);
        continue;
      }
      const std::pair<ActionIndex, double> outcomes[] = {
          {u, kIntended}, {(u + 1) % kActions, kSlip}, {(u + 3) % kActions, kSlip}};
      for (const auto& [direction, p] : outcomes) {
        StateIndex to = move(s, direction);
        if (model == Model::kPublished) {
          for (const auto& r : kPublishedRedirects) {
            if (r.state == s && r.action == u && r.direction == direction) to = r.destination;
          }
        }
        builder.transition(s, u, to, p, -kStepReward);
      }
    }
  }
  builder.absorbing_terminal();
  return builder.build();
}

std::vector<TraceRow> run_table1(const SspProblem& problem, Algorithm algorithm,
                                 std::size_t vi_iterations) {
  const auto start = evaluate_policy(problem, uniform_random_policy(problem));
  IterationTrace trace;
  if (algorithm == Algorithm::kValueIteration) {
    // A tiny epsilon so that exactly `vi_iterations` sweeps run.
    trace = value_iteration(problem, start, 1e-300, vi_iterations).trace;
  } else {
    trace = policy_iteration(problem, uniform_random_policy(problem), 1000).trace;
  }
  return summarize_trace(problem, trace, BoundsMethod::kPositiveCost, true);
}

std::vector<Table2Row> run_table2(const SspProblem& problem) {
  const auto result = policy_iteration(problem, uniform_random_policy(problem), 1000);
  std::vector<Table2Row> rows;
  for (const auto& record : result.trace) {
    const auto steps = steps_bound_positive_costs(problem, record.value);
    Table2Row row;
    row.iteration = record.iteration;
    for (StateIndex i = 0; i < problem.num_states(); ++i) {
      if (i == problem.terminal()) continue;
      row.value.push_back(-record.value[i]);
      row.steps.push_back(steps.steps[i]);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

const std::vector<TraceRow>& reference_table1(Algorithm algorithm) {
  static const std::vector<TraceRow> vi = {
      ref(0, -1.603, 66.1),
      ref(1, -1.570, 65.3, 0.9567, 62.428),
      ref(2, -1.430, 61.7, 0.8470, 52.302),
      ref(3, -1.206, 56.1, 0.7379, 41.433),
      ref(4, -0.876, 47.9, 0.6585, 31.551),
      ref(5, -0.256, 32.4, 0.6204, 20.102),
      ref(6, 0.153, 22.2, 0.4094, 9.075),
      ref(7, 0.263, 19.4, 0.2568, 4.991),
      ref(8, 0.310, 18.2, 0.1389, 2.534),
      ref(9, 0.333, 17.7, 0.0726, 1.282),
      ref(10, 0.345, 17.4, 0.0613, 1.066),
      ref(11, 0.351, 17.2, 0.0411, 0.708),
      ref(12, 0.358, 17.1, 0.0259, 0.442),
  };
  static const std::vector<TraceRow> pi = {
      ref(0, -1.603, 66.1),
      ref(1, -0.885, 48.1, 0.9567, 46.030),
      ref(2, 0.369, 16.8, 1.0070, 16.880),
      ref(3, 0.388, 16.3, 0.0186, 0.304),
      ref(4, 0.388, 16.3, 0.0000, 0.000),
  };
  return algorithm == Algorithm::kValueIteration ? vi : pi;
}

const std::vector<Table2Row>& reference_table2() {
  static const std::vector<Table2Row> rows = {
      {0,
       {-1.28, -0.88, -0.32, 1.00, -1.52, -0.92, -1.00, -1.60, -1.52, -1.28, -1.22},
       {58.0, 48.0, 34.0, 1.0, 64.1, 49.0, 51.0, 66.1, 64.1, 58.1, 56.5}},
      {1,
       {0.81, 0.87, 0.92, 1.00, 0.76, 0.66, -1.00, 0.68, 0.39, 0.44, -0.88},
       {5.7, 4.3, 3.1, 1.0, 7.0, 9.5, 51.0, 9.1, 16.3, 15.0, 48.1}},
      {2,
       {0.81, 0.87, 0.92, 1.00, 0.76, 0.66, -1.00, 0.71, 0.66, 0.59, 0.37},
       {5.7, 4.3, 3.1, 1.0, 7.0, 9.5, 51.0, 8.4, 9.6, 11.2, 16.8}},
      {3,
       {0.81, 0.87, 0.92, 1.00, 0.76, 0.66, -1.00, 0.71, 0.66, 0.61, 0.39},
       {5.7, 4.3, 3.1, 1.0, 7.0, 9.5, 51.0, 8.4, 9.6, 10.7, 16.3}},
      {4,
       {0.81, 0.87, 0.92, 1.00, 0.76, 0.66, -1.00, 0.71, 0.66, 0.61, 0.39},
       {5.7, 4.3, 3.1, 1.0, 7.0, 9.5, 51.0, 8.4, 9.6, 10.7, 16.3}},
  };
  return rows;
}

Comparison compare_table1(const std::vector<TraceRow>& actual,
                          const std::vector<TraceRow>& expected,
                          Tolerances tolerances) {
  Comparison out;
  if (actual.size() != expected.size()) {
    out.mismatches.push_back({0, "row count", static_cast<double>(expected.size()),
                              static_cast<double>(actual.size())});
  }
  const std::size_t n = std::min(actual.size(), expected.size());
  for (std::size_t k = 0; k < n; ++k) {
    const auto& a = actual[k];
    const auto& e = expected[k];
    check(out, k, "J_under", e.worst_value, a.worst_value, tolerances.value);
    check(out, k, "m", e.m, a.m, tolerances.steps);
    if (e.residual) {
      check(out, k, "residual", *e.residual, a.residual.value_or(NAN), tolerances.residual);
    }
    if (e.error) check(out, k, "error", *e.error, a.error.value_or(NAN), tolerances.error);
  }
  out.rows = n;
  return out;
}

Comparison compare_table2(const std::vector<Table2Row>& actual,
                          const std::vector<Table2Row>& expected,
                          Tolerances tolerances) {
  Comparison out;
  if (actual.size() != expected.size()) {
    out.mismatches.push_back({0, "row count", static_cast<double>(expected.size()),
                              static_cast<double>(actual.size())});
  }
  const std::size_t n = std::min(actual.size(), expected.size());
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < expected[k].value.size(); ++i) {
      const auto col = std::to_string(i);
      const double av = i < actual[k].value.size() ? actual[k].value[i] : NAN;
      const double an = i < actual[k].steps.size() ? actual[k].steps[i] : NAN;
      check(out, k, "J(" + col + ")", expected[k].value[i], av, tolerances.value);
      check(out, k, "N(" + col + ")", expected[k].steps[i], an, tolerances.steps);
    }
  }
  out.rows = n;
  return out;
}

std::string table1_csv(const std::vector<TraceRow>& rows) { return io::trace_csv(rows); }

std::string table2_csv(const std::vector<Table2Row>& rows) {
  std::ostringstream out;
  out << "iter";
  for (std::size_t i = 0; i < kCells; ++i) out << ",J(" << i << "),N(" << i << ')';
  out << '\n';
  for (const auto& r : rows) {
    out << r.iteration;
    for (std::size_t i = 0; i < r.value.size(); ++i) {
      out << ',' << io::format_number(r.value[i]) << ',' << io::format_number(r.steps[i]);
    }
    out << '\n';
  }
  return out.str();
}

std::string comparison_report(const Comparison& comparison) {
  std::ostringstream out;
  if (comparison.pass()) {
    out << "PASS " << comparison.rows << " rows compared (" << comparison.cells
        << " cells)\n";
    return out.str();
  }
  out << "FAIL " << comparison.mismatches.size() << " of " << comparison.cells
      << " cells out of tolerance\n";
  for (const auto& m : comparison.mismatches) {
    out << "  row " << m.row << ' ' << m.column << ": expected " << io::format_number(m.expected)
        << ", got " << io::format_number(m.actual) << '\n';
  }
  return out.str();
}

}  // namespace ssp::gridworld
