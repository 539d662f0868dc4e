#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ssp/bounds.hpp"
#include "ssp/problem.hpp"

namespace ssp::gridworld {

// 4x3 navigation grid. Nonterminal states 0-10 numbered row by row from the
// top left, skipping the wall at (row 1, col 1); state 11 is the terminal.
//
//    0  1  2  3(+1)
//    4  #  5  6(-1)
//    7  8  9 10
inline constexpr std::size_t kStates = 12;
inline constexpr std::size_t kCells = 11;
inline constexpr std::size_t kActions = 4;  // N, E, S, W
inline constexpr StateIndex kTerminal = 11;
inline constexpr StateIndex kGoalState = 3;
inline constexpr StateIndex kPitState = 6;
inline constexpr double kStepReward = -0.04;

struct Cell {
  int row;
  int col;
};
inline constexpr Cell kCellOf[kCells] = {{0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 0}, {1, 2},
                                         {1, 3}, {2, 0}, {2, 1}, {2, 2}, {2, 3}};

enum class Model {
  // The standard slip model: 0.8 intended, 0.1 to each side, bumping into a
  // wall or the edge stays put.
  kTextbook,
  // kTextbook except that in state 9 under East the 0.1 slip south lands in
  // state 8 rather than staying in 9. This is the instance whose values
  // match the published reference tables.
  kPublished,
};

// Cost form: rewards negated. Exit states go to the terminal with
// probability 1 under every action, costing -1 (state 3) or +1 (state 6).
SspProblem build(Model model = Model::kPublished);

enum class Algorithm { kValueIteration, kPolicyIteration };

// Rows 0..n in reward form. worst_value is the smallest state value outside
// the exit states; m = (1 - worst)/0.04 + 1. Value iteration runs
// `vi_iterations` sweeps; policy iteration runs to convergence.
std::vector<TraceRow> run_table1(const SspProblem& problem, Algorithm algorithm,
                                 std::size_t vi_iterations = 12);

struct Table2Row {
  std::size_t iteration = 0;
  std::vector<double> value;  // J(i), reward form, states 0-10
  std::vector<double> steps;  // N(i) before overrides, states 0-10
};

// Policy iteration from the uniform random policy, one row per evaluation
// (including the final repeated policy).
std::vector<Table2Row> run_table2(const SspProblem& problem);

// Reference values as printed (3 or 4 decimals).
const std::vector<TraceRow>& reference_table1(Algorithm algorithm);
const std::vector<Table2Row>& reference_table2();

struct Tolerances {
  double value = 0.01;
  double steps = 0.1;
  double residual = 0.001;
  double error = 0.1;
};

struct Mismatch {
  std::size_t row = 0;
  std::string column;
  double expected = 0.0;
  double actual = 0.0;
};

struct Comparison {
  std::size_t rows = 0;
  std::size_t cells = 0;
  std::vector<Mismatch> mismatches;
  bool pass() const { return mismatches.empty(); }
};

Comparison compare_table1(const std::vector<TraceRow>& actual,
                          const std::vector<TraceRow>& expected,
                          Tolerances tolerances = {});
Comparison compare_table2(const std::vector<Table2Row>& actual,
                          const std::vector<Table2Row>& expected,
                          Tolerances tolerances = {});

// CSV with 6 significant digits; missing residual/error cells are "-".
std::string table1_csv(const std::vector<TraceRow>& rows);
std::string table2_csv(const std::vector<Table2Row>& rows);
std::string comparison_report(const Comparison& comparison);

}  // namespace ssp::gridworld

namespace ssp {
inline SspProblem build_gridworld(gridworld::Model model = gridworld::Model::kPublished) {
  return gridworld::build(model);
}
}  // namespace ssp
