#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fjq/dirac.hpp"
#include "fjq/fj.hpp"
#include "fjq/model.hpp"

namespace fjq {

struct AnalyzeOptions {
  std::string method;     // empty: the model's own method
  std::string variables;  // empty: no check
  std::optional<std::string> gauge;
};

struct ConstraintLine {
  std::string label, expr, factor;
  bool matched = false;
};

struct LevelLine {
  std::string stage;
  std::size_t rows = 0, cols = 0;
  int modes = 0;
  bool from_ansatz = false, weak_modes = false, potential_vanishes = false;
  std::vector<ConstraintLine> constraints;
  // Dirac classification summary.
  std::optional<int> rank, block_rank;
  std::vector<std::string> first_class, second_class;
};

struct BracketCell {
  Label lhs, rhs;
  OperatorEntry kernel;
};

struct Report {
  std::string model;
  std::string method;
  std::vector<LevelLine> levels;
  KernelMatrix table;
  std::vector<GaugeTransformation> transformations;
  std::optional<int> dof;
  std::vector<std::string> notes;
  double seconds = 0;  // text output only

  std::vector<BracketCell> brackets() const;
};

// Runs the requested pipeline. Errors propagate as fjq::Error.
Report analyze(const ModelSpec& m, const AnalyzeOptions& opt);
// Bracket table of a model run: generalized FJ brackets or Dirac brackets.
KernelMatrix bracket_table(const ModelSpec& m, const AnalyzeOptions& opt);

std::string to_json(const Report& r);
std::string to_text(const Report& r);

// Cell-wise comparison on the labels the two tables share.
struct CellResidual {
  Label lhs, rhs;
  OperatorEntry expected, actual;
};

struct Comparison {
  bool equivalent = true;
  std::size_t cells = 0;
  std::vector<CellResidual> residuals;
  std::vector<Label> unmatched;  // labels of `expected` missing from `actual`
  std::vector<std::string> notes;
};

// Full table from reference cells: transposes by antisymmetry, other cells zero.
KernelMatrix reference_matrix(const std::vector<ExpectedCell>& cells);
Comparison compare_tables(const KernelMatrix& actual, const KernelMatrix& expected);

// Adds labels defined by expressions in the table's labels.
KernelMatrix extend_table(const KernelMatrix& t, const std::map<Label, Expr>& defs);

// Momenta solved from second-class constraints (p - f(q) with unit coefficient).
std::map<Label, Expr> strong_second_class_map(const ModelSpec& dirac_model);

struct CompareSide {
  const ModelSpec* model = nullptr;
  AnalyzeOptions opt;
};

// map: none | strong-second-class | momentum-map. Without b, the reference
// table of a named after the map (momentum-map) or the gauge is used.
Comparison compare(const CompareSide& a, const std::optional<CompareSide>& b, const std::string& map);

std::string to_json(const Comparison& c, const std::string& map);
std::string to_text(const Comparison& c, const std::string& map);

}  // namespace fjq
