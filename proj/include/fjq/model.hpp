#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fjq/dirac.hpp"
#include "fjq/fj.hpp"
#include "fjq/index_expr.hpp"

namespace fjq {

struct Diagnostic {
  int line = 0;
  int column = 0;
  std::string message;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Diagnostic> diags);
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
  std::vector<Diagnostic> diags_;
};

struct ExpectedCell {
  Label row, col;
  OperatorEntry kernel;
};

struct ModelSection {
  std::string header;
  int line = 0;
  std::vector<std::pair<int, std::string>> lines;
};

struct ModelSpec {
  std::string name;
  std::string method = "fj";
  std::string variables_kind;
  std::string status = "supported";
  std::string description;
  std::map<std::string, Rational> parameters;
  ParseContext ctx;
  std::vector<ModelSection> sections;

  SymplecticSystem initial;
  FJModelData fj;
  DiracInput dirac;

  // Reference data used by compare and the acceptance checks.
  std::map<std::string, std::vector<ExpectedCell>> tables;
  std::map<std::string, std::vector<GaugeTransformation>> transformations;
  // Named field redefinitions (new label = expression in the variables).
  std::map<std::string, std::map<Label, Expr>> maps;
  std::map<std::string, std::string> expected;
};

ModelSpec load_model_text(const std::string& text, const std::string& source = "<input>");
// Resolution order: existing file path, FJQ_MODEL_PATH directories, built-ins.
ModelSpec load_model(const std::string& name_or_path);
std::string serialize(const ModelSpec& m);

std::vector<std::string> builtin_model_names();
const std::map<std::string, std::string>& builtin_model_texts();

// Removes every ansatz section (modes and inverses).
ModelSpec strip_ansatz(const ModelSpec& m);

}  // namespace fjq
