#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fjq/inversion.hpp"
#include "fjq/kernel_matrix.hpp"
#include "fjq/weak.hpp"

namespace fjq {

struct NormalForm {
  Label label;
  Expr expr;
};

// Factor f (rational times a parameter monomial) with expr == f * nf.
std::optional<Expr> proportionality(const Expr& expr, const Expr& nf);

struct ConstraintRecord {
  Label label;
  Expr derived;
  Expr normal;  // used downstream; equals derived when unmatched
  Expr factor = Expr(1);
  bool matched = false;
  std::optional<Label> origin;
  int level = 0;
};

// Picks the matching normal form for a derived density, if any.
ConstraintRecord classify_constraint(const Expr& derived, const std::vector<NormalForm>& forms,
                                     const std::optional<Label>& origin, int level, int serial);

struct GaugeCondition {
  Label multiplier;
  Expr condition;
};

struct GaugeSpec {
  std::string name;
  std::vector<GaugeCondition> conditions;
};

// Mode components written as expressions linear in functions named v_*.
struct AnsatzMode {
  std::map<Label, Expr> components;
};

struct FJModelData {
  std::vector<NormalForm> normal_forms;
  std::map<std::string, std::string> multiplier_names;
  std::map<std::string, std::string> gauge_parameter_names;
  std::map<std::string, AnsatzMode> ansatz_modes;
  std::map<std::string, std::map<std::pair<Label, Label>, OperatorEntry>> ansatz_inverses;
  std::map<std::string, GaugeSpec> gauges;
};

struct SymplecticSystem {
  int level = 0;
  std::vector<Label> variables;
  std::set<Label> multipliers;
  std::set<Label> gauge_multipliers;
  std::map<Label, Expr> one_forms;
  Expr potential;
  std::vector<ConstraintRecord> constraints;
  std::vector<ConstraintRecord> gauge_conditions;
  // u -> m means u is the time derivative of the multiplier m.
  std::map<Label, Label> velocity_alias;
  std::map<Label, Label> constraint_of;  // multiplier -> constraint label
  std::set<Label> attached;              // constraint labels already bound to a multiplier

  Expr one_form(const Label& l) const;
  int dynamical_count() const;
};

// f_ij = adjoint(L_{a_j, xi^i}) - L_{a_i, xi^j}
KernelMatrix symplectic_matrix(const SymplecticSystem& s);
KernelMatrix symplectic_matrix(const std::vector<Label>& vars, const std::map<Label, Expr>& one_forms);
// Variable rows followed by one gradient row per constraint.
KernelMatrix consistency_matrix(const SymplecticSystem& s);

ModeVector mode_from_ansatz(const AnsatzMode& a, const std::vector<Label>& rows);

// Left modes: exact null space for constant kernels, otherwise the model
// ansatz for stage (verified to annihilate m, modulo weak when given).
// Throws NeedsAnsatz.
std::vector<ModeVector> zero_modes(const KernelMatrix& m, const std::string& stage, const FJModelData& d, bool* from_ansatz,
                                   const WeakReducer* weak = nullptr);

// Densities from contracting modes with z, reduced modulo known constraints.
std::vector<ConstraintRecord> constraints_from_modes(const SymplecticSystem& s, const std::vector<ModeVector>& modes,
                                                     const std::vector<Expr>& z, const FJModelData& d);

WeakReducer reducer_for(const std::vector<ConstraintRecord>& cs);

struct ConsistencyResult {
  KernelMatrix matrix;
  std::vector<ModeVector> modes;
  std::vector<ConstraintRecord> new_constraints;
  bool terminated = false;
  bool from_ansatz = false;
};

ConsistencyResult consistency_step(const SymplecticSystem& s, const FJModelData& d);

// Binds a multiplier to every unattached constraint; restricts V weakly.
SymplecticSystem augment(const SymplecticSystem& s, const FJModelData& d);

SymplecticSystem add_gauge(const SymplecticSystem& s, const GaugeSpec& g);

struct GaugeTransformation {
  Label field;
  Expr delta;
};
std::vector<GaugeTransformation> gauge_transformations(const SymplecticSystem& s, const FJModelData& d);

struct BracketTable {
  KernelMatrix matrix;
  bool from_ansatz = false;
};

// Inverse of the final symplectic matrix (model ansatz when field-dependent).
BracketTable generalized_brackets(const SymplecticSystem& s, const FJModelData& d, const std::string& gauge);

// (dynamical - constraint components - gauge components) / 2.
int count_dof(const SymplecticSystem& s, int gauge_components);

struct LevelReport {
  int level = 0;
  std::string stage;
  KernelMatrix matrix;
  std::vector<ModeVector> modes;
  std::vector<ConstraintRecord> constraints;
  bool from_ansatz = false;
  bool weak_modes = false;  // ansatz modes annihilate only on the constraint surface
  bool potential_vanishes = false;
};

struct FJResult {
  std::vector<LevelReport> levels;
  SymplecticSystem unfixed;
  std::optional<SymplecticSystem> fixed;
  std::optional<BracketTable> brackets;
  std::vector<GaugeTransformation> transformations;
  std::optional<int> dof;
  std::vector<std::string> notes;
};

FJResult run_fj(const SymplecticSystem& initial, const FJModelData& d, const std::optional<std::string>& gauge);

}  // namespace fjq
