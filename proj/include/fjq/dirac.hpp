#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fjq/fj.hpp"
#include "fjq/kernel_matrix.hpp"

namespace fjq {

struct DiracInput {
  std::vector<Label> fields;
  std::map<std::string, std::string> momentum_names;
  Expr lagrangian;
  std::vector<NormalForm> normal_forms;
  std::map<std::string, std::vector<NormalForm>> gauges;
};

struct CanonicalPair {
  Label q, p;
};

struct PhaseSpace {
  std::vector<CanonicalPair> pairs;
  std::vector<Label> labels() const;  // coordinates first, then momenta
  std::set<std::string> momentum_names() const;
};

struct LegendreResult {
  PhaseSpace space;
  std::map<Label, Expr> momenta;
  std::vector<ConstraintRecord> primaries;
  std::vector<Label> solved_velocities;
  Expr hamiltonian;
};

LegendreResult legendre(const DiracInput& in);

// Kernel of {F(x), G(y)} for local densities.
OperatorEntry poisson_bracket(const Expr& f, const Expr& g, const PhaseSpace& ps);
// Same with a general bracket table B between phase-space labels.
OperatorEntry bracket_of(const Expr& f, const Expr& g, const KernelMatrix& table);
// Density {F(x), integral of H}.
Expr bracket_with_functional(const Expr& f, const Expr& h, const PhaseSpace& ps);

KernelMatrix canonical_table(const PhaseSpace& ps);
KernelMatrix bracket_matrix(const std::vector<Expr>& rows, const std::vector<Label>& row_labels,
                            const std::vector<Expr>& cols, const std::vector<Label>& col_labels, const PhaseSpace& ps);

struct ChainResult {
  std::vector<ConstraintRecord> constraints;
  std::vector<int> multipliers_fixed;  // rank of the multiplier block per round
  int rounds = 0;
};

ChainResult consistency_chain(const LegendreResult& leg, const DiracInput& in);

struct Classification {
  std::vector<ConstraintRecord> constraints;
  KernelMatrix pb;
  int rank = 0;
  int block_rank = 0;
  std::vector<ConstraintRecord> first_class;
  // First-class combinations with the second-class constraints set strongly to zero.
  std::vector<ConstraintRecord> first_class_strong;
  std::vector<ConstraintRecord> second_class;
  KernelMatrix second_class_matrix;
  KernelMatrix second_class_inverse;
  std::vector<std::string> notes;
};

Classification classify(const std::vector<ConstraintRecord>& cs, const PhaseSpace& ps, const DiracInput& in);

// {F,G}* = {F,G} - {F,chi} C^-1 {chi,G} over all phase-space labels.
KernelMatrix dirac_table(const PhaseSpace& ps, const std::vector<ConstraintRecord>& second, const KernelMatrix& cinv);

struct GaugeFixResult {
  Classification classification;
  KernelMatrix table;
};

// The union of all constraints with the gauge conditions must be nonsingular
// (IncompleteGauge otherwise). The bracket table is the Dirac bracket of the
// first-class sector, taken with second-class constraints strongly zero,
// plus the gauge conditions.
GaugeFixResult fix_gauge(const Classification& c, const std::vector<NormalForm>& gauge, const PhaseSpace& ps,
                         const DiracInput& in);

struct DiracResult {
  LegendreResult legendre;
  ChainResult chain;
  Classification classification;
  KernelMatrix table;
  std::optional<GaugeFixResult> fixed;
  int dof = 0;
  std::vector<std::string> notes;
};

DiracResult run_dirac(const DiracInput& in, const std::optional<std::string>& gauge);

}  // namespace fjq
