#pragma once

#include <map>
#include <string>
#include <vector>

#include "fjq/error.hpp"
#include "fjq/kernel_matrix.hpp"
#include "fjq/poly.hpp"

namespace fjq {

// Polynomial ring for Fourier symbols: k1, k2, then parameters.
struct FourierRing {
  std::vector<std::string> names{"k1", "k2"};
  int nvars() const { return static_cast<int>(names.size()); }
  int param_index(const std::string& p) const;
};

using RatMatrix = std::vector<std::vector<RatFunc>>;

// d_j -> k_j, invlap -> 1/(k1^2 + k2^2). Formal adjoint is k -> -k.
struct FourierSymbol {
  FourierRing ring;
  std::vector<Label> rows, cols;
  RatMatrix m;
};

FourierSymbol fourier_symbol(const KernelMatrix& m);
RatFunc to_ratfunc(const OperatorEntry& o, const FourierRing& ring);
// Inverse map; throws Unsupported when the denominator is not c * params * (k^2)^p.
OperatorEntry from_ratfunc(const RatFunc& r, const FourierRing& ring);

// A left zero-mode: the component on row i is sum_f parts[f][i] applied to f.
struct ModeVector {
  std::vector<Label> rows;
  std::map<Symbol, std::vector<OperatorEntry>> parts;

  bool is_zero() const;
  std::string render() const;
  // Densities sum_i adjoint(n_{i,f})[z_i], one per arbitrary function f.
  std::map<Symbol, Expr> contract(const std::vector<Expr>& z) const;
  // Removes rows and maps labels (used to carry modes between matrices).
  ModeVector relabel(const std::vector<Label>& rows, const std::map<Label, Label>& mapping, const std::map<Label, int>& signs) const;
};

class SingularError : public Error {
 public:
  SingularError(const std::string& what, int rank, std::vector<ModeVector> modes)
      : Error(ErrorKind::Singular, what), rank_(rank), modes_(std::move(modes)) {}
  int rank() const { return rank_; }
  const std::vector<ModeVector>& modes() const { return modes_; }

 private:
  int rank_;
  std::vector<ModeVector> modes_;
};

struct LinearOptions {
  bool parallel = true;
};

// Exact inverse of a square constant-coefficient kernel. Block components are
// eliminated independently (in parallel unless disabled) with fraction-free
// Gauss-Jordan elimination. Throws SingularError with a left null basis.
KernelMatrix invert_constant(const KernelMatrix& m, LinearOptions opt = {});

// Left null basis of a constant-coefficient kernel: free variables are taken
// in row-label order and each mode is normalized on its free component.
std::vector<ModeVector> left_null_space(const KernelMatrix& m, LinearOptions opt = {});
int kernel_rank(const KernelMatrix& m, LinearOptions opt = {});

// Residual per column: sum_i adjoint(m_ij) o n_i, per arbitrary function.
std::vector<std::map<Symbol, OperatorEntry>> verify_mode(const KernelMatrix& m, const ModeVector& v);
bool mode_annihilates(const KernelMatrix& m, const ModeVector& v);

// M N - 1. Zero exactly when N is a right inverse.
KernelMatrix verify_inverse(const KernelMatrix& m, const KernelMatrix& n);

// Fraction-free Gauss-Jordan on a dense polynomial matrix. Returns pivot
// columns; on return pivot rows hold the common pivot value on their pivot.
struct EliminationResult {
  std::vector<int> pivots;
  Poly pivot_value;
};
EliminationResult fraction_free_rref(std::vector<std::vector<Poly>>& a, int ncols_to_pivot);

// Connected components of the nonzero pattern: pairs of (rows, cols).
std::vector<std::pair<std::vector<int>, std::vector<int>>> block_components(const RatMatrix& m, std::size_t ncols);

}  // namespace fjq
