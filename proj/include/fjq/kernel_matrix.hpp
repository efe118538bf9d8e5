#pragma once

#include <string>
#include <vector>

#include "fjq/operator_entry.hpp"

namespace fjq {

class KernelMatrix {
 public:
  KernelMatrix() = default;
  KernelMatrix(std::vector<Label> rows, std::vector<Label> cols);

  const std::vector<Label>& rows() const { return rows_; }
  const std::vector<Label>& cols() const { return cols_; }
  std::size_t nrows() const { return rows_.size(); }
  std::size_t ncols() const { return cols_.size(); }

  const OperatorEntry& at(std::size_t i, std::size_t j) const { return cells_[i * cols_.size() + j]; }
  OperatorEntry& at(std::size_t i, std::size_t j) { return cells_[i * cols_.size() + j]; }
  // Entry by labels; zero when either label is absent.
  OperatorEntry get(const Label& r, const Label& c) const;
  int row_index(const Label& l) const;
  int col_index(const Label& l) const;

  bool is_constant() const;
  bool is_zero() const;
  bool operator==(const KernelMatrix& o) const;

  KernelMatrix operator-(const KernelMatrix& o) const;
  KernelMatrix operator+(const KernelMatrix& o) const;
  KernelMatrix map_entries(const std::function<OperatorEntry(const OperatorEntry&)>& f) const;
  // Entry-wise adjoint of the transpose: kernel of the formal transpose.
  KernelMatrix adjoint_transpose() const;

  static KernelMatrix identity(const std::vector<Label>& labels);

 private:
  std::vector<Label> rows_, cols_;
  std::vector<OperatorEntry> cells_;
};

// Kernel composition. matmul runs across OpenMP threads; matmul_reference is
// the plain serial loop kept for testing and benchmarking.
KernelMatrix matmul(const KernelMatrix& a, const KernelMatrix& b);
KernelMatrix matmul_reference(const KernelMatrix& a, const KernelMatrix& b);

std::string render(const KernelMatrix& m);

}  // namespace fjq
