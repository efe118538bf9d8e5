#include "fjq/kernel_matrix.hpp"

#include <exception>
#include <sstream>

#include "fjq/error.hpp"

namespace fjq {

KernelMatrix::KernelMatrix(std::vector<Label> rows, std::vector<Label> cols)
    : rows_(std::move(rows)), cols_(std::move(cols)), cells_(rows_.size() * cols_.size()) {}

int KernelMatrix::row_index(const Label& l) const {
  for (std::size_t i = 0; i < rows_.size(); ++i)
    if (rows_[i] == l) return static_cast<int>(i);
  return -1;
}

int KernelMatrix::col_index(const Label& l) const {
  for (std::size_t i = 0; i < cols_.size(); ++i)
    if (cols_[i] == l) return static_cast<int>(i);
  return -1;
}

OperatorEntry KernelMatrix::get(const Label& r, const Label& c) const {
  int i = row_index(r), j = col_index(c);
  if (i < 0 || j < 0) return {};
  return at(i, j);
}

bool KernelMatrix::is_constant() const {
  for (const auto& c : cells_)
    if (!c.is_constant()) return false;
  return true;
}

bool KernelMatrix::is_zero() const {
  for (const auto& c : cells_)
    if (!c.is_zero()) return false;
  return true;
}

bool KernelMatrix::operator==(const KernelMatrix& o) const {
  return rows_ == o.rows_ && cols_ == o.cols_ && cells_ == o.cells_;
}

KernelMatrix KernelMatrix::operator-(const KernelMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw Error(ErrorKind::Dimension, "label mismatch in subtraction");
  KernelMatrix r = *this;
  for (std::size_t k = 0; k < cells_.size(); ++k) r.cells_[k] -= o.cells_[k];
  return r;
}

KernelMatrix KernelMatrix::operator+(const KernelMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw Error(ErrorKind::Dimension, "label mismatch in addition");
  KernelMatrix r = *this;
  for (std::size_t k = 0; k < cells_.size(); ++k) r.cells_[k] += o.cells_[k];
  return r;
}

KernelMatrix KernelMatrix::map_entries(const std::function<OperatorEntry(const OperatorEntry&)>& f) const {
  KernelMatrix r = *this;
  for (auto& c : r.cells_) c = f(c);
  return r;
}

KernelMatrix KernelMatrix::adjoint_transpose() const {
  KernelMatrix r(cols_, rows_);
  for (std::size_t i = 0; i < nrows(); ++i)
    for (std::size_t j = 0; j < ncols(); ++j) r.at(j, i) = adjoint(at(i, j));
  return r;
}

KernelMatrix KernelMatrix::identity(const std::vector<Label>& labels) {
  KernelMatrix r(labels, labels);
  for (std::size_t i = 0; i < labels.size(); ++i) r.at(i, i) = OperatorEntry::identity();
  return r;
}

namespace {

void check_inner(const KernelMatrix& a, const KernelMatrix& b) {
  if (a.cols() != b.rows())
    throw Error(ErrorKind::Dimension, "inner labels differ: " + std::to_string(a.ncols()) + " columns vs " +
                                          std::to_string(b.nrows()) + " rows");
}

OperatorEntry cell(const KernelMatrix& a, const KernelMatrix& b, std::size_t i, std::size_t j) {
  OperatorEntry acc;
  for (std::size_t k = 0; k < a.ncols(); ++k) {
    const OperatorEntry& x = a.at(i, k);
    if (x.is_zero()) continue;
    const OperatorEntry& y = b.at(k, j);
    if (y.is_zero()) continue;
    acc += compose(x, y);
  }
  return acc;
}

}  // namespace

KernelMatrix matmul(const KernelMatrix& a, const KernelMatrix& b) {
  check_inner(a, b);
  KernelMatrix r(a.rows(), b.cols());
  const long n = static_cast<long>(a.nrows() * b.ncols());
  const std::size_t nc = b.ncols();
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < n; ++k) {
    std::size_t i = static_cast<std::size_t>(k) / nc, j = static_cast<std::size_t>(k) % nc;
    try {
      r.at(i, j) = cell(a, b, i, j);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return r;
}

KernelMatrix matmul_reference(const KernelMatrix& a, const KernelMatrix& b) {
  check_inner(a, b);
  KernelMatrix r(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.nrows(); ++i)
    for (std::size_t j = 0; j < b.ncols(); ++j) r.at(i, j) = cell(a, b, i, j);
  return r;
}

std::string render(const KernelMatrix& m) {
  std::ostringstream os;
  for (std::size_t i = 0; i < m.nrows(); ++i)
    for (std::size_t j = 0; j < m.ncols(); ++j) {
      if (m.at(i, j).is_zero()) continue;
      os << "{" << render(m.rows()[i]) << ", " << render(m.cols()[j]) << "} = " << render(m.at(i, j)) << "\n";
    }
  return os.str();
}

}  // namespace fjq
