#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace spog {

/// Row-major dense matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix identity(std::size_t n);
  /// Build from nested rows; all rows must have equal length.
  static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  DenseMatrix& operator+=(const DenseMatrix& other);
  DenseMatrix& operator-=(const DenseMatrix& other);
  DenseMatrix& operator*=(double s);

  bool operator==(const DenseMatrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator*(double s, DenseMatrix a);

/// Compressed sparse row matrix. Column indices within a row are ascending.
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_offsets;  // length rows + 1
  std::vector<std::size_t> col_indices;
  std::vector<double> values;

  std::size_t nnz() const { return values.size(); }
  DenseMatrix to_dense() const;
};

/// A * B for sparse A. Each output row sums in ascending column order.
DenseMatrix spmm(const CsrMatrix& a, const DenseMatrix& b);

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// a^T * b without materializing the transpose.
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
/// a * b^T without materializing the transpose.
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& a);
DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix map(const DenseMatrix& a, const std::function<double(double)>& f);

/// Neumaier-compensated sum of squares.
double squared_norm(const DenseMatrix& a);
double frobenius_norm(const DenseMatrix& a);
/// Compensated sum of all entries.
double sum(const DenseMatrix& a);
double trace(const DenseMatrix& a);
/// Sum over i,j of a_ij * b_ij.
double frobenius_inner(const DenseMatrix& a, const DenseMatrix& b);
double max_abs(const DenseMatrix& a);

/// Throws NumericError naming `context` if any entry is NaN or infinite.
void check_finite(const DenseMatrix& a, std::string_view context);
bool all_finite(const DenseMatrix& a);

/// (a + a^T) / 2 in place. Requires a square matrix.
void symmetrize(DenseMatrix& a);

struct EigenDecomposition {
  std::vector<double> values;  // descending
  DenseMatrix vectors;         // column k is the eigenvector for values[k]
};

/// Cyclic Jacobi eigensolver for symmetric matrices. Throws ValidationError if
/// `m` deviates from symmetry by more than `symmetry_tol` * max|m|.
EigenDecomposition symmetric_eigendecompose(const DenseMatrix& m, double symmetry_tol = 1e-10);

/// Kahan-Babuska (Neumaier) running sum.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace spog
