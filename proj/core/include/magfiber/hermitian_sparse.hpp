#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace magfiber {

using Complex = std::complex<double>;

struct MatrixEntry {
  int row = 0;
  int col = 0;
  Complex value;
};

/// Complex Hermitian matrix in compressed-row layout.
///
/// Instances are immutable once built. Construction goes through
/// `from_upper`, which mirrors the strict upper triangle as exact conjugates,
/// so the stored matrix is bit-exactly Hermitian.
class HermitianSparse {
public:
  HermitianSparse() = default;

  /// Entries with row <= col; duplicates are summed, diagonal imaginary parts dropped.
  /// Entries with row > col are rejected.
  static HermitianSparse from_upper(int dim, std::vector<MatrixEntry> upper);

  int dim() const noexcept { return dim_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  std::span<const int> row_offsets() const noexcept { return row_offsets_; }
  std::span<const int> col_indices() const noexcept { return col_indices_; }
  std::span<const Complex> values() const noexcept { return values_; }

  /// y = H x. Fixed per-row reduction order, so results are reproducible.
  void multiply(std::span<const Complex> x, std::span<Complex> y) const;
  std::vector<Complex> multiply(std::span<const Complex> x) const;

  Complex at(int row, int col) const;
  std::vector<double> diagonal() const;

  /// Entrywise check H(i,j) == conj(H(j,i)) with exact floating-point equality.
  bool is_hermitian() const;
  /// True when no row holds a repeated column index.
  bool has_unique_columns() const;

private:
  int dim_ = 0;
  std::vector<int> row_offsets_{0};
  std::vector<int> col_indices_;
  std::vector<Complex> values_;
};

}  // namespace magfiber
