#include "magfiber/hermitian_sparse.hpp"

#include <algorithm>
#include <string>

#include "magfiber/error.hpp"

namespace magfiber {

HermitianSparse HermitianSparse::from_upper(int dim, std::vector<MatrixEntry> upper) {
  if (dim < 0) throw DimensionError("negative matrix dimension");
  for (const auto& e : upper) {
    if (e.row < 0 || e.col < 0 || e.row >= dim || e.col >= dim)
      throw DimensionError("matrix entry (" + std::to_string(e.row) + "," + std::to_string(e.col) +
                           ") outside dimension " + std::to_string(dim));
    if (e.row > e.col) throw InvalidArgument("from_upper expects row <= col");
  }

  std::stable_sort(upper.begin(), upper.end(), [](const MatrixEntry& a, const MatrixEntry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  // merge duplicates before mirroring so both triangles see the same sum
  std::vector<MatrixEntry> merged;
  merged.reserve(upper.size());
  for (const auto& e : upper) {
    if (!merged.empty() && merged.back().row == e.row && merged.back().col == e.col)
      merged.back().value += e.value;
    else
      merged.push_back(e);
  }

  std::vector<MatrixEntry> all;
  all.reserve(2 * merged.size());
  for (auto e : merged) {
    if (e.row == e.col) {
      e.value = Complex(e.value.real(), 0.0);
      all.push_back(e);
    } else {
      all.push_back(e);
      all.push_back({e.col, e.row, std::conj(e.value)});
    }
  }
  std::sort(all.begin(), all.end(), [](const MatrixEntry& a, const MatrixEntry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  HermitianSparse h;
  h.dim_ = dim;
  h.row_offsets_.assign(static_cast<std::size_t>(dim) + 1, 0);
  h.col_indices_.reserve(all.size());
  h.values_.reserve(all.size());
  for (const auto& e : all) {
    ++h.row_offsets_[static_cast<std::size_t>(e.row) + 1];
    h.col_indices_.push_back(e.col);
    h.values_.push_back(e.value);
  }
  for (int r = 0; r < dim; ++r) h.row_offsets_[r + 1] += h.row_offsets_[r];
  return h;
}

void HermitianSparse::multiply(std::span<const Complex> x, std::span<Complex> y) const {
  if (static_cast<int>(x.size()) != dim_ || static_cast<int>(y.size()) != dim_)
    throw DimensionError("multiply: vector length does not match matrix dimension");
  for (int r = 0; r < dim_; ++r) {
    Complex acc = 0.0;
    for (int p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p) acc += values_[p] * x[col_indices_[p]];
    y[r] = acc;
  }
}

std::vector<Complex> HermitianSparse::multiply(std::span<const Complex> x) const {
  std::vector<Complex> y(static_cast<std::size_t>(dim_));
  multiply(x, y);
  return y;
}

Complex HermitianSparse::at(int row, int col) const {
  if (row < 0 || row >= dim_ || col < 0 || col >= dim_) throw DimensionError("at: index out of range");
  const auto first = col_indices_.begin() + row_offsets_[row];
  const auto last = col_indices_.begin() + row_offsets_[row + 1];
  const auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col) return 0.0;
  return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

std::vector<double> HermitianSparse::diagonal() const {
  std::vector<double> d(static_cast<std::size_t>(dim_), 0.0);
  for (int r = 0; r < dim_; ++r) d[r] = at(r, r).real();
  return d;
}

bool HermitianSparse::is_hermitian() const {
  for (int r = 0; r < dim_; ++r) {
    for (int p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p) {
      const int c = col_indices_[p];
      const Complex mirror = std::conj(at(c, r));
      if (values_[p].real() != mirror.real() || values_[p].imag() != mirror.imag()) return false;
    }
  }
  return true;
}

bool HermitianSparse::has_unique_columns() const {
  for (int r = 0; r < dim_; ++r)
    for (int p = row_offsets_[r] + 1; p < row_offsets_[r + 1]; ++p)
      if (col_indices_[p] <= col_indices_[p - 1]) return false;
  return true;
}

}  // namespace magfiber
