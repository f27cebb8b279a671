// Dense reference eigenvalues, deliberately free of any shared code with the
// iterative solver: plain arrays, Householder tridiagonalization, implicit QL.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "magfiber/eigensolver.hpp"
#include "magfiber/error.hpp"

namespace magfiber {

namespace {

/// Householder reduction of the symmetric N x N row-major matrix `a` to
/// tridiagonal form: diagonal in d, subdiagonal in e (e[0] = 0).
void householder_tridiagonalize(std::vector<double>& a, int N, std::vector<double>& d, std::vector<double>& e) {
  d.assign(N, 0.0);
  e.assign(N, 0.0);
  auto A = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * N + j]; };
  for (int i = N - 1; i > 0; --i) {
    const int l = i - 1;
    double h = 0.0;
    if (l > 0) {
      double scale = 0.0;
      for (int k = 0; k <= l; ++k) scale += std::abs(A(i, k));
      if (scale == 0.0) {
        e[i] = A(i, l);
      } else {
        for (int k = 0; k <= l; ++k) {
          A(i, k) /= scale;
          h += A(i, k) * A(i, k);
        }
        double f = A(i, l);
        const double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        A(i, l) = f - g;
        f = 0.0;
        for (int j = 0; j <= l; ++j) {
          double gj = 0.0;
          for (int k = 0; k <= j; ++k) gj += A(j, k) * A(i, k);
          for (int k = j + 1; k <= l; ++k) gj += A(k, j) * A(i, k);
          e[j] = gj / h;
          f += e[j] * A(i, j);
        }
        const double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) {
          const double fj = A(i, j);
          const double gj = e[j] - hh * fj;
          e[j] = gj;
          for (int k = 0; k <= j; ++k) A(j, k) -= fj * e[k] + gj * A(i, k);
        }
      }
    } else {
      e[i] = A(i, l);
    }
    d[i] = h;
  }
  for (int i = 0; i < N; ++i) d[i] = A(i, i);
}

/// Eigenvalues of the symmetric tridiagonal matrix (d, e) by QL with implicit shifts.
void implicit_ql(std::vector<double>& d, std::vector<double>& e) {
  const int N = static_cast<int>(d.size());
  for (int i = 1; i < N; ++i) e[i - 1] = e[i];
  if (N > 0) e[N - 1] = 0.0;
  for (int l = 0; l < N; ++l) {
    int iter = 0;
    int m = l;
    do {
      for (m = l; m < N - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
      }
      if (m != l) {
        if (++iter > 60) throw Error("dense_oracle_eigs: implicit QL did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::abs(r) : -std::abs(r)));
        double s = 1.0;
        double c = 1.0;
        double p = 0.0;
        int i = m - 1;
        for (; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace

std::vector<double> dense_oracle_eigs(const HermitianSparse& H) {
  const int n = H.dim();
  if (n > kDenseOracleCap)
    throw DimensionError("dense_oracle_eigs: dimension " + std::to_string(n) + " exceeds cap " +
                         std::to_string(kDenseOracleCap));
  if (n == 0) return {};
  const int N = 2 * n;
  std::vector<double> a(static_cast<std::size_t>(N) * N, 0.0);
  const auto off = H.row_offsets();
  const auto col = H.col_indices();
  const auto val = H.values();
  for (int r = 0; r < n; ++r) {
    for (int p = off[r]; p < off[r + 1]; ++p) {
      const int c = col[p];
      const double re = val[p].real();
      const double im = val[p].imag();
      a[static_cast<std::size_t>(r) * N + c] = re;
      a[static_cast<std::size_t>(r + n) * N + c + n] = re;
      a[static_cast<std::size_t>(r) * N + c + n] = -im;
      a[static_cast<std::size_t>(r + n) * N + c] = im;
    }
  }
  std::vector<double> d, e;
  householder_tridiagonalize(a, N, d, e);
  implicit_ql(d, e);
  std::sort(d.begin(), d.end());
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = 0.5 * (d[2 * i] + d[2 * i + 1]);
  return out;
}

}  // namespace magfiber
