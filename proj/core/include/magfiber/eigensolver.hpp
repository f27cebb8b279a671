#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "magfiber/hermitian_sparse.hpp"

namespace magfiber {

enum class Preconditioner {
  /// Inverse of the diagonal of H.
  Jacobi,
  /// Exact inverse of (H - shift I) from a sparse LDL^H factorization.
  ShiftInvert,
};

struct EigenConfig {
  int k = 1;
  /// Relative residual ||H v - lambda v|| / max(|lambda|, 1) required for every requested pair.
  double tol = 1e-9;
  int max_iter = 5000;
  std::uint64_t seed = 20240917;
  /// Block columns carried beyond k.
  int extra_columns = 3;
  Preconditioner preconditioner = Preconditioner::Jacobi;
  /// Factorization shift for Preconditioner::ShiftInvert. A shift above the
  /// bottom of the spectrum is lowered until H - shift I is positive definite.
  double shift = 0.0;
  /// Optional warm-start columns; the remaining block columns are drawn from `seed`.
  std::vector<std::vector<Complex>> initial;
  /// Stagnation: the worst requested residual improved by less than this fraction over the window.
  int stagnation_window = 50;
  double stagnation_reduction = 0.01;
};

struct EigenResult {
  std::vector<double> values;                 // ascending
  std::vector<std::vector<Complex>> vectors;  // orthonormal columns
  std::vector<double> residuals;
  int iterations = 0;
  bool converged = false;
  /// Factorization shift actually used by the ShiftInvert preconditioner.
  double shift_used = 0.0;
  /// Number of sparse factorizations performed.
  int factorizations = 0;
  /// True when the shift-invert fallback finished the solve.
  bool used_fallback = false;
  /// Smallest Rayleigh quotient after each iteration (nonincreasing in exact arithmetic).
  std::vector<double> rayleigh_history;
};

/// k smallest eigenpairs of H by block LOBPCG.
///
/// The start block is drawn from a seeded generator, so identical inputs
/// reproduce identical iteration histories. When the residual stagnates the
/// solver switches to block inverse iteration with a sparse factorization of
/// H shifted just below the current Ritz value. A result with
/// `converged == false` carries the best iterate found.
///
/// Throws DimensionError unless 1 <= k < dim.
EigenResult smallest_eigs(const HermitianSparse& H, const EigenConfig& cfg = {});

/// k smallest eigenpairs of a real symmetric tridiagonal H (every 1D operator)
/// by Sturm-sequence bisection to full precision and inverse iteration for
/// the vectors. Throws InvalidArgument when H is not real tridiagonal and
/// DimensionError unless 1 <= k <= dim.
EigenResult smallest_eigs_tridiagonal(const HermitianSparse& H, int k = 1);

/// Name of the sparse factorization used by the ShiftInvert preconditioner.
const char* factorization_backend() noexcept;

/// ||H v - lambda v|| / max(|lambda|, 1) with v normalized first.
double residual_norm(const HermitianSparse& H, std::span<const Complex> v, double lambda);

inline constexpr int kDenseOracleCap = 2500;

/// Full ascending spectrum by an independent dense route: the n x n Hermitian
/// matrix A + iB is embedded as the 2n x 2n real symmetric [[A, -B], [B, A]],
/// reduced to tridiagonal form by Householder reflections and diagonalized by
/// implicit QL; each eigenvalue appears twice and the pairs are merged.
std::vector<double> dense_oracle_eigs(const HermitianSparse& H);

}  // namespace magfiber
