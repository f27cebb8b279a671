#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "magfiber/band_table.hpp"
#include "magfiber/eigensolver.hpp"
#include "magfiber/lattice.hpp"

namespace magfiber {

/// Field geometry (alpha, gamma) and the field ratio a across the discontinuity plane.
struct ModelParams {
  double alpha = 0.0;
  double gamma = 0.0;
  double a = 0.0;

  /// Throws ValidationError unless alpha in (0, pi), gamma in [0, pi/2], a in [-1, 1) \ {0}.
  void validate() const;
};

/// Throws ValidationError unless a in [-1, 1) \ {0}.
void validate_field_ratio(double a);

struct Discretization {
  /// 1D fiber grid: spacing and half-width of the box around the potential wells.
  double h_1d = 1e-2;
  double L_1d = 12.0;
  /// Half-line [0, L_half] for the de Gennes model.
  double L_half = 20.0;
  /// 2D half-plane grid [-L1, L1] x [0, L2]. L2 = 30 keeps the Dirichlet
  /// tail along the discontinuity line below 1e-3 for the sweep cells.
  double h1 = 0.1;
  double h2 = 0.1;
  double L1 = 20.0;
  double L2 = 30.0;
  std::size_t node_cap = kDefaultNodeCap;
  /// Eigensolver settings shared by all model solves.
  double tol = 1e-9;
  int max_iter = 5000;
  std::uint64_t seed = 20240917;
  /// Distance, relative to max(1, |hint|), kept between a predicted sigma and
  /// the factorization shift of the 2D solves.
  double shift_margin = 0.02;
  /// Threads used to fill band tables (0 = one per core).
  int jobs = 1;
  /// Use the potential a (t - xi)^2 on t < 0 instead of (a t - xi)^2. Only
  /// defined for a > 0, where it stays nonnegative.
  bool literal_fiber = false;

  void validate() const;
};

/// Primitive of the field profile 1_{t>0} + a 1_{t<0}: t for t >= 0, a t otherwise.
double b_profile(double a, double t);

struct FiberMode {
  double value = 0.0;
  std::vector<double> nodes;
  /// Real nodal eigenfunction, unit l2 norm with the trapezoid weights, positive at its maximum.
  std::vector<double> eigenfunction;
  double residual = 0.0;
  int iterations = 0;
};

/// Grid used by mu_a: [-L, L] widened so that each potential well keeps L of room.
Grid1D fiber_grid(double a, double xi, const Discretization& disc);

/// Lowest eigenvalue of -d^2/dt^2 + (b_a(t) - xi)^2 with Dirichlet truncation.
FiberMode mu_a(double a, double xi, const Discretization& disc = {});
double mu_a_value(double a, double xi, const Discretization& disc = {});

/// Lowest eigenvalue of -d^2/dt^2 + (t - xi)^2 on [0, L_half], Neumann at 0.
double de_gennes(double xi, const Discretization& disc = {});

struct Theta0Result {
  double value = 0.0;
  double xi0 = 0.0;
};

/// Minimum of de_gennes over xi: scan of [0, 2] then golden section to 1e-8.
Theta0Result theta0(const Discretization& disc = {});

/// Samples mu_a on `steps` + 1 uniform points of [xi_lo, xi_hi].
/// Throws MinimizerAtEdgeError when the smallest sample is an endpoint, except
/// for a > 0 at the lower end, where the band decreases to its deep-well
/// limit and the edge minimum is expected; `allow_lower_edge` controls that.
BandTable band_table(double a, double xi_lo, double xi_hi, int steps, const Discretization& disc = {},
                     bool allow_lower_edge = true);

inline constexpr double kBandXiLo = -40.0;
inline constexpr double kBandXiHi = 40.0;
inline constexpr int kBandSteps = 800;

struct BetaResult {
  double value = 0.0;
  double xi = 0.0;
  /// False when the infimum is approached as xi -> -infinity (a > 0) and the
  /// reported value is the band at the lower table edge.
  bool attained = true;
  BandTable table;
};

/// Infimum of mu_a over xi. For an interior minimum the table minimum is
/// refined by golden section on direct solves to 1e-8 in xi.
BetaResult beta(double a, const Discretization& disc = {});

/// 2D half-plane problem -Lap + (t cos nu - s sin nu)^2 on t > 0 with Neumann
/// at t = 0 and Dirichlet truncation, always solved on the 2D grid.
EigenResult zeta_2d(double nu, const Discretization& disc = {});

/// Bottom of the tilted-field half-space model. nu = 0 uses theta0 and
/// nu = pi/2 returns 1 (separation of variables); otherwise zeta_2d.
double zeta(double nu, const Discretization& disc = {});

/// True when x lies in the sector D1 = {theta <= alpha}; points on the
/// discontinuity line belong to D1.
bool in_first_sector(const ModelParams& p, double x1, double x2);

/// Vector potential of the reduced 2D operator; its curl is cos(gamma) in D1
/// and a cos(gamma) in D2.
Vec2 underline_A(const ModelParams& p, double x1, double x2);

/// Electric potential (sbar sin(gamma) (x1 sin(alpha) - x2 cos(alpha)) - tau)^2 with sbar = 1 in D1, a in D2.
double v_tau(const ModelParams& p, double tau, double x1, double x2);

struct SigmaResult {
  double value = 0.0;
  EigenResult eig;
  HalfPlaneGrid grid;
  /// Nodal eigenfunction on every grid node (zero on Dirichlet nodes), unit discrete L2 norm.
  std::vector<Complex> nodal;
};

/// Reusable solver for sigma(tau) at fixed (params, disc): the grid, the link
/// phases and the tau-independent part of the potential are built once.
class SigmaSolver {
public:
  SigmaSolver(const ModelParams& p, const Discretization& disc);

  const ModelParams& params() const noexcept { return p_; }
  const HalfPlaneGrid& grid() const noexcept { return grid_; }
  const Discretization& disc() const noexcept { return disc_; }

  /// Assembled matrix at tau.
  DiscreteOperator assemble(double tau) const;
  /// Smallest eigenpair at tau. `warm` (a stored eigenvector from a nearby tau)
  /// seeds the block; `hint` (a nearby eigenvalue) places the factorization shift.
  SigmaResult solve(double tau, const std::vector<Complex>* warm = nullptr, std::optional<double> hint = {}) const;
  double value(double tau) const { return solve(tau).value; }

private:
  ModelParams p_;
  Discretization disc_;
  HalfPlaneGrid grid_;
  GaugeField phases_;
  std::vector<double> linear_;  // sbar sin(gamma) (x1 sin(alpha) - x2 cos(alpha)) per node
};

SigmaResult sigma(const ModelParams& p, double tau, const Discretization& disc = {});

/// inf over xi of mu_a(tau sin(gamma) + xi cos(gamma)) + (xi sin(gamma) - tau cos(gamma))^2
/// evaluated on the interpolated band table. Throws GammaZeroError for gamma = 0
/// and TableRangeError when the minimizing band argument is not inside the table.
double sigma_ess(const ModelParams& p, double tau, const BandTable& table);

}  // namespace magfiber
