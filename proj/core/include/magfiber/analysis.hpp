#pragma once

#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "magfiber/models.hpp"

namespace magfiber {

/// Effective tilt angle arcsin(sin(alpha) sin(gamma)) in [0, pi/2].
double nu0(double alpha, double gamma);

enum class Classification { Eigenvalue, EssentialEdge, Undetermined };
std::string to_string(Classification c);

/// Eigenvalue when sigma < sigma_ess - delta, EssentialEdge when sigma > sigma_ess + delta,
/// Undetermined inside the margin.
Classification classify(double sigma, double sigma_ess, double delta);

struct TauScan {
  double tau_min = -8.0;
  double tau_max = 8.0;
  /// Number of coarse samples, endpoints included.
  int coarse_steps = 65;
  double tau_tol = 1e-6;
  /// Automatic widening stops once |tau| would exceed this.
  double widen_cap = 32.0;
  /// Required rise of each scan end above the interior minimum.
  double end_rise = 0.05;
};

struct CurvePoint {
  double tau;
  double sigma;
  double sigma_ess;  // NaN when undefined (gamma = 0)
};

struct GridLevel {
  double h;
  double L1;
  double L2;
};

struct Extrapolation {
  std::vector<GridLevel> levels;
  std::vector<double> values;
  double extrapolated = 0.0;
  /// (v0 - v1) / (v1 - v2) for the three h-halving levels; 4 for a second-order scheme.
  double observed_ratio = 0.0;
  /// True when the h-differences were below rounding level and no ratio was formed.
  bool converged_below_noise = false;
  /// |finest - extrapolated|.
  double h_error = 0.0;
  /// Truncation tail. With one L-doubling level this is
  /// 4/3 |sigma(L) - sigma(2L)| at the coarsest h (a 1/L^2 tail). With a second
  /// doubling the observed ratio r of successive differences sums the tail as
  /// r / (r - 1) times the first difference, never less than the 4/3 rule;
  /// r <= 1.5 uses 3. A sixth level repeats the first doubling at the middle h
  /// and the tail is taken as the largest of the coarse, middle and
  /// h-extrapolated tails.
  double L_sensitivity = 0.0;
  /// |sigma(L) - sigma(2L)| / |sigma(2L) - sigma(4L)|; NaN when not formed.
  double L_ratio = std::numeric_limits<double>::quiet_NaN();
  double error_estimate = 0.0;
};

/// Default levels for a run at `disc`: (4h, L), (2h, L), (h, L), (4h, 2L), (4h, 4L), (2h, 2L).
std::vector<GridLevel> default_levels(const Discretization& disc);

/// Richardson extrapolation in h of `value(level)` over the first three
/// levels (h halving, L fixed), plus the truncation sensitivity from the
/// remaining levels (L doubled, doubled again, then the first doubling at
/// the middle h). Throws
/// OrderBreakdownError when the observed ratio falls outside [2.5, 6].
Extrapolation extrapolate_levels(const std::vector<GridLevel>& levels, const std::vector<double>& values);
Extrapolation refine_extrapolate(const ModelParams& p, double tau, const std::vector<GridLevel>& levels,
                                 const Discretization& base = {});

struct LambdaReport {
  ModelParams params;
  double lambda = 0.0;
  double tau_star = 0.0;
  Classification classification = Classification::Undetermined;
  double sigma_ess_at_star = 0.0;  // NaN when gamma = 0
  double delta = 1e-3;
  double beta_a = 0.0;
  double xi_a = 0.0;
  double nu0 = 0.0;
  double zeta_nu0 = 0.0;
  double bound_rhs = 0.0;
  double bound_margin = 0.0;
  /// Seeded probe tau = xi_a sin(gamma), evaluated for a < 0 and gamma > 0.
  std::optional<double> probe_tau;
  std::optional<double> probe_sigma;
  /// Several coarse local minima lie within delta of the global one.
  bool multiple_minima = false;
  double scan_lo = 0.0;
  double scan_hi = 0.0;
  std::vector<CurvePoint> sigma_curve;
  std::optional<Extrapolation> convergence;
  double tol_solver = 0.0;
  double tol_total = 0.0;
  Discretization disc;
  /// Eigenfunction at tau_star on all grid nodes.
  std::vector<Complex> nodal_at_star;
  std::optional<HalfPlaneGrid> grid;
};

/// Memoizes beta_a, zeta(nu) and theta0 for one discretization. Safe to share
/// between threads.
class ModelCache {
public:
  explicit ModelCache(Discretization disc = {}) : disc_(std::move(disc)) {}
  const Discretization& disc() const noexcept { return disc_; }
  BetaResult beta(double a);
  double zeta(double nu);
  double theta0();

private:
  Discretization disc_;
  std::mutex mu_;
  std::map<double, BetaResult> beta_;
  std::map<double, double> zeta_;
  std::optional<double> theta0_;
};

struct LambdaOptions {
  TauScan scan;
  double delta = 1e-3;
};

/// inf over tau of sigma(tau): coarse scan (widened until both ends rise
/// `end_rise` above the minimum or sit on a known large-tau plateau), golden
/// section around the best sample, seeded probe for a < 0, classification
/// against sigma_ess at tau_star. For gamma = 0 sigma(tau) = sigma(0) + tau^2
/// exactly and tau_star = 0.
LambdaReport lambda_bottom(const ModelParams& p, const Discretization& disc = {}, const LambdaOptions& opts = {},
                           ModelCache* cache = nullptr);

struct TheoremCheck {
  LambdaReport report;
  bool holds = false;
  /// bound_rhs + tol_total - lambda.
  double slack = 0.0;
};

/// lambda_bottom plus a convergence study at tau_star; the bound
/// lambda <= min(beta_a, |a| zeta_nu0) + tol_total is evaluated with
/// tol_total = solver tolerance + extrapolation error estimate.
TheoremCheck check_theorem(const ModelParams& p, const Discretization& disc = {}, const LambdaOptions& opts = {},
                           ModelCache* cache = nullptr);

struct LimitSide {
  bool plateau = false;  // otherwise divergent
  double tau_T = 0.0;
  double tau_2T = 0.0;
  double sigma_T = 0.0;
  double sigma_2T = 0.0;
  double target = 0.0;  // plateau value, or NaN on the divergent side
  bool pass = false;
};

struct LimitsReport {
  LimitSide minus;
  LimitSide plus;
  double zeta_nu0 = 0.0;
  double L1_used = 0.0;
  bool pass = false;
};

/// sigma at tau in {-2T, -T, T, 2T}. A divergent side must grow by at least
/// 50% from T to 2T; a plateau side must be within 5% of its limit at 2T.
/// The x1 box is widened so the wells at |tau| = 2T stay inside.
LimitsReport limits_check(const ModelParams& p, const Discretization& disc = {}, double T = 6.0,
                          ModelCache* cache = nullptr);

/// Box half-width along x1 that keeps the large-tau well at `tau` at least `room` from the edge.
double box_for_tau(const ModelParams& p, double tau, double room, double base_L1);

struct AgmonFit {
  std::vector<double> radii;
  std::vector<double> log_amplitudes;
  double fitted_rate = 0.0;
  double reference_rate = 0.0;
  double boundary_mass = 0.0;
};

/// Decay of |u| away from the origin: maximum per radial shell of width 4h,
/// log-linear least squares over [0.25 R, 0.7 R] where R is the distance from
/// the origin to the nearest artificial edge. Throws InsufficientDecayError if
/// the mass within 2h of an artificial edge exceeds 1e-8 and `check_decay` is set.
AgmonFit agmon_fit(const std::vector<Complex>& nodal, const HalfPlaneGrid& grid, double sigma_val,
                   double sigma_ess_val, bool check_decay = true);

}  // namespace magfiber
