#include "magfiber/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "magfiber/error.hpp"
#include "magfiber/io.hpp"
#include "magfiber/minimize.hpp"
#include "magfiber/parallel.hpp"

namespace magfiber {

namespace {

constexpr double kPi = std::numbers::pi;

EigenConfig model_config(const Discretization& disc) {
  EigenConfig cfg;
  cfg.k = 1;
  cfg.tol = disc.tol;
  cfg.max_iter = disc.max_iter;
  cfg.seed = disc.seed;
  cfg.preconditioner = Preconditioner::ShiftInvert;
  cfg.shift = 0.0;
  cfg.extra_columns = 1;
  return cfg;
}

EigenResult solve_checked(const HermitianSparse& H, const EigenConfig& cfg, const char* what) {
  EigenResult r = smallest_eigs(H, cfg);
  if (!r.converged)
    throw NotConvergedError(std::string(what) + ": eigensolver stopped at residual " + format_double(r.residuals[0]) +
                            " after " + std::to_string(r.iterations) + " iterations");
  return r;
}

}  // namespace

void validate_field_ratio(double a) {
  if (!std::isfinite(a) || a < -1.0 || a >= 1.0 || a == 0.0)
    throw ValidationError("a", "a = " + format_double(a) +
                                   " is outside [-1, 1) \\ {0}; a = 0 is excluded by the model's standing assumption");
}

void ModelParams::validate() const {
  if (!std::isfinite(alpha) || !(alpha > 0.0 && alpha < kPi))
    throw ValidationError("alpha", "alpha = " + format_double(alpha) + " is outside (0, pi)");
  if (!std::isfinite(gamma) || gamma < 0.0 || gamma > kPi / 2.0 + 1e-12)
    throw ValidationError("gamma", "gamma = " + format_double(gamma) + " is outside [0, pi/2]");
  validate_field_ratio(a);
}

void Discretization::validate() const {
  auto positive = [](double v, const char* name) {
    if (!std::isfinite(v) || !(v > 0.0))
      throw ValidationError(name, std::string(name) + " = " + format_double(v) + " must be positive");
  };
  positive(h_1d, "h_1d");
  positive(L_1d, "L_1d");
  positive(L_half, "L_half");
  positive(h1, "h1");
  positive(h2, "h2");
  positive(L1, "L1");
  positive(L2, "L2");
  positive(tol, "tol");
  if (max_iter < 1) throw ValidationError("max_iter", "max_iter must be at least 1");
}

double b_profile(double a, double t) { return t >= 0.0 ? t : a * t; }

Grid1D fiber_grid(double a, double xi, const Discretization& disc) {
  double lo = -disc.L_1d;
  double hi = disc.L_1d;
  auto room = [&](double well) {
    lo = std::min(lo, well - disc.L_1d);
    hi = std::max(hi, well + disc.L_1d);
  };
  if (xi >= 0.0) room(xi);
  if (xi / a < 0.0) room(xi / a);
  return Grid1D::aligned(lo, hi, disc.h_1d);
}

FiberMode mu_a(double a, double xi, const Discretization& disc) {
  validate_field_ratio(a);
  if (disc.literal_fiber && a < 0.0)
    throw InvalidArgument("the literal fiber form a (t - xi)^2 is negative for a < 0");
  const Grid1D grid = fiber_grid(a, xi, disc);
  const auto V = ScalarField::sample(grid, [&](double t) {
    if (disc.literal_fiber && t < 0.0) return a * (t - xi) * (t - xi);
    const double d = b_profile(a, t) - xi;
    return d * d;
  });
  const DiscreteOperator op = assemble_1d(grid, V, Boundary::Dirichlet, Boundary::Dirichlet);
  const EigenResult r = smallest_eigs_tridiagonal(op.matrix);

  FiberMode mode;
  mode.value = r.values[0];
  mode.residual = r.residuals[0];
  mode.iterations = r.iterations;
  const auto u = op.nodal(r.vectors[0]);
  mode.nodes.resize(u.size());
  mode.eigenfunction.resize(u.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    mode.nodes[i] = grid.node(static_cast<int>(i));
    mode.eigenfunction[i] = u[i].real();
    if (std::abs(u[i].real()) > std::abs(peak)) peak = u[i].real();
  }
  const double scale = (peak < 0.0 ? -1.0 : 1.0) / std::sqrt(grid.h());
  for (double& v : mode.eigenfunction) v *= scale;
  return mode;
}

double mu_a_value(double a, double xi, const Discretization& disc) { return mu_a(a, xi, disc).value; }

double de_gennes(double xi, const Discretization& disc) {
  const Grid1D grid = Grid1D::aligned(0.0, disc.L_half, disc.h_1d);
  const auto V = ScalarField::sample(grid, [&](double t) { return (t - xi) * (t - xi); });
  const DiscreteOperator op = assemble_1d(grid, V, Boundary::Neumann, Boundary::Dirichlet);
  return smallest_eigs_tridiagonal(op.matrix).values[0];
}

Theta0Result theta0(const Discretization& disc) {
  auto f = [&](double xi) { return de_gennes(xi, disc); };
  bool edge = false;
  const Minimum m = scan_then_refine(f, 0.0, 2.0, 20, 1e-8, &edge);
  if (edge) throw MinimizerAtEdgeError("theta0: de Gennes minimum is not inside [0, 2]");
  return {m.f, m.x};
}

BandTable band_table(double a, double xi_lo, double xi_hi, int steps, const Discretization& disc,
                     bool allow_lower_edge) {
  validate_field_ratio(a);
  if (!(xi_lo < xi_hi)) throw InvalidArgument("band_table requires xi_lo < xi_hi");
  if (steps < 16) throw InvalidArgument("band_table requires at least 16 steps");
  std::vector<double> xi(static_cast<std::size_t>(steps) + 1);
  std::vector<double> mu(xi.size());
  for (int i = 0; i <= steps; ++i) xi[i] = i == steps ? xi_hi : xi_lo + (xi_hi - xi_lo) * i / steps;
  parallel_for(xi.size(), disc.jobs, [&](std::size_t i) { mu[i] = mu_a_value(a, xi[i], disc); });
  BandTable table(a, std::move(xi), std::move(mu));
  const std::size_t k = table.argmin();
  const bool lower = k == 0;
  const bool upper = k + 1 == table.xi().size();
  if (upper || (lower && !(allow_lower_edge && a > 0.0)))
    throw MinimizerAtEdgeError("band minimum for a=" + format_double(a) + " sits at xi=" +
                               format_double(table.xi()[k]) + ", the edge of [" + format_double(xi_lo) + ", " +
                               format_double(xi_hi) + "]; widen the range");
  return table;
}

BetaResult beta(double a, const Discretization& disc) {
  BandTable table = band_table(a, kBandXiLo, kBandXiHi, kBandSteps, disc, true);
  const std::size_t k = table.argmin();
  // a > 0: the band decreases toward its deep-well limit as xi -> -infinity,
  // flat there up to discretization noise, so an interior sample within that
  // noise of the lower edge is not a genuine minimum
  if (k == 0 || (a > 0.0 && table.mu()[0] - table.mu()[k] <= 1e-6 * std::max(1.0, table.mu()[k]))) {
    const double v = table.mu()[k];
    const double x = table.xi()[k];
    return {v, x, false, std::move(table)};
  }
  const auto& xs = table.xi();
  const Minimum m = golden_section([&](double x) { return mu_a_value(a, x, disc); }, xs[k - 1], xs[k + 1], 1e-8);
  double value = m.f;
  double x = m.x;
  if (table.mu()[k] < value) {
    value = table.mu()[k];
    x = xs[k];
  }
  return {value, x, true, std::move(table)};
}

EigenResult zeta_2d(double nu, const Discretization& disc) {
  if (!std::isfinite(nu) || nu < 0.0 || nu > kPi / 2.0 + 1e-12)
    throw ValidationError("nu", "nu = " + format_double(nu) + " is outside [0, pi/2]");
  const auto grid = HalfPlaneGrid::aligned(-disc.L1, disc.L1, disc.L2, disc.h1, disc.h2);
  const double c = std::cos(nu);
  const double s = std::sin(nu);
  const auto V = ScalarField::sample(grid, [&](double x1, double x2) {
    const double d = x2 * c - x1 * s;
    return d * d;
  });
  const auto op = assemble_2d_magnetic(grid, GaugeField::trivial(grid.n1(), grid.n2()), V, BoundarySpec::half_plane(),
                                       disc.node_cap);
  return solve_checked(op.matrix, model_config(disc), "zeta");
}

double zeta(double nu, const Discretization& disc) {
  if (!std::isfinite(nu) || nu < 0.0 || nu > kPi / 2.0 + 1e-12)
    throw ValidationError("nu", "nu = " + format_double(nu) + " is outside [0, pi/2]");
  if (nu == 0.0) return theta0(disc).value;
  if (std::abs(nu - kPi / 2.0) < 1e-12) return 1.0;
  return zeta_2d(nu, disc).values[0];
}

bool in_first_sector(const ModelParams& p, double x1, double x2) {
  return x1 * std::sin(p.alpha) - x2 * std::cos(p.alpha) >= 0.0;
}

Vec2 underline_A(const ModelParams& p, double x1, double x2) {
  const double cg = std::cos(p.gamma);
  if (in_first_sector(p, x1, x2)) return {0.0, cg * (x1 - (1.0 - p.a) * x2 / std::tan(p.alpha))};
  return {0.0, p.a * cg * x1};
}

double v_tau(const ModelParams& p, double tau, double x1, double x2) {
  const double sbar = in_first_sector(p, x1, x2) ? 1.0 : p.a;
  const double d = sbar * std::sin(p.gamma) * (x1 * std::sin(p.alpha) - x2 * std::cos(p.alpha)) - tau;
  return d * d;
}

SigmaSolver::SigmaSolver(const ModelParams& p, const Discretization& disc)
    : p_(p),
      disc_(disc),
      grid_(HalfPlaneGrid::aligned(-disc.L1, disc.L1, disc.L2, disc.h1, disc.h2)),
      phases_(GaugeField::trivial(3, 3)) {
  p_.validate();
  disc_.validate();
  if (grid_.node_count() > disc_.node_cap)
    throw MemoryCapError("sigma grid has " + std::to_string(grid_.node_count()) + " nodes, cap is " +
                         std::to_string(disc_.node_cap));
  phases_ = link_phases([this](double x1, double x2) { return underline_A(p_, x1, x2); }, grid_);
  linear_.resize(grid_.node_count());
  const double sg = std::sin(p_.gamma);
  const double sa = std::sin(p_.alpha);
  const double ca = std::cos(p_.alpha);
  for (int j = 0; j < grid_.n2(); ++j)
    for (int i = 0; i < grid_.n1(); ++i) {
      const double x1 = grid_.x1(i);
      const double x2 = grid_.x2(j);
      const double sbar = in_first_sector(p_, x1, x2) ? 1.0 : p_.a;
      linear_[grid_.index(i, j)] = sbar * sg * (x1 * sa - x2 * ca);
    }
}

DiscreteOperator SigmaSolver::assemble(double tau) const {
  std::vector<double> v(linear_.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = (linear_[k] - tau) * (linear_[k] - tau);
  return assemble_2d_magnetic(grid_, phases_, ScalarField(std::move(v)), BoundarySpec::half_plane(), disc_.node_cap);
}

SigmaResult SigmaSolver::solve(double tau, const std::vector<Complex>* warm, std::optional<double> hint) const {
  const DiscreteOperator op = assemble(tau);
  EigenConfig cfg = model_config(disc_);
  if (warm && warm->size() == op.nodes.size()) cfg.initial = {*warm};
  if (hint) cfg.shift = *hint - disc_.shift_margin * std::max(1.0, std::abs(*hint));
  EigenResult r = solve_checked(op.matrix, cfg, "sigma");
  SigmaResult out{r.values[0], std::move(r), grid_, {}};
  out.nodal = op.nodal(out.eig.vectors[0]);
  return out;
}

SigmaResult sigma(const ModelParams& p, double tau, const Discretization& disc) {
  return SigmaSolver(p, disc).solve(tau);
}

double sigma_ess(const ModelParams& p, double tau, const BandTable& table) {
  p.validate();
  if (p.a != table.a())
    throw InvalidArgument("sigma_ess: band table was built for a=" + format_double(table.a()) + ", params have a=" +
                          format_double(p.a));
  if (p.gamma == 0.0) throw GammaZeroError("sigma_ess is defined for gamma in (0, pi/2]");
  const double sg = std::sin(p.gamma);
  const double cg = std::cos(p.gamma);
  // substitute u = tau sin(gamma) + xi cos(gamma); the penalty becomes (u sin(gamma) - tau)^2 / cos(gamma)^2
  if (cg < 1e-12) return table(tau / sg);
  const double inv_c2 = 1.0 / (cg * cg);
  auto f = [&](double u) {
    const double d = u * sg - tau;
    return table(u) + d * d * inv_c2;
  };
  const auto& us = table.xi();
  const std::size_t n = us.size();
  std::size_t best = 0;
  double best_f = f(us[0]);
  for (std::size_t i = 1; i < n; ++i) {
    const double v = f(us[i]);
    if (v < best_f) {
      best_f = v;
      best = i;
    }
  }
  double lo = us[best == 0 ? 0 : best - 1];
  double hi = us[best + 1 == n ? n - 1 : best + 1];
  // a steep penalty can hide the well between two table nodes
  const double u0 = tau / sg;
  if (table.covers(u0) && f(u0) < best_f) {
    best_f = f(u0);
    const double h = us[1] - us[0];
    lo = std::max(us.front(), u0 - h);
    hi = std::min(us.back(), u0 + h);
    best = n;  // interior by construction
  }
  if (best == 0 || best + 1 == n)
    throw TableRangeError("sigma_ess: minimizing band argument is at the table edge (u=" +
                          format_double(us[best]) + "); widen the band table");
  const Minimum m = golden_section(f, lo, hi, 1e-10 * std::max(1.0, std::abs(lo)));
  return std::min(m.f, best_f);
}

}  // namespace magfiber
