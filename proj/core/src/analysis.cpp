#include "magfiber/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <iterator>
#include <numbers>
#include <utility>

#include "magfiber/error.hpp"
#include "magfiber/io.hpp"
#include "magfiber/minimize.hpp"

namespace magfiber {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sigma_ess_or_nan(const ModelParams& p, double tau, const BandTable& table) {
  if (p.gamma == 0.0) return kNaN;
  try {
    return sigma_ess(p, tau, table);
  } catch (const TableRangeError&) {
    return kNaN;
  }
}

// Large-tau limits of sigma: the plateau value on each side, NaN for a divergent side.
std::pair<double, double> large_tau_limits(double a, double zeta_nu0) {
  if (a < 0.0) return {kNaN, std::abs(a) * zeta_nu0};
  return {a * zeta_nu0, zeta_nu0};
}

}  // namespace

double nu0(double alpha, double gamma) {
  const double s = std::clamp(std::sin(alpha) * std::sin(gamma), 0.0, 1.0);
  return std::asin(s);
}

std::string to_string(Classification c) {
  switch (c) {
    case Classification::Eigenvalue: return "Eigenvalue";
    case Classification::EssentialEdge: return "EssentialEdge";
    case Classification::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

Classification classify(double sigma, double sigma_ess, double delta) {
  if (!std::isfinite(sigma_ess)) return Classification::Undetermined;
  if (sigma < sigma_ess - delta) return Classification::Eigenvalue;
  if (sigma > sigma_ess + delta) return Classification::EssentialEdge;
  return Classification::Undetermined;
}

std::vector<GridLevel> default_levels(const Discretization& disc) {
  const double h = disc.h1;
  return {{4.0 * h, disc.L1, disc.L2},
          {2.0 * h, disc.L1, disc.L2},
          {h, disc.L1, disc.L2},
          {4.0 * h, 2.0 * disc.L1, 2.0 * disc.L2},
          {4.0 * h, 4.0 * disc.L1, 4.0 * disc.L2},
          {2.0 * h, 2.0 * disc.L1, 2.0 * disc.L2}};
}

Extrapolation extrapolate_levels(const std::vector<GridLevel>& levels, const std::vector<double>& values) {
  if (levels.size() < 4 || levels.size() > 6 || values.size() != levels.size())
    throw InvalidArgument("extrapolation needs three h-halving levels and one to three L-doubling levels");
  for (int i = 0; i < 2; ++i) {
    if (std::abs(levels[i].h - 2.0 * levels[i + 1].h) > 1e-12 * levels[i].h || levels[i].L1 != levels[i + 1].L1 ||
        levels[i].L2 != levels[i + 1].L2)
      throw InvalidArgument("extrapolation levels 0..2 must halve h at fixed L");
  }
  if (levels[3].h != levels[0].h || !(levels[3].L1 > levels[0].L1 || levels[3].L2 > levels[0].L2))
    throw InvalidArgument("extrapolation level 3 must enlarge L at the coarsest h");
  if (levels.size() >= 5 && (levels[4].h != levels[0].h || levels[4].L1 != 2.0 * levels[3].L1 ||
                             levels[4].L2 != 2.0 * levels[3].L2))
    throw InvalidArgument("extrapolation level 4 must double the L of level 3 at the coarsest h");
  if (levels.size() == 6 && (levels[5].h != levels[1].h || levels[5].L1 != levels[3].L1 ||
                             levels[5].L2 != levels[3].L2))
    throw InvalidArgument("extrapolation level 5 must repeat the L of level 3 at the middle h");

  Extrapolation e;
  e.levels = levels;
  e.values = values;
  const double v0 = values[0], v1 = values[1], v2 = values[2];
  const double d1 = v0 - v1;
  const double d2 = v1 - v2;
  const double noise = 1e-8 * std::max(1.0, std::abs(v2));
  if (std::abs(d1) <= noise && std::abs(d2) <= noise) {
    e.converged_below_noise = true;
    e.observed_ratio = kNaN;
    e.extrapolated = v2;
  } else {
    e.observed_ratio = d2 != 0.0 ? d1 / d2 : std::numeric_limits<double>::infinity();
    if (!(e.observed_ratio >= 2.5 && e.observed_ratio <= 6.0))
      throw OrderBreakdownError("observed h-convergence ratio " + format_double(e.observed_ratio) +
                                    " is outside [2.5, 6]",
                                e.observed_ratio);
    e.extrapolated = v2 - d2 / 3.0;
  }
  e.h_error = std::abs(v2 - e.extrapolated);
  const double dL = std::abs(values[3] - v0);
  e.L_sensitivity = 4.0 / 3.0 * dL;
  double factor = 4.0 / 3.0;
  if (values.size() >= 5) {
    // Soft effective walls make the tail decay slower than 1/L^2 over the
    // doublings we can afford; sum the observed geometric decay instead.
    const double dL2 = std::abs(values[4] - values[3]);
    if (dL > noise) {
      e.L_ratio = dL2 > 0.0 ? dL / dL2 : std::numeric_limits<double>::infinity();
      factor = std::max(factor, e.L_ratio > 1.5 ? e.L_ratio / (e.L_ratio - 1.0) : 3.0);
      e.L_sensitivity = factor * dL;
    } else {
      e.L_ratio = kNaN;
      e.L_sensitivity = std::max(e.L_sensitivity, dL + dL2);
    }
  }
  if (values.size() == 6) {
    // The tail itself depends on h. Measure it again at the middle h and
    // extrapolate it to h = 0 with the same second-order rule.
    const double tail_4h = factor * dL;
    const double tail_2h = factor * std::abs(values[5] - v1);
    const double tail_0 = tail_2h + (tail_2h - tail_4h) / 3.0;
    e.L_sensitivity = std::max({e.L_sensitivity, tail_2h, tail_0});
  }
  e.error_estimate = e.h_error + e.L_sensitivity;
  return e;
}

Extrapolation refine_extrapolate(const ModelParams& p, double tau, const std::vector<GridLevel>& levels,
                                 const Discretization& base) {
  std::vector<double> values;
  values.reserve(levels.size());
  for (const auto& lv : levels) {
    Discretization d = base;
    d.h1 = d.h2 = lv.h;
    d.L1 = lv.L1;
    d.L2 = lv.L2;
    values.push_back(SigmaSolver(p, d).solve(tau).value);
  }
  return extrapolate_levels(levels, values);
}

BetaResult ModelCache::beta(double a) {
  {
    std::lock_guard lock(mu_);
    if (auto it = beta_.find(a); it != beta_.end()) return it->second;
  }
  BetaResult b = magfiber::beta(a, disc_);
  std::lock_guard lock(mu_);
  return beta_.emplace(a, std::move(b)).first->second;
}

double ModelCache::zeta(double nu) {
  if (nu == 0.0) return theta0();
  {
    std::lock_guard lock(mu_);
    if (auto it = zeta_.find(nu); it != zeta_.end()) return it->second;
  }
  const double z = magfiber::zeta(nu, disc_);
  std::lock_guard lock(mu_);
  return zeta_.emplace(nu, z).first->second;
}

double ModelCache::theta0() {
  {
    std::lock_guard lock(mu_);
    if (theta0_) return *theta0_;
  }
  const double t = magfiber::theta0(disc_).value;
  std::lock_guard lock(mu_);
  if (!theta0_) theta0_ = t;
  return *theta0_;
}

LambdaReport lambda_bottom(const ModelParams& p, const Discretization& disc, const LambdaOptions& opts,
                           ModelCache* cache) {
  p.validate();
  disc.validate();
  const TauScan& scan = opts.scan;
  if (!(scan.tau_min < scan.tau_max) || scan.coarse_steps < 3)
    throw InvalidArgument("tau scan needs tau_min < tau_max and at least 3 samples");

  ModelCache local(disc);
  ModelCache& C = cache ? *cache : local;

  LambdaReport rep;
  rep.params = p;
  rep.delta = opts.delta;
  rep.disc = disc;
  rep.nu0 = nu0(p.alpha, p.gamma);
  const BetaResult b = C.beta(p.a);
  rep.beta_a = b.value;
  rep.xi_a = b.xi;
  rep.zeta_nu0 = C.zeta(rep.nu0);
  rep.bound_rhs = std::min(rep.beta_a, std::abs(p.a) * rep.zeta_nu0);

  const SigmaSolver solver(p, disc);
  rep.grid = solver.grid();

  if (p.gamma == 0.0) {
    // V = tau^2 everywhere: the operator at tau is the tau = 0 operator plus tau^2
    const SigmaResult s0 = solver.solve(0.0);
    rep.lambda = s0.value;
    rep.tau_star = 0.0;
    rep.sigma_ess_at_star = kNaN;
    rep.classification = Classification::Undetermined;
    rep.nodal_at_star = s0.nodal;
    rep.scan_lo = rep.scan_hi = 0.0;
    for (double t : {-1.0, 0.0, 1.0}) {
      const double v = t == 0.0 ? s0.value : solver.solve(t, &s0.eig.vectors[0], s0.value).value;
      rep.sigma_curve.push_back({t, v, kNaN});
    }
    rep.tol_solver = rep.tol_total = disc.tol * std::max(1.0, std::abs(rep.lambda));
    rep.bound_margin = rep.bound_rhs - rep.lambda;
    return rep;
  }

  struct Sample {
    double sigma;
    std::vector<Complex> vec;
  };
  std::map<double, Sample> samples;
  // warm start from the neighbouring sample; the shift hint extrapolates the
  // last two samples linearly
  auto evaluate = [&](double tau, const Sample* near, const Sample* before) {
    std::optional<double> hint;
    if (near) hint = before ? 2.0 * near->sigma - before->sigma : near->sigma;
    if (hint && before) hint = std::min(*hint, near->sigma + std::abs(near->sigma - before->sigma));
    const SigmaResult r = near ? solver.solve(tau, &near->vec, hint) : solver.solve(tau);
    return &samples.insert_or_assign(tau, Sample{r.value, r.eig.vectors[0]}).first->second;
  };

  const double dt = (scan.tau_max - scan.tau_min) / (scan.coarse_steps - 1);
  {
    const Sample* prev = nullptr;
    const Sample* before = nullptr;
    for (int i = 0; i < scan.coarse_steps; ++i) {
      const double tau = i + 1 == scan.coarse_steps ? scan.tau_max : scan.tau_min + dt * i;
      before = std::exchange(prev, evaluate(tau, prev, before));
    }
  }

  const auto [minus_limit, plus_limit] = large_tau_limits(p.a, rep.zeta_nu0);
  const int extension = std::max(1, (scan.coarse_steps - 1) / 2);
  for (;;) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [t, s] : samples) best = std::min(best, s.sigma);
    auto closed = [&](double end_sigma, double limit, bool end_is_min) {
      if (!end_is_min && end_sigma >= (1.0 + scan.end_rise) * best) return true;
      return std::isfinite(limit) && std::abs(end_sigma - limit) <= scan.end_rise * limit;
    };
    const auto& lo = *samples.begin();
    const auto& hi = *samples.rbegin();
    const bool lo_ok = closed(lo.second.sigma, minus_limit, lo.second.sigma == best);
    const bool hi_ok = closed(hi.second.sigma, plus_limit, hi.second.sigma == best);
    if (lo_ok && hi_ok) break;
    if (!lo_ok) {
      const double start = lo.first;
      if (start - extension * dt < -scan.widen_cap)
        throw ScanRangeExhaustedError("tau scan reached " + format_double(start) +
                                      " without the lower end rising or reaching its plateau");
      const Sample* prev = &lo.second;
      const Sample* before = &std::next(samples.begin())->second;
      for (int i = 1; i <= extension; ++i) before = std::exchange(prev, evaluate(start - i * dt, prev, before));
    }
    if (!hi_ok) {
      const double start = samples.rbegin()->first;
      if (start + extension * dt > scan.widen_cap)
        throw ScanRangeExhaustedError("tau scan reached " + format_double(start) +
                                      " without the upper end rising or reaching its plateau");
      const Sample* prev = &samples.rbegin()->second;
      const Sample* before = &std::next(samples.rbegin())->second;
      for (int i = 1; i <= extension; ++i) before = std::exchange(prev, evaluate(start + i * dt, prev, before));
    }
  }
  rep.scan_lo = samples.begin()->first;
  rep.scan_hi = samples.rbegin()->first;

  std::vector<double> taus;
  std::vector<double> sig;
  for (const auto& [t, s] : samples) {
    taus.push_back(t);
    sig.push_back(s.sigma);
  }
  const std::size_t k = static_cast<std::size_t>(std::min_element(sig.begin(), sig.end()) - sig.begin());
  {
    int minima = 0;
    for (std::size_t i = 0; i < sig.size(); ++i) {
      const bool left = i == 0 || sig[i] <= sig[i - 1];
      const bool right = i + 1 == sig.size() || sig[i] <= sig[i + 1];
      if (left && right && sig[i] <= sig[k] + opts.delta) ++minima;
    }
    rep.multiple_minima = minima > 1;
  }

  const Sample& seed = samples.at(taus[k]);
  double best_tau = taus[k];
  SigmaResult best = solver.solve(best_tau, &seed.vec, seed.sigma);
  auto consider = [&](double tau, SigmaResult&& r) {
    if (r.value < best.value) {
      best = std::move(r);
      best_tau = tau;
    }
  };
  {
    const double lo = taus[k == 0 ? 0 : k - 1];
    const double hi = taus[k + 1 == taus.size() ? k : k + 1];
    auto f = [&](double tau) {
      SigmaResult r = solver.solve(tau, &seed.vec, seed.sigma);
      const double v = r.value;
      consider(tau, std::move(r));
      return v;
    };
    golden_section(f, lo, hi, scan.tau_tol);
  }
  if (p.a < 0.0) {
    const double tp = rep.xi_a * std::sin(p.gamma);
    SigmaResult r = solver.solve(tp, &seed.vec, seed.sigma);
    rep.probe_tau = tp;
    rep.probe_sigma = r.value;
    consider(tp, std::move(r));
  }

  rep.lambda = best.value;
  rep.tau_star = best_tau;
  rep.nodal_at_star = std::move(best.nodal);
  rep.sigma_ess_at_star = sigma_ess(p, best_tau, b.table);
  rep.classification = classify(rep.lambda, rep.sigma_ess_at_star, opts.delta);
  for (std::size_t i = 0; i < taus.size(); ++i)
    rep.sigma_curve.push_back({taus[i], sig[i], sigma_ess_or_nan(p, taus[i], b.table)});
  rep.tol_solver = rep.tol_total = disc.tol * std::max(1.0, std::abs(rep.lambda));
  rep.bound_margin = rep.bound_rhs - rep.lambda;
  return rep;
}

TheoremCheck check_theorem(const ModelParams& p, const Discretization& disc, const LambdaOptions& opts,
                           ModelCache* cache) {
  TheoremCheck out;
  out.report = lambda_bottom(p, disc, opts, cache);
  LambdaReport& rep = out.report;
  rep.convergence = refine_extrapolate(p, rep.tau_star, default_levels(disc), disc);
  rep.tol_total = rep.tol_solver + rep.convergence->error_estimate;
  out.slack = rep.bound_rhs + rep.tol_total - rep.lambda;
  out.holds = out.slack >= 0.0;
  return out;
}

double box_for_tau(const ModelParams& p, double tau, double room, double base_L1) {
  const double sg = std::sin(p.gamma);
  const double sa = std::sin(p.alpha);
  double L = base_L1;
  if (sg == 0.0) return L;
  // the potential vanishes on the line sbar sin(gamma) l = tau, l the signed distance to the discontinuity line
  const double l1 = tau / sg;
  if (l1 >= 0.0) L = std::max(L, std::abs(l1 / sa) + room);
  const double l2 = tau / (p.a * sg);
  if (l2 < 0.0) L = std::max(L, std::abs(l2 / sa) + room);
  return L;
}

LimitsReport limits_check(const ModelParams& p, const Discretization& disc, double T, ModelCache* cache) {
  p.validate();
  if (p.gamma == 0.0) throw GammaZeroError("limits_check needs gamma in (0, pi/2]");
  if (!(T > 0.0)) throw InvalidArgument("limits_check needs T > 0");
  ModelCache local(disc);
  ModelCache& C = cache ? *cache : local;

  LimitsReport rep;
  rep.zeta_nu0 = C.zeta(nu0(p.alpha, p.gamma));
  Discretization d = disc;
  for (double tau : {-2.0 * T, 2.0 * T}) d.L1 = std::max(d.L1, box_for_tau(p, tau, disc.L_1d, disc.L1));
  rep.L1_used = d.L1;
  const SigmaSolver solver(p, d);
  const auto [minus_limit, plus_limit] = large_tau_limits(p.a, rep.zeta_nu0);

  auto side = [&](double sign, double limit) {
    LimitSide s;
    s.plateau = std::isfinite(limit);
    s.target = limit;
    s.tau_T = sign * T;
    s.tau_2T = sign * 2.0 * T;
    const SigmaResult rT = solver.solve(s.tau_T);
    s.sigma_T = rT.value;
    s.sigma_2T = solver.solve(s.tau_2T, &rT.eig.vectors[0]).value;
    s.pass = s.plateau ? std::abs(s.sigma_2T - limit) <= 0.05 * limit : s.sigma_2T >= 1.5 * s.sigma_T;
    return s;
  };
  rep.minus = side(-1.0, minus_limit);
  rep.plus = side(1.0, plus_limit);
  rep.pass = rep.minus.pass && rep.plus.pass;
  return rep;
}

AgmonFit agmon_fit(const std::vector<Complex>& nodal, const HalfPlaneGrid& grid, double sigma_val,
                   double sigma_ess_val, bool check_decay) {
  if (nodal.size() != grid.node_count()) throw DimensionError("agmon_fit: vector does not match grid");
  AgmonFit fit;
  fit.reference_rate = sigma_ess_val > sigma_val ? std::sqrt(sigma_ess_val - sigma_val) : 0.0;

  const double h = std::max(grid.h1(), grid.h2());
  double total = 0.0;
  double edge = 0.0;
  for (int j = 0; j < grid.n2(); ++j)
    for (int i = 0; i < grid.n1(); ++i) {
      const double m = std::norm(nodal[grid.index(i, j)]);
      total += m;
      const bool near = grid.x1(i) - grid.x1_min() <= 2.0 * grid.h1() + 1e-12 ||
                        grid.x1_max() - grid.x1(i) <= 2.0 * grid.h1() + 1e-12 ||
                        grid.x2_max() - grid.x2(j) <= 2.0 * grid.h2() + 1e-12;
      if (near) edge += m;
    }
  fit.boundary_mass = total > 0.0 ? edge / total : 0.0;
  if (check_decay && fit.boundary_mass > 1e-8)
    throw InsufficientDecayError("eigenfunction mass " + format_double(fit.boundary_mass) +
                                 " within 2h of the artificial boundary exceeds 1e-8");

  const double R = std::min({-grid.x1_min(), grid.x1_max(), grid.x2_max()});
  const double width = 4.0 * h;
  const std::size_t shells = static_cast<std::size_t>(std::ceil(R / width)) + 1;
  std::vector<double> amp(shells, 0.0);
  std::vector<double> where(shells, 0.0);
  for (int j = 0; j < grid.n2(); ++j)
    for (int i = 0; i < grid.n1(); ++i) {
      const double r = std::hypot(grid.x1(i), grid.x2(j));
      if (r > R) continue;
      const auto s = static_cast<std::size_t>(r / width);
      const double v = std::abs(nodal[grid.index(i, j)]);
      if (v > amp[s]) {
        amp[s] = v;
        where[s] = r;
      }
    }
  for (std::size_t s = 0; s < shells; ++s) {
    const double centre = (static_cast<double>(s) + 0.5) * width;
    if (centre < 0.25 * R || centre > 0.7 * R || !(amp[s] > 0.0)) continue;
    fit.radii.push_back(where[s]);
    fit.log_amplitudes.push_back(std::log(amp[s]));
  }
  const std::size_t n = fit.radii.size();
  if (n < 2) throw InvalidArgument("agmon_fit: fewer than two shells in the fitting annulus");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += fit.radii[i];
    my += fit.log_amplitudes[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (fit.radii[i] - mx) * (fit.log_amplitudes[i] - my);
    sxx += (fit.radii[i] - mx) * (fit.radii[i] - mx);
  }
  fit.fitted_rate = -sxy / sxx;
  return fit;
}

}  // namespace magfiber
