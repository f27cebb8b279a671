#include "magfiber/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "magfiber/analysis.hpp"
#include "magfiber/eigensolver.hpp"
#include "magfiber/error.hpp"
#include "magfiber/lattice.hpp"
#include "magfiber/models.hpp"
#include "magfiber/parallel.hpp"

namespace magfiber {

namespace {

constexpr double kPi = std::numbers::pi;

std::string g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// Accumulates named checks; the criterion passes when all of them hold.
class Checks {
public:
  void add(bool ok, const std::string& what) {
    ok_ = ok_ && ok;
    if (!text_.empty()) text_ += "; ";
    text_ += (ok ? "" : "FAILED ") + what;
  }
  void note(const std::string& what) {
    if (!text_.empty()) text_ += "; ";
    text_ += what;
  }
  bool ok() const noexcept { return ok_; }
  const std::string& text() const noexcept { return text_; }

private:
  bool ok_ = true;
  std::string text_;
};

struct SweepCell {
  ModelParams p;
  std::optional<TheoremCheck> check;
  std::string error;
};

// State shared between criteria so later ones reuse earlier solves.
struct Shared {
  int jobs = 0;
  ModelCache cache;
  std::optional<std::vector<SweepCell>> sweep;
  double sweep_seconds = 0.0;

  explicit Shared(int j) : jobs(j), cache([j] {
    Discretization d;
    d.jobs = j;
    return d;
  }()) {}
};

// ---- criterion 1: de Gennes constant -------------------------------------------------

void c1_theta0(Shared&, Checks& c) {
  Discretization d;
  d.L_half = 20.0;
  auto at = [&](double h) {
    Discretization e = d;
    e.h_1d = h;
    return theta0(e);
  };
  const Theta0Result t02 = at(0.02), t01 = at(0.01), t005 = at(0.005);
  const double diff = std::abs(t01.value - t005.value);
  c.add(diff <= 1e-4, "|theta0(h=0.01) - theta0(h=0.005)| = " + g(diff) + " <= 1e-4");
  const double e1 = t01.value + (t01.value - t02.value) / 3.0;
  const double e2 = t005.value + (t005.value - t01.value) / 3.0;
  c.add(std::abs(e1 - e2) <= 1e-5,
        "Richardson values " + g(e1) + ", " + g(e2) + " differ by " + g(std::abs(e1 - e2)) + " <= 1e-5");
  const double id = std::abs(t01.xi0 * t01.xi0 - t01.value);
  c.add(id <= 1e-3, "|xi0^2 - theta0| = " + g(id) + " <= 1e-3 (theta0 = " + g(t01.value) + ", xi0 = " + g(t01.xi0) + ")");
}

// ---- criterion 2: zeta anchors and monotonicity ---------------------------------------

void c2_zeta(Shared& s, Checks& c) {
  const Discretization& d = s.cache.disc();
  const double th = s.cache.theta0();
  const double z0 = zeta(0.0, d);
  c.add(std::abs(z0 - th) <= 2e-3, "|zeta(0) - theta0| = " + g(std::abs(z0 - th)) + " <= 2e-3");

  // At nu = pi/2 the t direction is free, so the truncated 2D value carries the
  // Dirichlet tail (pi / 2 L2)^2; the L2-doubled solve removes that 1/L2^2 term.
  Discretization wide = d;
  wide.L2 = 2.0 * d.L2;
  const double vL = zeta_2d(kPi / 2.0, d).values[0];
  const double v2L = zeta_2d(kPi / 2.0, wide).values[0];
  const double corrected = v2L - (vL - v2L) / 3.0;
  c.add(std::abs(corrected - 1.0) <= 2e-3, "2D zeta(pi/2) = " + g(vL) + " (L2=" + g(d.L2) + "), " + g(v2L) + " (L2=" +
                                               g(wide.L2) + "), tail-corrected " + g(corrected) + ", |. - 1| <= 2e-3");
  c.add(zeta(kPi / 2.0, d) == 1.0, "zeta(pi/2) shortcut = 1");

  const std::vector<double> nus = {0.0, kPi / 8.0, kPi / 4.0, 3.0 * kPi / 8.0, kPi / 2.0};
  std::vector<double> z(nus.size());
  for (std::size_t i = 0; i < nus.size(); ++i) z[i] = s.cache.zeta(nus[i]);
  bool mono = true;
  std::string seq;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (i > 0 && z[i] < z[i - 1]) mono = false;
    seq += (i ? ", " : "") + g(z[i]);
  }
  c.add(mono, "zeta over nu = 0, pi/8, pi/4, 3pi/8, pi/2: " + seq + " nondecreasing");
}

// ---- criteria 3 and 4: beta ------------------------------------------------------------

void c3_beta_positive(Shared& s, Checks& c) {
  for (double a : {0.25, 0.5, 0.75}) {
    const BetaResult b = s.cache.beta(a);
    c.add(std::abs(b.value - a) <= 5e-3, "a=" + g(a) + ": |beta - a| = " + g(std::abs(b.value - a)) + " <= 5e-3");
  }
}

void c4_beta_negative(Shared& s, Checks& c) {
  const double th = s.cache.theta0();
  for (double a : {-0.25, -0.5, -1.0}) {
    const BetaResult b = s.cache.beta(a);
    const double lo = std::abs(a) * th - 1e-3;
    c.add(b.value >= lo, "a=" + g(a) + ": beta = " + g(b.value) + " >= |a| theta0 - 1e-3 = " + g(lo));
  }
}

// ---- criterion 5: sigma_ess at gamma = pi/2 -----------------------------------------------

void c5_sigma_ess_degenerate(Shared& s, Checks& c) {
  for (double a : {-0.5, 0.5}) {
    const ModelParams p{kPi / 2.0, kPi / 2.0, a};
    const BandTable& table = s.cache.beta(a).table;
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double tau = -8.0 + 16.0 * i / 19.0;
      worst = std::max(worst, std::abs(sigma_ess(p, tau, table) - mu_a_value(a, tau, s.cache.disc())));
    }
    c.add(worst <= 1e-4, "a=" + g(a) + ": max |sigma_ess - mu_a(tau)| over 20 tau = " + g(worst) + " <= 1e-4");
  }
}

// ---- criterion 6: sigma_ess floor ---------------------------------------------------------

void c6_sigma_ess_floor(Shared& s, Checks& c) {
  const std::vector<ModelParams> sets = {{kPi / 2.0, kPi / 4.0, -0.5}, {kPi / 4.0, kPi / 2.0, -1.0},
                                         {3.0 * kPi / 4.0, kPi / 4.0, 0.5}};
  for (const auto& p : sets) {
    const BetaResult b = s.cache.beta(p.a);
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 160; ++i) lo = std::min(lo, sigma_ess(p, -8.0 + 0.1 * i, b.table));
    c.add(lo >= b.value - 1e-4, "(" + g(p.alpha) + ", " + g(p.gamma) + ", " + g(p.a) + "): min sigma_ess = " + g(lo) +
                                    " >= beta - 1e-4 = " + g(b.value - 1e-4));
  }
}

// ---- criterion 7: large tau ----------------------------------------------------------------

void c7_large_tau(Shared& s, Checks& c) {
  {
    const ModelParams p{kPi / 2.0, kPi / 2.0, -0.5};
    const LimitsReport r = limits_check(p, s.cache.disc(), 6.0, &s.cache);
    const double ratio = r.minus.sigma_2T / r.minus.sigma_T;
    c.add(ratio >= 4.0, "a=-0.5: sigma(-12)/sigma(-6) = " + g(r.minus.sigma_2T) + "/" + g(r.minus.sigma_T) + " = " +
                            g(ratio) + " >= 4");
    const double dev = std::abs(r.plus.sigma_2T - 0.5);
    c.add(dev <= 0.025, "a=-0.5: |sigma(12) - 0.5| = " + g(dev) + " <= 0.025");
  }
  {
    const ModelParams p{kPi / 2.0, kPi / 2.0, 0.5};
    const LimitsReport r = limits_check(p, s.cache.disc(), 6.0, &s.cache);
    const double z = r.zeta_nu0;
    const double dm = std::abs(r.minus.sigma_2T - 0.5 * z);
    const double dp = std::abs(r.plus.sigma_2T - z);
    c.add(dm <= 0.05 * 0.5 * z, "a=0.5: |sigma(-12) - 0.5 zeta| = " + g(dm) + " <= " + g(0.05 * 0.5 * z));
    c.add(dp <= 0.05 * z, "a=0.5: |sigma(12) - zeta| = " + g(dp) + " <= " + g(0.05 * z));
  }
}

// ---- criteria 8 and 10: the parameter sweep ------------------------------------------------

std::vector<ModelParams> sweep_params() {
  std::vector<ModelParams> out;
  for (double al : {kPi / 4.0, kPi / 2.0, 3.0 * kPi / 4.0})
    for (double ga : {kPi / 4.0, kPi / 2.0})
      for (double a : {-1.0, -0.5, 0.5}) out.push_back({al, ga, a});
  return out;
}

void run_sweep(Shared& s) {
  if (s.sweep) return;
  const auto t0 = std::chrono::steady_clock::now();
  const auto params = sweep_params();
  std::vector<SweepCell> cells(params.size());
  // beta and zeta first, so parallel cells do not compute them twice
  for (double a : {-1.0, -0.5, 0.5}) s.cache.beta(a);
  parallel_for(params.size(), s.jobs, [&](std::size_t i) {
    cells[i].p = params[i];
    Discretization d = s.cache.disc();
    d.jobs = 1;
    try {
      cells[i].check = check_theorem(params[i], d, {}, &s.cache);
    } catch (const std::exception& e) {
      cells[i].error = e.what();
    }
  });
  s.sweep = std::move(cells);
  s.sweep_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string cell_name(const ModelParams& p) {
  return "(" + g(p.alpha / kPi) + "pi, " + g(p.gamma / kPi) + "pi, " + g(p.a) + ")";
}

void c8_theorem(Shared& s, Checks& c) {
  run_sweep(s);
  int held = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  double worst_tol = 0.0;
  for (const auto& cell : *s.sweep) {
    if (!cell.check) {
      c.add(false, cell_name(cell.p) + " error: " + cell.error);
      continue;
    }
    const LambdaReport& r = cell.check->report;
    worst_slack = std::min(worst_slack, cell.check->slack);
    worst_tol = std::max(worst_tol, r.tol_total);
    if (!cell.check->holds)
      c.add(false, cell_name(cell.p) + ": lambda = " + g(r.lambda) + " > rhs + tol_total = " + g(r.bound_rhs) + " + " +
                       g(r.tol_total));
    else
      ++held;
    if (r.tol_total > 5e-3) c.add(false, cell_name(cell.p) + ": tol_total = " + g(r.tol_total) + " > 5e-3");
  }
  c.add(held == static_cast<int>(s.sweep->size()),
        std::to_string(held) + "/" + std::to_string(s.sweep->size()) + " cells satisfy the bound");
  c.note("smallest slack " + g(worst_slack) + ", largest tol_total " + g(worst_tol));
}

void c10_classification(Shared& s, Checks& c) {
  run_sweep(s);
  int eigen_cells = 0;
  int agmon_ok = 0;
  for (const auto& cell : *s.sweep) {
    if (!cell.check) continue;
    const LambdaReport& r = cell.check->report;
    if (cell.p.a < 0.0 && r.probe_sigma) {
      const bool ok = *r.probe_sigma <= r.beta_a + r.tol_total;
      c.add(ok, cell_name(cell.p) + " probe sigma(" + g(*r.probe_tau) + ") = " + g(*r.probe_sigma) +
                    " <= beta + tol_total = " + g(r.beta_a + r.tol_total));
    }
    if (r.classification != Classification::Eigenvalue) continue;
    ++eigen_cells;
    try {
      const AgmonFit fit = agmon_fit(r.nodal_at_star, *r.grid, r.lambda, r.sigma_ess_at_star);
      const bool ok = fit.fitted_rate >= 0.8 * fit.reference_rate;
      if (ok) ++agmon_ok;
      c.note(cell_name(cell.p) + " Eigenvalue, gap " + g(r.sigma_ess_at_star - r.lambda) + ", decay rate " +
             g(fit.fitted_rate) + (ok ? " >= " : " < ") + "0.8 x " + g(fit.reference_rate));
    } catch (const InsufficientDecayError& e) {
      c.note(cell_name(cell.p) + " Eigenvalue, " + e.what());
    }
  }
  if (eigen_cells == 0) {
    std::string margins;
    for (const auto& cell : *s.sweep)
      if (cell.check)
        margins += " " + g(cell.check->report.sigma_ess_at_star - cell.check->report.lambda);
    c.note("no cell classified Eigenvalue; sigma_ess - lambda per cell:" + margins);
  } else {
    c.add(agmon_ok > 0, std::to_string(agmon_ok) + "/" + std::to_string(eigen_cells) +
                            " Eigenvalue cells pass the decay-rate check");
  }
}

// ---- criterion 9: gamma = 0 ----------------------------------------------------------------

void c9_gamma_zero(Shared& s, Checks& c) {
  const double th = s.cache.theta0();
  for (const ModelParams& p : {ModelParams{kPi / 2.0, 0.0, -0.5}, ModelParams{kPi / 4.0, 0.0, 0.5}}) {
    const TheoremCheck t = check_theorem(p, s.cache.disc(), {}, &s.cache);
    const LambdaReport& r = t.report;
    c.add(r.tau_star == 0.0, cell_name(p) + ": tau* = " + g(r.tau_star));
    const SigmaSolver solver(p, s.cache.disc());
    const SigmaResult s0 = solver.solve(0.0);
    double worst = 0.0;
    for (double tau : {-2.0, -1.0, 0.5, 1.0, 3.0}) {
      const double v = solver.solve(tau).value;
      worst = std::max(worst, std::abs(v - s0.value - tau * tau));
    }
    for (const auto& pt : r.sigma_curve) worst = std::max(worst, std::abs(pt.sigma - r.lambda - pt.tau * pt.tau));
    c.add(worst <= 1e-10, cell_name(p) + ": max |sigma(tau) - sigma(0) - tau^2| = " + g(worst) + " <= 1e-10");
    const double rhs = std::abs(p.a) * th;
    c.add(r.lambda <= rhs + r.tol_total,
          cell_name(p) + ": lambda = " + g(r.lambda) + " <= |a| theta0 + tol_total = " + g(rhs) + " + " + g(r.tol_total));
  }
}

// ---- criterion 11: infrastructure ------------------------------------------------------------

HermitianSparse random_hermitian(std::mt19937_64& rng, int n, double density) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> pick(0.0, 1.0);
  std::vector<MatrixEntry> e;
  for (int i = 0; i < n; ++i) {
    e.push_back({i, i, Complex(4.0 * u(rng), 0.0)});
    for (int j = i + 1; j < n; ++j)
      if (pick(rng) < density) e.push_back({i, j, Complex(u(rng), u(rng))});
  }
  return HermitianSparse::from_upper(n, std::move(e));
}

void c11_infrastructure(Shared&, Checks& c) {
  // Hermiticity of every kind of assembled operator
  int checked = 0;
  bool herm = true;
  auto check_op = [&](const DiscreteOperator& op) {
    ++checked;
    herm = herm && op.matrix.is_hermitian() && op.matrix.has_unique_columns();
  };
  Discretization coarse;
  coarse.h1 = coarse.h2 = 0.4;
  coarse.h_1d = 0.05;
  for (double a : {-1.0, -0.5, 0.25, 0.5})
    for (double xi : {-10.0, 0.0, 3.0}) {
      const Grid1D grid = fiber_grid(a, xi, coarse);
      check_op(assemble_1d(grid, ScalarField::sample(grid, [&](double t) {
                             const double d = b_profile(a, t) - xi;
                             return d * d;
                           }),
                           Boundary::Dirichlet, Boundary::Dirichlet));
    }
  for (double xi : {-2.0, 0.0, 0.77, 3.0}) {
    const Grid1D grid = Grid1D::aligned(0.0, coarse.L_half, coarse.h_1d);
    check_op(assemble_1d(grid, ScalarField::sample(grid, [&](double t) { return (t - xi) * (t - xi); }),
                         Boundary::Neumann, Boundary::Dirichlet));
  }
  for (const auto& p : sweep_params()) {
    const SigmaSolver solver(p, coarse);
    for (double tau : {-6.0, 0.0, 2.5}) check_op(solver.assemble(tau));
  }
  c.add(herm, std::to_string(checked) + " assembled operators exactly Hermitian with unique columns");

  // gauge invariance on 10 x 10 grids
  std::mt19937_64 rng(20240917);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  double worst_gauge = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const HalfPlaneGrid grid(-1.0, 1.0, 1.0, 10, 10);
    const ModelParams p{0.3 + 0.5 * trial, 0.2 * trial, trial % 2 ? 0.5 : -0.5};
    const GaugeField ph = link_phases([&](double x1, double x2) { return underline_A(p, x1, x2); }, grid);
    std::vector<double> chi(grid.node_count());
    for (double& x : chi) x = 10.0 * u(rng);
    const auto V = ScalarField::sample(grid, [&](double x1, double x2) { return v_tau(p, 0.3, x1, x2); });
    for (const auto& bc : {BoundarySpec::half_plane(), BoundarySpec::all(Boundary::Dirichlet)}) {
      const auto A = assemble_2d_magnetic(grid, ph, V, bc);
      const auto B = assemble_2d_magnetic(grid, gauge_transform(ph, chi), V, bc);
      EigenConfig cfg;
      cfg.tol = 1e-12;
      cfg.k = 3;
      const auto ea = smallest_eigs(A.matrix, cfg);
      const auto eb = smallest_eigs(B.matrix, cfg);
      for (int i = 0; i < cfg.k; ++i)
        worst_gauge = std::max(worst_gauge, std::abs(ea.values[i] - eb.values[i]) / std::max(1.0, std::abs(ea.values[i])));
    }
  }
  c.add(worst_gauge <= 1e-10, "gauge transform changes eigenvalues by " + g(worst_gauge) + " <= 1e-10");

  // iterative solver against the dense oracle
  double worst_oracle = 0.0;
  for (int m = 0; m < 50; ++m) {
    const int n = 8 + (m * 392) / 49;
    const HermitianSparse H = random_hermitian(rng, n, m % 3 == 0 ? 0.5 : 6.0 / n);
    EigenConfig cfg;
    cfg.k = 1 + m % 3;
    cfg.seed = 1000 + static_cast<std::uint64_t>(m);
    const auto r = smallest_eigs(H, cfg);
    const auto ref = dense_oracle_eigs(H);
    for (int i = 0; i < cfg.k; ++i) worst_oracle = std::max(worst_oracle, std::abs(r.values[i] - ref[i]));
  }
  c.add(worst_oracle <= 1e-8, "50 seeded matrices (dim 8..400): max |smallest_eigs - dense oracle| = " +
                                  g(worst_oracle) + " <= 1e-8");
}

struct Criterion {
  int id;
  const char* title;
  double budget;
  void (*run)(Shared&, Checks&);
};

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
  static const Criterion all[] = {
      {1, "de Gennes constant", 10.0, c1_theta0},
      {2, "zeta anchors and monotonicity", 300.0, c2_zeta},
      {3, "beta_a = a for a > 0", 60.0, c3_beta_positive},
      {4, "beta_a >= |a| theta0 for a < 0", 60.0, c4_beta_negative},
      {5, "sigma_ess at gamma = pi/2 equals mu_a", 60.0, c5_sigma_ess_degenerate},
      {6, "sigma_ess floor", 120.0, c6_sigma_ess_floor},
      {7, "large-tau behaviour", 1200.0, c7_large_tau},
      {8, "bound over the 18-cell sweep", 7200.0, c8_theorem},
      {9, "gamma = 0", 600.0, c9_gamma_zero},
      {10, "classification, probe and decay", 7200.0, c10_classification},
      {11, "infrastructure invariants", 120.0, c11_infrastructure},
  };
  Shared shared(opts.jobs);
  std::vector<CriterionResult> out;
  for (const auto& crit : all) {
    if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), crit.id) == opts.only.end()) continue;
    CriterionResult r;
    r.id = crit.id;
    r.title = crit.title;
    r.budget_seconds = crit.budget;
    Checks checks;
    const auto t0 = std::chrono::steady_clock::now();
    const double sweep_before = shared.sweep_seconds;
    try {
      crit.run(shared, checks);
    } catch (const std::exception& e) {
      checks.add(false, std::string("error: ") + e.what());
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // criterion 10 shares the sweep with criterion 8 and is budgeted together with it
    if (crit.id == 10) r.seconds += sweep_before;
    const bool in_time = r.seconds <= r.budget_seconds;
    if (!in_time) checks.add(false, "runtime " + g(r.seconds) + " s exceeds budget " + g(r.budget_seconds) + " s");
    r.pass = checks.ok();
    r.detail = checks.text();
    if (opts.on_result) opts.on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  char head[64];
  std::snprintf(head, sizeof head, "%s [%2d] ", r.pass ? "PASS" : "FAIL", r.id);
  char tail[64];
  std::snprintf(tail, sizeof tail, " | %.1f s / %.0f s", r.seconds, r.budget_seconds);
  return std::string(head) + r.title + " | " + r.detail + tail;
}

}  // namespace magfiber
