#include <doctest.h>

#include <cmath>
#include <numbers>

#include "magfiber/analysis.hpp"
#include "magfiber/band_table.hpp"
#include "magfiber/error.hpp"
#include "magfiber/minimize.hpp"
#include "magfiber/parallel.hpp"
#include "oracles.hpp"

using namespace magfiber;

namespace {

constexpr double kPi = std::numbers::pi;

Discretization small_box() {
  Discretization d;
  d.h1 = d.h2 = 0.1;
  d.L1 = 8.0;
  d.L2 = 8.0;
  d.h_1d = 0.02;
  return d;
}

std::vector<Complex> sample(const HalfPlaneGrid& g, const std::function<double(double, double)>& f) {
  std::vector<Complex> v(g.node_count());
  for (int j = 0; j < g.n2(); ++j)
    for (int i = 0; i < g.n1(); ++i) v[g.index(i, j)] = f(g.x1(i), g.x2(j));
  return v;
}

}  // namespace

TEST_CASE("effective tilt angle") {
  CHECK(nu0(kPi / 2.0, kPi / 2.0) == doctest::Approx(kPi / 2.0));
  CHECK(nu0(1.234, 0.0) == 0.0);
  CHECK(nu0(kPi / 6.0, kPi / 2.0) == doctest::Approx(kPi / 6.0).epsilon(1e-14));
  CHECK(nu0(3.0 * kPi / 4.0, kPi / 4.0) == doctest::Approx(kPi / 6.0).epsilon(1e-14));
}

TEST_CASE("classification margins") {
  CHECK(classify(0.40, 0.45, 1e-3) == Classification::Eigenvalue);
  CHECK(classify(0.45, 0.40, 1e-3) == Classification::EssentialEdge);
  CHECK(classify(0.4000, 0.4005, 1e-3) == Classification::Undetermined);
  CHECK(to_string(Classification::Eigenvalue) == "Eigenvalue");
}

TEST_CASE("Richardson extrapolation") {
  const std::vector<GridLevel> lv{{0.4, 8, 8}, {0.2, 8, 8}, {0.1, 8, 8}, {0.4, 16, 16}};
  const std::vector<GridLevel> lv5{{0.4, 8, 8}, {0.2, 8, 8}, {0.1, 8, 8}, {0.4, 16, 16}, {0.4, 32, 32}};
  SUBCASE("exact second-order data") {
    auto f = [](double h) { return 2.0 + 0.3 * h * h; };
    const auto e = extrapolate_levels(lv, {f(0.4), f(0.2), f(0.1), f(0.4) + 3e-4});
    CHECK(e.observed_ratio == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(std::abs(e.extrapolated - 2.0) < 1e-12);
    CHECK(e.L_sensitivity == doctest::Approx(4e-4).epsilon(1e-8));
    CHECK(e.error_estimate == doctest::Approx(e.h_error + e.L_sensitivity));
  }
  SUBCASE("discrete Dirichlet Laplacian has order two") {
    std::vector<double> v;
    for (int n : {10, 20, 40}) v.push_back(oracle::dirichlet_laplacian_ground(n - 1, 1.0 / n));
    v.push_back(v[0]);
    const auto e = extrapolate_levels(lv, v);
    CHECK(std::abs(std::log2(e.observed_ratio) - 2.0) < 0.1);
    CHECK(std::abs(e.extrapolated - kPi * kPi) < 1e-3);
  }
  SUBCASE("first-order data break the assumed order") {
    auto f = [](double h) { return 1.0 + h; };
    CHECK_THROWS_AS(extrapolate_levels(lv, {f(0.4), f(0.2), f(0.1), f(0.4)}), OrderBreakdownError);
  }
  SUBCASE("level layout is checked") {
    const std::vector<GridLevel> bad{{0.4, 8, 8}, {0.3, 8, 8}, {0.1, 8, 8}, {0.4, 16, 16}};
    CHECK_THROWS_AS(extrapolate_levels(bad, {1, 1, 1, 1}), InvalidArgument);
  }
  SUBCASE("second L doubling sums a slow tail") {
    // tail c / L^p with p = 1: successive differences halve, the tail is twice the first one
    auto v = [](double L) { return 1.0 + 0.5 / L; };
    const auto e = extrapolate_levels(lv5, {v(8), v(8), v(8), v(16), v(32)});
    CHECK(e.L_ratio == doctest::Approx(2.0));
    CHECK(e.L_sensitivity == doctest::Approx(2.0 * (v(8) - v(16))));
    // a 1/L^2 tail keeps the 4/3 rule
    auto w = [](double L) { return 1.0 + 0.5 / (L * L); };
    const auto f = extrapolate_levels(lv5, {w(8), w(8), w(8), w(16), w(32)});
    CHECK(f.L_sensitivity == doctest::Approx(4.0 / 3.0 * (w(8) - w(16))));
    CHECK(std::abs(f.L_sensitivity - (w(8) - 1.0)) < 1e-15);
  }
  SUBCASE("tail measured at two h is extrapolated") {
    // tail c(h) / L^2 with c growing like h^2 as h -> 0
    auto v = [](double h, double L) { return 1.0 + (0.5 - 0.1 * h * h) / (L * L); };
    const std::vector<GridLevel> lv6{{0.4, 8, 8}, {0.2, 8, 8}, {0.1, 8, 8}, {0.4, 16, 16}, {0.4, 32, 32}, {0.2, 16, 16}};
    const auto e = extrapolate_levels(lv6, {v(0.4, 8), v(0.2, 8), v(0.1, 8), v(0.4, 16), v(0.4, 32), v(0.2, 16)});
    CHECK(e.L_sensitivity == doctest::Approx(0.5 / 64.0).epsilon(1e-12));
    CHECK(e.L_sensitivity > 4.0 / 3.0 * (v(0.1, 8) - v(0.1, 16)));
    const std::vector<GridLevel> bad{{0.4, 8, 8}, {0.2, 8, 8}, {0.1, 8, 8}, {0.4, 16, 16}, {0.4, 32, 32}, {0.1, 16, 16}};
    CHECK_THROWS_AS(extrapolate_levels(bad, {1, 1, 1, 1, 1, 1}), InvalidArgument);
  }
  SUBCASE("default levels") {
    Discretization d;
    const auto dl = default_levels(d);
    REQUIRE(dl.size() == 6);
    CHECK(dl[0].h == doctest::Approx(4.0 * d.h1));
    CHECK(dl[3].L1 == doctest::Approx(2.0 * d.L1));
    CHECK(dl[4].L2 == doctest::Approx(4.0 * d.L2));
    CHECK(dl[5].h == doctest::Approx(2.0 * d.h1));
    CHECK(dl[5].L1 == doctest::Approx(2.0 * d.L1));
  }
}

TEST_CASE("de Gennes constant is stable under refinement") {
  std::vector<double> v;
  for (double h : {0.02, 0.01, 0.005}) {
    Discretization d;
    d.h_1d = h;
    v.push_back(theta0(d).value);
  }
  CHECK(std::abs(v[0] - v[1]) < 1e-4);
  CHECK(std::abs(v[1] - v[2]) < 1e-4);
  const double e1 = v[1] - (v[0] - v[1]) / 3.0;
  const double e2 = v[2] - (v[1] - v[2]) / 3.0;
  CHECK(std::abs(e1 - e2) < 1e-5);
}

TEST_CASE("Agmon fit on synthetic data") {
  const auto g = HalfPlaneGrid::aligned(-20.0, 20.0, 20.0, 0.1, 0.1);
  SUBCASE("exponential") {
    const auto v = sample(g, [](double x1, double x2) { return std::exp(-std::hypot(x1, x2)); });
    const auto fit = agmon_fit(v, g, 0.0, 1.0);
    CHECK(std::abs(fit.fitted_rate - 1.0) < 0.02);
    CHECK(fit.reference_rate == doctest::Approx(1.0));
  }
  SUBCASE("constant") {
    const auto v = sample(g, [](double, double) { return 1.0; });
    CHECK_THROWS_AS(agmon_fit(v, g, 0.0, 1.0), InsufficientDecayError);
    const auto fit = agmon_fit(v, g, 0.0, 1.0, false);
    CHECK(std::abs(fit.fitted_rate) < 1e-12);
  }
}

TEST_CASE("box sizing for large tau") {
  const ModelParams p{kPi / 2.0, kPi / 2.0, -0.5};
  CHECK(box_for_tau(p, 12.0, 12.0, 20.0) == doctest::Approx(36.0));
  CHECK(box_for_tau(p, -12.0, 12.0, 20.0) == doctest::Approx(20.0));
  CHECK(box_for_tau(ModelParams{1.0, 0.0, 0.5}, 50.0, 12.0, 20.0) == 20.0);
}

TEST_CASE("lambda bottom at gamma = 0") {
  const auto d = small_box();
  const ModelParams p{kPi / 2.0, 0.0, -0.5};
  LambdaOptions opts;
  opts.scan.coarse_steps = 17;
  ModelCache cache(d);
  const auto rep = lambda_bottom(p, d, opts, &cache);
  CHECK(rep.tau_star == 0.0);
  CHECK(std::abs(rep.lambda - SigmaSolver(p, d).value(0.0)) < 1e-9);
  CHECK(std::isnan(rep.sigma_ess_at_star));
  for (const auto& c : rep.sigma_curve) CHECK(std::abs(c.sigma - rep.lambda - c.tau * c.tau) < 1e-10);
  CHECK(rep.bound_rhs == doctest::Approx(0.5 * cache.theta0()).epsilon(1e-12));
}

TEST_CASE("theorem check at gamma = 0") {
  // the bottom is approached by states spreading along the boundary, so the
  // box must be long in x1 for the truncation tail to stay small
  auto d = small_box();
  d.L1 = 20.0;
  d.L2 = 12.0;
  LambdaOptions opts;
  opts.scan.coarse_steps = 17;
  const auto chk = check_theorem(ModelParams{kPi / 2.0, 0.0, -0.5}, d, opts);
  REQUIRE(chk.report.convergence.has_value());
  CHECK(chk.holds);
  CHECK(chk.slack == doctest::Approx(chk.report.bound_rhs + chk.report.tol_total - chk.report.lambda));
  CHECK(chk.report.tol_total < 2e-2);
  REQUIRE(chk.report.convergence->levels.size() == 6);
  CHECK(chk.report.convergence->L_ratio > 1.5);
}

TEST_CASE("limits need a tilted field") {
  CHECK_THROWS_AS(limits_check(ModelParams{1.0, 0.0, -0.5}, small_box()), GammaZeroError);
}

TEST_CASE("band table interpolation") {
  std::vector<double> xi, mu;
  for (int i = 0; i <= 40; ++i) {
    xi.push_back(-2.0 + 0.1 * i);
    mu.push_back(1.0 + xi.back() * xi.back());
  }
  const BandTable t(-0.5, xi, mu);
  CHECK(std::abs(t(0.05) - 1.0025) < 1e-4);
  CHECK(t(0.3) == doctest::Approx(1.09).epsilon(1e-12));
  CHECK(t.argmin() == 20);
  CHECK_THROWS_AS(t(2.5), TableRangeError);
  CHECK(t.covers(2.0));
  const auto back = BandTable::from_csv(-0.5, t.to_csv());
  CHECK(back.mu() == t.mu());
  CHECK(back.xi() == t.xi());

  // monotone data stay monotone between nodes
  std::vector<double> step(41);
  for (int i = 0; i <= 40; ++i) step[i] = 1.0 + (i < 20 ? 0.0 : 1.0);
  const BandTable s(-0.5, xi, step);
  double prev = s(xi.front());
  for (double x = xi.front(); x <= xi.back(); x += 0.013) {
    CHECK(s(x) >= prev - 1e-14);
    prev = s(x);
  }
  CHECK_THROWS_AS(BandTable(-0.5, {0.0, 1.0, 2.0}, {1.0, 1.0, 1.0}), InvalidArgument);
}

TEST_CASE("scan and golden section") {
  auto f = [](double x) { return (x - 0.3) * (x - 0.3) + 2.0; };
  const auto m = golden_section(f, -1.0, 2.0, 1e-9);
  CHECK(std::abs(m.x - 0.3) < 1e-7);
  bool edge = true;
  const auto r = scan_then_refine(f, -2.0, 2.0, 16, 1e-9, &edge);
  CHECK_FALSE(edge);
  CHECK(std::abs(r.x - 0.3) < 1e-7);
  scan_then_refine([](double x) { return x; }, 0.0, 1.0, 8, 1e-6, &edge);
  CHECK(edge);
  const auto s = scan(f, 0.0, 1.0, 4);
  CHECK(s.size() == 5);
  CHECK(argmin(s) == 1);
}

TEST_CASE("parallel_for covers every index and rethrows the first failure") {
  std::vector<int> hit(100, 0);
  parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) CHECK(h == 1);
  CHECK_THROWS_WITH(parallel_for(10, 3,
                                 [](std::size_t i) {
                                   if (i == 4 || i == 7) throw std::runtime_error("at " + std::to_string(i));
                                 }),
                    "at 4");
}
