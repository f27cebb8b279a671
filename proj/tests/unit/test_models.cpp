#include <doctest.h>

#include <cmath>
#include <numbers>

#include "magfiber/error.hpp"
#include "magfiber/models.hpp"
#include "oracles.hpp"

using namespace magfiber;

namespace {

constexpr double kPi = std::numbers::pi;

// Small 2D grids keep these solves around a second each.
Discretization coarse() {
  Discretization d;
  d.h1 = d.h2 = 0.2;
  d.L1 = 8.0;
  d.L2 = 8.0;
  d.h_1d = 0.02;
  return d;
}

Discretization fine_1d() {
  Discretization d;
  d.h_1d = 0.01;
  return d;
}

}  // namespace

TEST_CASE("field profile primitive") {
  CHECK(b_profile(-1.0, 2.0) == 2.0);
  CHECK(b_profile(-1.0, -2.0) == 2.0);
  CHECK(b_profile(0.5, -4.0) == -2.0);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(validate_field_ratio(0.0), ValidationError);
  CHECK_THROWS_AS(validate_field_ratio(1.0), ValidationError);
  CHECK_THROWS_AS(validate_field_ratio(-1.5), ValidationError);
  CHECK_NOTHROW(validate_field_ratio(-1.0));
  CHECK_THROWS_AS((ModelParams{0.0, 0.5, 0.5}.validate()), ValidationError);
  CHECK_THROWS_AS((ModelParams{1.0, 2.0, 0.5}.validate()), ValidationError);
  CHECK_NOTHROW((ModelParams{1.0, 0.0, -0.5}.validate()));
}

TEST_CASE("fiber band at sample points") {
  const auto d = fine_1d();
  CHECK(std::abs(mu_a_value(-1.0, 0.0, d) - 1.0) < 1e-3);

  const double m = mu_a_value(0.5, 0.0, d);
  CHECK(m > 0.5);
  CHECK(m < 1.0);
  // shooting from a far left Dirichlet end brackets the same value
  const double shoot = oracle::shooting_ground([](double t) { return t >= 0 ? t * t : 0.25 * t * t; }, -14.0, 14.0,
                                               false, 0.0, 2.0);
  CHECK(std::abs(m - shoot) < 1e-4);

  CHECK(std::abs(mu_a_value(0.5, -30.0, d) - 0.5) < 2e-2);
}

TEST_CASE("fiber eigenfunction normalization") {
  const auto mode = mu_a(-0.5, 0.3, fine_1d());
  const auto g = fiber_grid(-0.5, 0.3, fine_1d());
  double s = 0.0;
  for (std::size_t i = 0; i < mode.eigenfunction.size(); ++i) {
    const double w = (i == 0 || i + 1 == mode.eigenfunction.size()) ? 0.5 : 1.0;
    s += w * g.h() * mode.eigenfunction[i] * mode.eigenfunction[i];
  }
  CHECK(std::abs(s - 1.0) < 1e-10);
  double mx = 0.0;
  for (double v : mode.eigenfunction)
    if (std::abs(v) > std::abs(mx)) mx = v;
  CHECK(mx > 0.0);
}

TEST_CASE("de Gennes model") {
  const auto d = fine_1d();
  CHECK(std::abs(de_gennes(0.0, d) - 1.0) < 1e-3);
  CHECK(std::abs(de_gennes(3.0, d) - 1.0) < 5e-3);
  CHECK(de_gennes(-3.0, d) >= 9.0);
  const double shoot =
      oracle::shooting_ground([](double t) { return (t - 0.8) * (t - 0.8); }, 0.0, 20.0, true, 0.0, 2.0);
  CHECK(std::abs(de_gennes(0.8, d) - shoot) < 1e-4);
}

TEST_CASE("de Gennes constant") {
  Discretization d;
  d.h_1d = 0.02;
  const auto t = theta0(d);
  CHECK(t.value > 0.5);
  CHECK(t.value < 1.0);
  CHECK(std::abs(t.xi0 * t.xi0 - t.value) < 1e-3);
  Discretization d2 = d;
  d2.h_1d = 0.01;
  CHECK(std::abs(theta0(d2).value - t.value) < 1e-4);
}

TEST_CASE("band tables") {
  Discretization d;
  d.h_1d = 0.02;
  SUBCASE("a = -1 reduces to the de Gennes model") {
    // (|t| - xi)^2 is even in t, so the ground state is even and solves the
    // Neumann half-line problem; the band is not symmetric in xi
    const auto tab = band_table(-1.0, -6.0, 6.0, 120, d);
    for (std::size_t i = 0; i < tab.xi().size(); i += 10)
      CHECK(std::abs(tab.mu()[i] - de_gennes(tab.xi()[i], d)) < 1e-6);
    CHECK(tab.mu().front() > tab.mu().back() + 1.0);
  }
  SUBCASE("a = 0.5 reaches its deep-well limits") {
    const auto tab = band_table(0.5, -40.0, 40.0, 160, d);
    CHECK(std::abs(tab.mu().front() - 0.5) < 2e-2);
    CHECK(std::abs(tab.mu().back() - 1.0) < 2e-2);
  }
  SUBCASE("a = -0.5 grows on the far side") {
    const auto tab = band_table(-0.5, -20.0, 10.0, 60, d);
    CHECK(tab.mu().front() > 10.0);
  }
  SUBCASE("minimum at an edge is rejected for a < 0") {
    CHECK_THROWS_AS(band_table(-0.5, 2.0, 10.0, 16, d), MinimizerAtEdgeError);
  }
}

TEST_CASE("beta values") {
  Discretization d;
  d.h_1d = 0.02;
  const double th = theta0(d).value;
  const auto b05 = beta(0.5, d);
  CHECK(std::abs(b05.value - 0.5) < 5e-3);
  CHECK_FALSE(b05.attained);
  CHECK(beta(-0.5, d).value >= 0.5 * th - 1e-3);
  const auto bm1 = beta(-1.0, d);
  CHECK(std::abs(bm1.value - th) < 1e-6);
  CHECK(std::abs(bm1.xi - theta0(d).xi0) < 1e-3);
  CHECK(bm1.attained);
}

TEST_CASE("tilted half-space model") {
  auto d = coarse();
  d.h_1d = 0.02;
  CHECK(zeta(0.0, d) == doctest::Approx(theta0(d).value).epsilon(1e-14));
  CHECK(zeta(kPi / 2.0, d) == 1.0);
  CHECK_THROWS_AS(zeta(-0.1, d), ValidationError);
  const double z = zeta(kPi / 4.0, d);
  CHECK(z > theta0(d).value);
  CHECK(z < 1.0);
}

TEST_CASE("reduced gauge and potential") {
  const ModelParams p{1.1, 0.7, -0.5};
  SUBCASE("continuity across the discontinuity line") {
    for (int k = 0; k < 100; ++k) {
      const double r = 0.05 + 0.1 * k;
      const double x1 = r * std::cos(p.alpha), x2 = r * std::sin(p.alpha);
      const double eps = 1e-13;
      const auto in = underline_A(p, x1 + eps * std::sin(p.alpha), x2 - eps * std::cos(p.alpha));
      const auto out = underline_A(p, x1 - eps * std::sin(p.alpha), x2 + eps * std::cos(p.alpha));
      CHECK(std::abs(in[1] - out[1]) < 1e-11);
      CHECK(std::abs(in[1] - p.a * std::cos(p.gamma) * x1) < 1e-11);
      CHECK(std::abs(v_tau(p, 0.3, x1, x2) - 0.09) < 1e-12);
    }
  }
  SUBCASE("gamma = pi/2 has no in-plane field") {
    const ModelParams q{1.1, kPi / 2.0, -0.5};
    const auto A = underline_A(q, 1.3, 0.4);
    CHECK(std::abs(A[0]) < 1e-15);
    CHECK(std::abs(A[1]) < 1e-15);
  }
  SUBCASE("gamma = 0 gives a constant potential") {
    const ModelParams q{1.1, 0.0, -0.5};
    CHECK(v_tau(q, 0.7, 2.0, 3.0) == doctest::Approx(0.49).epsilon(1e-15));
  }
  SUBCASE("direct substitution") {
    const ModelParams q{kPi / 2.0, kPi / 2.0, -0.5};
    CHECK(in_first_sector(q, 2.0, 1.0));
    CHECK(std::abs(v_tau(q, 0.0, 2.0, 1.0) - 4.0) < 1e-12);
  }
  SUBCASE("plaquette curl") {
    const auto g = HalfPlaneGrid::aligned(-3.0, 3.0, 3.0, 0.1, 0.1);
    const auto ph = link_phases([&](double x1, double x2) { return underline_A(p, x1, x2); }, g);
    for (int i = 0; i + 1 < g.n1(); i += 7)
      for (int j = 0; j + 1 < g.n2(); j += 5) {
        // skip plaquettes touching the discontinuity line
        bool d1 = true, d2 = true;
        for (int di = 0; di < 2; ++di)
          for (int dj = 0; dj < 2; ++dj) {
            const double l = g.x1(i + di) * std::sin(p.alpha) - g.x2(j + dj) * std::cos(p.alpha);
            d1 = d1 && l > 1e-9;
            d2 = d2 && l < -1e-9;
          }
        if (!d1 && !d2) continue;
        const Complex loop = ph.right(i, j) * ph.up(i + 1, j) * std::conj(ph.right(i, j + 1)) * std::conj(ph.up(i, j));
        const double flux = -std::arg(loop);
        const double expect = (d1 ? 1.0 : p.a) * std::cos(p.gamma) * g.h1() * g.h2();
        CHECK(std::abs(flux - expect) < 1e-12);
      }
  }
}

TEST_CASE("sigma on coarse grids") {
  const auto d = coarse();
  SUBCASE("gamma = 0 shift identity") {
    const ModelParams p{kPi / 3.0, 0.0, -0.5};
    const SigmaSolver s(p, d);
    const double s0 = s.value(0.0);
    for (double tau : {-1.5, 0.7, 2.0}) CHECK(std::abs(s.value(tau) - s0 - tau * tau) < 1e-10);
  }
  SUBCASE("large-tau trend for a < 0") {
    // the plateau well sits at x1 = -2 tau / |a|, so the box must reach past -8
    auto wide = d;
    wide.L1 = 14.0;
    const ModelParams p{kPi / 2.0, kPi / 2.0, -0.5};
    const SigmaSolver s(p, wide);
    CHECK(s.value(-6.0) > 2.0);
    CHECK(std::abs(s.value(4.0) - 0.5) < 0.05);
  }
  SUBCASE("result carries a normalized nodal eigenfunction") {
    const SigmaSolver solver(ModelParams{1.0, 1.0, 0.5}, d);
    const auto r = solver.solve(0.2);
    CHECK(r.nodal.size() == r.grid.node_count());
    const auto back = solver.assemble(0.2).from_nodal(r.nodal);
    double s = 0.0;
    for (auto z : back) s += std::norm(z);
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
}

TEST_CASE("essential spectrum bottom") {
  Discretization d;
  d.h_1d = 0.02;
  const auto tab = band_table(-0.5, -12.0, 12.0, 240, d);
  SUBCASE("gamma = pi/2 degenerates to the band") {
    const ModelParams p{1.0, kPi / 2.0, -0.5};
    for (double tau : {-2.0, 0.0, 1.5}) CHECK(std::abs(sigma_ess(p, tau, tab) - tab(tau)) < 1e-10);
  }
  SUBCASE("xi = 0 is admissible") {
    const ModelParams p{1.0, kPi / 4.0, -0.5};
    CHECK(sigma_ess(p, 0.0, tab) <= tab(0.0) + 1e-12);
  }
  SUBCASE("floor at beta") {
    const double b = beta(-0.5, d).value;
    const ModelParams p{1.3, 0.6, -0.5};
    for (double tau = -3.0; tau <= 3.0; tau += 0.5) CHECK(sigma_ess(p, tau, tab) >= b - 1e-6);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(sigma_ess(ModelParams{1.0, 0.0, -0.5}, 0.0, tab), GammaZeroError);
    CHECK_THROWS_AS(sigma_ess(ModelParams{1.0, kPi / 2.0, -0.5}, 20.0, tab), TableRangeError);
  }
}
