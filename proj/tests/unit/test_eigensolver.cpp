#include <doctest.h>

#include <cmath>
#include <random>

#include "magfiber/eigensolver.hpp"
#include "magfiber/error.hpp"
#include "magfiber/lattice.hpp"
#include "oracles.hpp"

using namespace magfiber;

namespace {

HermitianSparse diag(const std::vector<double>& d) {
  std::vector<MatrixEntry> e;
  for (int i = 0; i < static_cast<int>(d.size()); ++i) e.push_back({i, i, d[i]});
  return HermitianSparse::from_upper(static_cast<int>(d.size()), std::move(e));
}

// Sparse random Hermitian matrix with a few entries per row, plus its dense copy.
HermitianSparse random_hermitian(int n, std::uint64_t seed, std::vector<Complex>* dense) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<MatrixEntry> e;
  dense->assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double d = 4.0 * u(rng);
    e.push_back({i, i, d});
    (*dense)[static_cast<std::size_t>(i) * n + i] += d;
    for (int r = 0; r < 3; ++r) {
      const int j = pick(rng);
      if (j <= i) continue;
      const Complex z(u(rng), u(rng));
      e.push_back({i, j, z});
      (*dense)[static_cast<std::size_t>(i) * n + j] += z;
      (*dense)[static_cast<std::size_t>(j) * n + i] += std::conj(z);
    }
  }
  return HermitianSparse::from_upper(n, std::move(e));
}

double norm(const std::vector<Complex>& v) {
  double s = 0.0;
  for (auto z : v) s += std::norm(z);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("diagonal matrix") {
  const auto r = smallest_eigs(diag({3.0, 1.0, 2.0}));
  REQUIRE(r.converged);
  CHECK(r.values.size() == 1);
  CHECK(std::abs(r.values[0] - 1.0) < 1e-12);
}

TEST_CASE("1D Dirichlet Laplacian closed form") {
  const Grid1D g(0.0, 1.0, 101);
  const auto op = assemble_1d(g, ScalarField::zeros(101), Boundary::Dirichlet, Boundary::Dirichlet);
  const double h = g.h();
  const double expect = 4.0 / (h * h) * std::pow(std::sin(M_PI * h / 2.0), 2);
  EigenConfig cfg;
  cfg.tol = 1e-12;
  const auto r = smallest_eigs(op.matrix, cfg);
  REQUIRE(r.converged);
  CHECK(std::abs(r.values[0] - expect) < 1e-10);
  CHECK(std::abs(smallest_eigs_tridiagonal(op.matrix).values[0] - expect) < 1e-10);
}

TEST_CASE("random Hermitian matrices against the dense oracles") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const int n = 200;
    std::vector<Complex> dense;
    const auto H = random_hermitian(n, seed, &dense);
    EigenConfig cfg;
    cfg.k = 3;
    cfg.tol = 1e-11;
    const auto r = smallest_eigs(H, cfg);
    REQUIRE(r.converged);
    const auto lib = dense_oracle_eigs(H);
    const auto jac = oracle::hermitian_eigenvalues(dense, n);
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(r.values[i] - lib[i]) < 1e-8);
      CHECK(std::abs(r.values[i] - jac[i]) < 1e-8);
    }
    for (int i = 0; i < n; ++i) CHECK(std::abs(lib[i] - jac[i]) < 1e-9);
  }
}

TEST_CASE("shift-invert agrees with the Jacobi-preconditioned route") {
  std::vector<Complex> dense;
  const auto H = random_hermitian(300, 5, &dense);
  EigenConfig a;
  a.k = 2;
  a.tol = 1e-11;
  EigenConfig b = a;
  b.preconditioner = Preconditioner::ShiftInvert;
  b.shift = 100.0;  // above the spectrum bottom: must be lowered to a definite shift
  const auto ra = smallest_eigs(H, a);
  const auto rb = smallest_eigs(H, b);
  REQUIRE(ra.converged);
  REQUIRE(rb.converged);
  CHECK(rb.shift_used < rb.values[0]);
  for (int i = 0; i < 2; ++i) CHECK(std::abs(ra.values[i] - rb.values[i]) < 1e-9);
}

TEST_CASE("result invariants") {
  std::vector<Complex> dense;
  const auto H = random_hermitian(150, 21, &dense);
  EigenConfig cfg;
  cfg.k = 4;
  cfg.tol = 1e-10;
  const auto r = smallest_eigs(H, cfg);
  REQUIRE(r.converged);
  for (int i = 0; i < 4; ++i) {
    if (i > 0) CHECK(r.values[i] >= r.values[i - 1]);
    CHECK(std::abs(norm(r.vectors[i]) - 1.0) < 1e-13);
    CHECK(r.residuals[i] <= cfg.tol);
    CHECK(residual_norm(H, r.vectors[i], r.values[i]) <= cfg.tol);
    for (int j = 0; j < i; ++j) {
      Complex dot = 0.0;
      for (std::size_t m = 0; m < r.vectors[i].size(); ++m) dot += std::conj(r.vectors[j][m]) * r.vectors[i][m];
      CHECK(std::abs(dot) < 1e-10);
    }
  }
  for (std::size_t i = 1; i < r.rayleigh_history.size(); ++i)
    CHECK(r.rayleigh_history[i] <= r.rayleigh_history[i - 1] + 1e-12);
}

TEST_CASE("identical inputs reproduce identical histories") {
  std::vector<Complex> dense;
  const auto H = random_hermitian(120, 3, &dense);
  EigenConfig cfg;
  cfg.k = 2;
  const auto a = smallest_eigs(H, cfg);
  const auto b = smallest_eigs(H, cfg);
  CHECK(a.iterations == b.iterations);
  CHECK(a.rayleigh_history == b.rayleigh_history);
  CHECK(a.values == b.values);
}

TEST_CASE("precondition failures") {
  const auto H = diag({1.0, 2.0, 3.0});
  EigenConfig cfg;
  cfg.k = 3;
  CHECK_THROWS_AS(smallest_eigs(H, cfg), DimensionError);
  cfg.k = 0;
  CHECK_THROWS_AS(smallest_eigs(H, cfg), DimensionError);
  std::vector<MatrixEntry> e{{0, 0, 1.0}, {0, 1, Complex(0.0, 1.0)}, {1, 1, 1.0}};
  CHECK_THROWS_AS(smallest_eigs_tridiagonal(HermitianSparse::from_upper(2, e)), InvalidArgument);
}

TEST_CASE("dense oracle on small matrices") {
  const auto d = dense_oracle_eigs(diag({1.0, 2.0}));
  CHECK(std::abs(d[0] - 1.0) < 1e-15);
  CHECK(std::abs(d[1] - 2.0) < 1e-15);

  const auto pauli = HermitianSparse::from_upper(2, {{0, 1, Complex(0.0, 1.0)}});
  const auto p = dense_oracle_eigs(pauli);
  REQUIRE(p.size() == 2);
  CHECK(std::abs(p[0] + 1.0) < 1e-14);
  CHECK(std::abs(p[1] - 1.0) < 1e-14);

  const Grid1D g(-12.0, 12.0, 241);
  const auto osc = assemble_1d(g, ScalarField::sample(g, [](double t) { return t * t; }), Boundary::Dirichlet,
                               Boundary::Dirichlet);
  const auto o = dense_oracle_eigs(osc.matrix);
  CHECK(std::abs(o[0] - 1.0) < 5e-3);
  CHECK(std::abs(o[1] - 3.0) < 5e-3);
  // the 3-point stencil lowers level n by h^2 (2n^2 + 2n + 1) / 16 to leading
  // order (first-order perturbation by -h^2/12 d^4/dt^4), 8.1e-3 for n = 2
  const double h = g.h();
  for (int n = 0; n < 3; ++n) {
    const double predicted = (2.0 * n + 1.0) - h * h * (2.0 * n * n + 2.0 * n + 1.0) / 16.0;
    CHECK(std::abs(o[n] - predicted) < 2e-5);
  }
}

TEST_CASE("residual norm") {
  const auto H = diag({1.0, 2.0, 3.0});
  const std::vector<Complex> e1{1.0, 0.0, 0.0};
  CHECK(residual_norm(H, e1, 1.0) < 1e-14);

  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Complex> v(3);
  for (auto& z : v) z = Complex(n(rng), n(rng));
  const auto Hv = H.multiply(v);
  Complex num = 0.0;
  double den = 0.0;
  for (int i = 0; i < 3; ++i) {
    num += std::conj(v[i]) * Hv[i];
    den += std::norm(v[i]);
  }
  CHECK(residual_norm(H, v, num.real() / den) >= 0.0);

  // first-order perturbation: e1 + eps w has residual eps ||(H - 1) w|| to leading order
  const double eps = 1e-6;
  const std::vector<Complex> pert{1.0, eps, eps};
  const double expect = eps * std::sqrt(1.0 + 4.0);
  CHECK(std::abs(residual_norm(H, pert, 1.0) - expect) < 1e-10);
}
