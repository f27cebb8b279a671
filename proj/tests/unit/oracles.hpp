#pragma once

// Reference computations that share no code with the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <utility>
#include <vector>

namespace oracle {

/// Lowest eigenvalue of -u'' + V u = E u on [lo, hi], u(hi) = 0 and either
/// u(lo) = 0 or u'(lo) = 0, by RK4 shooting and bisection on the node count.
inline double shooting_ground(const std::function<double(double)>& V, double lo, double hi, bool neumann_left,
                              double e_lo, double e_hi, double step = 2e-3) {
  auto has_node = [&](double E) {
    double u = neumann_left ? 1.0 : 0.0;
    double p = neumann_left ? 0.0 : 1.0;
    const int n = static_cast<int>(std::ceil((hi - lo) / step));
    const double dt = (hi - lo) / n;
    auto f = [&](double t, double uu) { return (V(t) - E) * uu; };
    bool started = false;
    for (int i = 0; i < n; ++i) {
      const double t = lo + i * dt;
      const double k1u = p, k1p = f(t, u);
      const double k2u = p + 0.5 * dt * k1p, k2p = f(t + 0.5 * dt, u + 0.5 * dt * k1u);
      const double k3u = p + 0.5 * dt * k2p, k3p = f(t + 0.5 * dt, u + 0.5 * dt * k2u);
      const double k4u = p + dt * k3p, k4p = f(t + dt, u + dt * k3u);
      const double un = u + dt / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
      p = p + dt / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
      if (started && u * un < 0.0) return true;
      if (un != 0.0) started = true;
      u = un;
      if (std::abs(u) > 1e250) return false;  // runaway growth without a node
    }
    return false;
  };
  for (int it = 0; it < 200 && e_hi - e_lo > 1e-13 * std::max(1.0, std::abs(e_hi)); ++it) {
    const double mid = 0.5 * (e_lo + e_hi);
    if (has_node(mid))
      e_hi = mid;
    else
      e_lo = mid;
  }
  return 0.5 * (e_lo + e_hi);
}

/// Eigenvalues of a real symmetric matrix (row-major, n x n) by cyclic Jacobi rotations.
inline std::vector<double> jacobi_eigenvalues(std::vector<double> A, int n) {
  auto at = [&](int i, int j) -> double& { return A[static_cast<std::size_t>(i) * n + j]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
    if (off < 1e-26) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(at(p, q)) < 1e-300) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * at(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = at(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

/// Eigenvalues of a complex Hermitian matrix given densely, through the real embedding.
inline std::vector<double> hermitian_eigenvalues(const std::vector<std::complex<double>>& H, int n) {
  const int N = 2 * n;
  std::vector<double> A(static_cast<std::size_t>(N) * N);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto z = H[static_cast<std::size_t>(i) * n + j];
      A[static_cast<std::size_t>(i) * N + j] = z.real();
      A[static_cast<std::size_t>(i + n) * N + j + n] = z.real();
      A[static_cast<std::size_t>(i) * N + j + n] = -z.imag();
      A[static_cast<std::size_t>(i + n) * N + j] = z.imag();
    }
  const auto ev = jacobi_eigenvalues(std::move(A), N);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = ev[2 * i];
  return out;
}

/// Lowest eigenvalue of the n-point Dirichlet Laplacian with spacing h (interior nodes only).
inline double dirichlet_laplacian_ground(int interior, double h) {
  const double s = std::sin(M_PI / (2.0 * (interior + 1)));
  return 4.0 / (h * h) * s * s;
}

}  // namespace oracle
