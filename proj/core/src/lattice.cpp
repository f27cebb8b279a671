#include "magfiber/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "magfiber/error.hpp"

namespace magfiber {

namespace {

int snapped_count(double lo, double hi, double h) {
  return static_cast<int>(std::llround((hi - lo) / h)) + 1;
}

// Number of steps of size h needed to reach |x| from 0, rounding outward
// unless x already sits on the lattice up to rounding noise.
long steps_outward(double x, double h) {
  const double k = std::abs(x) / h;
  const double nearest = std::round(k);
  if (std::abs(k - nearest) < 1e-7) return static_cast<long>(nearest);
  return static_cast<long>(std::ceil(k));
}

double snap_outward(double x, double h) {
  const long k = steps_outward(x, h);
  return x < 0.0 ? -k * h : k * h;
}

}  // namespace

Grid1D::Grid1D(double t_min, double t_max, int n) : t_min_(t_min), t_max_(t_max), n_(n), h_(0.0) {
  if (!std::isfinite(t_min) || !std::isfinite(t_max) || !(t_min < t_max))
    throw InvalidArgument("Grid1D requires finite t_min < t_max");
  if (n < 3) throw InvalidArgument("Grid1D requires at least 3 nodes, got " + std::to_string(n));
  h_ = (t_max - t_min) / (n - 1);
}

Grid1D Grid1D::aligned(double t_min, double t_max, double h) {
  if (!(h > 0.0)) throw InvalidArgument("Grid1D spacing must be positive");
  // outward in the sense of the interval: t_min moves down, t_max moves up
  const double lo = t_min <= 0.0 ? snap_outward(t_min, h) : std::floor(t_min / h + 1e-7) * h;
  const double hi = t_max >= 0.0 ? snap_outward(t_max, h) : std::ceil(t_max / h - 1e-7) * h;
  const int n = snapped_count(lo, hi, h);
  return Grid1D(lo, lo + (n - 1) * h, n);
}

HalfPlaneGrid::HalfPlaneGrid(double x1_min, double x1_max, double x2_max, int n1, int n2)
    : x1_min_(x1_min), x1_max_(x1_max), x2_max_(x2_max), n1_(n1), n2_(n2), h1_(0.0), h2_(0.0) {
  if (!(x1_min < 0.0 && 0.0 < x1_max)) throw InvalidArgument("HalfPlaneGrid requires x1_min < 0 < x1_max");
  if (!(x2_max > 0.0)) throw InvalidArgument("HalfPlaneGrid requires x2_max > 0");
  if (n1 < 3 || n2 < 3) throw InvalidArgument("HalfPlaneGrid requires at least 3 nodes per direction");
  h1_ = (x1_max - x1_min) / (n1 - 1);
  h2_ = x2_max / (n2 - 1);
}

HalfPlaneGrid HalfPlaneGrid::aligned(double x1_min, double x1_max, double x2_max, double h1, double h2) {
  if (!(h1 > 0.0 && h2 > 0.0)) throw InvalidArgument("HalfPlaneGrid spacings must be positive");
  const int below = static_cast<int>(steps_outward(x1_min, h1));
  const int above = static_cast<int>(steps_outward(x1_max, h1));
  const int up = static_cast<int>(steps_outward(x2_max, h2));
  const int n1 = below + above + 1;
  const int n2 = up + 1;
  return HalfPlaneGrid(-below * h1, above * h1, up * h2, n1, n2);
}

ScalarField::ScalarField(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) throw InvalidArgument("potential is not finite at node " + std::to_string(i));
    if (values_[i] < 0.0) throw InvalidArgument("potential is negative at node " + std::to_string(i));
  }
}

ScalarField ScalarField::sample(const Grid1D& grid, const std::function<double(double)>& f) {
  std::vector<double> v(static_cast<std::size_t>(grid.n()));
  for (int i = 0; i < grid.n(); ++i) v[i] = f(grid.node(i));
  return ScalarField(std::move(v));
}

ScalarField ScalarField::sample(const HalfPlaneGrid& grid, const std::function<double(double, double)>& f) {
  std::vector<double> v(grid.node_count());
  for (int j = 0; j < grid.n2(); ++j)
    for (int i = 0; i < grid.n1(); ++i) v[grid.index(i, j)] = f(grid.x1(i), grid.x2(j));
  return ScalarField(std::move(v));
}

GaugeField::GaugeField(int n1, int n2, std::vector<Complex> horizontal, std::vector<Complex> vertical)
    : n1_(n1), n2_(n2), horizontal_(std::move(horizontal)), vertical_(std::move(vertical)) {
  if (n1 < 2 || n2 < 2) throw InvalidArgument("GaugeField needs at least 2 nodes per direction");
  if (horizontal_.size() != static_cast<std::size_t>(n1 - 1) * n2 ||
      vertical_.size() != static_cast<std::size_t>(n1) * (n2 - 1))
    throw DimensionError("GaugeField edge arrays do not match grid size");
}

GaugeField GaugeField::trivial(int n1, int n2) {
  return GaugeField(n1, n2, std::vector<Complex>(static_cast<std::size_t>(n1 - 1) * n2, 1.0),
                    std::vector<Complex>(static_cast<std::size_t>(n1) * (n2 - 1), 1.0));
}

std::vector<Complex> DiscreteOperator::nodal(std::span<const Complex> v) const {
  if (v.size() != nodes.size()) throw DimensionError("nodal: vector length does not match unknown count");
  std::vector<Complex> u(node_count, 0.0);
  for (std::size_t k = 0; k < nodes.size(); ++k) u[nodes[k]] = v[k] / std::sqrt(weights[k]);
  return u;
}

std::vector<Complex> DiscreteOperator::from_nodal(std::span<const Complex> u) const {
  if (u.size() != node_count) throw DimensionError("from_nodal: vector length does not match node count");
  std::vector<Complex> v(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) v[k] = u[nodes[k]] * std::sqrt(weights[k]);
  return v;
}

DiscreteOperator assemble_1d(const Grid1D& grid, const ScalarField& potential, Boundary left, Boundary right) {
  const int n = grid.n();
  if (potential.size() != static_cast<std::size_t>(n))
    throw DimensionError("assemble_1d: potential has " + std::to_string(potential.size()) + " samples for " +
                         std::to_string(n) + " nodes");
  const double inv_h2 = 1.0 / (grid.h() * grid.h());

  const int first = left == Boundary::Dirichlet ? 1 : 0;
  const int last = right == Boundary::Dirichlet ? n - 2 : n - 1;

  DiscreteOperator op;
  op.node_count = static_cast<std::size_t>(n);
  std::vector<int> unknown(static_cast<std::size_t>(n), -1);
  for (int i = first; i <= last; ++i) {
    unknown[i] = static_cast<int>(op.nodes.size());
    op.nodes.push_back(i);
    const bool mirrored = (i == 0 && left == Boundary::Neumann) || (i == n - 1 && right == Boundary::Neumann);
    op.weights.push_back(mirrored ? 0.5 : 1.0);
  }

  std::vector<MatrixEntry> upper;
  upper.reserve(2 * op.nodes.size());
  for (int i = first; i <= last; ++i) {
    const int p = unknown[i];
    upper.push_back({p, p, Complex(2.0 * inv_h2 + potential[i], 0.0)});
    if (i + 1 <= last) {
      const int q = unknown[i + 1];
      // W G is symmetric with coupling -1/h^2; rescaling by W^{-1/2} on both sides
      const double c = -inv_h2 / std::sqrt(op.weights[p] * op.weights[q]);
      upper.push_back({p, q, Complex(c, 0.0)});
    }
  }
  op.matrix = HermitianSparse::from_upper(static_cast<int>(op.nodes.size()), std::move(upper));
  return op;
}

GaugeField link_phases(const VectorPotential& potential, const HalfPlaneGrid& grid) {
  const int n1 = grid.n1();
  const int n2 = grid.n2();
  std::vector<Complex> horizontal(static_cast<std::size_t>(n1 - 1) * n2);
  std::vector<Complex> vertical(static_cast<std::size_t>(n1) * (n2 - 1));
  auto phase = [](double flux) {
    if (!std::isfinite(flux)) throw InvalidArgument("vector potential is not finite at an edge midpoint");
    return std::polar(1.0, -flux);
  };
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i + 1 < n1; ++i) {
      const Vec2 a = potential(0.5 * (grid.x1(i) + grid.x1(i + 1)), grid.x2(j));
      horizontal[static_cast<std::size_t>(j) * (n1 - 1) + i] = a[0] == 0.0 ? Complex(1.0, 0.0) : phase(a[0] * grid.h1());
    }
  for (int j = 0; j + 1 < n2; ++j)
    for (int i = 0; i < n1; ++i) {
      const Vec2 a = potential(grid.x1(i), 0.5 * (grid.x2(j) + grid.x2(j + 1)));
      vertical[static_cast<std::size_t>(j) * n1 + i] = a[1] == 0.0 ? Complex(1.0, 0.0) : phase(a[1] * grid.h2());
    }
  return GaugeField(n1, n2, std::move(horizontal), std::move(vertical));
}

DiscreteOperator assemble_2d_magnetic(const HalfPlaneGrid& grid, const GaugeField& phases,
                                      const ScalarField& potential, const BoundarySpec& bc,
                                      std::size_t node_cap) {
  if (grid.node_count() > node_cap)
    throw MemoryCapError("grid has " + std::to_string(grid.node_count()) + " nodes, cap is " +
                         std::to_string(node_cap));
  if (phases.n1() != grid.n1() || phases.n2() != grid.n2())
    throw DimensionError("assemble_2d_magnetic: gauge field does not match grid");
  if (potential.size() != grid.node_count())
    throw DimensionError("assemble_2d_magnetic: potential does not match grid");

  const int n1 = grid.n1();
  const int n2 = grid.n2();
  const double inv_h1 = 1.0 / (grid.h1() * grid.h1());
  const double inv_h2 = 1.0 / (grid.h2() * grid.h2());

  const int i_first = bc.left == Boundary::Dirichlet ? 1 : 0;
  const int i_last = bc.right == Boundary::Dirichlet ? n1 - 2 : n1 - 1;
  const int j_first = bc.bottom == Boundary::Dirichlet ? 1 : 0;
  const int j_last = bc.top == Boundary::Dirichlet ? n2 - 2 : n2 - 1;
  if (i_first > i_last || j_first > j_last) throw DimensionError("assemble_2d_magnetic: no interior unknowns");

  DiscreteOperator op;
  op.node_count = grid.node_count();
  std::vector<int> unknown(grid.node_count(), -1);
  for (int j = j_first; j <= j_last; ++j) {
    const double wy = (j == 0 && bc.bottom == Boundary::Neumann) || (j == n2 - 1 && bc.top == Boundary::Neumann) ? 0.5 : 1.0;
    for (int i = i_first; i <= i_last; ++i) {
      const double wx =
          (i == 0 && bc.left == Boundary::Neumann) || (i == n1 - 1 && bc.right == Boundary::Neumann) ? 0.5 : 1.0;
      unknown[grid.index(i, j)] = static_cast<int>(op.nodes.size());
      op.nodes.push_back(grid.index(i, j));
      op.weights.push_back(wx * wy);
    }
  }

  std::vector<MatrixEntry> upper;
  upper.reserve(3 * op.nodes.size());
  for (int j = j_first; j <= j_last; ++j) {
    for (int i = i_first; i <= i_last; ++i) {
      const int p = unknown[grid.index(i, j)];
      upper.push_back({p, p, Complex(2.0 * inv_h1 + 2.0 * inv_h2 + potential[grid.index(i, j)], 0.0)});
      // W G couples p and q by -w_perp * phase / h^2: the mirrored row doubles
      // the coupling and its weight halves it back, so the along-edge factor is
      // max(w_p, w_q) / w_perp = 1.
      if (i + 1 <= i_last) {
        const int q = unknown[grid.index(i + 1, j)];
        const double wk = std::max(op.weights[p], op.weights[q]);
        const double scale = -wk * inv_h1 / std::sqrt(op.weights[p] * op.weights[q]);
        upper.push_back({p, q, scale * phases.right(i, j)});
      }
      if (j + 1 <= j_last) {
        const int q = unknown[grid.index(i, j + 1)];
        const double wk = std::max(op.weights[p], op.weights[q]);
        const double scale = -wk * inv_h2 / std::sqrt(op.weights[p] * op.weights[q]);
        upper.push_back({p, q, scale * phases.up(i, j)});
      }
    }
  }
  op.matrix = HermitianSparse::from_upper(static_cast<int>(op.nodes.size()), std::move(upper));
  return op;
}

GaugeField gauge_transform(const GaugeField& phases, std::span<const double> chi) {
  const int n1 = phases.n1();
  const int n2 = phases.n2();
  if (chi.size() != static_cast<std::size_t>(n1) * n2) throw DimensionError("gauge_transform: chi size mismatch");
  for (double c : chi)
    if (!std::isfinite(c)) throw InvalidArgument("gauge_transform: chi is not finite");
  std::vector<Complex> horizontal(phases.horizontal().begin(), phases.horizontal().end());
  std::vector<Complex> vertical(phases.vertical().begin(), phases.vertical().end());
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i + 1 < n1; ++i) {
      const double d = chi[static_cast<std::size_t>(j) * n1 + i + 1] - chi[static_cast<std::size_t>(j) * n1 + i];
      auto& ph = horizontal[static_cast<std::size_t>(j) * (n1 - 1) + i];
      if (d != 0.0) ph = std::polar(1.0, d) * ph;
    }
  for (int j = 0; j + 1 < n2; ++j)
    for (int i = 0; i < n1; ++i) {
      const double d = chi[static_cast<std::size_t>(j + 1) * n1 + i] - chi[static_cast<std::size_t>(j) * n1 + i];
      auto& ph = vertical[static_cast<std::size_t>(j) * n1 + i];
      if (d != 0.0) ph = std::polar(1.0, d) * ph;
    }
  return GaugeField(n1, n2, std::move(horizontal), std::move(vertical));
}

}  // namespace magfiber
