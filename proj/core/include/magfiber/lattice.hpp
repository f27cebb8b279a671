#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "magfiber/hermitian_sparse.hpp"

namespace magfiber {

enum class Boundary { Neumann, Dirichlet };

/// Uniform grid on [t_min, t_max] with n nodes (endpoints included).
class Grid1D {
public:
  Grid1D(double t_min, double t_max, int n);
  /// Spacing h, interval endpoints snapped outward to integer multiples of h so
  /// that grids built with the same h share nodes.
  static Grid1D aligned(double t_min, double t_max, double h);

  double t_min() const noexcept { return t_min_; }
  double t_max() const noexcept { return t_max_; }
  int n() const noexcept { return n_; }
  double h() const noexcept { return h_; }
  double node(int i) const noexcept { return t_min_ + i * h_; }

private:
  double t_min_;
  double t_max_;
  int n_;
  double h_;
};

/// Rectangle [x1_min, x1_max] x [0, x2_max] of the upper half-plane {x2 > 0}.
/// Node (i, j) sits at (x1_min + i h1, j h2) and has flat index j * n1 + i.
class HalfPlaneGrid {
public:
  HalfPlaneGrid(double x1_min, double x1_max, double x2_max, int n1, int n2);
  static HalfPlaneGrid aligned(double x1_min, double x1_max, double x2_max, double h1, double h2);

  double x1_min() const noexcept { return x1_min_; }
  double x1_max() const noexcept { return x1_max_; }
  double x2_max() const noexcept { return x2_max_; }
  int n1() const noexcept { return n1_; }
  int n2() const noexcept { return n2_; }
  double h1() const noexcept { return h1_; }
  double h2() const noexcept { return h2_; }
  std::size_t node_count() const noexcept { return static_cast<std::size_t>(n1_) * n2_; }

  double x1(int i) const noexcept { return x1_min_ + i * h1_; }
  double x2(int j) const noexcept { return j * h2_; }
  int index(int i, int j) const noexcept { return j * n1_ + i; }

private:
  double x1_min_;
  double x1_max_;
  double x2_max_;
  int n1_;
  int n2_;
  double h1_;
  double h2_;
};

/// Boundary tag per edge of a HalfPlaneGrid. `bottom` is the physical edge x2 = 0.
struct BoundarySpec {
  Boundary left = Boundary::Dirichlet;
  Boundary right = Boundary::Dirichlet;
  Boundary bottom = Boundary::Neumann;
  Boundary top = Boundary::Dirichlet;

  static BoundarySpec half_plane() { return {}; }
  static BoundarySpec all(Boundary b) { return {b, b, b, b}; }
};

/// Non-negative real samples on grid nodes.
class ScalarField {
public:
  explicit ScalarField(std::vector<double> values);
  static ScalarField zeros(std::size_t n) { return ScalarField(std::vector<double>(n, 0.0)); }
  static ScalarField sample(const Grid1D& grid, const std::function<double(double)>& f);
  static ScalarField sample(const HalfPlaneGrid& grid, const std::function<double(double, double)>& f);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

private:
  std::vector<double> values_;
};

/// Unit-modulus phases on the directed edges (i,j)->(i+1,j) and (i,j)->(i,j+1).
/// Reverse edges carry the conjugate phase.
class GaugeField {
public:
  GaugeField(int n1, int n2, std::vector<Complex> horizontal, std::vector<Complex> vertical);
  static GaugeField trivial(int n1, int n2);

  int n1() const noexcept { return n1_; }
  int n2() const noexcept { return n2_; }
  /// Phase of (i,j) -> (i+1,j).
  Complex right(int i, int j) const noexcept { return horizontal_[static_cast<std::size_t>(j) * (n1_ - 1) + i]; }
  /// Phase of (i,j) -> (i,j+1).
  Complex up(int i, int j) const noexcept { return vertical_[static_cast<std::size_t>(j) * n1_ + i]; }
  Complex left(int i, int j) const noexcept { return std::conj(right(i - 1, j)); }
  Complex down(int i, int j) const noexcept { return std::conj(up(i, j - 1)); }

  std::span<const Complex> horizontal() const noexcept { return horizontal_; }
  std::span<const Complex> vertical() const noexcept { return vertical_; }

private:
  int n1_;
  int n2_;
  std::vector<Complex> horizontal_;
  std::vector<Complex> vertical_;
};

using Vec2 = std::array<double, 2>;
using VectorPotential = std::function<Vec2(double x1, double x2)>;

/// Matrix of a discretized operator together with the data needed to map
/// eigenvectors back to grid nodes.
///
/// Neumann edges are eliminated with a mirror ghost node, which yields a
/// non-symmetric row with doubled coupling. Multiplying by the lumped weight
/// w (1/2 per Neumann direction) symmetrizes it; the stored matrix is
/// W^{-1/2} (W G) W^{-1/2}, Hermitian and similar to the ghost operator G.
/// A stored eigenvector v corresponds to the nodal function u = W^{-1/2} v.
struct DiscreteOperator {
  HermitianSparse matrix;
  std::vector<double> weights;  // per unknown
  std::vector<int> nodes;       // grid node of each unknown
  std::size_t node_count = 0;

  /// Nodal values of a stored vector; nodes dropped by Dirichlet conditions get 0.
  std::vector<Complex> nodal(std::span<const Complex> v) const;
  /// Stored vector of a nodal function (inverse of `nodal` on the unknowns).
  std::vector<Complex> from_nodal(std::span<const Complex> u) const;
};

/// Default cap on the number of grid nodes accepted by assemble_2d_magnetic.
inline constexpr std::size_t kDefaultNodeCap = 6'000'000;

/// -d^2/dt^2 + V on a 1D grid with a 3-point stencil.
DiscreteOperator assemble_1d(const Grid1D& grid, const ScalarField& potential, Boundary left, Boundary right);

/// Peierls phases exp(-i A(midpoint) . dx) on every grid edge.
GaugeField link_phases(const VectorPotential& potential, const HalfPlaneGrid& grid);

/// -(grad - iA)^2 + V with the 5-point covariant stencil.
DiscreteOperator assemble_2d_magnetic(const HalfPlaneGrid& grid, const GaugeField& phases,
                                      const ScalarField& potential, const BoundarySpec& bc,
                                      std::size_t node_cap = kDefaultNodeCap);

/// Lattice gauge transformation: phase(p -> q) <- exp(i (chi_q - chi_p)) phase(p -> q).
GaugeField gauge_transform(const GaugeField& phases, std::span<const double> chi);

}  // namespace magfiber
