#pragma once

#include <string>
#include <vector>

namespace magfiber {

/// Band function xi -> mu sampled on a uniform grid with a C1 piecewise-cubic
/// Hermite interpolant. Slopes come from five-point differences and are
/// limited (Hyman) wherever the data are locally monotone, so the interpolant
/// introduces no spurious oscillation away from extrema.
class BandTable {
public:
  /// `xi` must be ascending and uniform (relative spacing error below 1e-9),
  /// with at least 5 samples; every `mu` must be positive and finite.
  BandTable(double a, std::vector<double> xi, std::vector<double> mu);

  double a() const noexcept { return a_; }
  double xi_lo() const noexcept { return xi_.front(); }
  double xi_hi() const noexcept { return xi_.back(); }
  const std::vector<double>& xi() const noexcept { return xi_; }
  const std::vector<double>& mu() const noexcept { return mu_; }
  const std::vector<double>& slopes() const noexcept { return d_; }

  /// Interpolated value; throws TableRangeError outside [xi_lo, xi_hi].
  double operator()(double xi) const;
  bool covers(double xi) const noexcept;

  /// Index of the smallest sample.
  std::size_t argmin() const;

  /// "xi,mu" with 17 significant digits.
  std::string to_csv() const;
  static BandTable from_csv(double a, const std::string& text);

private:
  double a_;
  std::vector<double> xi_;
  std::vector<double> mu_;
  std::vector<double> d_;
  double h_;
};

}  // namespace magfiber
