#include "magfiber/band_table.hpp"

#include <algorithm>
#include <cmath>

#include "magfiber/error.hpp"
#include "magfiber/io.hpp"

namespace magfiber {

namespace {

std::vector<double> five_point_slopes(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  std::vector<double> d(n);
  for (std::size_t i = 2; i + 2 < n; ++i) d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
  d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
  d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h);
  d[n - 1] = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]) / (12.0 * h);
  d[n - 2] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) / (12.0 * h);
  return d;
}

void hyman_limit(const std::vector<double>& f, double h, std::vector<double>& d) {
  const std::size_t n = f.size();
  auto secant = [&](std::size_t i) { return (f[i + 1] - f[i]) / h; };
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? secant(i - 1) : secant(0);
    const double right = i + 1 < n ? secant(i) : secant(n - 2);
    if (left == 0.0 || right == 0.0) {
      d[i] = 0.0;  // flat next to a node: any slope would overshoot
      continue;
    }
    if (left * right < 0.0) continue;  // local extremum: keep the high-order slope
    const double bound = 3.0 * std::min(std::abs(left), std::abs(right));
    const double s = left > 0.0 ? 1.0 : -1.0;
    d[i] = s * std::clamp(s * d[i], 0.0, bound);
  }
}

}  // namespace

BandTable::BandTable(double a, std::vector<double> xi, std::vector<double> mu)
    : a_(a), xi_(std::move(xi)), mu_(std::move(mu)), h_(0.0) {
  if (xi_.size() != mu_.size()) throw InvalidArgument("BandTable: xi and mu sizes differ");
  if (xi_.size() < 5) throw InvalidArgument("BandTable needs at least 5 samples");
  const std::size_t n = xi_.size();
  h_ = (xi_.back() - xi_.front()) / static_cast<double>(n - 1);
  if (!(h_ > 0.0)) throw InvalidArgument("BandTable: xi must be ascending");
  for (std::size_t i = 0; i < n; ++i) {
    const double expect = xi_.front() + h_ * static_cast<double>(i);
    if (std::abs(xi_[i] - expect) > 1e-9 * std::max(1.0, std::abs(expect)) + 1e-9 * h_)
      throw InvalidArgument("BandTable: xi must be uniformly spaced");
    if (!std::isfinite(mu_[i]) || !(mu_[i] > 0.0)) throw InvalidArgument("BandTable: mu must be positive");
  }
  d_ = five_point_slopes(mu_, h_);
  hyman_limit(mu_, h_, d_);
}

bool BandTable::covers(double xi) const noexcept { return xi >= xi_.front() && xi <= xi_.back(); }

double BandTable::operator()(double xi) const {
  if (!covers(xi))
    throw TableRangeError("band table for a=" + format_double(a_) + " covers [" + format_double(xi_lo()) + ", " +
                          format_double(xi_hi()) + "], requested " + format_double(xi));
  const std::size_t n = xi_.size();
  std::size_t i = static_cast<std::size_t>(std::floor((xi - xi_.front()) / h_));
  i = std::min(i, n - 2);
  const double t = (xi - xi_[i]) / h_;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * mu_[i] + h10 * h_ * d_[i] + h01 * mu_[i + 1] + h11 * h_ * d_[i + 1];
}

std::size_t BandTable::argmin() const {
  return static_cast<std::size_t>(std::min_element(mu_.begin(), mu_.end()) - mu_.begin());
}

std::string BandTable::to_csv() const {
  CsvTable t;
  t.header = {"xi", "mu"};
  t.rows.reserve(xi_.size());
  for (std::size_t i = 0; i < xi_.size(); ++i) t.rows.push_back({xi_[i], mu_[i]});
  return magfiber::to_csv(t);
}

BandTable BandTable::from_csv(double a, const std::string& text) {
  const CsvTable t = parse_csv(text);
  if (t.header != std::vector<std::string>{"xi", "mu"}) throw ParseError("band table header must be 'xi,mu'", 1);
  std::vector<double> xi, mu;
  for (const auto& r : t.rows) {
    xi.push_back(r[0]);
    mu.push_back(r[1]);
  }
  return BandTable(a, std::move(xi), std::move(mu));
}

}  // namespace magfiber
