#include "magfiber/minimize.hpp"

#include <cmath>

#include "magfiber/error.hpp"

namespace magfiber {

std::vector<ScanSample> scan(const std::function<double(double)>& f, double lo, double hi, int steps) {
  if (steps < 1 || !(lo < hi)) throw InvalidArgument("scan requires lo < hi and steps >= 1");
  std::vector<ScanSample> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) {
    const double x = i == steps ? hi : lo + (hi - lo) * i / steps;
    out.push_back({x, f(x)});
  }
  return out;
}

std::size_t argmin(const std::vector<ScanSample>& samples) {
  if (samples.empty()) throw InvalidArgument("argmin of an empty sample set");
  std::size_t best = 0;
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (samples[i].f < samples[best].f) best = i;
  return best;
}

Minimum golden_section(const std::function<double(double)>& f, double lo, double hi, double x_tol) {
  if (!(lo < hi)) throw InvalidArgument("golden_section requires lo < hi");
  if (!(x_tol > 0.0)) throw InvalidArgument("golden_section tolerance must be positive");
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = f(c);
  double fd = f(d);
  int evals = 2;
  while (b - a > x_tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
    ++evals;
  }
  return fc <= fd ? Minimum{c, fc, evals} : Minimum{d, fd, evals};
}

Minimum scan_then_refine(const std::function<double(double)>& f, double lo, double hi, int steps, double x_tol,
                         bool* at_edge, std::vector<ScanSample>* samples) {
  auto s = scan(f, lo, hi, steps);
  const std::size_t k = argmin(s);
  if (at_edge) *at_edge = (k == 0 || k + 1 == s.size());
  const double a = s[k == 0 ? 0 : k - 1].x;
  const double b = s[k + 1 == s.size() ? k : k + 1].x;
  Minimum m = golden_section(f, a, b, x_tol);
  // the bracket endpoints are never evaluated by golden section; keep the sample if it is better
  if (s[k].f < m.f) m = {s[k].x, s[k].f, m.evaluations};
  m.evaluations += static_cast<int>(s.size());
  if (samples) *samples = std::move(s);
  return m;
}

}  // namespace magfiber
