#pragma once

#include <functional>
#include <vector>

namespace magfiber {

struct ScanSample {
  double x;
  double f;
};

struct Minimum {
  double x;
  double f;
  int evaluations = 0;
};

/// Uniform samples of f on [lo, hi] with `steps` intervals (steps + 1 points).
std::vector<ScanSample> scan(const std::function<double(double)>& f, double lo, double hi, int steps);

/// Index of the smallest sample; ties resolve to the lowest x.
std::size_t argmin(const std::vector<ScanSample>& samples);

/// Golden-section search for a minimum of a unimodal f on [lo, hi], stopping
/// once the bracket is shorter than `x_tol`.
Minimum golden_section(const std::function<double(double)>& f, double lo, double hi, double x_tol);

/// Scan then golden-section on the two intervals around the best sample.
/// Returns the refined minimum; `at_edge` is set when the best sample is an endpoint.
Minimum scan_then_refine(const std::function<double(double)>& f, double lo, double hi, int steps, double x_tol,
                         bool* at_edge = nullptr, std::vector<ScanSample>* samples = nullptr);

}  // namespace magfiber
