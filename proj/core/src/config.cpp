#include "magfiber/config.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <string>

#include "magfiber/error.hpp"
#include "magfiber/io.hpp"

namespace magfiber {

namespace {

constexpr double kPi = std::numbers::pi;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double number(std::string_view key, std::string_view text, int line) {
  try {
    return parse_double(text);
  } catch (const ParseError&) {
    throw ParseError("line " + std::to_string(line) + ": " + std::string(key) + ": not a number: '" +
                         std::string(trim(text)) + "'",
                     line);
  }
}

std::vector<double> number_list(std::string_view key, std::string_view text, int line) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(',', start);
    const auto item = text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    out.push_back(number(key, item, line));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

long long integer(std::string_view key, std::string_view text, int line) {
  text = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ParseError("line " + std::to_string(line) + ": " + std::string(key) + ": not an integer: '" +
                         std::string(text) + "'",
                     line);
  return v;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += format_double(v[i]);
  }
  return s;
}

void check_angles(const std::vector<double>& v, const char* name, bool open_zero, double hi, bool open_hi,
                  const char* range) {
  for (double x : v) {
    const bool ok = std::isfinite(x) && (open_zero ? x > 0.0 : x >= 0.0) &&
                    (open_hi ? x < hi : x <= hi + 1e-12);
    if (!ok) throw ValidationError(name, std::string(name) + " = " + format_double(x) + " is outside " + range);
  }
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {"alpha", "gamma", "a",  "tau", "nu",  "xi_min", "xi_max", "xi_steps",
                                                "h1",    "h2",    "L1", "L2",  "tol", "jobs",   "seed",   "out"};
  return keys;
}

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value, int line) {
  key = trim(key);
  value = trim(value);
  if (key == "alpha") {
    cfg.alpha = number_list(key, value, line);
  } else if (key == "gamma") {
    cfg.gamma = number_list(key, value, line);
  } else if (key == "a") {
    cfg.a = number_list(key, value, line);
  } else if (key == "tau") {
    cfg.tau = number_list(key, value, line);
  } else if (key == "nu") {
    cfg.nu = number_list(key, value, line);
  } else if (key == "xi_min") {
    cfg.xi_min = number(key, value, line);
  } else if (key == "xi_max") {
    cfg.xi_max = number(key, value, line);
  } else if (key == "xi_steps") {
    cfg.xi_steps = static_cast<int>(integer(key, value, line));
  } else if (key == "h1") {
    cfg.disc.h1 = number(key, value, line);
  } else if (key == "h2") {
    cfg.disc.h2 = number(key, value, line);
  } else if (key == "L1") {
    cfg.disc.L1 = number(key, value, line);
  } else if (key == "L2") {
    cfg.disc.L2 = number(key, value, line);
  } else if (key == "tol") {
    cfg.disc.tol = number(key, value, line);
  } else if (key == "jobs") {
    cfg.disc.jobs = static_cast<int>(integer(key, value, line));
  } else if (key == "seed") {
    const long long s = integer(key, value, line);
    if (s < 0) throw ParseError("line " + std::to_string(line) + ": seed must be nonnegative", line);
    cfg.disc.seed = static_cast<std::uint64_t>(s);
  } else if (key == "out") {
    if (value.empty()) throw ParseError("line " + std::to_string(line) + ": out is empty", line);
    cfg.out = std::string(value);
  } else {
    throw ParseError("line " + std::to_string(line) + ": unknown key '" + std::string(key) + "'", line);
  }
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos)
        throw ParseError("line " + std::to_string(line_no) + ": expected key=value", line_no);
      set_config_value(base, line.substr(0, eq), line.substr(eq + 1), line_no);
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return base;
}

void finalize_config(RunConfig& cfg) {
  if (cfg.degrees) {
    for (auto* v : {&cfg.alpha, &cfg.gamma, &cfg.nu})
      for (double& x : *v) x *= kPi / 180.0;
    cfg.degrees = false;
  }
  check_angles(cfg.alpha, "alpha", true, kPi, true, "(0, pi)");
  check_angles(cfg.gamma, "gamma", false, kPi / 2.0, false, "[0, pi/2]");
  check_angles(cfg.nu, "nu", false, kPi / 2.0, false, "[0, pi/2]");
  for (double a : cfg.a) validate_field_ratio(a);
  for (double t : cfg.tau)
    if (!std::isfinite(t)) throw ValidationError("tau", "tau must be finite");
  if (!std::isfinite(cfg.xi_min) || !std::isfinite(cfg.xi_max) || !(cfg.xi_min < cfg.xi_max))
    throw ValidationError("xi_min", "xi range [" + format_double(cfg.xi_min) + ", " + format_double(cfg.xi_max) +
                                        "] must satisfy xi_min < xi_max");
  if (cfg.xi_steps < 16)
    throw ValidationError("xi_steps", "xi_steps = " + std::to_string(cfg.xi_steps) + " is below the minimum 16");
  if (cfg.disc.jobs < 0) throw ValidationError("jobs", "jobs must be >= 0 (0 = one per logical core)");
  cfg.disc.validate();
}

std::string RunConfig::to_text() const {
  std::string s;
  auto kv = [&](const char* k, const std::string& v) {
    s += k;
    s += '=';
    s += v;
    s += '\n';
  };
  if (!alpha.empty()) kv("alpha", join(alpha));
  if (!gamma.empty()) kv("gamma", join(gamma));
  if (!a.empty()) kv("a", join(a));
  if (!tau.empty()) kv("tau", join(tau));
  if (!nu.empty()) kv("nu", join(nu));
  kv("xi_min", format_double(xi_min));
  kv("xi_max", format_double(xi_max));
  kv("xi_steps", std::to_string(xi_steps));
  kv("h1", format_double(disc.h1));
  kv("h2", format_double(disc.h2));
  kv("L1", format_double(disc.L1));
  kv("L2", format_double(disc.L2));
  kv("tol", format_double(disc.tol));
  kv("jobs", std::to_string(disc.jobs));
  kv("seed", std::to_string(disc.seed));
  kv("out", out);
  return s;
}

}  // namespace magfiber
