#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "magfiber/models.hpp"

namespace magfiber {

/// Everything a subcommand needs. Parameter keys accept comma-separated lists
/// (used by sweep, zeta and sigma-ess); single-cell subcommands require one value.
struct RunConfig {
  std::vector<double> alpha;
  std::vector<double> gamma;
  std::vector<double> a;
  std::vector<double> tau;
  std::vector<double> nu;
  double xi_min = kBandXiLo;
  double xi_max = kBandXiHi;
  int xi_steps = kBandSteps;
  /// Model discretization; jobs defaults to one worker per logical core here.
  Discretization disc = [] {
    Discretization d;
    d.jobs = 0;
    return d;
  }();
  std::string out = "magfiber-run";
  /// Angles (alpha, gamma, nu) were given in degrees; finalize_config converts them.
  bool degrees = false;
  /// Files the config was read from and their content hashes (for manifests).
  std::map<std::string, std::string> input_hashes;

  /// Canonical key=value text, readable back by parse_config.
  std::string to_text() const;
};

/// Keys understood by parse_config and set_config_value.
const std::vector<std::string>& config_keys();

/// Line-oriented key=value text; '#' starts a comment, blank lines are skipped.
/// Throws ParseError carrying the 1-based line number.
RunConfig parse_config(std::string_view text, RunConfig base = {});

/// Sets one key; `line` is reported in ParseError (0 for command-line flags).
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value, int line = 0);

/// Converts degrees to radians when requested and checks every range.
/// Throws ValidationError naming the parameter and its legal range.
void finalize_config(RunConfig& cfg);

}  // namespace magfiber
