#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "magfiber/analysis.hpp"
#include "magfiber/config.hpp"

namespace magfiber {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitAssertion = 2;
inline constexpr int kExitUsage = 64;

/// Subcommand names accepted by run_cli.
const std::vector<std::string>& subcommands();

/// Full command line without the program name, e.g. {"lambda", "--a", "-0.5"}.
/// Returns the exit code; nothing is thrown.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Runs one subcommand on an already finalized config and writes its files
/// under cfg.out. Throws on runtime errors; returns kExitOk or kExitAssertion.
int run_subcommand(const std::string& name, const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Cells of the alpha x gamma x a product in sorted order with duplicates
/// removed; `duplicates` receives the number of dropped cells.
std::vector<ModelParams> sweep_cells(const RunConfig& cfg, int* duplicates = nullptr);

inline constexpr const char* kSummaryHeader =
    "alpha,gamma,a,lambda,tau_star,beta_a,zeta_nu0,bound_rhs,bound_margin,classification";

/// JSON report of one theorem check (field names are stable).
std::string report_json(const TheoremCheck& check);
/// "tau,sigma,sigma_ess" CSV of the scanned curve.
std::string sigma_curve_csv(const LambdaReport& report);

/// Library and toolchain versions recorded in reports and manifests.
std::string versions_json();

}  // namespace magfiber
