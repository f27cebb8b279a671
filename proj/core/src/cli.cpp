#include "magfiber/cli.hpp"

#include <Eigen/Core>
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>

#include "magfiber/acceptance.hpp"
#include "magfiber/error.hpp"
#include "magfiber/io.hpp"
#include "magfiber/parallel.hpp"

#ifndef MAGFIBER_VERSION
#define MAGFIBER_VERSION "unknown"
#endif

namespace magfiber {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr double kPi = std::numbers::pi;

// NaN and infinities are not JSON numbers; they are written as null.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string iso_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double single(const std::vector<double>& v, const char* name) {
  if (v.size() != 1)
    throw ValidationError(name, std::string("this subcommand needs exactly one value of ") + name + ", got " +
                                    std::to_string(v.size()));
  return v.front();
}

ModelParams single_params(const RunConfig& cfg) {
  ModelParams p{single(cfg.alpha, "alpha"), single(cfg.gamma, "gamma"), single(cfg.a, "a")};
  p.validate();
  return p;
}

json grid_json(const Discretization& d) {
  return json{{"h1", d.h1},   {"h2", d.h2},     {"L1", d.L1},   {"L2", d.L2},
              {"h_1d", d.h_1d}, {"L_1d", d.L_1d}, {"L_half", d.L_half}};
}

json params_json(const ModelParams& p) { return json{{"alpha", p.alpha}, {"gamma", p.gamma}, {"a", p.a}}; }

// Collects scalars and writes manifest.json next to the subcommand outputs.
class Manifest {
public:
  Manifest(std::string subcommand, const RunConfig& cfg) : cfg_(cfg) {
    doc_["tool"] = "magfiber";
    doc_["version"] = MAGFIBER_VERSION;
    doc_["subcommand"] = std::move(subcommand);
    doc_["started"] = iso_now();
    doc_["config_text"] = cfg.to_text();
    doc_["grid"] = grid_json(cfg.disc);
    doc_["results"] = json::object();
    doc_["tolerances"] = json::object();
    doc_["outputs"] = json::object();
    doc_["inputs"] = json::object();
    for (const auto& [path, hash] : cfg.input_hashes) doc_["inputs"][path] = hash;
  }

  void result(const std::string& key, json value) { doc_["results"][key] = std::move(value); }
  void tolerance(const std::string& key, double value) { doc_["tolerances"][key] = num(value); }

  void write_output(const std::string& name, const std::string& content) {
    write_file_atomic(fs::path(cfg_.out) / name, content);
    doc_["outputs"][name] = fnv1a_hex(content);
  }

  void finish() {
    doc_["finished"] = iso_now();
    doc_["versions"] = json::parse(versions_json());
    write_file_atomic(fs::path(cfg_.out) / "manifest.json", doc_.dump(2) + "\n");
  }

private:
  const RunConfig& cfg_;
  json doc_;
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

int cmd_theta0(const RunConfig& cfg, std::ostream& out) {
  Manifest m("theta0", cfg);
  const Theta0Result t = theta0(cfg.disc);
  Discretization fine = cfg.disc;
  fine.h_1d /= 2.0;
  const Theta0Result tf = theta0(fine);
  // second-order stencil: the error of the finer value is about a third of the difference
  const double extrapolated = tf.value + (tf.value - t.value) / 3.0;
  const double err = std::abs(tf.value - extrapolated);
  out << "theta0 = " << fmt(t.value) << "\nxi0 = " << fmt(t.xi0) << "\nerror_estimate = " << fmt(err)
      << "\nextrapolated = " << fmt(extrapolated) << "\n";
  m.result("theta0", t.value);
  m.result("xi0", t.xi0);
  m.result("theta0_half_h", tf.value);
  m.result("theta0_extrapolated", extrapolated);
  m.tolerance("error_estimate", err);
  m.finish();
  return kExitOk;
}

int cmd_band1d(const RunConfig& cfg, std::ostream& out) {
  const double a = single(cfg.a, "a");
  validate_field_ratio(a);
  Manifest m("band1d", cfg);
  const int n = cfg.xi_steps + 1;
  CsvTable t{{"xi", "mu"}, std::vector<std::vector<double>>(static_cast<std::size_t>(n))};
  parallel_for(static_cast<std::size_t>(n), cfg.disc.jobs, [&](std::size_t i) {
    const double xi = cfg.xi_min + (cfg.xi_max - cfg.xi_min) * static_cast<double>(i) / (n - 1);
    t.rows[i] = {xi, mu_a_value(a, xi, cfg.disc)};
  });
  const auto best = std::min_element(t.rows.begin(), t.rows.end(),
                                     [](const auto& x, const auto& y) { return x[1] < y[1]; });
  out << "a = " << fmt(a) << "  samples = " << n << "  min mu = " << fmt((*best)[1]) << " at xi = " << fmt((*best)[0])
      << "\n";
  m.write_output("band1d.csv", to_csv(t));
  m.result("min_mu", (*best)[1]);
  m.result("argmin_xi", (*best)[0]);
  m.tolerance("solver_tol", cfg.disc.tol);
  m.finish();
  return kExitOk;
}

int cmd_beta(const RunConfig& cfg, std::ostream& out) {
  const double a = single(cfg.a, "a");
  validate_field_ratio(a);
  Manifest m("beta", cfg);
  Discretization d = cfg.disc;
  const BetaResult b = beta(a, d);
  out << "beta = " << fmt(b.value) << "\nxi = " << fmt(b.xi) << "\nattained = " << (b.attained ? "true" : "false")
      << "\n";
  m.result("beta", b.value);
  m.result("xi", b.xi);
  m.result("attained", b.attained);
  m.write_output("band1d.csv", b.table.to_csv());
  m.tolerance("xi_tol", 1e-8);
  m.finish();
  return kExitOk;
}

int cmd_zeta(const RunConfig& cfg, std::ostream& out) {
  std::vector<double> nus = cfg.nu;
  if (nus.empty()) nus = {0.0, kPi / 8.0, kPi / 4.0, 3.0 * kPi / 8.0, kPi / 2.0};
  Manifest m("zeta", cfg);
  std::vector<double> z(nus.size());
  parallel_for(nus.size(), cfg.disc.jobs, [&](std::size_t i) {
    Discretization d = cfg.disc;
    d.jobs = 1;
    z[i] = zeta(nus[i], d);
  });
  CsvTable t{{"nu", "zeta"}, {}};
  json vals = json::array();
  for (std::size_t i = 0; i < nus.size(); ++i) {
    t.rows.push_back({nus[i], z[i]});
    out << "zeta(" << fmt(nus[i]) << ") = " << fmt(z[i]) << "\n";
    vals.push_back(json{{"nu", nus[i]}, {"zeta", z[i]}});
  }
  m.write_output("zeta.csv", to_csv(t));
  m.result("zeta", vals);
  m.tolerance("solver_tol", cfg.disc.tol);
  m.finish();
  return kExitOk;
}

int cmd_sigma(const RunConfig& cfg, std::ostream& out) {
  const ModelParams p = single_params(cfg);
  std::vector<double> taus = cfg.tau;
  if (taus.empty()) taus = {0.0};
  Manifest m("sigma", cfg);
  const SigmaSolver solver(p, cfg.disc);
  json vals = json::array();
  const std::vector<Complex>* warm = nullptr;
  std::optional<SigmaResult> prev;
  for (double tau : taus) {
    SigmaResult r = solver.solve(tau, warm);
    out << "sigma(" << fmt(tau) << ") = " << fmt(r.value) << "  residual = " << r.eig.residuals[0]
        << "  iterations = " << r.eig.iterations << "\n";
    vals.push_back(json{{"tau", tau}, {"sigma", r.value}, {"residual", r.eig.residuals[0]}});
    prev = std::move(r);
    warm = &prev->eig.vectors[0];
  }
  m.result("params", params_json(p));
  m.result("sigma", vals);
  m.tolerance("solver_tol", cfg.disc.tol);
  m.finish();
  return kExitOk;
}

int cmd_sigma_ess(const RunConfig& cfg, std::ostream& out) {
  const ModelParams p = single_params(cfg);
  if (p.gamma == 0.0) throw GammaZeroError("sigma-ess needs gamma in (0, pi/2]");
  std::vector<double> taus = cfg.tau;
  if (taus.empty())
    for (int i = 0; i <= 64; ++i) taus.push_back(-8.0 + 16.0 * i / 64.0);
  Manifest m("sigma-ess", cfg);
  const BandTable table = band_table(p.a, cfg.xi_min, cfg.xi_max, cfg.xi_steps, cfg.disc);
  CsvTable t{{"tau", "sigma_ess"}, {}};
  for (double tau : taus) {
    const double s = sigma_ess(p, tau, table);
    t.rows.push_back({tau, s});
    out << "sigma_ess(" << fmt(tau) << ") = " << fmt(s) << "\n";
  }
  m.write_output("sigma_ess.csv", to_csv(t));
  m.result("params", params_json(p));
  m.finish();
  return kExitOk;
}

int cmd_lambda(const RunConfig& cfg, std::ostream& out) {
  const ModelParams p = single_params(cfg);
  Manifest m("lambda", cfg);
  ModelCache cache(cfg.disc);
  const TheoremCheck c = check_theorem(p, cfg.disc, {}, &cache);
  const LambdaReport& r = c.report;
  out << "lambda = " << fmt(r.lambda) << "\ntau_star = " << fmt(r.tau_star)
      << "\nclassification = " << to_string(r.classification) << "\nbound_rhs = " << fmt(r.bound_rhs)
      << "\nbound_margin = " << fmt(r.bound_margin) << "\ntol_total = " << fmt(r.tol_total)
      << "\nholds = " << (c.holds ? "true" : "false") << "\n";
  m.write_output("report.json", report_json(c));
  m.write_output("sigma_curve.csv", sigma_curve_csv(r));
  m.result("lambda", r.lambda);
  m.result("tau_star", r.tau_star);
  m.result("classification", to_string(r.classification));
  m.result("bound_rhs", r.bound_rhs);
  m.result("bound_margin", r.bound_margin);
  m.result("holds", c.holds);
  m.tolerance("tol_solver", r.tol_solver);
  m.tolerance("tol_total", r.tol_total);
  m.finish();
  return c.holds ? kExitOk : kExitAssertion;
}

json side_json(const LimitSide& s) {
  return json{{"kind", s.plateau ? "plateau" : "divergent"},
              {"tau_T", s.tau_T},
              {"tau_2T", s.tau_2T},
              {"sigma_T", s.sigma_T},
              {"sigma_2T", s.sigma_2T},
              {"target", num(s.target)},
              {"pass", s.pass}};
}

int cmd_limits(const RunConfig& cfg, std::ostream& out) {
  const ModelParams p = single_params(cfg);
  Manifest m("limits", cfg);
  ModelCache cache(cfg.disc);
  const LimitsReport r = limits_check(p, cfg.disc, 6.0, &cache);
  auto line = [&](const char* name, const LimitSide& s) {
    out << name << ": sigma(" << fmt(s.tau_T) << ") = " << fmt(s.sigma_T) << "  sigma(" << fmt(s.tau_2T)
        << ") = " << fmt(s.sigma_2T);
    if (s.plateau) out << "  target = " << fmt(s.target);
    out << "  " << (s.pass ? "pass" : "FAIL") << "\n";
  };
  line("tau -> -inf", r.minus);
  line("tau -> +inf", r.plus);
  m.result("zeta_nu0", r.zeta_nu0);
  m.result("L1_used", r.L1_used);
  m.result("minus", side_json(r.minus));
  m.result("plus", side_json(r.plus));
  m.result("pass", r.pass);
  m.tolerance("plateau_relative", 0.05);
  m.tolerance("divergence_factor", 1.5);
  m.finish();
  return r.pass ? kExitOk : kExitAssertion;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  int dups = 0;
  const auto cells = sweep_cells(cfg, &dups);
  if (cells.empty()) throw InvalidArgument("sweep grid is empty: give alpha, gamma and a lists");
  if (dups > 0) err << "warning: dropped " << dups << " duplicate sweep cell(s)\n";
  Manifest m("sweep", cfg);
  ModelCache cache([&] {
    Discretization d = cfg.disc;
    d.jobs = 1;
    return d;
  }());
  std::vector<std::optional<TheoremCheck>> results(cells.size());
  std::vector<std::string> errors(cells.size());
  parallel_for(cells.size(), cfg.disc.jobs, [&](std::size_t i) {
    Discretization d = cfg.disc;
    d.jobs = 1;
    try {
      results[i] = check_theorem(cells[i], d, {}, &cache);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  std::string summary = std::string(kSummaryHeader) + "\n";
  bool all_ok = true;
  json cells_json = json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const ModelParams& p = cells[i];
    char dir[32];
    std::snprintf(dir, sizeof dir, "cell_%03zu", i);
    std::string row = format_double(p.alpha) + "," + format_double(p.gamma) + "," + format_double(p.a) + ",";
    if (!results[i]) {
      all_ok = false;
      row += "nan,nan,nan,nan,nan,nan,failed";
      err << "cell " << dir << " failed: " << errors[i] << "\n";
      cells_json.push_back(json{{"cell", dir}, {"params", params_json(p)}, {"error", errors[i]}});
    } else {
      const LambdaReport& r = results[i]->report;
      row += format_double(r.lambda) + "," + format_double(r.tau_star) + "," + format_double(r.beta_a) + "," +
             format_double(r.zeta_nu0) + "," + format_double(r.bound_rhs) + "," + format_double(r.bound_margin) + "," +
             to_string(r.classification);
      if (!results[i]->holds) all_ok = false;
      m.write_output(std::string(dir) + "/report.json", report_json(*results[i]));
      m.write_output(std::string(dir) + "/sigma_curve.csv", sigma_curve_csv(r));
      cells_json.push_back(json{{"cell", dir},
                                {"params", params_json(p)},
                                {"lambda", r.lambda},
                                {"bound_margin", r.bound_margin},
                                {"tol_total", r.tol_total},
                                {"holds", results[i]->holds}});
      out << dir << "  alpha=" << fmt(p.alpha) << " gamma=" << fmt(p.gamma) << " a=" << fmt(p.a)
          << "  lambda=" << fmt(r.lambda) << " margin=" << fmt(r.bound_margin) << " tol_total=" << fmt(r.tol_total)
          << " " << to_string(r.classification) << (results[i]->holds ? "" : "  BOUND VIOLATED") << "\n";
    }
    summary += row + "\n";
  }
  m.write_output("summary.csv", summary);
  m.result("cells", cells_json);
  m.result("all_hold", all_ok);
  m.finish();
  return all_ok ? kExitOk : kExitAssertion;
}

struct CliState {
  std::map<std::string, std::string> values;
  std::string config_path;
  std::string manifest_path;
  bool degrees = false;
  std::string suite = "acceptance";
  std::vector<int> only;
};

void add_common(CLI::App* sub, CliState& st) {
  sub->add_option("--config", st.config_path, "key=value configuration file");
  sub->add_option("--manifest", st.manifest_path, "re-run with the configuration stored in a manifest.json");
  sub->add_flag("--degrees", st.degrees, "alpha, gamma and nu are given in degrees");
  for (const auto& key : config_keys()) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    sub->add_option(flag, st.values[key], "config key " + key);
  }
  sub->add_option("--spacing", st.values["spacing"], "sets h1 and h2");
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"theta0", "band1d", "beta",   "zeta",  "sigma",
                                                 "sigma-ess", "lambda", "limits", "sweep", "check"};
  return names;
}

std::vector<ModelParams> sweep_cells(const RunConfig& cfg, int* duplicates) {
  std::set<std::tuple<double, double, double>> seen;
  std::size_t total = 0;
  for (double al : cfg.alpha)
    for (double g : cfg.gamma)
      for (double a : cfg.a) {
        ++total;
        seen.emplace(al, g, a);
      }
  if (duplicates) *duplicates = static_cast<int>(total - seen.size());
  std::vector<ModelParams> out;
  for (const auto& [al, g, a] : seen) out.push_back({al, g, a});
  return out;
}

std::string versions_json() {
  json v{{"magfiber", MAGFIBER_VERSION},
         {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                       std::to_string(EIGEN_MINOR_VERSION)},
         {"factorization", factorization_backend()},
         {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                      "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
         {"cli11", CLI11_VERSION},
#if defined(__clang__)
         {"compiler", "clang " __clang_version__}
#elif defined(__GNUC__)
         {"compiler", "gcc " __VERSION__}
#else
         {"compiler", "unknown"}
#endif
  };
  return v.dump();
}

std::string report_json(const TheoremCheck& check) {
  const LambdaReport& r = check.report;
  json tol{{"tol_solver", num(r.tol_solver)}, {"tol_total", num(r.tol_total)}, {"delta", r.delta}};
  if (r.convergence) {
    const Extrapolation& e = *r.convergence;
    json levels = json::array();
    for (std::size_t i = 0; i < e.levels.size(); ++i)
      levels.push_back(json{{"h", e.levels[i].h}, {"L1", e.levels[i].L1}, {"L2", e.levels[i].L2}, {"value", e.values[i]}});
    tol["error_estimate"] = num(e.error_estimate);
    tol["h_error"] = num(e.h_error);
    tol["L_sensitivity"] = num(e.L_sensitivity);
    tol["L_ratio"] = num(e.L_ratio);
    tol["observed_ratio"] = num(e.observed_ratio);
    tol["extrapolated"] = num(e.extrapolated);
    tol["levels"] = levels;
  }
  json grid = grid_json(r.disc);
  if (r.grid) {
    grid["n1"] = r.grid->n1();
    grid["n2"] = r.grid->n2();
  }
  json doc{{"lambda", r.lambda},
           {"tau_star", r.tau_star},
           {"classification", to_string(r.classification)},
           {"beta_a", r.beta_a},
           {"zeta_nu0", r.zeta_nu0},
           {"bound_rhs", r.bound_rhs},
           {"bound_margin", r.bound_margin},
           {"tolerances", tol},
           {"grid", grid},
           {"versions", json::parse(versions_json())},
           {"params", params_json(r.params)},
           {"holds", check.holds},
           {"slack", check.slack},
           {"nu0", r.nu0},
           {"xi_a", r.xi_a},
           {"sigma_ess_at_star", num(r.sigma_ess_at_star)},
           {"probe_tau", r.probe_tau ? num(*r.probe_tau) : json(nullptr)},
           {"probe_sigma", r.probe_sigma ? num(*r.probe_sigma) : json(nullptr)},
           {"multiple_minima", r.multiple_minima},
           {"scan", json{{"tau_lo", r.scan_lo}, {"tau_hi", r.scan_hi}, {"samples", r.sigma_curve.size()}}}};
  return doc.dump(2) + "\n";
}

std::string sigma_curve_csv(const LambdaReport& report) {
  CsvTable t{{"tau", "sigma", "sigma_ess"}, {}};
  for (const auto& c : report.sigma_curve) t.rows.push_back({c.tau, c.sigma, c.sigma_ess});
  return to_csv(t);
}

int run_subcommand(const std::string& name, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (name == "theta0") return cmd_theta0(cfg, out);
  if (name == "band1d") return cmd_band1d(cfg, out);
  if (name == "beta") return cmd_beta(cfg, out);
  if (name == "zeta") return cmd_zeta(cfg, out);
  if (name == "sigma") return cmd_sigma(cfg, out);
  if (name == "sigma-ess") return cmd_sigma_ess(cfg, out);
  if (name == "lambda") return cmd_lambda(cfg, out);
  if (name == "limits") return cmd_limits(cfg, out);
  if (name == "sweep") return cmd_sweep(cfg, out, err);
  if (name == "check") {
    AcceptanceOptions opts;
    opts.jobs = cfg.disc.jobs;
    opts.on_result = [&](const CriterionResult& r) { out << format_result(r) << std::endl; };
    const auto results = run_acceptance(opts);
    return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; }) ? kExitOk
                                                                                           : kExitAssertion;
  }
  throw InvalidArgument("unknown subcommand '" + name + "'");
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"magfiber: bottom of the spectrum of magnetic fiber operators", "magfiber"};
  app.require_subcommand(1);
  CliState st;
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : subcommands()) {
    CLI::App* sub = app.add_subcommand(name);
    add_common(sub, st);
    subs[name] = sub;
  }
  subs["check"]->add_option("--suite", st.suite, "suite to run")->check(CLI::IsMember({"acceptance"}));
  subs["check"]->add_option("--only", st.only, "criterion numbers to run (default: all)");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  std::string name;
  CLI::App* used = nullptr;
  for (auto& [n, s] : subs)
    if (s->parsed()) {
      name = n;
      used = s;
    }

  try {
    RunConfig cfg;
    if (!st.manifest_path.empty()) {
      const std::string text = read_file(st.manifest_path);
      const auto doc = json::parse(text);
      cfg = parse_config(doc.at("config_text").get<std::string>());
      cfg.input_hashes[st.manifest_path] = fnv1a_hex(text);
    }
    if (!st.config_path.empty()) {
      const std::string text = read_file(st.config_path);
      cfg = parse_config(text, cfg);
      cfg.input_hashes[st.config_path] = fnv1a_hex(text);
    }
    for (const auto& key : config_keys()) {
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      if (used->count(flag) > 0) set_config_value(cfg, key, st.values[key]);
    }
    if (used->count("--spacing") > 0) {
      set_config_value(cfg, "h1", st.values["spacing"]);
      set_config_value(cfg, "h2", st.values["spacing"]);
    }
    cfg.degrees = st.degrees;
    finalize_config(cfg);
    if (name == "check") {
      AcceptanceOptions opts;
      opts.jobs = cfg.disc.jobs;
      opts.only = st.only;
      opts.on_result = [&](const CriterionResult& r) { out << format_result(r) << std::endl; };
      const auto results = run_acceptance(opts);
      return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; }) ? kExitOk
                                                                                             : kExitAssertion;
    }
    return run_subcommand(name, cfg, out, err);
  } catch (const ValidationError& e) {
    err << "invalid " << e.parameter() << ": " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace magfiber
