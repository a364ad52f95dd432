#pragma once

// Command-line front end. Everything is routed through dispatch() so the same code path
// serves the `mft` binary and the tests.
//
// exit 0: success, outputs written
// exit 1: computation failed (error JSON on stderr)
// exit 2: usage error (error JSON on stderr)

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "certification.hpp"
#include "complete_graph_mc.hpp"
#include "error.hpp"
#include "fullspace_oracle.hpp"
#include "lattice_integrals.hpp"
#include "mf_solver.hpp"
#include "models.hpp"
#include "parallel.hpp"

namespace mft::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "0.1.0";

using json = nlohmann::ordered_json;

enum class OutputFormat { Json, Csv };

/// Flags of one invocation, validated before any computation starts.
struct RunConfig {
  std::string subcommand;
  OutputFormat output_format = OutputFormat::Json;
  std::optional<std::string> output_path;
  unsigned threads = 0;

  std::string model = "potts";
  int param = 3;
  double J = 0.0;
  int grid = 400;
  double Jmin = 0.0, Jmax = 0.0;
  int steps = 100;
  int scan = 2000;
  std::optional<double> Jlo, Jhi;
  std::optional<double> id_value;
  std::optional<int> dim;
  std::string method = "bessel";
  std::string path = "direct";
  double tol = 1e-8;
  int resolution = 200;
  int sphere_samples = 0;
  int window_points = 21;
  std::optional<double> delta;
  int N = 200;
  long sweeps = 100000;
  long burn_in = 1000;
  std::uint64_t seed = 1;
  int bins = 100;
  int batches = 50;
  std::optional<std::string> histogram_path;
  std::vector<int> Ns{50, 100, 200};
  long min_count = 10;
  std::string outdir = "figures";

  ModelSpec spec() const { return ModelSpec::from_name(model, param); }
};

// ---------------------------------------------------------------- output helpers

inline json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

using Cell = std::variant<double, long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void write_csv(std::ostream& os) const {
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << "\n";
    for (auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) os << ",";
        std::visit(
            [&](auto&& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, double>) os << fmt(v);
              else os << v;
            },
            r[i]);
      }
      os << "\n";
    }
  }

  json to_json() const {
    json rs = json::array();
    for (auto& r : rows) {
      json jr = json::array();
      for (auto& c : r)
        std::visit(
            [&](auto&& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, double>) jr.push_back(num(v));
              else jr.push_back(v);
            },
            c);
      rs.push_back(jr);
    }
    return json{{"schema_version", kSchemaVersion}, {"columns", columns}, {"rows", rs}};
  }
};

inline json model_json(const ModelSpec& M) { return json{{"name", M.name()}, {"param", M.param}}; }

inline json intervals_json(const std::vector<Interval>& v) {
  json a = json::array();
  for (auto& i : v) a.push_back(json::array({i.lo, i.hi}));
  return a;
}

// ---------------------------------------------------------------- commands

inline json cmd_id(const RunConfig& c) {
  IdMethod m = c.method == "quad" ? IdMethod::NestedQuadrature : IdMethod::BesselProduct;
  IdPath p = c.path == "watson" ? IdPath::FromWatson : IdPath::Direct;
  auto e = compute_id(*c.dim, m, c.tol, p);
  return json{{"schema_version", kSchemaVersion}, {"d", e.d},       {"wd", e.wd_value},
              {"id", e.value},                    {"err", e.abs_error_estimate}, {"method", c.method}};
}

inline Table cmd_profile(const RunConfig& c) {
  auto pg = profile(c.spec(), c.J, c.grid);
  Table t{{"m", "phi", "phi_full_scale"}, {}};
  for (std::size_t i = 0; i < pg.m.size(); ++i) t.rows.push_back({pg.m[i], pg.phi[i], pg.phi_full[i]});
  return t;
}

inline Table branches_table(const ModelSpec& M, double Jmin, double Jmax, int steps, int scan) {
  std::vector<BranchSet> sets(steps + 1);
  parallel_for(steps + 1, [&](std::size_t i) {
    double J = steps ? Jmin + (Jmax - Jmin) * double(i) / steps : Jmin;
    sets[i] = solve_branches(M, J, scan);
  });
  Table t{{"J", "m", "stability", "phi"}, {}};
  for (auto& s : sets)
    for (auto& r : s.roots) t.rows.push_back({s.J, r.m, std::string(to_string(r.stability)), r.phi});
  return t;
}

inline Table cmd_branches(const RunConfig& c) { return branches_table(c.spec(), c.Jmin, c.Jmax, c.steps, c.scan); }

inline json transition_json(const ModelSpec& M, const TransitionPoint& tp) {
  return json{{"schema_version", kSchemaVersion},
              {"model", model_json(M)},
              {"J_MF", tp.J_MF},
              {"m_c", tp.m_c},
              {"degeneracy_residual", tp.degeneracy_residual},
              {"J_lo", tp.J_lo},
              {"J_hi", tp.J_hi},
              {"J1", tp.J1 ? json(*tp.J1) : json(nullptr)},
              {"J2", tp.J2 ? json(*tp.J2) : json(nullptr)}};
}

inline json cmd_transition(const RunConfig& c) {
  auto M = c.spec();
  std::optional<std::pair<double, double>> br;
  if (c.Jlo && c.Jhi) br = std::pair{*c.Jlo, *c.Jhi};
  return transition_json(M, find_transition(M, br));
}

inline json cmd_barrier(const RunConfig& c) {
  auto M = c.spec();
  return json{{"schema_version", kSchemaVersion}, {"model", model_json(M)}, {"J", c.J},
              {"barrier", barrier_height(M, c.J)}};
}

inline double slack_for(const ModelSpec& M, double J, const RunConfig& c) {
  if (c.id_value) return J * error_budget_from_id(M, *c.id_value).delta_d;
  return J * error_budget(M, *c.dim).delta_d;
}

inline Table bands_table(const ModelSpec& M, const std::vector<double>& Js, const std::vector<double>& slack, int grid) {
  std::vector<std::vector<Interval>> bands(Js.size());
  parallel_for(Js.size(), [&](std::size_t i) { bands[i] = allowed_bands(M, Js[i], slack[i], grid); });
  Table t{{"J", "slack", "lo", "hi"}, {}};
  for (std::size_t i = 0; i < Js.size(); ++i)
    for (auto& b : bands[i]) t.rows.push_back({Js[i], slack[i], b.lo, b.hi});
  return t;
}

inline Table cmd_bands(const RunConfig& c) {
  auto M = c.spec();
  return bands_table(M, {c.J}, {slack_for(M, c.J, c)}, std::max(c.grid, 2));
}

inline json certificate_json(const Certificate& ct) {
  json samples = json::array();
  for (auto& s : ct.samples)
    samples.push_back(json{{"J", s.J}, {"barrier", s.barrier}, {"slack", s.slack}, {"margin", s.margin},
                           {"bands", intervals_json(s.bands)}, {"forbidden", intervals_json(s.forbidden)}});
  return json{{"schema_version", kSchemaVersion},
              {"model", model_json(ct.model)},
              {"d", ct.d},
              {"id_value", ct.id_value},
              {"delta_d", ct.delta_d},
              {"J_lo", ct.J_lo},
              {"J_hi", ct.J_hi},
              {"J_MF", ct.J_MF},
              {"passed", ct.passed},
              {"min_margin", num(ct.min_margin)},
              {"epsilon1", num(ct.epsilon1)},
              {"epsilon2", num(ct.epsilon2)},
              {"varkappa", num(ct.varkappa)},
              {"K", num(ct.K)},
              {"constants_note", ct.constants_note},
              {"samples", samples}};
}

inline json cmd_certify(const RunConfig& c) {
  CertifyOptions opt;
  opt.window_points = c.window_points;
  opt.delta_override = c.delta;
  return certificate_json(certify(c.spec(), *c.dim, *c.Jlo, *c.Jhi, opt));
}

inline json cmd_oracle(const RunConfig& c) {
  auto rc = reduction_check(c.spec(), c.J, c.resolution, c.sphere_samples);
  return json{{"schema_version", kSchemaVersion},
              {"model", model_json(rc.model)},
              {"J", rc.J},
              {"resolution", rc.resolution},
              {"minimizer", rc.minimizer},
              {"value", rc.oracle_value},
              {"scalar_value", rc.scalar_value},
              {"oracle_m", rc.oracle_m},
              {"scalar_m", rc.scalar_m},
              {"value_tolerance", rc.value_tol},
              {"shape_ok", rc.shape_ok},
              {"sampling_noise", rc.sampling_noise},
              {"matched_scalar", rc.matched}};
}

inline MCConfig mc_config(const RunConfig& c) {
  MCConfig m;
  m.model = c.spec();
  m.J = c.J;
  m.N = c.N;
  m.sweeps = c.sweeps;
  m.burn_in = c.burn_in;
  m.seed = c.seed;
  m.histogram_bins = c.bins;
  m.batches = c.batches;
  return m;
}

inline json mc_json(const MCConfig& cfg, const MCResult& r) {
  json rates = json::array();
  if (r.rate_estimates)
    for (double v : *r.rate_estimates) rates.push_back(num(v));
  return json{{"schema_version", kSchemaVersion},
              {"model", model_json(cfg.model)},
              {"J", cfg.J},
              {"N", cfg.N},
              {"sweeps", cfg.sweeps},
              {"burn_in", cfg.burn_in},
              {"seed", cfg.seed},
              {"samples", r.samples},
              {"mean_scalar_m", r.mean_scalar_m},
              {"mean_scalar_m_stderr", r.mean_scalar_m_stderr},
              {"pair_correlation", r.pair_correlation},
              {"pair_stderr", r.pair_stderr},
              {"mean_spin_sq", r.mean_spin_sq},
              {"correlation_gap", r.correlation_gap},
              {"correlation_gap_stderr", r.correlation_gap_stderr},
              {"acceptance", r.acceptance},
              {"histogram", json{{"lo", r.histogram.lo}, {"hi", r.histogram.hi}, {"counts", r.histogram.counts}}},
              {"rate_estimates", rates}};
}

inline json cmd_mc(const RunConfig& c) {
  auto cfg = mc_config(c);
  auto r = run_mc(cfg);
  if (c.histogram_path) {
    std::ofstream f(*c.histogram_path);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + *c.histogram_path);
    Table t{{"bin_center", "count"}, {}};
    for (std::size_t i = 0; i < r.histogram.counts.size(); ++i)
      t.rows.push_back({r.histogram.center(i), r.histogram.counts[i]});
    t.write_csv(f);
  }
  return mc_json(cfg, r);
}

inline Table cmd_rate(const RunConfig& c) {
  RateOptions o;
  o.sweeps = c.sweeps;
  o.burn_in = c.burn_in;
  o.seed = c.seed;
  o.bins = c.bins;
  o.min_count = c.min_count;
  auto rc = estimate_rate_function(c.spec(), c.J, c.Ns, o);
  Table t{{"bin_center", "rate", "stderr", "phi_shifted", "insufficient"}, {}};
  for (auto& b : rc.bins) t.rows.push_back({b.center, b.rate, b.rate_stderr, b.phi_shifted, long(b.insufficient)});
  return t;
}

// ---------------------------------------------------------------- figure data

struct FigureParams {
  std::vector<double> fig1_J{2.73, 2.76, 2.77, 2.8};
  int fig1_grid = 400;
  double fig2_Jmin = 4.0, fig2_Jmax = 6.0;
  int fig2_steps = 200;
  int fig2_band_steps = 80;
  double fig2_id_value = 0.002;
  int scan = 2000;
  int band_grid = 2000;
};

inline json reproduce_figures(const std::string& outdir, const FigureParams& p = {}) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + outdir + ": " + ec.message());
  auto open = [&](const std::string& name) {
    std::ofstream f(fs::path(outdir) / name);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + (fs::path(outdir) / name).string());
    return f;
  };

  auto q3 = ModelSpec::potts(3);
  Table f1{{"J", "m", "phi", "phi_full_scale"}, {}};
  for (double J : p.fig1_J) {
    auto pg = profile(q3, J, p.fig1_grid);
    for (std::size_t i = 0; i < pg.m.size(); ++i) f1.rows.push_back({J, pg.m[i], pg.phi[i], pg.phi_full[i]});
  }
  {
    auto f = open("fig1_q3.csv");
    f1.write_csv(f);
  }

  auto q10 = ModelSpec::potts(10);
  {
    auto f = open("fig2_q10_branches.csv");
    branches_table(q10, p.fig2_Jmin, p.fig2_Jmax, p.fig2_steps, p.scan).write_csv(f);
  }
  std::vector<double> Js, slack;
  double delta = error_budget_from_id(q10, p.fig2_id_value).delta_d;
  for (int i = 0; i <= p.fig2_band_steps; ++i) {
    Js.push_back(p.fig2_Jmin + (p.fig2_Jmax - p.fig2_Jmin) * i / p.fig2_band_steps);
    slack.push_back(Js.back() * delta);
  }
  {
    auto f = open("fig2_q10_bands.csv");
    bands_table(q10, Js, slack, p.band_grid).write_csv(f);
  }

  json manifest{{"schema_version", kSchemaVersion},
                {"version", kVersion},
                {"files", {"fig1_q3.csv", "fig2_q10_branches.csv", "fig2_q10_bands.csv"}},
                {"fig1", {{"model", model_json(q3)}, {"J", p.fig1_J}, {"grid", p.fig1_grid}}},
                {"fig2_branches",
                 {{"model", model_json(q10)}, {"Jmin", p.fig2_Jmin}, {"Jmax", p.fig2_Jmax}, {"steps", p.fig2_steps},
                  {"scan", p.scan}}},
                {"fig2_bands",
                 {{"model", model_json(q10)},
                  {"Jmin", p.fig2_Jmin},
                  {"Jmax", p.fig2_Jmax},
                  {"steps", p.fig2_band_steps},
                  {"id_value", p.fig2_id_value},
                  {"delta", delta},
                  {"grid", p.band_grid}}}};
  {
    auto f = open("manifest.json");
    f << manifest.dump(2) << "\n";
  }
  return manifest;
}

// ---------------------------------------------------------------- dispatch

inline void error_json(std::ostream& err, const std::string& kind, const std::string& msg) {
  err << json{{"schema_version", kSchemaVersion}, {"error", kind}, {"message", msg}}.dump() << "\n";
}

namespace detail {

inline void add_model(CLI::App* sub, RunConfig& c) {
  sub->add_option("--model", c.model, "potts, cubic or nematic")
      ->check(CLI::IsMember({"potts", "cubic", "nematic"}))
      ->required();
  sub->add_option("--param", c.param, "q (potts), r (cubic) or N (nematic)")->required();
}

inline void usage(const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); }

// Cross-flag checks that CLI11 cannot express.
inline void validate(RunConfig& c) {
  const std::string& s = c.subcommand;
  if (s != "id" && s != "reproduce-figures") {
    if (c.model == "potts" && c.param < 2) usage("potts needs --param >= 2");
    if (c.model == "cubic" && c.param < 1) usage("cubic needs --param >= 1");
    if (c.model == "nematic" && c.param < 3) usage("nematic needs --param >= 3");
  }
  if (s == "id") {
    if (*c.dim < 3) usage("--dim must be >= 3");
    if (!(c.tol > 0)) usage("--tol must be positive");
    if (c.method == "quad" && *c.dim > 4) usage("--method quad supports --dim 3 or 4");
  }
  if ((s == "profile" || s == "bands") && c.grid < 2) usage("--grid must be >= 2");
  if (s == "branches") {
    if (!(c.Jmin >= 0 && c.Jmax >= c.Jmin)) usage("need 0 <= --Jmin <= --Jmax");
    if (c.steps < 1) usage("--steps must be >= 1");
    if (c.scan < 10) usage("--scan must be >= 10");
  }
  if (s == "transition" && (c.Jlo.has_value() != c.Jhi.has_value())) usage("--Jlo and --Jhi go together");
  if (s == "bands") {
    if (c.id_value.has_value() == c.dim.has_value()) usage("give exactly one of --id-value and --dim");
    if (c.id_value && !(*c.id_value >= 0)) usage("--id-value must be >= 0");
    if (c.dim && *c.dim < 3) usage("--dim must be >= 3");
  }
  if (s == "certify") {
    if (!(*c.Jlo < *c.Jhi)) usage("need --Jlo < --Jhi");
    if (*c.dim < 3) usage("--dim must be >= 3");
    if (c.window_points < 2) usage("--window-points must be >= 2");
    if (c.delta && !(*c.delta >= 0)) usage("--delta must be >= 0");
  }
  if (s == "oracle" && c.resolution < 20) usage("--resolution must be >= 20");
  if (s == "mc") {
    if (c.N < 2) usage("--N must be >= 2");
    if (!(c.sweeps > c.burn_in && c.burn_in >= 0)) usage("need --sweeps > --burn-in >= 0");
    if (c.bins < 1) usage("--bins must be >= 1");
    if (c.batches < 2 || c.batches > c.sweeps - c.burn_in) usage("--batches must be in [2, sweeps - burn_in]");
  }
  if (s == "rate") {
    if (c.Ns.size() < 3) usage("--Ns needs at least 3 sizes");
    for (std::size_t i = 1; i < c.Ns.size(); ++i)
      if (c.Ns[i] <= c.Ns[i - 1]) usage("--Ns must increase");
    if (c.Ns.front() < 2) usage("--Ns entries must be >= 2");
    if (!(c.sweeps > c.burn_in && c.burn_in >= 0)) usage("need --sweeps > --burn-in >= 0");
    if (c.bins < 1) usage("--bins must be >= 1");
  }
  bool table = s == "profile" || s == "branches" || s == "bands" || s == "rate";
  if (!table && s != "reproduce-figures" && c.output_format == OutputFormat::Csv)
    usage("--format csv is only available for tabular subcommands");
}

}  // namespace detail

/// Parses argv, runs the subcommand, writes the result to `out` (or --output) and returns
/// the process exit code.
inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  RunConfig c;
  CLI::App app{"Mean-field free energies, transitions and first-order certificates", "mft"};
  app.set_config("--config", "", "read flags from a TOML/INI file");
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  app.set_version_flag("--version", kVersion);
  std::optional<std::string> format;
  app.add_option("--threads", c.threads, "cap on worker threads (falls back to MFT_THREADS)");
  app.add_option("--output,-o", c.output_path, "write the primary output to this file");
  app.add_option("--format", format, "json or csv (tabular subcommands default to csv)")
      ->check(CLI::IsMember({"json", "csv"}));

  auto* id = app.add_subcommand("id", "infrared integral I_d");
  id->add_option("--dim", c.dim, "dimension d >= 3")->required();
  id->add_option("--method", c.method, "quad or bessel")->check(CLI::IsMember({"quad", "bessel"}));
  id->add_option("--tol", c.tol, "absolute tolerance");
  id->add_option("--path", c.path, "direct or watson (I_d = W_d - 1)")->check(CLI::IsMember({"direct", "watson"}));

  auto* prof = app.add_subcommand("profile", "phi_J(m) on a grid");
  detail::add_model(prof, c);
  prof->add_option("--J", c.J)->required();
  prof->add_option("--grid", c.grid);

  auto* br = app.add_subcommand("branches", "all solutions of the mean-field equation over a J range");
  detail::add_model(br, c);
  br->add_option("--Jmin", c.Jmin)->required();
  br->add_option("--Jmax", c.Jmax)->required();
  br->add_option("--steps", c.steps);
  br->add_option("--scan", c.scan, "scan resolution per J");

  auto* tr = app.add_subcommand("transition", "mean-field transition coupling J_MF");
  detail::add_model(tr, c);
  tr->add_option("--Jlo", c.Jlo);
  tr->add_option("--Jhi", c.Jhi);

  auto* ba = app.add_subcommand("barrier", "barrier height between minima");
  detail::add_model(ba, c);
  ba->add_option("--J", c.J)->required();

  auto* bd = app.add_subcommand("bands", "allowed magnetization bands for an error budget");
  detail::add_model(bd, c);
  bd->add_option("--J", c.J)->required();
  bd->add_option("--id-value", c.id_value, "use this I_d value");
  bd->add_option("--dim", c.dim, "or compute I_d for this dimension");
  bd->add_option("--grid", c.grid);

  auto* ce = app.add_subcommand("certify", "first-order transition certificate");
  detail::add_model(ce, c);
  ce->add_option("--dim", c.dim)->required();
  ce->add_option("--Jlo", c.Jlo)->required();
  ce->add_option("--Jhi", c.Jhi)->required();
  ce->add_option("--window-points", c.window_points);
  ce->add_option("--delta", c.delta, "override delta_d (0 gives the d -> infinity limit)");

  auto* orc = app.add_subcommand("oracle", "brute-force full-space minimum vs the scalar reduction");
  detail::add_model(orc, c);
  orc->add_option("--J", c.J)->required();
  orc->add_option("--resolution", c.resolution);
  orc->add_option("--sphere-samples", c.sphere_samples, "nematic: sample the sphere instead of quadrature");

  auto* mc = app.add_subcommand("mc", "complete-graph Monte Carlo");
  detail::add_model(mc, c);
  mc->add_option("--J", c.J)->required();
  mc->add_option("--N", c.N);
  mc->add_option("--sweeps", c.sweeps);
  mc->add_option("--burn-in", c.burn_in);
  mc->add_option("--seed", c.seed);
  mc->add_option("--bins", c.bins);
  mc->add_option("--batches", c.batches);
  mc->add_option("--histogram", c.histogram_path, "also write the histogram as CSV");

  auto* ra = app.add_subcommand("rate", "large-deviation rate function from Monte Carlo histograms");
  detail::add_model(ra, c);
  ra->add_option("--J", c.J)->required();
  ra->add_option("--Ns", c.Ns, "comma separated system sizes")->delimiter(',');
  ra->add_option("--sweeps", c.sweeps);
  ra->add_option("--burn-in", c.burn_in);
  ra->add_option("--seed", c.seed);
  ra->add_option("--bins", c.bins);
  ra->add_option("--min-count", c.min_count);

  auto* rf = app.add_subcommand("reproduce-figures", "write the figure data sets and a manifest");
  rf->add_option("--outdir", c.outdir);

  try {
    app.parse(argc, argv);
    c.subcommand = app.get_subcommands().front()->get_name();
    if (c.subcommand == "rate") {
      // rate-specific defaults where the user did not say otherwise
      if (ra->count("--sweeps") == 0) c.sweeps = 200000;
      if (ra->count("--burn-in") == 0) c.burn_in = 2000;
      if (ra->count("--bins") == 0) c.bins = 20;
    }
    bool table = c.subcommand == "profile" || c.subcommand == "branches" || c.subcommand == "bands" ||
                 c.subcommand == "rate";
    c.output_format = format ? (*format == "csv" ? OutputFormat::Csv : OutputFormat::Json)
                             : (table ? OutputFormat::Csv : OutputFormat::Json);
    detail::validate(c);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    error_json(err, "UsageError", e.what());
    return 2;
  } catch (const Error& e) {
    error_json(err, "UsageError", e.what());
    return 2;
  }

  if (c.threads > 0) set_thread_limit(c.threads);

  try {
    std::ostringstream buf;
    const std::string& s = c.subcommand;
    if (s == "reproduce-figures") {
      buf << reproduce_figures(c.outdir).dump(2) << "\n";
    } else if (s == "profile" || s == "branches" || s == "bands" || s == "rate") {
      Table t = s == "profile" ? cmd_profile(c) : s == "branches" ? cmd_branches(c) : s == "bands" ? cmd_bands(c) : cmd_rate(c);
      if (c.output_format == OutputFormat::Csv) t.write_csv(buf);
      else buf << t.to_json().dump(2) << "\n";
    } else {
      json j = s == "id"           ? cmd_id(c)
               : s == "transition" ? cmd_transition(c)
               : s == "barrier"    ? cmd_barrier(c)
               : s == "certify"    ? cmd_certify(c)
               : s == "oracle"     ? cmd_oracle(c)
                                   : cmd_mc(c);
      buf << j.dump(2) << "\n";
    }
    if (c.output_path) {
      std::ofstream f(*c.output_path);
      if (!f) throw Error(ErrorCode::IoError, "cannot write " + *c.output_path);
      f << buf.str();
    } else {
      out << buf.str();
    }
  } catch (const Error& e) {
    error_json(err, std::string(to_string(e.code())), e.what());
    return 1;
  } catch (const std::exception& e) {
    error_json(err, "InternalError", e.what());
    return 1;
  }
  return 0;
}

}  // namespace mft::cli
