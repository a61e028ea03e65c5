/*
 * Front-end orchestration: strict JSON configs, deterministic artifacts.
 *
 * Configuration problems are separated from numerical ones by stage, not by
 * exception type: everything up to a validated scenario and a writable output
 * directory is a config error (exit 1), everything after is a numerical
 * failure (exit 2).  CSV cells go through one %.17g formatter so identical
 * runs produce identical bytes; SVG coordinates use fixed two-decimal
 * formatting for the same reason.
 */

#include "cutofflab/cli.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <sstream>
#include <utility>

#include <json.hpp>

#include <Eigen/Core>

#include "cutofflab/errors.hpp"
#include "cutofflab/metrics.hpp"
#include "cutofflab/spectral.hpp"
#include "cutofflab/version.hpp"

namespace cutofflab::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using ojson = nlohmann::ordered_json;

// ── small helpers ─────────────────────────────────────────────────────────────

[[noreturn]] void bad_config(const std::string& what) {
  throw InadmissibleRange("load_scenario: " + what);
}

std::vector<std::string> split(const std::string& text, char delim) {
  std::vector<std::string> parts;
  std::string piece;
  std::istringstream in(text);
  while (std::getline(in, piece, delim)) parts.push_back(piece);
  if (!text.empty() && text.back() == delim) parts.push_back("");
  return parts;
}

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t");
  return text.substr(begin, end - begin + 1);
}

double parse_number(const std::string& text, const char* fn) {
  const std::string t = trim(text);
  if (t.empty()) throw InadmissibleRange(std::string(fn) + ": empty number");
  char* end = nullptr;
  const double value = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size())
    throw InadmissibleRange(std::string(fn) + ": not a number: '" + text + "'");
  return value;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_scenario: cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// ── scenario configs ──────────────────────────────────────────────────────────

void check_keys(const json& object, const char* where,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : object.items()) {
    bool known = false;
    for (const char* key : allowed) known = known || item.key() == key;
    if (!known) bad_config(std::string(where) + " has unknown key '" + item.key() + "'");
  }
}

double number_field(const json& node, const char* key) {
  if (!node.is_number()) bad_config(std::string("'") + key + "' must be a number");
  return node.get<double>();
}

Eigen::MatrixXd matrix_field(const json& node, const char* key) {
  if (!node.is_array() || node.empty())
    bad_config(std::string("'") + key + "' must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(node.size());
  if (!node[0].is_array() || node[0].empty())
    bad_config(std::string("'") + key + "' rows must be non-empty arrays");
  const auto cols = static_cast<Eigen::Index>(node[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = node[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      bad_config(std::string("'") + key + "' must be rectangular");
    for (Eigen::Index j = 0; j < cols; ++j)
      m(i, j) = number_field(row[static_cast<std::size_t>(j)], key);
  }
  return m;
}

Eigen::VectorXd vector_field(const json& node, const char* key) {
  if (!node.is_array() || node.empty())
    bad_config(std::string("'") + key + "' must be a non-empty array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(node.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = number_field(node[static_cast<std::size_t>(i)], key);
  return v;
}

std::function<double(double)> tau_field(const json& node, double* limit_out) {
  if (!node.is_object()) bad_config("'tau' must be an object");
  check_keys(node, "'tau'", {"limit", "initial", "rate"});
  if (!node.contains("limit")) bad_config("'tau' needs 'limit'");
  const double limit = number_field(node.at("limit"), "tau.limit");
  const double initial =
      node.contains("initial") ? number_field(node.at("initial"), "tau.initial") : limit;
  const double rate =
      node.contains("rate") ? number_field(node.at("rate"), "tau.rate") : 1.0;
  if (rate < 0) bad_config("'tau.rate' must be ≥ 0");
  *limit_out = limit;
  return [limit, initial, rate](double s) {
    return limit + (initial - limit) * std::exp(-rate * s);
  };
}

std::function<Eigen::MatrixXd(double)> driver_field(const json& node) {
  if (!node.is_object() || !node.contains("kind") || !node.at("kind").is_string())
    bad_config("'driver' must be an object with a string 'kind'");
  const std::string kind = node.at("kind").get<std::string>();
  if (kind == "ou") {
    check_keys(node, "'driver'", {"kind", "theta", "covariance"});
    if (!node.contains("theta") || !node.contains("covariance"))
      bad_config("OU driver needs 'theta' and 'covariance'");
    const auto theta = spectral::validate_stability(matrix_field(node.at("theta"), "driver.theta"));
    return scenarios::ou_driver_covariance(theta,
                                           matrix_field(node.at("covariance"), "driver.covariance"));
  }
  if (kind == "fou") {
    check_keys(node, "'driver'", {"kind", "lambda", "hurst"});
    if (!node.contains("lambda") || !node.contains("hurst"))
      bad_config("fOU driver needs 'lambda' and 'hurst'");
    return scenarios::fou_driver_covariance(number_field(node.at("lambda"), "driver.lambda"),
                                            number_field(node.at("hurst"), "driver.hurst"));
  }
  if (kind == "exponential") {
    check_keys(node, "'driver'", {"kind", "variance", "rate"});
    if (!node.contains("variance") || !node.contains("rate"))
      bad_config("exponential driver needs 'variance' and 'rate'");
    return scenarios::exponential_driver_covariance(
        number_field(node.at("variance"), "driver.variance"),
        number_field(node.at("rate"), "driver.rate"));
  }
  bad_config("unknown driver kind '" + kind + "' (ou, fou, exponential)");
}

scenarios::MetricChoice metric_field(const json& node) {
  if (!node.is_object() || !node.contains("kind") || !node.at("kind").is_string())
    bad_config("'metric' must be an object with a string 'kind'");
  check_keys(node, "'metric'", {"kind", "p"});
  scenarios::MetricChoice metric;
  const std::string kind = node.at("kind").get<std::string>();
  if (kind == "total_variation") {
    metric.kind = scenarios::MetricChoice::Kind::total_variation;
  } else if (kind == "wasserstein") {
    metric.kind = scenarios::MetricChoice::Kind::wasserstein;
    if (node.contains("p")) metric.p = number_field(node.at("p"), "metric.p");
  } else {
    bad_config("unknown metric kind '" + kind + "' (total_variation, wasserstein)");
  }
  return metric;
}

scenarios::Evaluation evaluation_field(const json& node) {
  if (!node.is_object() || !node.contains("kind") || !node.at("kind").is_string())
    bad_config("'evaluation' must be an object with a string 'kind'");
  check_keys(node, "'evaluation'", {"kind", "sample_count", "seed"});
  scenarios::Evaluation evaluation;
  const std::string kind = node.at("kind").get<std::string>();
  if (kind == "exact") {
    evaluation.kind = scenarios::Evaluation::Kind::exact;
  } else if (kind == "monte_carlo") {
    evaluation.kind = scenarios::Evaluation::Kind::monte_carlo;
  } else {
    bad_config("unknown evaluation kind '" + kind + "' (exact, monte_carlo)");
  }
  if (node.contains("sample_count")) {
    if (!node.at("sample_count").is_number_integer())
      bad_config("'evaluation.sample_count' must be an integer");
    const auto n = node.at("sample_count").get<std::int64_t>();
    if (n < 2) bad_config("'evaluation.sample_count' must be ≥ 2");
    evaluation.sample_count = static_cast<std::size_t>(n);
  }
  if (node.contains("seed")) {
    if (!node.at("seed").is_number_integer() || node.at("seed").get<std::int64_t>() < 0)
      bad_config("'evaluation.seed' must be a non-negative integer");
    evaluation.seed = node.at("seed").get<std::uint64_t>();
  }
  return evaluation;
}

scenarios::Scenario scenario_from_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    bad_config(e.what());
  }
  if (!j.is_object()) bad_config("top level must be an object");
  check_keys(j, "config",
             {"family", "lambda", "drift", "x", "epsilon", "n_components", "hurst",
              "alpha", "c_alpha", "y", "noise_covariance", "tau", "driver",
              "driver_horizon", "metric", "evaluation"});
  if (!j.contains("family") || !j.at("family").is_string())
    bad_config("'family' is required and must be a string");
  const std::string name = j.at("family").get<std::string>();
  const auto family = scenarios::family_from_name(name);
  if (!family) bad_config("unknown family '" + name + "'");

  scenarios::ScenarioParams p;
  if (j.contains("lambda")) p.lambda = number_field(j.at("lambda"), "lambda");
  if (j.contains("drift")) p.drift = matrix_field(j.at("drift"), "drift");
  if (j.contains("x")) {
    if (j.at("x").is_number())
      p.x_scalar = j.at("x").get<double>();
    else
      p.x = vector_field(j.at("x"), "x");
  }
  if (j.contains("epsilon")) p.epsilon = number_field(j.at("epsilon"), "epsilon");
  if (j.contains("n_components")) {
    if (!j.at("n_components").is_number_integer() || j.at("n_components").get<std::int64_t>() < 0)
      bad_config("'n_components' must be a non-negative integer");
    p.n_components = j.at("n_components").get<std::size_t>();
  }
  if (j.contains("hurst")) p.hurst = number_field(j.at("hurst"), "hurst");
  if (j.contains("alpha")) p.alpha = number_field(j.at("alpha"), "alpha");
  if (j.contains("c_alpha")) p.c_alpha = number_field(j.at("c_alpha"), "c_alpha");
  if (j.contains("y")) p.y = number_field(j.at("y"), "y");
  if (j.contains("noise_covariance"))
    p.noise_covariance = matrix_field(j.at("noise_covariance"), "noise_covariance");
  if (j.contains("tau")) {
    double limit = 0.0;
    p.tau = tau_field(j.at("tau"), &limit);
    p.tau_limit = limit;
  }
  if (j.contains("driver")) p.driver_covariance = driver_field(j.at("driver"));
  if (j.contains("driver_horizon"))
    p.driver_horizon = number_field(j.at("driver_horizon"), "driver_horizon");
  if (j.contains("metric")) p.metric = metric_field(j.at("metric"));
  if (j.contains("evaluation")) p.evaluation = evaluation_field(j.at("evaluation"));
  return scenarios::build_scenario(*family, p);
}

// ── provenance and formatting ─────────────────────────────────────────────────

std::uint64_t fnv1a(std::uint64_t hash, const char* data, std::size_t size) {
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= static_cast<unsigned char>(data[i]);
    hash *= 1099511628211ULL;
  }
  return hash;
}

const char* omega_kind_name(spectral::OmegaLimitSet::Kind kind) {
  switch (kind) {
    case spectral::OmegaLimitSet::Kind::point: return "point";
    case spectral::OmegaLimitSet::Kind::finite_orbit: return "finite_orbit";
    default: return "torus_closure";
  }
}

std::string metric_label(const scenarios::MetricChoice& metric) {
  if (metric.kind == scenarios::MetricChoice::Kind::total_variation)
    return "total variation";
  char buf[32];
  std::snprintf(buf, sizeof buf, "W_%g", metric.p);
  return buf;
}

std::string fmt2(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

std::string fmt3g(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", value);
  return buf;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

// ── run configuration ─────────────────────────────────────────────────────────

std::vector<double> default_r_grid() {
  std::vector<double> grid;
  for (int k = -6; k <= 6; ++k) grid.push_back(0.5 * k);
  return grid;
}

void normalize_epsilons(std::vector<double>* epsilons) {
  if (epsilons->empty()) throw InadmissibleRange("run: ε list must be non-empty");
  for (double e : *epsilons)
    if (!(e > 0.0) || !(e < 1.0))
      throw InvalidEpsilon("run: ε must lie in (0,1), got " + format_double(e));
  std::sort(epsilons->begin(), epsilons->end(), std::greater<double>());
  epsilons->erase(std::unique(epsilons->begin(), epsilons->end()), epsilons->end());
}

struct Context {
  scenarios::Scenario scenario;
  RunConfig config;
  fs::path dir;
  std::string provenance;
};

fs::path artifact_path(const Context& ctx, const char* stem) {
  return ctx.dir / (std::string(stem) + "." + format_name(ctx.config.format));
}

void announce(const fs::path& path) { std::printf("wrote %s\n", path.string().c_str()); }

void write_json(const ojson& j, const fs::path& path, const std::string& provenance) {
  ojson wrapped;
  wrapped["provenance"] = provenance;
  for (const auto& item : j.items()) wrapped[item.key()] = item.value();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_json: cannot open " + path.string());
  out << wrapped.dump(2) << "\n";
  if (!out.flush()) throw IoError("write_json: write failed for " + path.string());
}

// ── commands ──────────────────────────────────────────────────────────────────

void cmd_analyze(const Context& ctx) {
  const auto& s = ctx.scenario;
  const auto dec = spectral::dominant_decomposition(s.drift, s.x);
  const auto omega = spectral::omega_limit_set(dec, 128);
  const fs::path path = artifact_path(ctx, "analyze");
  if (ctx.config.format == Format::json) {
    ojson j;
    j["family"] = scenarios::family_name(s.family);
    j["dimension"] = s.dimension();
    j["lambda"] = dec.rate;
    j["block_size"] = dec.block_size;
    j["mode_count"] = dec.mode_count;
    j["angular_velocities"] = dec.angular_velocities;
    j["omega"] = ojson{{"kind", omega_kind_name(omega.kind)},
                       {"sample_count", omega.samples.size()},
                       {"diameter", omega.diameter}};
    write_json(j, path, ctx.provenance);
  } else {
    CsvTable table;
    table.columns = {"quantity", "value"};
    table.rows.push_back({"family", scenarios::family_name(s.family)});
    table.rows.push_back({"dimension", std::to_string(s.dimension())});
    table.rows.push_back({"lambda", format_double(dec.rate)});
    table.rows.push_back({"block_size", std::to_string(dec.block_size)});
    table.rows.push_back({"mode_count", std::to_string(dec.mode_count)});
    for (std::size_t k = 0; k < dec.angular_velocities.size(); ++k)
      table.rows.push_back({"angular_velocity_" + std::to_string(k + 1),
                            format_double(dec.angular_velocities[k])});
    table.rows.push_back({"omega_kind", omega_kind_name(omega.kind)});
    table.rows.push_back({"omega_sample_count", std::to_string(omega.samples.size())});
    table.rows.push_back({"omega_diameter", format_double(omega.diameter)});
    emit_csv(table, path.string(), ctx.provenance);
  }
  announce(path);
}

void cmd_profile(const Context& ctx) {
  const auto& s = ctx.scenario;
  const auto curve = engine::profile_curve(s, ctx.config.r_grid, ctx.config.window);
  const fs::path path = artifact_path(ctx, "profile");
  const std::string title =
      std::string(scenarios::family_name(s.family)) + ": " + metric_label(s.metric) + " profile";
  if (ctx.config.format == Format::svg) {
    emit_plot({curve}, path.string(), ctx.provenance, title);
  } else if (ctx.config.format == Format::json) {
    ojson j;
    j["family"] = scenarios::family_name(s.family);
    j["metric"] = metric_label(s.metric);
    j["window"] = ctx.config.window;
    j["r_grid"] = curve.r_grid;
    j["theoretical"] = curve.theoretical;
    write_json(j, path, ctx.provenance);
  } else {
    CsvTable table;
    table.columns = {"r", "theoretical"};
    for (std::size_t i = 0; i < curve.r_grid.size(); ++i)
      table.rows.push_back({format_double(curve.r_grid[i]), format_double(curve.theoretical[i])});
    emit_csv(table, path.string(), ctx.provenance);
  }
  announce(path);
}

void cmd_curve(const Context& ctx) {
  const auto& s = ctx.scenario;
  const auto report =
      engine::convergence_report(s, ctx.config.epsilons, ctx.config.r_grid, ctx.config.window);
  const fs::path path = artifact_path(ctx, "curve");
  const std::string title =
      std::string(scenarios::family_name(s.family)) + ": " + metric_label(s.metric) + " curves";
  if (ctx.config.format == Format::svg) {
    emit_plot(report.curves, path.string(), ctx.provenance, title);
  } else if (ctx.config.format == Format::json) {
    ojson j;
    j["family"] = scenarios::family_name(s.family);
    j["metric"] = metric_label(s.metric);
    j["window"] = ctx.config.window;
    j["classification"] =
        report.classification == engine::CutoffClass::profile ? "profile" : "window_only";
    j["epsilons"] = report.epsilons;
    j["sup_gaps"] = report.sup_gaps;
    j["gaps_decreasing"] = report.gaps_decreasing;
    j["negative_time_counts"] = report.negative_time_counts;
    ojson curves = ojson::array();
    for (const auto& c : report.curves) {
      ojson jc;
      jc["epsilon"] = c.epsilon;
      jc["t_star"] = c.schedule.t_star;
      jc["t_cut"] = c.schedule.t_cut;
      jc["r"] = c.r_grid;
      jc["t"] = c.times;
      jc["measured"] = c.measured;
      jc["theoretical"] = c.theoretical;
      jc["stderr"] = c.stderr_bars;
      curves.push_back(std::move(jc));
    }
    j["curves"] = std::move(curves);
    if (report.classification == engine::CutoffClass::window_only) {
      j["envelope"] = ojson{{"r", report.envelope_r_grid},
                            {"liminf", report.liminf_profile},
                            {"limsup", report.limsup_profile}};
    }
    write_json(j, path, ctx.provenance);
  } else {
    CsvTable table;
    table.columns = {"epsilon", "r", "t", "measured", "theoretical", "gap", "stderr"};
    for (const auto& c : report.curves)
      for (std::size_t i = 0; i < c.r_grid.size(); ++i)
        table.rows.push_back({format_double(c.epsilon), format_double(c.r_grid[i]),
                              format_double(c.times[i]), format_double(c.measured[i]),
                              format_double(c.theoretical[i]),
                              format_double(std::abs(c.measured[i] - c.theoretical[i])),
                              format_double(c.stderr_bars[i])});
    emit_csv(table, path.string(), ctx.provenance);
  }
  announce(path);
}

void cmd_classify(const Context& ctx) {
  const auto& s = ctx.scenario;
  const std::vector<double> rho_grid = {0.5, 1.0, 2.0};
  const auto report = engine::cutoff_classification(s, rho_grid, 1e-6);
  const bool window_only = report.classification == engine::CutoffClass::window_only;
  const char* verdict = window_only ? "window_only" : "profile";
  if (ctx.config.format == Format::json) {
    const fs::path path = artifact_path(ctx, "classify");
    ojson j;
    j["family"] = scenarios::family_name(s.family);
    j["metric"] = metric_label(s.metric);
    j["classification"] = verdict;
    j["spread"] = report.spread;
    j["rho_grid"] = report.rho_grid;
    j["spread_by_rho"] = report.spread_by_rho;
    j["v_check"] = to_std(report.v_check);
    j["v_hat"] = to_std(report.v_hat);
    if (window_only) {
      j["envelope"] = ojson{{"r", report.envelope_r_grid},
                            {"liminf", report.liminf_profile},
                            {"limsup", report.limsup_profile}};
    }
    write_json(j, path, ctx.provenance);
    announce(path);
  } else {
    const fs::path path = artifact_path(ctx, "classify");
    CsvTable table;
    table.columns = {"quantity", "value"};
    table.rows.push_back({"family", scenarios::family_name(s.family)});
    table.rows.push_back({"classification", verdict});
    table.rows.push_back({"spread", format_double(report.spread)});
    for (Eigen::Index i = 0; i < report.v_check.size(); ++i)
      table.rows.push_back({"v_check_" + std::to_string(i + 1), format_double(report.v_check(i))});
    for (Eigen::Index i = 0; i < report.v_hat.size(); ++i)
      table.rows.push_back({"v_hat_" + std::to_string(i + 1), format_double(report.v_hat(i))});
    emit_csv(table, path.string(), ctx.provenance);
    announce(path);

    const fs::path rho_path = ctx.dir / "spread_by_rho.csv";
    CsvTable rho_table;
    rho_table.columns = {"rho", "spread"};
    for (std::size_t i = 0; i < report.rho_grid.size(); ++i)
      rho_table.rows.push_back(
          {format_double(report.rho_grid[i]), format_double(report.spread_by_rho[i])});
    emit_csv(rho_table, rho_path.string(), ctx.provenance);
    announce(rho_path);

    if (window_only) {
      const fs::path env_path = ctx.dir / "envelope.csv";
      CsvTable env;
      env.columns = {"r", "liminf", "limsup"};
      for (std::size_t i = 0; i < report.envelope_r_grid.size(); ++i)
        env.rows.push_back({format_double(report.envelope_r_grid[i]),
                            format_double(report.liminf_profile[i]),
                            format_double(report.limsup_profile[i])});
      emit_csv(env, env_path.string(), ctx.provenance);
      announce(env_path);
    }
  }
}

// ── verify ────────────────────────────────────────────────────────────────────

struct CheckOutcome {
  std::string name;
  std::string status;  // pass | fail | skip
  std::string detail;
};

void run_check(std::vector<CheckOutcome>* out, const std::string& name,
               const std::function<std::pair<bool, std::string>()>& body) {
  try {
    auto [ok, detail] = body();
    out->push_back({name, ok ? "pass" : "fail", detail});
  } catch (const UnsupportedCase& e) {
    out->push_back({name, "skip", e.what()});
  } catch (const Error& e) {
    out->push_back({name, "fail", e.what()});
  }
}

bool laws_identical(const metrics::LawDescriptor& a, const metrics::LawDescriptor& b) {
  if (a.index() != b.index()) return false;
  if (const auto* ga = std::get_if<metrics::GaussianLaw>(&a)) {
    const auto& gb = std::get<metrics::GaussianLaw>(b);
    return ga->mean == gb.mean && ga->covariance == gb.covariance;
  }
  if (const auto* sa = std::get_if<metrics::StableLawDescriptor>(&a)) {
    const auto& sb = std::get<metrics::StableLawDescriptor>(b);
    return sa->alpha == sb.alpha && sa->scale_c == sb.scale_c && sa->location == sb.location;
  }
  const auto& ea = std::get<metrics::EmpiricalLaw>(a);
  const auto& eb = std::get<metrics::EmpiricalLaw>(b);
  return ea.samples == eb.samples;
}

std::vector<CheckOutcome> verify_checks(const scenarios::Scenario& s, const RunConfig& cfg) {
  std::vector<CheckOutcome> out;
  const bool monte_carlo = s.evaluation.kind == scenarios::Evaluation::Kind::monte_carlo;
  const auto dec = spectral::dominant_decomposition(s.drift, s.x);

  run_check(&out, "schedule", [&] {
    const auto sched = spectral::cutoff_time_scale(dec.rate, dec.block_size, s.scale, 1e-3, 1.0);
    const bool ok = std::isfinite(sched.t_star) && sched.t_star > 0 &&
                    std::isfinite(sched.t_cut) && s.scale(sched.t_star) > 0;
    return std::make_pair(ok, "t_star=" + format_double(sched.t_star) +
                                  " t_cut=" + format_double(sched.t_cut));
  });

  run_check(&out, "profile_monotone", [&] {
    const auto curve = engine::profile_curve(s, default_r_grid(), 1.0);
    const bool tv = s.metric.kind == scenarios::MetricChoice::Kind::total_variation;
    bool ok = true;
    for (std::size_t i = 0; i < curve.theoretical.size(); ++i) {
      ok = ok && std::isfinite(curve.theoretical[i]);
      if (tv) ok = ok && curve.theoretical[i] >= 0.0 && curve.theoretical[i] <= 1.0 + 1e-9;
      if (i > 0) ok = ok && curve.theoretical[i] <= curve.theoretical[i - 1] + 1e-12;
    }
    return std::make_pair(ok, "profile decreasing over " +
                                  std::to_string(curve.theoretical.size()) + " window points");
  });

  run_check(&out, "determinism", [&] {
    const auto sched = spectral::cutoff_time_scale(dec.rate, dec.block_size, s.scale, 1e-3, 1.0);
    const double t = std::max(sched.t_cut, 1.0);
    if (monte_carlo) {
      scenarios::Scenario probe = s;
      probe.evaluation.sample_count = std::min<std::size_t>(probe.evaluation.sample_count, 4096);
      const auto first = scenarios::sample_normalized(probe, t, probe.evaluation.sample_count,
                                                      probe.evaluation.seed);
      const auto second = scenarios::sample_normalized(probe, t, probe.evaluation.sample_count,
                                                       probe.evaluation.seed);
      return std::make_pair(first == second,
                            "two draws of " + std::to_string(probe.evaluation.sample_count) +
                                " samples at t=" + format_double(t));
    }
    const auto first = scenarios::exact_marginal_law(s, t);
    const auto second = scenarios::exact_marginal_law(s, t);
    return std::make_pair(laws_identical(first, second),
                          "two exact marginals at t=" + format_double(t));
  });

  run_check(&out, "distance_gaps", [&] {
    const std::vector<double> epsilons =
        monte_carlo ? std::vector<double>{5e-2, 1e-2} : cfg.epsilons;
    const std::vector<double> r_grid =
        monte_carlo ? std::vector<double>{-1.0, 0.0, 1.0}
                    : std::vector<double>{-2.0, -1.0, 0.0, 1.0, 2.0};
    const auto report = engine::convergence_report(s, epsilons, r_grid, 1.0);
    std::string detail = "sup gaps";
    for (double g : report.sup_gaps) detail += " " + fmt3g(g);
    return std::make_pair(report.gaps_decreasing, detail);
  });

  run_check(&out, "classification", [&] {
    const auto report = engine::cutoff_classification(s, {0.5, 1.0, 2.0}, 1e-6);
    const char* verdict =
        report.classification == engine::CutoffClass::window_only ? "window_only" : "profile";
    return std::make_pair(true, std::string(verdict) + " spread=" + fmt3g(report.spread));
  });

  run_check(&out, "scale_slow_variation", [&] {
    const auto report = engine::karamata_check(s.scale, {-1.0, 1.0}, 1e6);
    return std::make_pair(report.pass,
                          "worst ratio deviation " + fmt3g(report.worst_deviation));
  });

  return out;
}

bool cmd_verify(const Context& ctx) {
  const auto checks = verify_checks(ctx.scenario, ctx.config);
  bool passed = true;
  for (const auto& c : checks) passed = passed && c.status != "fail";
  const fs::path path = artifact_path(ctx, "verify");
  if (ctx.config.format == Format::json) {
    ojson j;
    j["family"] = scenarios::family_name(ctx.scenario.family);
    j["passed"] = passed;
    ojson list = ojson::array();
    for (const auto& c : checks)
      list.push_back(ojson{{"name", c.name}, {"status", c.status}, {"detail", c.detail}});
    j["checks"] = std::move(list);
    write_json(j, path, ctx.provenance);
  } else {
    CsvTable table;
    table.columns = {"check", "status", "detail"};
    for (const auto& c : checks) table.rows.push_back({c.name, c.status, c.detail});
    emit_csv(table, path.string(), ctx.provenance);
  }
  announce(path);
  for (const auto& c : checks)
    std::printf("%-24s %s\n", c.name.c_str(), c.status.c_str());
  return passed;
}

}  // namespace

// ── names ─────────────────────────────────────────────────────────────────────

const char* command_name(Command command) {
  switch (command) {
    case Command::analyze: return "analyze";
    case Command::profile: return "profile";
    case Command::curve: return "curve";
    case Command::classify: return "classify";
    default: return "verify";
  }
}

std::optional<Command> command_from_name(std::string_view name) {
  for (Command c : {Command::analyze, Command::profile, Command::curve, Command::classify,
                    Command::verify})
    if (name == command_name(c)) return c;
  return std::nullopt;
}

const char* format_name(Format format) {
  switch (format) {
    case Format::csv: return "csv";
    case Format::json: return "json";
    default: return "svg";
  }
}

std::optional<Format> format_from_name(std::string_view name) {
  for (Format f : {Format::csv, Format::json, Format::svg})
    if (name == format_name(f)) return f;
  return std::nullopt;
}

// ── parsing ───────────────────────────────────────────────────────────────────

std::vector<double> parse_grid(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3)
    throw InadmissibleRange("parse_grid: expected a:b:step, got '" + text + "'");
  const double a = parse_number(parts[0], "parse_grid");
  const double b = parse_number(parts[1], "parse_grid");
  const double step = parse_number(parts[2], "parse_grid");
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(step))
    throw InadmissibleRange("parse_grid: endpoints and step must be finite");
  if (!(step > 0)) throw InadmissibleRange("parse_grid: step must be > 0");
  if (a > b) throw InadmissibleRange("parse_grid: need a ≤ b in a:b:step");
  const double count_real = (b - a) / step + 1e-9;
  if (count_real > 100000.0) throw InadmissibleRange("parse_grid: more than 100001 points");
  const auto count = static_cast<std::size_t>(count_real) + 1;
  std::vector<double> grid;
  grid.reserve(count);
  for (std::size_t i = 0; i < count; ++i) grid.push_back(a + static_cast<double>(i) * step);
  return grid;
}

std::vector<double> parse_epsilon_list(const std::string& text) {
  std::vector<double> values;
  for (const auto& piece : split(text, ','))
    values.push_back(parse_number(piece, "parse_epsilon_list"));
  normalize_epsilons(&values);
  return values;
}

scenarios::Scenario load_scenario(const std::string& path) {
  return scenario_from_text(read_file(path));
}

// ── artifacts ─────────────────────────────────────────────────────────────────

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::uint64_t config_hash(const RunConfig& config, const std::string& scenario_text) {
  std::uint64_t hash = 14695981039346656037ULL;
  hash = fnv1a(hash, scenario_text.data(), scenario_text.size());
  std::string tail = std::string("|") + command_name(config.command) + "|" +
                     (config.seed ? std::to_string(*config.seed) : "default") + "|";
  for (double e : config.epsilons) tail += format_double(e) + ",";
  tail += "|";
  for (double r : config.r_grid) tail += format_double(r) + ",";
  tail += "|" + format_double(config.window) + "|" + format_name(config.format);
  return fnv1a(hash, tail.data(), tail.size());
}

std::string provenance_line(std::uint64_t hash, std::uint64_t seed) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "cutofflab %s config=%016" PRIx64 " seed=%" PRIu64,
                version_string, hash, seed);
  return buf;
}

void emit_csv(const CsvTable& table, const std::string& path, const std::string& provenance) {
  if (table.columns.empty() || table.rows.empty())
    throw IoError("emit_csv: refusing to write an empty table to " + path);
  for (const auto& row : table.rows)
    if (row.size() != table.columns.size())
      throw IoError("emit_csv: ragged row in table for " + path);
  const auto cell = [](const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string quoted = "\"";
    for (char c : text) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    return quoted + "\"";
  };
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("emit_csv: cannot open " + path);
  out << "# " << provenance << "\n";
  for (std::size_t j = 0; j < table.columns.size(); ++j)
    out << (j ? "," : "") << cell(table.columns[j]);
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << cell(row[j]);
    out << "\n";
  }
  if (!out.flush()) throw IoError("emit_csv: write failed for " + path);
}

void emit_plot(const std::vector<engine::ProfileCurve>& curves, const std::string& path,
               const std::string& provenance, const std::string& title) {
  std::vector<const engine::ProfileCurve*> drawable;
  for (const auto& c : curves)
    if (!c.r_grid.empty()) drawable.push_back(&c);
  if (drawable.empty()) throw IoError("emit_plot: no curve data for " + path);

  double xmin = drawable[0]->r_grid.front(), xmax = xmin, ymax = 0.0;
  for (const auto* c : drawable) {
    for (double r : c->r_grid) {
      xmin = std::min(xmin, r);
      xmax = std::max(xmax, r);
    }
    for (double v : c->theoretical) ymax = std::max(ymax, v);
    for (std::size_t i = 0; i < c->measured.size(); ++i)
      ymax = std::max(ymax, c->measured[i] + 3.0 * c->stderr_bars[i]);
  }
  if (xmax == xmin) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  ymax = std::max(ymax, 1e-12) * 1.08;

  const auto sx = [&](double r) { return 70.0 + (r - xmin) * 770.0 / (xmax - xmin); };
  const auto sy = [&](double d) {
    return 480.0 - std::clamp(d, 0.0, ymax) * 440.0 / ymax;
  };
  static const char* palette[6] = {"#1f6feb", "#d1242f", "#1a7f37",
                                   "#9a6700", "#8250df", "#bf3989"};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 860 540\""
         " font-family=\"Helvetica, Arial, sans-serif\" font-size=\"13\">\n";
  svg << "<!-- " << provenance << " -->\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"860\" height=\"540\" fill=\"#ffffff\"/>\n";
  svg << "<text x=\"455\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title
      << "</text>\n";
  svg << "<rect x=\"70\" y=\"40\" width=\"770\" height=\"440\" fill=\"none\""
         " stroke=\"#444444\"/>\n";
  for (int k = 0; k <= 6; ++k) {
    const double r = xmin + k * (xmax - xmin) / 6.0;
    const std::string x = fmt2(sx(r));
    svg << "<line x1=\"" << x << "\" y1=\"480\" x2=\"" << x
        << "\" y2=\"486\" stroke=\"#444444\"/>\n";
    svg << "<text x=\"" << x << "\" y=\"502\" text-anchor=\"middle\">" << fmt3g(r)
        << "</text>\n";
  }
  for (int k = 0; k <= 5; ++k) {
    const double d = k * ymax / 5.0;
    const std::string y = fmt2(sy(d));
    svg << "<line x1=\"64\" y1=\"" << y << "\" x2=\"70\" y2=\"" << y
        << "\" stroke=\"#444444\"/>\n";
    svg << "<text x=\"58\" y=\"" << y << "\" dy=\"4\" text-anchor=\"end\">" << fmt3g(d)
        << "</text>\n";
  }
  svg << "<text x=\"455\" y=\"528\" text-anchor=\"middle\">r</text>\n";
  svg << "<text transform=\"translate(16 260) rotate(-90)\" text-anchor=\"middle\">"
         "distance</text>\n";

  // One theoretical line: the profile limit is ε-free, so the longest grid
  // (fewest negative-time drops) represents every curve.
  const engine::ProfileCurve* theory = drawable[0];
  for (const auto* c : drawable)
    if (c->r_grid.size() > theory->r_grid.size()) theory = c;
  svg << "<polyline class=\"theory\" fill=\"none\" stroke=\"#111827\""
         " stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < theory->r_grid.size(); ++i)
    svg << (i ? " " : "") << fmt2(sx(theory->r_grid[i])) << ","
        << fmt2(sy(theory->theoretical[i]));
  svg << "\"/>\n";

  std::size_t series = 0;
  for (const auto* c : drawable) {
    if (c->measured.empty()) continue;
    const char* color = palette[series % 6];
    for (std::size_t i = 0; i < c->measured.size(); ++i) {
      if (c->stderr_bars[i] > 0.0) {
        const std::string x = fmt2(sx(c->r_grid[i]));
        const std::string lo = fmt2(sy(c->measured[i] - 3.0 * c->stderr_bars[i]));
        const std::string hi = fmt2(sy(c->measured[i] + 3.0 * c->stderr_bars[i]));
        svg << "<line class=\"err\" x1=\"" << x << "\" y1=\"" << lo << "\" x2=\"" << x
            << "\" y2=\"" << hi << "\" stroke=\"" << color << "\"/>\n";
      }
      svg << "<circle class=\"pt\" cx=\"" << fmt2(sx(c->r_grid[i])) << "\" cy=\""
          << fmt2(sy(c->measured[i])) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    svg << "<rect x=\"700\" y=\"" << fmt2(52.0 + 18.0 * series)
        << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
    svg << "<text x=\"716\" y=\"" << fmt2(61.0 + 18.0 * series) << "\">"
        << (c->epsilon > 0.0 ? "ε = " + fmt3g(c->epsilon) : std::string("ε → 0"))
        << "</text>\n";
    ++series;
  }
  svg << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("emit_plot: cannot open " + path);
  out << svg.str();
  if (!out.flush()) throw IoError("emit_plot: write failed for " + path);
}

// ── orchestration ─────────────────────────────────────────────────────────────

int run(const RunConfig& config) {
  Context ctx;
  try {
    ctx.config = config;
    if (ctx.config.scenario_path.empty())
      throw MissingParameter("run: a scenario config path is required");
    if (ctx.config.r_grid.empty()) ctx.config.r_grid = default_r_grid();
    for (double r : ctx.config.r_grid)
      if (!std::isfinite(r)) throw InadmissibleRange("run: r grid must be finite");
    if (ctx.config.epsilons.empty()) ctx.config.epsilons = {1e-2, 1e-3, 1e-4};
    normalize_epsilons(&ctx.config.epsilons);
    if (!(ctx.config.window > 0))
      throw InadmissibleRange("run: window width must be > 0");
    if (ctx.config.format == Format::svg && ctx.config.command != Command::profile &&
        ctx.config.command != Command::curve)
      throw InadmissibleRange("run: svg output applies to profile and curve only");

    const std::string text = read_file(ctx.config.scenario_path);
    ctx.scenario = scenario_from_text(text);
    if (ctx.config.seed) ctx.scenario.evaluation.seed = *ctx.config.seed;
    ctx.provenance =
        provenance_line(config_hash(ctx.config, text), ctx.scenario.evaluation.seed);
    ctx.dir = ctx.config.out_dir.empty() ? fs::path(".") : fs::path(ctx.config.out_dir);
    fs::create_directories(ctx.dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cutofflab: config error: %s\n", e.what());
    return 1;
  }

  try {
    switch (ctx.config.command) {
      case Command::analyze: cmd_analyze(ctx); break;
      case Command::profile: cmd_profile(ctx); break;
      case Command::curve: cmd_curve(ctx); break;
      case Command::classify: cmd_classify(ctx); break;
      case Command::verify:
        if (!cmd_verify(ctx)) {
          std::fprintf(stderr, "cutofflab: verify failed for %s\n",
                       scenarios::family_name(ctx.scenario.family));
          return 2;
        }
        break;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cutofflab: numerical failure: %s\n", e.what());
    return 2;
  }
  return 0;
}

}  // namespace cutofflab::cli
