#pragma once

/*
 * Command-line front end: scenario configs in, artifacts out.
 *
 * A scenario arrives as a JSON file naming a family and its parameters; a
 * subcommand says what to compute:
 *
 *     analyze    spectral report: λ, ℓ, m*, angular velocities θ, ω(x) kind
 *     profile    theoretical limiting profile over the window grid
 *     curve      measured vs theoretical distance curves along t^cut_ε + r·w
 *     classify   profile vs window-only verdict with envelope profiles
 *     verify     self-check suite for the named scenario
 *
 * Every artifact embeds a provenance line: tool version, FNV-1a hash of the
 * config (scenario file bytes plus the run options), and the effective RNG
 * seed.  Identical config and seed reproduce every CSV byte for byte.
 *
 * Exit codes: 0 success, 1 configuration error (unreadable file, malformed
 * JSON, inadmissible parameters, bad flags), 2 numerical failure while
 * computing or writing artifacts (and a failing verify suite).
 *
 * Scenario file schema (unknown keys are rejected):
 *
 *     {
 *       "family":        one of the eight catalog names,
 *       "lambda":        1.0           or  "drift": [[...], ...],
 *       "x":             1.0           or  [x₁, ...],
 *       "epsilon":       1e-4,
 *       "n_components":  100,
 *       "hurst":         0.5,
 *       "alpha":         1.5,  "c_alpha": 1.0,  "y": 0.0,
 *       "noise_covariance": [[...], ...],
 *       "tau":    {"limit": 1.0, "initial": 2.0, "rate": 1.0},
 *       "driver": {"kind": "ou", "theta": [[...]], "covariance": [[...]]}
 *               | {"kind": "fou", "lambda": 1.0, "hurst": 0.7}
 *               | {"kind": "exponential", "variance": 1.0, "rate": 1.0},
 *       "driver_horizon": 60.0,
 *       "metric":     {"kind": "total_variation"}
 *                   | {"kind": "wasserstein", "p": 1.0},
 *       "evaluation": {"kind": "exact"}
 *                   | {"kind": "monte_carlo", "sample_count": 100000,
 *                      "seed": 12648430}
 *     }
 *
 * τ interpolates exponentially: τ(s) = limit + (initial − limit)·e^{−rate·s}.
 */

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cutofflab/engine.hpp"
#include "cutofflab/scenarios.hpp"

namespace cutofflab::cli {

// ── types ─────────────────────────────────────────────────────────────────────

enum class Command { analyze, profile, curve, classify, verify };
enum class Format { csv, json, svg };

const char* command_name(Command command);
std::optional<Command> command_from_name(std::string_view name);
const char* format_name(Format format);
std::optional<Format> format_from_name(std::string_view name);

// One resolved invocation.  Defaults are applied by run: r grid −3:3:0.5,
// ε list {1e-2, 1e-3, 1e-4}, window w = 1.
struct RunConfig {
  Command command = Command::analyze;
  std::string scenario_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;  // overrides the scenario's evaluation seed
  std::vector<double> epsilons;
  std::vector<double> r_grid;
  double window = 1.0;
  Format format = Format::csv;
};

// In-memory numeric-or-text table; emit_csv renders cells verbatim.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

// ── parsing ───────────────────────────────────────────────────────────────────

// "a:b:step" with finite a ≤ b and step > 0; inclusive of b up to rounding
// slack.  Throws InadmissibleRange on malformed input.
std::vector<double> parse_grid(const std::string& text);

// Comma-separated ε values in (0,1); deduplicated and sorted decreasing.
// Throws InvalidEpsilon on out-of-range values, InadmissibleRange otherwise.
std::vector<double> parse_epsilon_list(const std::string& text);

// Reads and validates a scenario config file.  File problems throw IoError;
// JSON syntax errors surface with line and column; parameter problems
// propagate from the scenario builder.
scenarios::Scenario load_scenario(const std::string& path);

// ── artifacts ─────────────────────────────────────────────────────────────────

// 17 significant digits, '.' decimal separator, round-trips every double.
std::string format_double(double value);

// FNV-1a over the scenario file bytes and the run options.
std::uint64_t config_hash(const RunConfig& config, const std::string& scenario_text);

// Provenance line content: "cutofflab <version> config=<hex16> seed=<dec>".
std::string provenance_line(std::uint64_t hash, std::uint64_t seed);

// Writes "# provenance", the header row, then the rows.  Refuses an empty or
// ragged table (IoError, nothing written); IoError on an unwritable path.
void emit_csv(const CsvTable& table, const std::string& path,
              const std::string& provenance);

// Static SVG plot of distance curves over r: one measured point series with
// 3σ error bars per curve, a single theoretical line, axes labeled r and
// distance.  Curves with empty grids are skipped; all empty throws IoError.
void emit_plot(const std::vector<engine::ProfileCurve>& curves,
               const std::string& path, const std::string& provenance,
               const std::string& title);

// ── orchestration ─────────────────────────────────────────────────────────────

// Executes one invocation end to end and reports through the exit code; all
// diagnostics go to stderr, artifact paths to stdout.
int run(const RunConfig& config);

}  // namespace cutofflab::cli
