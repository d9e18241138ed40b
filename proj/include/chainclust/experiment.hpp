#pragma once

#include "chainclust/bounds.hpp"
#include "chainclust/matrix_core.hpp"
#include "chainclust/recovery.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace chainclust::experiment {

enum class SweepMode { oracle_epsilon, known_sizes, empirical, approx_one };
enum class OutputFormat { csv, jsonl };

std::string to_string(SweepMode mode);
SweepMode parse_mode(const std::string& name);
NormChoice parse_norm(const std::string& name);
OutputFormat parse_format(const std::string& name);
Side parse_side(const std::string& name);

struct GridSpec {
  double min = 0.0;
  double max = 0.0;
  std::size_t points = 1;
};

/// Flat key = value configuration shared by generate, sweep and verify-bounds.
///
/// Grammar: one `key = value` per line; `#` starts a comment; blank lines
/// are ignored; lists are comma separated. Keys:
///   sizes, seed, min_entry, x (explicit list), x_grid (min:max:points),
///   modes, norm, side, format, out, timestamp, instances, max_n,
///   k_choices, x_points, lemma_pairs, gap_tol
struct ExperimentConfig {
  std::vector<std::size_t> sizes;
  std::uint64_t seed = 1;
  double min_entry = 0.0;
  std::vector<double> x_values;
  std::optional<GridSpec> x_grid;
  std::vector<SweepMode> modes;
  NormChoice norm = NormChoice::frobenius;
  Side side = Side::right;
  OutputFormat format = OutputFormat::csv;
  std::string out;
  bool timestamp = true;

  std::size_t instances = 100;
  std::size_t max_n = 40;
  std::vector<std::size_t> k_choices{2, 3, 4};
  std::size_t x_points = 20;
  std::size_t lemma_pairs = 100;
  double gap_tol = kDefaultGapTol;
};

/// Applies one key/value; throws ConfigError on unknown keys or bad values.
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

/// Explicit x list followed by grid points, sorted and deduplicated; every
/// value must lie in [0, x_max].
std::vector<double> resolve_x_values(const ExperimentConfig& config, double x_max);

/// A seeded instance plus the ground-truth constants used by the oracles.
struct Instance {
  PerturbationInstance perturbation;
  InstanceConstants constants;
  std::optional<double> x_star;  ///< exact_recovery_xmax, when k >= 2
  std::uint64_t seed = 0;
};

Instance make_instance(const std::vector<std::size_t>& sizes, std::uint64_t seed,
                       double min_entry = 0.0);

struct SweepRecord {
  double x = 0.0;
  std::optional<double> epsilon;  ///< empty when out of regime
  SweepMode mode = SweepMode::oracle_epsilon;
  std::optional<bool> exact_success;
  std::optional<std::size_t> symdiff;
  std::optional<std::size_t> tried_gaps;
  double runtime_ms = 0.0;
  std::string error;
};

/// One record per (x, mode), sorted by x then mode name. Per-point failures
/// land in `error`. Runtimes are measured only when config.timestamp is set.
std::vector<SweepRecord> run_sweep(const ExperimentConfig& config);

inline constexpr const char* kSweepSchema = "chainclust-sweep/1";

void write_sweep(std::ostream& out, const std::vector<SweepRecord>& records, OutputFormat format,
                 bool timestamp);

struct CampaignResult {
  std::vector<BoundCertificate> certificates;
  std::size_t satisfied = 0;
  std::size_t violations = 0;     ///< in-regime failures
  std::size_t out_of_regime = 0;
};

/// Seeded bound-validation campaign: Weyl envelope and Laplacian projector
/// bound over random perturbation instances, symmetric projector bound over
/// random symmetric pairs.
CampaignResult run_bounds_campaign(const ExperimentConfig& config);

void write_campaign(std::ostream& out, const CampaignResult& result, bool timestamp);

/// Files written by write_instance_files.
struct GeneratedFiles {
  std::filesystem::path t0;
  std::filesystem::path e;
  std::filesystem::path partition;
  std::optional<std::filesystem::path> tx;
};

/// Writes T0.<ext>, E.<ext>, partition.json and optionally Tx.<ext> into dir.
GeneratedFiles write_instance_files(const Instance& instance, const std::filesystem::path& dir,
                                    const std::string& extension,
                                    std::optional<double> x = std::nullopt);

/// Current UTC time as ISO-8601.
std::string utc_timestamp();

}  // namespace chainclust::experiment
