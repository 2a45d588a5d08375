#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "probevo/complexity.hpp"
#include "probevo/evolution.hpp"
#include "probevo/network.hpp"

namespace probevo {

enum class ExperimentKind { kSingleRun, kSweep, kEqualWeights };

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::kSweep;
  std::vector<LayerSizes> configs;
  std::size_t repeats = 3;
  std::uint64_t base_seed = 1;
  std::string out_dir = "out";
  std::size_t workers = 1;
  EvolutionConfig evolution;  // per-run template; layers and seed are filled in per run

  void validate() const;
};

/// 2-n-1 for n in {2, 4, 8, 16}.
std::vector<LayerSizes> default_sweep_configs();
/// 2-2-6-1, 2-3-3-2-1, 2-8-1, 2-5-2-1, 2-4-3-1.
std::vector<LayerSizes> default_table_configs();

/// Applies one `key = value` setting. Keys match the long CLI flags
/// ("net", "dims", "pop", "stall-epochs", ...); '_' and '-' are interchangeable.
void apply_setting(ExperimentSpec& spec, const std::string& key, const std::string& value);

/// Reads a line-oriented `key = value` file; '#' starts a comment.
void apply_config_file(ExperimentSpec& spec, std::istream& in);
void apply_config_file(ExperimentSpec& spec, const std::string& path);

/// Stable per-run seed from the base seed, configuration label and repeat.
std::uint64_t derive_seed(std::uint64_t base_seed, const std::string& label, std::size_t repeat);

struct RunResult {
  std::string label;
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  std::string dir;
  bool ok = false;
  bool infeasible = false;
  std::string error;
  Complexity champion;
  std::size_t generations = 0;
  double wall_seconds = 0.0;
};

/// Runs one evolution and writes runlog.csv, champion.pbm, champion_weights.csv
/// and manifest.txt into `dir`. Failures are reported in the result.
RunResult run_single(const EvolutionConfig& config, const std::string& dir,
                     std::size_t repeat = 0);

struct SummaryRow {
  std::string label;
  std::size_t weights = 0;
  std::vector<RunResult> runs;
  std::optional<Complexity> max_complexity;  // over successful repeats
  std::size_t total_generations = 0;
  double wall_seconds = 0.0;
  std::size_t rank = 0;  // 1 = highest maximum; 0 if no repeat succeeded
};

struct SummaryTable {
  ExperimentKind kind = ExperimentKind::kSweep;
  std::size_t repeats = 0;
  std::vector<SummaryRow> rows;
};

/// Every configuration x repeat, in parallel up to spec.workers. Writes
/// summary.csv, curves.csv and timing.csv under spec.out_dir and one run
/// directory per (configuration, repeat) at <out>/<label>/rep<k>.
SummaryTable run_sweep(const ExperimentSpec& spec);
/// run_sweep with the equal-weight-budget configurations as the default list.
SummaryTable run_equal_weights(const ExperimentSpec& spec);

/// Deterministic outputs only: no wall-clock values.
void write_summary_csv(std::ostream& out, const SummaryTable& table);
void write_timing_csv(std::ostream& out, const SummaryTable& table);

std::map<std::string, std::string> read_manifest(const std::string& path);

/// Run directories (those holding runlog.csv) under `root`, sorted by path.
std::vector<std::string> find_run_dirs(const std::string& root);

/// Long-format CSV: configuration,repeat,generation,best_complexity. Runs
/// without a readable runlog are skipped with a message on `warnings`.
/// Returns the number of data rows written.
std::size_t emit_plot_data(const std::vector<std::string>& run_dirs, std::ostream& out,
                           std::ostream* warnings = nullptr);

}  // namespace probevo
