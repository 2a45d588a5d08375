// probevo: evolve the most complex binary image a network configuration can
// fully recognize, and compare configurations by that maximum.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "probevo/csv.hpp"
#include "probevo/harness.hpp"

namespace {

using probevo::ExperimentSpec;

// Flag values kept as text and applied through the same path as the config
// file, after it, so flags win.
struct SettingFlags {
  std::string config_path;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  std::map<std::string, std::string> values;

  void add(CLI::App* app, const std::string& key, const std::string& help) {
    options.emplace_back(key, app->add_option("--" + key, values[key], help));
  }

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key = value settings file")->check(CLI::ExistingFile);
    add(app, "net", "network configuration(s), e.g. 2-4-3-1 or 2-2-1,2-4-1");
    add(app, "seed", "base RNG seed (u64)");
    add(app, "out", "output directory");
    add(app, "dims", "image size HxW");
    add(app, "pop", "population capacity");
    add(app, "repeats", "runs per configuration");
    add(app, "workers", "concurrent runs");
    add(app, "mutation", "per-pixel mutation rate");
    add(app, "stagnation", "generations without admission before stopping");
    add(app, "stall-epochs", "training stall window N_c");
    add(app, "epsilon", "relative decrease required within the stall window");
    add(app, "max-epochs", "absolute training epoch cap");
    add(app, "shapes", "window shapes: all | squares");
    add(app, "convergence", "stall measure: recognized | misrecognized");
    add(app, "parallel-children", "train both children concurrently (0/1)");
  }

  void apply(ExperimentSpec& spec) const {
    if (!config_path.empty()) probevo::apply_config_file(spec, config_path);
    for (const auto& [key, opt] : options)
      if (opt->count() > 0) probevo::apply_setting(spec, key, values.at(key));
  }
};

void print_table(const probevo::SummaryTable& table) {
  std::printf("%-12s %7s %16s %12s %5s\n", "config", "weights", "max complexity", "generations",
              "rank");
  for (const auto& row : table.rows) {
    const std::string max =
        row.max_complexity ? probevo::format_real(row.max_complexity->value()) : "-";
    std::printf("%-12s %7zu %16s %12zu %5zu\n", row.label.c_str(), row.weights, max.c_str(),
                row.total_generations, row.rank);
    for (const auto& run : row.runs)
      if (!run.ok) std::printf("  rep%zu failed: %s\n", run.repeat, run.error.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Problem evolution for feed-forward image recognizers"};
  app.require_subcommand(1);

  SettingFlags run_flags, sweep_flags, table_flags;
  auto* run = app.add_subcommand("run", "single evolution run into --out");
  run_flags.attach(run);
  auto* sweep = app.add_subcommand("sweep", "2-n-1 sweep, repeats per configuration");
  sweep_flags.attach(sweep);
  auto* table = app.add_subcommand("table", "equal-weight-budget comparison");
  table_flags.attach(table);

  auto* plot = app.add_subcommand("plotdata", "merge run logs into long-format CSV");
  std::vector<std::string> plot_inputs;
  std::string plot_out;
  plot->add_option("dirs", plot_inputs, "run directories or sweep roots")->required();
  plot->add_option("--out", plot_out, "output CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ExperimentSpec spec;
      spec.kind = probevo::ExperimentKind::kSingleRun;
      spec.configs = {probevo::LayerSizes({2, 4, 1})};
      run_flags.apply(spec);
      spec.validate();
      probevo::EvolutionConfig config = spec.evolution;
      config.layers = spec.configs.front();
      config.seed = spec.base_seed;
      const auto result = probevo::run_single(config, spec.out_dir);
      if (!result.ok) {
        std::cerr << "run failed: " << result.error << '\n';
        return result.infeasible ? 3 : 1;
      }
      std::printf("%s: champion complexity %s after %zu generations -> %s\n", result.label.c_str(),
                  probevo::format_real(result.champion.value()).c_str(), result.generations,
                  result.dir.c_str());
    } else if (*sweep || *table) {
      ExperimentSpec spec;
      const bool is_table = static_cast<bool>(*table);
      spec.kind = is_table ? probevo::ExperimentKind::kEqualWeights : probevo::ExperimentKind::kSweep;
      spec.configs = is_table ? probevo::default_table_configs() : probevo::default_sweep_configs();
      (is_table ? table_flags : sweep_flags).apply(spec);
      const auto result = is_table ? probevo::run_equal_weights(spec) : probevo::run_sweep(spec);
      print_table(result);
    } else if (*plot) {
      std::vector<std::string> dirs;
      for (const auto& input : plot_inputs)
        for (auto& d : probevo::find_run_dirs(input)) dirs.push_back(std::move(d));
      if (dirs.empty()) {
        std::cerr << "no run directories found\n";
        return 1;
      }
      if (plot_out.empty()) {
        probevo::emit_plot_data(dirs, std::cout, &std::cerr);
      } else {
        std::ofstream out(plot_out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + plot_out);
        probevo::emit_plot_data(dirs, out, &std::cerr);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
