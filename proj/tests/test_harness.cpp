#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "probevo/csv.hpp"
#include "probevo/harness.hpp"

using namespace probevo;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("probevo_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentSpec tiny_spec(const std::string& out) {
  ExperimentSpec spec;
  spec.configs = {LayerSizes::parse("2-2-1"), LayerSizes::parse("2-4-1")};
  spec.repeats = 2;
  spec.base_seed = 5;
  spec.out_dir = out;
  spec.evolution.dims = {6, 6};
  spec.evolution.population = 6;
  spec.evolution.stagnation_limit = 5;
  spec.evolution.training.stall_epochs = 200;
  return spec;
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("settings and config files") {
  ExperimentSpec spec;
  apply_setting(spec, "net", "2-4-3-1, 2-8-1");
  REQUIRE(spec.configs.size() == 2);
  CHECK(spec.configs[0].label() == "2-4-3-1");
  apply_setting(spec, "dims", "10x12");
  CHECK(spec.evolution.dims.height == 10);
  CHECK(spec.evolution.dims.width == 12);
  apply_setting(spec, "stall_epochs", "300");
  CHECK(spec.evolution.training.stall_epochs == 300);
  apply_setting(spec, "convergence", "misrecognized");
  CHECK(spec.evolution.training.measure == ConvergenceMeasure::kMseTimesMisrecognized);
  apply_setting(spec, "shapes", "squares");
  CHECK(spec.evolution.shapes == WindowShapes::kSquaresOnly);
  CHECK_THROWS_AS(apply_setting(spec, "colour", "1"), std::invalid_argument);
  CHECK_THROWS_AS(apply_setting(spec, "pop", "many"), std::invalid_argument);
  CHECK_THROWS_AS(apply_setting(spec, "net", "3-4-1"), std::invalid_argument);

  std::istringstream file(
      "# desk scale\n"
      "pop = 30\n"
      "seed = 42   # trailing comment\n"
      "\n"
      "repeats=4\n"
      "mutation = 0.01\n");
  apply_config_file(spec, file);
  CHECK(spec.evolution.population == 30);
  CHECK(spec.base_seed == 42);
  CHECK(spec.repeats == 4);
  CHECK(spec.evolution.mutation_rate == 0.01);

  std::istringstream bad("pop 30\n");
  CHECK_THROWS_AS(apply_config_file(spec, bad), std::invalid_argument);
}

TEST_CASE("validation happens before any run") {
  TempDir tmp("validation");
  ExperimentSpec spec = tiny_spec((tmp.path / "out").string());
  spec.repeats = 0;
  CHECK_THROWS_AS(run_sweep(spec), std::invalid_argument);
  CHECK_FALSE(fs::exists(tmp.path / "out" / "2-2-1"));
  spec = tiny_spec(tmp.str());
  spec.configs.clear();
  CHECK_THROWS_AS(run_sweep(spec), std::invalid_argument);
  spec = tiny_spec(tmp.str());
  spec.workers = 0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("default configuration lists") {
  std::vector<std::string> sweep;
  for (const auto& c : default_sweep_configs()) sweep.push_back(c.label());
  CHECK(sweep == std::vector<std::string>{"2-2-1", "2-4-1", "2-8-1", "2-16-1"});
  std::vector<std::size_t> counts;
  for (const auto& c : default_table_configs()) counts.push_back(weight_count(c));
  CHECK(counts == std::vector<std::size_t>{31, 32, 33, 30, 31});
}

TEST_CASE("derived seeds are distinct and stable") {
  std::set<std::uint64_t> seen;
  std::size_t n = 0;
  for (std::uint64_t base : {0ull, 1ull, 2ull, 12345ull}) {
    for (const auto& cfg : default_sweep_configs()) {
      for (std::size_t k = 0; k < 20; ++k) {
        seen.insert(derive_seed(base, cfg.label(), k));
        ++n;
      }
    }
  }
  CHECK(seen.size() == n);
  CHECK(derive_seed(7, "2-4-1", 3) == derive_seed(7, "2-4-1", 3));
}

TEST_CASE("single run artifacts") {
  TempDir tmp("single");
  EvolutionConfig cfg;
  cfg.layers = LayerSizes::parse("2-4-1");
  cfg.dims = {6, 6};
  cfg.population = 6;
  cfg.stagnation_limit = 5;
  cfg.training.stall_epochs = 200;
  cfg.seed = 17;
  const std::string dir = (tmp.path / "run").string();
  const RunResult r = run_single(cfg, dir, 2);
  REQUIRE(r.ok);
  for (const char* f : {"runlog.csv", "champion.pbm", "champion_weights.csv", "manifest.txt"})
    CHECK(fs::exists(fs::path(dir) / f));

  const auto manifest = read_manifest(dir + "/manifest.txt");
  CHECK(manifest.at("status") == "ok");
  CHECK(manifest.at("configuration") == "2-4-1");
  CHECK(manifest.at("repeat") == "2");
  CHECK(manifest.at("seed") == "17");
  CHECK(std::stoul(manifest.at("generations")) == r.generations);

  // The champion re-scores to the recorded complexity and is fully recognized.
  const BinaryImage champion = load_pbm(dir + "/champion.pbm");
  CHECK(std::fabs(complexity_2d(champion).log_value - r.champion.log_value) <= 1e-12);
  std::ifstream wf(dir + "/champion_weights.csv");
  const Network net = read_weights_csv(wf);
  CHECK(evaluate(net, champion).fraction_recognized == 1.0);

  const std::string log = slurp(fs::path(dir) / "runlog.csv");
  CHECK(count_lines(log) == r.generations + 1);

  const std::string again = (tmp.path / "again").string();
  const RunResult r2 = run_single(cfg, again, 2);
  for (const char* f : {"runlog.csv", "champion.pbm", "champion_weights.csv", "manifest.txt"})
    CHECK(slurp(fs::path(dir) / f) == slurp(fs::path(again) / f));
  CHECK(r2.champion == r.champion);
}

TEST_CASE("infeasible configurations are reported, not thrown") {
  TempDir tmp("infeasible");
  EvolutionConfig cfg;
  cfg.layers = LayerSizes::parse("2-2-1");
  cfg.dims = {2, 2};
  cfg.population = 50;
  const RunResult r = run_single(cfg, tmp.str());
  CHECK_FALSE(r.ok);
  CHECK(r.infeasible);
  CHECK(read_manifest(tmp.str() + "/manifest.txt").at("status") == "infeasible");
}

TEST_CASE("sweep outputs are consistent and byte-identical") {
  TempDir tmp("sweep");
  const ExperimentSpec spec = tiny_spec((tmp.path / "a").string());
  const SummaryTable table = run_sweep(spec);
  REQUIRE(table.rows.size() == 2);

  std::size_t generations = 0;
  for (const auto& row : table.rows) {
    REQUIRE(row.runs.size() == 2);
    Complexity best{-INFINITY};
    for (const auto& run : row.runs) {
      REQUIRE(run.ok);
      CHECK(run.dir == spec.out_dir + "/" + row.label + "/rep" + std::to_string(run.repeat));
      // Maxima agree with what is on disk.
      const auto m = read_manifest(run.dir + "/manifest.txt");
      CHECK(m.at("champion_log_complexity") == format_real(run.champion.log_value));
      best = std::max(best, complexity_2d(load_pbm(run.dir + "/champion.pbm")));
      generations += run.generations;
    }
    REQUIRE(row.max_complexity);
    CHECK(std::fabs(best.log_value - row.max_complexity->log_value) <= 1e-12);
    CHECK(row.rank >= 1);
  }
  CHECK(table.rows[0].rank != table.rows[1].rank);

  const std::string curves = slurp(fs::path(spec.out_dir) / "curves.csv");
  CHECK(count_lines(curves) == generations + 1);
  const std::string summary = slurp(fs::path(spec.out_dir) / "summary.csv");
  CHECK(summary.rfind(
            "configuration,weight_count,complexity_rep0,complexity_rep1,max_complexity,"
            "max_log_complexity,total_generations,rank,status\n",
            0) == 0);

  ExperimentSpec again = spec;
  again.out_dir = (tmp.path / "b").string();
  again.workers = 2;
  run_sweep(again);
  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(spec.out_dir))
    if (e.is_regular_file() && e.path().filename() != "timing.csv")
      files.push_back(fs::relative(e.path(), spec.out_dir).string());
  CHECK(files.size() == 2 + 4 * 4);  // summary, curves and four run dirs
  for (const auto& f : files) {
    INFO(f);
    CHECK(slurp(fs::path(spec.out_dir) / f) == slurp(fs::path(again.out_dir) / f));
  }
}

TEST_CASE("plot data") {
  TempDir tmp("plot");
  ExperimentSpec spec = tiny_spec(tmp.str());
  spec.configs = {LayerSizes::parse("2-2-1")};
  const SummaryTable table = run_sweep(spec);

  const auto dirs = find_run_dirs(tmp.str());
  REQUIRE(dirs.size() == 2);
  std::ostringstream one;
  CHECK(emit_plot_data({dirs[0]}, one) == table.rows[0].runs[0].generations);

  std::ostringstream merged, warnings;
  auto with_missing = dirs;
  with_missing.push_back((tmp.path / "nowhere").string());
  const std::size_t rows = emit_plot_data(with_missing, merged, &warnings);
  CHECK(rows == table.rows[0].runs[0].generations + table.rows[0].runs[1].generations);
  CHECK(warnings.str().find("nowhere") != std::string::npos);

  // Values are copied verbatim from the run logs.
  std::istringstream plot(merged.str());
  std::ifstream log(dirs[0] + "/runlog.csv");
  std::string pline, lline;
  std::getline(plot, pline);
  std::getline(log, lline);
  while (std::getline(log, lline)) {
    REQUIRE(std::getline(plot, pline));
    const auto p = split_csv_line(pline);
    const auto l = split_csv_line(lline);
    CHECK(p[0] == "2-2-1");
    CHECK(p[1] == "0");
    CHECK(p[2] == l[0]);
    CHECK(p[3] == l[1]);
  }
}

TEST_CASE("csv helpers") {
  CHECK(format_real(1.0 / 3.0) == "0.333333333333");
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(split_csv_line("a,\"b,c\",\"d\"\"e\",") ==
        std::vector<std::string>{"a", "b,c", "d\"e", ""});
}
