#include "probevo/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "probevo/csv.hpp"

namespace fs = std::filesystem;

namespace probevo {

void ExperimentSpec::validate() const {
  if (configs.empty()) throw std::invalid_argument("no network configurations given");
  if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (out_dir.empty()) throw std::invalid_argument("output directory must be set");
  evolution.validate();
}

std::vector<LayerSizes> default_sweep_configs() {
  return {LayerSizes({2, 2, 1}), LayerSizes({2, 4, 1}), LayerSizes({2, 8, 1}),
          LayerSizes({2, 16, 1})};
}

std::vector<LayerSizes> default_table_configs() {
  return {LayerSizes({2, 2, 6, 1}), LayerSizes({2, 3, 3, 2, 1}), LayerSizes({2, 8, 1}),
          LayerSizes({2, 5, 2, 1}), LayerSizes({2, 4, 3, 1})};
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T v{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw std::invalid_argument("bad value for '" + key + "': '" + value + "'");
  }
  return v;
}

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size()) {
    throw std::invalid_argument("bad value for '" + key + "': '" + value + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw std::invalid_argument("bad value for '" + key + "': '" + value + "'");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_manifest(const std::string& path, const EvolutionConfig& c, std::size_t repeat,
                    const RunResult& result, std::size_t cumulative_epochs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "configuration = " << c.layers.label() << '\n'
      << "weight_count = " << weight_count(c.layers) << '\n'
      << "repeat = " << repeat << '\n'
      << "seed = " << c.seed << '\n'
      << "dims = " << format_dims(c.dims) << '\n'
      << "pop = " << c.population << '\n'
      << "mutation = " << format_real(c.mutation_rate) << '\n'
      << "stagnation = " << c.stagnation_limit << '\n'
      << "stall-epochs = " << c.training.stall_epochs << '\n'
      << "epsilon = " << format_real(c.training.epsilon) << '\n'
      << "max-epochs = " << c.training.max_epochs << '\n'
      << "shapes = " << to_string(c.shapes) << '\n'
      << "convergence = " << to_string(c.training.measure) << '\n'
      << "status = " << (result.ok ? "ok" : result.infeasible ? "infeasible" : "error") << '\n';
  if (result.ok) {
    out << "generations = " << result.generations << '\n'
        << "cumulative_epochs = " << cumulative_epochs << '\n'
        << "champion_complexity = " << format_real(result.champion.value()) << '\n'
        << "champion_log_complexity = " << format_real(result.champion.log_value) << '\n';
  } else {
    out << "error = " << result.error << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

template <typename Fn>
void write_file(const std::string& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  fn(out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

void apply_setting(ExperimentSpec& spec, const std::string& raw_key, const std::string& value) {
  std::string key = raw_key;
  std::replace(key.begin(), key.end(), '_', '-');
  auto& evo = spec.evolution;
  if (key == "net") {
    spec.configs.clear();
    std::istringstream list(value);
    for (std::string item; std::getline(list, item, ',');) {
      item = trim(item);
      if (!item.empty()) spec.configs.push_back(LayerSizes::parse(item));
    }
  } else if (key == "dims") {
    evo.dims = parse_dims(value);
  } else if (key == "pop") {
    evo.population = parse_number<std::size_t>(key, value);
  } else if (key == "repeats") {
    spec.repeats = parse_number<std::size_t>(key, value);
  } else if (key == "seed") {
    spec.base_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "out") {
    spec.out_dir = value;
  } else if (key == "workers") {
    spec.workers = parse_number<std::size_t>(key, value);
  } else if (key == "mutation") {
    evo.mutation_rate = parse_double(key, value);
  } else if (key == "stagnation") {
    evo.stagnation_limit = parse_number<std::size_t>(key, value);
  } else if (key == "stall-epochs") {
    evo.training.stall_epochs = parse_number<std::size_t>(key, value);
  } else if (key == "epsilon") {
    evo.training.epsilon = parse_double(key, value);
  } else if (key == "max-epochs") {
    evo.training.max_epochs = parse_number<std::size_t>(key, value);
  } else if (key == "shapes") {
    evo.shapes = parse_window_shapes(value);
  } else if (key == "convergence") {
    evo.training.measure = parse_convergence_measure(value);
  } else if (key == "parallel-children") {
    evo.parallel_children = parse_bool(key, value);
  } else {
    throw std::invalid_argument("unknown setting '" + raw_key + "'");
  }
}

void apply_config_file(ExperimentSpec& spec, std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
    }
    try {
      apply_setting(spec, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void apply_config_file(ExperimentSpec& spec, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  apply_config_file(spec, in);
}

std::uint64_t derive_seed(std::uint64_t base_seed, const std::string& label, std::size_t repeat) {
  return splitmix64(base_seed ^ splitmix64(fnv1a(label) ^ splitmix64(repeat)));
}

RunResult run_single(const EvolutionConfig& config, const std::string& dir, std::size_t repeat) {
  RunResult result;
  result.label = config.layers.label();
  result.repeat = repeat;
  result.seed = config.seed;
  result.dir = dir;
  const auto start = std::chrono::steady_clock::now();
  std::size_t epochs = 0;
  try {
    fs::create_directories(dir);
    Evolver ev(config);
    try {
      ev.run();
      const RunLog log = ev.log();
      write_file(dir + "/runlog.csv", [&](std::ostream& out) { write_runlog_csv(out, log); });
      save_pbm(dir + "/champion.pbm", log.champion->image);
      write_file(dir + "/champion_weights.csv",
                 [&](std::ostream& out) { write_weights_csv(out, log.champion->weights); });
      result.ok = true;
      result.champion = log.champion->complexity;
      result.generations = ev.generation();
      epochs = ev.cumulative_epochs();
    } catch (const InfeasibleConfiguration& e) {
      result.infeasible = true;
      result.error = e.what();
    }
    write_manifest(dir + "/manifest.txt", config, repeat, result, epochs);
  } catch (const std::exception& e) {
    result.ok = false;
    result.error = e.what();
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

SummaryTable run_sweep(const ExperimentSpec& spec) {
  spec.validate();
  fs::create_directories(spec.out_dir);

  struct Job {
    std::size_t row;
    std::size_t repeat;
  };
  std::vector<Job> jobs;
  for (std::size_t r = 0; r < spec.configs.size(); ++r)
    for (std::size_t k = 0; k < spec.repeats; ++k) jobs.push_back({r, k});

  std::vector<RunResult> results(jobs.size());
  const long njobs = static_cast<long>(jobs.size());
  const int workers = static_cast<int>(spec.workers);
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (long j = 0; j < njobs; ++j) {
    const Job job = jobs[static_cast<std::size_t>(j)];
    EvolutionConfig config = spec.evolution;
    config.layers = spec.configs[job.row];
    const std::string label = config.layers.label();
    config.seed = derive_seed(spec.base_seed, label, job.repeat);
    const std::string dir = spec.out_dir + "/" + label + "/rep" + std::to_string(job.repeat);
    results[static_cast<std::size_t>(j)] = run_single(config, dir, job.repeat);
  }

  SummaryTable table;
  table.kind = spec.kind;
  table.repeats = spec.repeats;
  for (const auto& cfg : spec.configs) table.rows.push_back({cfg.label(), weight_count(cfg)});
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    SummaryRow& row = table.rows[jobs[j].row];
    const RunResult& run = results[j];
    row.runs.push_back(run);
    row.wall_seconds += run.wall_seconds;
    if (!run.ok) continue;
    row.total_generations += run.generations;
    if (!row.max_complexity || run.champion > *row.max_complexity) row.max_complexity = run.champion;
  }

  std::vector<std::size_t> order;
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    if (table.rows[r].max_complexity) order.push_back(r);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return *table.rows[a].max_complexity > *table.rows[b].max_complexity;
  });
  for (std::size_t i = 0; i < order.size(); ++i) table.rows[order[i]].rank = i + 1;

  write_file(spec.out_dir + "/summary.csv",
             [&](std::ostream& out) { write_summary_csv(out, table); });
  write_file(spec.out_dir + "/timing.csv",
             [&](std::ostream& out) { write_timing_csv(out, table); });
  std::vector<std::string> dirs;
  for (const auto& run : results)
    if (run.ok) dirs.push_back(run.dir);
  write_file(spec.out_dir + "/curves.csv", [&](std::ostream& out) { emit_plot_data(dirs, out); });
  return table;
}

SummaryTable run_equal_weights(const ExperimentSpec& spec) {
  ExperimentSpec s = spec;
  s.kind = ExperimentKind::kEqualWeights;
  if (s.configs.empty()) s.configs = default_table_configs();
  return run_sweep(s);
}

void write_summary_csv(std::ostream& out, const SummaryTable& table) {
  out << "configuration,weight_count";
  for (std::size_t k = 0; k < table.repeats; ++k) out << ",complexity_rep" << k;
  out << ",max_complexity,max_log_complexity,total_generations,rank,status\n";
  for (const auto& row : table.rows) {
    out << csv_field(row.label) << ',' << row.weights;
    std::string status = "ok";
    for (const auto& run : row.runs) {
      out << ',' << (run.ok ? format_real(run.champion.value()) : "");
      if (!run.ok) status = run.infeasible ? "infeasible" : "error";
    }
    for (std::size_t k = row.runs.size(); k < table.repeats; ++k) out << ',';
    if (row.max_complexity) {
      out << ',' << format_real(row.max_complexity->value()) << ','
          << format_real(row.max_complexity->log_value);
    } else {
      out << ",,";
    }
    out << ',' << row.total_generations << ',' << row.rank << ',' << status << '\n';
  }
}

void write_timing_csv(std::ostream& out, const SummaryTable& table) {
  out << "configuration,repeat,seed,wall_seconds\n";
  for (const auto& row : table.rows)
    for (const auto& run : row.runs)
      out << csv_field(row.label) << ',' << run.repeat << ',' << run.seed << ','
          << format_real(run.wall_seconds) << '\n';
}

std::map<std::string, std::string> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read manifest " + path);
  std::map<std::string, std::string> entries;
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    entries[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return entries;
}

std::vector<std::string> find_run_dirs(const std::string& root) {
  std::vector<std::string> dirs;
  if (fs::exists(fs::path(root) / "runlog.csv")) dirs.push_back(root);
  if (fs::is_directory(root)) {
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
      if (entry.is_regular_file() && entry.path().filename() == "runlog.csv" &&
          entry.path().parent_path() != fs::path(root)) {
        dirs.push_back(entry.path().parent_path().string());
      }
    }
  }
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

std::size_t emit_plot_data(const std::vector<std::string>& run_dirs, std::ostream& out,
                           std::ostream* warnings) {
  out << "configuration,repeat,generation,best_complexity\n";
  std::size_t rows = 0;
  for (const auto& dir : run_dirs) {
    std::ifstream log(dir + "/runlog.csv");
    if (!log) {
      if (warnings) *warnings << "warning: no runlog.csv in " << dir << ", skipped\n";
      continue;
    }
    std::string label = fs::path(dir).parent_path().filename().string();
    std::string repeat = "0";
    if (fs::exists(dir + "/manifest.txt")) {
      const auto manifest = read_manifest(dir + "/manifest.txt");
      if (auto it = manifest.find("configuration"); it != manifest.end()) label = it->second;
      if (auto it = manifest.find("repeat"); it != manifest.end()) repeat = it->second;
    }
    std::string line;
    std::getline(log, line);
    const auto header = split_csv_line(line);
    const auto gen_col = std::find(header.begin(), header.end(), "generation") - header.begin();
    const auto best_col =
        std::find(header.begin(), header.end(), "best_complexity") - header.begin();
    if (gen_col == static_cast<long>(header.size()) || best_col == static_cast<long>(header.size())) {
      if (warnings) *warnings << "warning: unexpected runlog header in " << dir << ", skipped\n";
      continue;
    }
    while (std::getline(log, line)) {
      if (line.empty()) continue;
      const auto fields = split_csv_line(line);
      if (static_cast<long>(fields.size()) <= std::max(gen_col, best_col)) continue;
      out << csv_field(label) << ',' << repeat << ',' << fields[static_cast<std::size_t>(gen_col)]
          << ',' << fields[static_cast<std::size_t>(best_col)] << '\n';
      ++rows;
    }
  }
  return rows;
}

}  // namespace probevo
