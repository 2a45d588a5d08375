#include "probevo/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "probevo/csv.hpp"

namespace probevo {

void EvolutionConfig::validate() const {
  if (dims.height < 1 || dims.width < 1) throw std::invalid_argument("image dims must be positive");
  if (population < 1) throw std::invalid_argument("population must be >= 1");
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) {
    throw std::invalid_argument("mutation rate must be in [0, 1]");
  }
  if (stagnation_limit < 1) throw std::invalid_argument("stagnation limit must be >= 1");
  if (!(init_limit > 0.0)) throw std::invalid_argument("init limit must be positive");
  training.validate();
}

// --- Population ----------------------------------------------------------------

Population::Population(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("population capacity must be >= 1");
  members_.reserve(capacity);
}

bool Population::add(Genotype g) {
  if (full()) throw std::logic_error("population is full");
  if (!images_.insert(g.image).second) return false;
  members_.push_back(std::move(g));
  return true;
}

void Population::replace_min(Genotype g) {
  if (members_.empty()) {
    add(std::move(g));
    return;
  }
  if (contains(g.image)) throw std::logic_error("replacement image already in population");
  const std::size_t i = min_index();
  images_.erase(members_[i].image);
  images_.insert(g.image);
  members_[i] = std::move(g);
}

std::size_t Population::min_index() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < members_.size(); ++i)
    if (members_[i].complexity < members_[best].complexity) best = i;
  return best;
}

std::size_t Population::max_index() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < members_.size(); ++i)
    if (members_[i].complexity > members_[best].complexity) best = i;
  return best;
}

double Population::mean_complexity() const {
  double sum = 0.0;
  for (const auto& m : members_) sum += m.complexity.value();
  return members_.empty() ? 0.0 : sum / static_cast<double>(members_.size());
}

// --- Operators -----------------------------------------------------------------

BinaryImage split_image(Dims dims, double angle, double offset) {
  BinaryImage img(dims);
  const double nx = std::cos(angle);
  const double ny = std::sin(angle);
  for (std::size_t r = 0; r < dims.height; ++r) {
    for (std::size_t c = 0; c < dims.width; ++c) {
      const Coord p = pixel_coord(dims, r, c);
      img.set(r, c, nx * p.x + ny * p.y > offset);
    }
  }
  return img;
}

BinaryImage initial_image(Dims dims, Rng& rng) {
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::uniform_real_distribution<double> offset(-std::numbers::sqrt2, std::numbers::sqrt2);
  std::bernoulli_distribution swap_colors(0.5);
  for (int attempt = 0; attempt < 100; ++attempt) {
    BinaryImage img = split_image(dims, angle(rng), offset(rng));
    if (swap_colors(rng)) img = img.complement();
    const std::size_t ones = img.count_ones();
    if (ones > 0 && ones < img.size()) return img;
  }
  BinaryImage img(dims);
  for (std::size_t r = 0; r < dims.height; ++r)
    for (std::size_t c = dims.width / 2; c < dims.width; ++c) img.set(r, c, 1);
  return img;
}

std::pair<BinaryImage, BinaryImage> recombine_at(const BinaryImage& p1, const BinaryImage& p2,
                                                 CutAxis axis, std::size_t cut) {
  if (p1.dims() != p2.dims()) throw std::invalid_argument("parents differ in dimensions");
  BinaryImage c1 = p1;
  BinaryImage c2 = p2;
  for (std::size_t r = 0; r < p1.height(); ++r) {
    for (std::size_t c = 0; c < p1.width(); ++c) {
      const bool second_part = axis == CutAxis::kRows ? r >= cut : c >= cut;
      if (second_part) {
        c1.set(r, c, p2.at(r, c));
        c2.set(r, c, p1.at(r, c));
      }
    }
  }
  return {std::move(c1), std::move(c2)};
}

std::pair<BinaryImage, BinaryImage> recombine(const BinaryImage& p1, const BinaryImage& p2,
                                              Rng& rng) {
  if (p1.dims() != p2.dims()) throw std::invalid_argument("parents differ in dimensions");
  CutAxis axis = std::bernoulli_distribution(0.5)(rng) ? CutAxis::kColumns : CutAxis::kRows;
  // A single row or column leaves only the other axis to cut.
  if (axis == CutAxis::kRows && p1.height() < 2) axis = CutAxis::kColumns;
  if (axis == CutAxis::kColumns && p1.width() < 2) axis = CutAxis::kRows;
  const std::size_t extent = axis == CutAxis::kRows ? p1.height() : p1.width();
  if (extent < 2) return {p1, p2};
  const std::size_t cut = std::uniform_int_distribution<std::size_t>(1, extent - 1)(rng);
  return recombine_at(p1, p2, axis, cut);
}

BinaryImage mutate(const BinaryImage& img, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("mutation rate must be in [0, 1]");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BinaryImage out = img;
  for (std::size_t r = 0; r < img.height(); ++r)
    for (std::size_t c = 0; c < img.width(); ++c)
      if (u(rng) < rate) out.flip(r, c);
  return out;
}

const Genotype& most_similar_parent(const BinaryImage& child, const Genotype& p1,
                                    const Genotype& p2) {
  return child.hamming_distance(p2.image) < child.hamming_distance(p1.image) ? p2 : p1;
}

std::string_view to_string(AdmissionResult result) {
  switch (result) {
    case AdmissionResult::kAdmitted: return "admitted";
    case AdmissionResult::kRejectedComplexity: return "rejected-complexity";
    case AdmissionResult::kRejectedDuplicate: return "rejected-duplicate";
    case AdmissionResult::kRejectedUntrainable: return "rejected-untrainable";
  }
  return "unknown";
}

AdmissionResult screen_candidate(const Population& pop, const BinaryImage& img,
                                 Complexity complexity) {
  if (pop.size() > 0 && complexity <= pop.min_complexity()) {
    return AdmissionResult::kRejectedComplexity;
  }
  if (pop.contains(img)) return AdmissionResult::kRejectedDuplicate;
  return AdmissionResult::kAdmitted;
}

namespace {

struct Candidate {
  BinaryImage image;
  Complexity complexity;
  Network start;
  AdmissionResult screened = AdmissionResult::kAdmitted;
  std::optional<TrainingOutcome> trained;
};

Admission admit_trained(Population& pop, Candidate& cand) {
  Admission a;
  a.result = screen_candidate(pop, cand.image, cand.complexity);
  if (a.result != AdmissionResult::kAdmitted) return a;
  if (!cand.trained->recognized()) {
    a.result = AdmissionResult::kRejectedUntrainable;
    return a;
  }
  pop.replace_min({cand.image, cand.complexity, cand.trained->weights});
  return a;
}

Admission offer(Population& pop, Candidate& cand, const EvolutionConfig& config) {
  Admission a;
  a.result = screen_candidate(pop, cand.image, cand.complexity);
  if (a.result != AdmissionResult::kAdmitted) return a;
  cand.trained = train_to_recognition(cand.start, cand.image, config.training);
  a = admit_trained(pop, cand);
  a.epochs = cand.trained->epochs;
  return a;
}

}  // namespace

Admission try_admit(Population& pop, const BinaryImage& candidate, const Network& parent_weights,
                    const EvolutionConfig& config) {
  Candidate cand{candidate, complexity_2d(candidate, config.shapes), parent_weights};
  return offer(pop, cand, config);
}

Population seed_population(const EvolutionConfig& config, Rng& rng, std::size_t* epochs) {
  config.validate();
  Population pop(config.population);
  const std::size_t max_failures = 10 * config.population;
  std::size_t failures = 0;
  while (!pop.full()) {
    BinaryImage img = initial_image(config.dims, rng);
    Network fresh = Network::random(config.layers, rng, config.init_limit);
    bool admitted = false;
    if (!pop.contains(img)) {
      TrainingOutcome out = train_to_recognition(std::move(fresh), img, config.training);
      if (epochs) *epochs += out.epochs;
      if (out.recognized()) {
        Complexity cx = complexity_2d(img, config.shapes);
        admitted = pop.add({std::move(img), cx, std::move(out.weights)});
      }
    }
    failures = admitted ? 0 : failures + 1;
    if (failures >= max_failures) {
      throw InfeasibleConfiguration(
          "network " + config.layers.label() + " could not learn " +
          std::to_string(max_failures) + " consecutive seed images at " +
          format_dims(config.dims) + " (" + std::to_string(pop.size()) + " of " +
          std::to_string(config.population) + " seeded)");
    }
  }
  return pop;
}

void write_runlog_csv(std::ostream& out, const RunLog& log) {
  out << "generation,best_complexity,best_log_complexity,min_complexity,mean_complexity,"
         "admissions,cumulative_epochs\n";
  for (const auto& r : log.records) {
    out << r.generation << ',' << format_real(r.best.value()) << ','
        << format_real(r.best.log_value) << ',' << format_real(r.min_complexity) << ','
        << format_real(r.mean_complexity) << ',' << r.admissions << ',' << r.cumulative_epochs
        << '\n';
  }
}

// --- Evolver -------------------------------------------------------------------

Evolver::Evolver(EvolutionConfig config) : config_(std::move(config)), rng_(config_.seed) {
  config_.validate();
}

void Evolver::seed() {
  if (population_) throw std::logic_error("population already seeded");
  population_ = seed_population(config_, rng_, &epochs_);
}

bool Evolver::finished() const { return stagnation_ >= config_.stagnation_limit; }

bool Evolver::step() {
  if (!population_) throw std::logic_error("seed() must run before step()");
  if (finished()) return false;
  Population& pop = *population_;

  const std::size_t n = pop.size();
  const std::size_t i = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  std::size_t j = i;
  if (n > 1) {
    j = std::uniform_int_distribution<std::size_t>(0, n - 2)(rng_);
    if (j >= i) ++j;
  }
  // Copies: admissions below may overwrite either parent's slot.
  const Genotype p1 = pop[i];
  const Genotype p2 = pop[j];

  auto [img1, img2] = recombine(p1.image, p2.image, rng_);
  img1 = mutate(img1, config_.mutation_rate, rng_);
  img2 = mutate(img2, config_.mutation_rate, rng_);

  std::vector<Candidate> children;
  for (auto* img : {&img1, &img2}) {
    const Genotype& parent = most_similar_parent(*img, p1, p2);
    const Complexity cx = complexity_2d(*img, config_.shapes);
    children.push_back({std::move(*img), cx, parent.weights});
  }

  std::size_t admissions = 0;
  if (config_.parallel_children) {
    for (auto& c : children) c.screened = screen_candidate(pop, c.image, c.complexity);
    const long count = static_cast<long>(children.size());
#pragma omp parallel for num_threads(2) schedule(static)
    for (long k = 0; k < count; ++k) {
      auto& c = children[static_cast<std::size_t>(k)];
      if (c.screened == AdmissionResult::kAdmitted) {
        c.trained = train_to_recognition(c.start, c.image, config_.training);
      }
    }
    for (auto& c : children) {
      if (!c.trained) continue;
      epochs_ += c.trained->epochs;
      admissions += admit_trained(pop, c).result == AdmissionResult::kAdmitted;
    }
  } else {
    for (auto& c : children) {
      const Admission a = offer(pop, c, config_);
      epochs_ += a.epochs;
      admissions += a.result == AdmissionResult::kAdmitted;
    }
  }

  ++generation_;
  stagnation_ = admissions > 0 ? 0 : stagnation_ + 1;
  records_.push_back({generation_, pop.max_complexity(), pop.min_complexity().value(),
                      pop.mean_complexity(), admissions, epochs_});
  return !finished();
}

void Evolver::run() {
  if (!population_) seed();
  while (step()) {
  }
}

RunLog Evolver::log() const {
  RunLog log;
  log.records = records_;
  if (population_) log.champion = population_->members()[population_->max_index()];
  return log;
}

namespace {

constexpr const char* kCheckpointMagic = "probevo-checkpoint-v1";

std::string hex(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_real(const std::string& token) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (token.empty() || end != token.c_str() + token.size()) {
    throw std::runtime_error("checkpoint: bad number '" + token + "'");
  }
  return v;
}

template <typename T>
T read_value(std::istream& in, const char* what) {
  T v{};
  if (!(in >> v)) throw std::runtime_error(std::string("checkpoint: cannot read ") + what);
  return v;
}

void expect_key(std::istream& in, const std::string& key) {
  if (read_value<std::string>(in, key.c_str()) != key) {
    throw std::runtime_error("checkpoint: expected '" + key + "'");
  }
}

}  // namespace

void Evolver::save_checkpoint(std::ostream& out) const {
  if (!population_) throw std::logic_error("nothing to checkpoint before seeding");
  out << kCheckpointMagic << '\n'
      << "layers " << config_.layers.label() << '\n'
      << "dims " << format_dims(config_.dims) << '\n'
      << "generation " << generation_ << '\n'
      << "stagnation " << stagnation_ << '\n'
      << "epochs " << epochs_ << '\n'
      << "rng " << rng_ << '\n'
      << "records " << records_.size() << '\n';
  for (const auto& r : records_) {
    out << r.generation << ' ' << hex(r.best.log_value) << ' ' << hex(r.min_complexity) << ' '
        << hex(r.mean_complexity) << ' ' << r.admissions << ' ' << r.cumulative_epochs << '\n';
  }
  out << "members " << population_->size() << '\n';
  for (const auto& m : population_->members()) {
    std::string rows = m.image.to_string();
    std::replace(rows.begin(), rows.end(), '\n', '/');
    out << rows << ' ' << m.weights.param_count();
    for (double p : m.weights.params()) out << ' ' << hex(p);
    out << '\n';
  }
  out << "end\n";
}

Evolver Evolver::load_checkpoint(std::istream& in, const EvolutionConfig& config) {
  Evolver ev(config);
  if (read_value<std::string>(in, "magic") != kCheckpointMagic) {
    throw std::runtime_error("checkpoint: bad magic");
  }
  expect_key(in, "layers");
  if (LayerSizes::parse(read_value<std::string>(in, "layers")) != config.layers) {
    throw std::runtime_error("checkpoint: network configuration differs from config");
  }
  expect_key(in, "dims");
  if (parse_dims(read_value<std::string>(in, "dims")) != config.dims) {
    throw std::runtime_error("checkpoint: image dims differ from config");
  }
  expect_key(in, "generation");
  ev.generation_ = read_value<std::size_t>(in, "generation");
  expect_key(in, "stagnation");
  ev.stagnation_ = read_value<std::size_t>(in, "stagnation");
  expect_key(in, "epochs");
  ev.epochs_ = read_value<std::size_t>(in, "epochs");
  expect_key(in, "rng");
  if (!(in >> ev.rng_)) throw std::runtime_error("checkpoint: bad rng state");

  expect_key(in, "records");
  const auto nrec = read_value<std::size_t>(in, "record count");
  for (std::size_t k = 0; k < nrec; ++k) {
    GenerationRecord r;
    r.generation = read_value<std::size_t>(in, "generation");
    r.best.log_value = parse_real(read_value<std::string>(in, "best"));
    r.min_complexity = parse_real(read_value<std::string>(in, "min"));
    r.mean_complexity = parse_real(read_value<std::string>(in, "mean"));
    r.admissions = read_value<std::size_t>(in, "admissions");
    r.cumulative_epochs = read_value<std::size_t>(in, "epochs");
    ev.records_.push_back(r);
  }

  expect_key(in, "members");
  const auto nmem = read_value<std::size_t>(in, "member count");
  if (nmem == 0 || nmem > config.population) {
    throw std::runtime_error("checkpoint: member count does not fit population capacity");
  }
  Population pop(config.population);
  for (std::size_t k = 0; k < nmem; ++k) {
    std::vector<std::string> rows;
    std::istringstream split(read_value<std::string>(in, "image"));
    for (std::string row; std::getline(split, row, '/');) rows.push_back(row);
    BinaryImage img = BinaryImage::from_rows(rows);
    if (img.dims() != config.dims) throw std::runtime_error("checkpoint: member dims differ");
    const auto nparams = read_value<std::size_t>(in, "parameter count");
    std::vector<double> params;
    for (std::size_t p = 0; p < nparams; ++p) {
      params.push_back(parse_real(read_value<std::string>(in, "parameter")));
    }
    Network net(config.layers, std::move(params));
    const Complexity cx = complexity_2d(img, config.shapes);
    if (!pop.add({std::move(img), cx, std::move(net)})) {
      throw std::runtime_error("checkpoint: duplicate member image");
    }
  }
  expect_key(in, "end");
  ev.population_ = std::move(pop);
  return ev;
}

RunLog evolve(const EvolutionConfig& config) {
  Evolver ev(config);
  ev.run();
  return ev.log();
}

}  // namespace probevo
