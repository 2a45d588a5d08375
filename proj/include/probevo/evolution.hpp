#pragma once

// Steady-state search for the most complex image a fixed network
// configuration can fully recognize.
//
// Each generation two uniformly chosen parents are recombined by one straight
// cut, both children are mutated, and each child is offered to the
// population. A child enters only if it beats the current minimum complexity,
// is not already present, and the network (started from the most similar
// parent's weights) learns it completely. It then replaces the minimum.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "probevo/complexity.hpp"
#include "probevo/image.hpp"
#include "probevo/network.hpp"
#include "probevo/training.hpp"

namespace probevo {

using Rng = std::mt19937_64;

struct EvolutionConfig {
  LayerSizes layers{{2, 4, 1}};
  Dims dims{20, 20};
  std::size_t population = 100;
  double mutation_rate = 0.0025;
  std::size_t stagnation_limit = 100;
  TrainingConfig training;
  WindowShapes shapes = WindowShapes::kAllRectangles;
  double init_limit = 0.5;
  // Train both children of a generation concurrently (OpenMP). Changes only
  // the epoch accounting: child 2 may be trained before child 1 is committed.
  bool parallel_children = false;
  std::uint64_t seed = 1;

  void validate() const;
};

class InfeasibleConfiguration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Genotype {
  BinaryImage image;
  Complexity complexity;
  Network weights;  // fully recognizes `image`
};

/// Fixed-capacity set of genotypes with unique images.
class Population {
 public:
  explicit Population(std::size_t capacity);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return members_.size(); }
  bool full() const { return members_.size() >= capacity_; }
  const std::vector<Genotype>& members() const { return members_; }
  const Genotype& operator[](std::size_t i) const { return members_[i]; }

  bool contains(const BinaryImage& img) const { return images_.contains(img); }

  /// Adds a member while below capacity. Returns false on a duplicate image.
  bool add(Genotype g);
  /// Replaces the lowest-complexity member (first such on ties).
  void replace_min(Genotype g);

  std::size_t min_index() const;
  std::size_t max_index() const;
  Complexity min_complexity() const { return members_[min_index()].complexity; }
  Complexity max_complexity() const { return members_[max_index()].complexity; }
  double mean_complexity() const;

 private:
  std::size_t capacity_;
  std::vector<Genotype> members_;
  std::set<BinaryImage> images_;
};

/// Two-region image split by the line cos(angle)*x + sin(angle)*y = offset in
/// normalized pixel coordinates; pixels strictly on the positive side are 1.
BinaryImage split_image(Dims dims, double angle, double offset);

/// Random straight-line split with random color assignment. Redraws until
/// both colors are present; after 100 failed draws falls back to a split at
/// the median column.
BinaryImage initial_image(Dims dims, Rng& rng);

enum class CutAxis { kRows, kColumns };

/// One-point crossover along a row (kRows) or column (kColumns) boundary.
/// child1 takes p1 before the cut and p2 after it; child2 the reverse.
std::pair<BinaryImage, BinaryImage> recombine_at(const BinaryImage& p1, const BinaryImage& p2,
                                                 CutAxis axis, std::size_t cut);
std::pair<BinaryImage, BinaryImage> recombine(const BinaryImage& p1, const BinaryImage& p2,
                                              Rng& rng);

BinaryImage mutate(const BinaryImage& img, double rate, Rng& rng);

/// Smaller Hamming distance wins; ties go to p1.
const Genotype& most_similar_parent(const BinaryImage& child, const Genotype& p1,
                                    const Genotype& p2);

enum class AdmissionResult {
  kAdmitted,
  kRejectedComplexity,  // not above the population minimum
  kRejectedDuplicate,
  kRejectedUntrainable,
};

std::string_view to_string(AdmissionResult result);

struct Admission {
  AdmissionResult result = AdmissionResult::kRejectedComplexity;
  std::size_t epochs = 0;
};

/// Cheap gates only (complexity, then duplicate); no training.
AdmissionResult screen_candidate(const Population& pop, const BinaryImage& img,
                                 Complexity complexity);

Admission try_admit(Population& pop, const BinaryImage& candidate, const Network& parent_weights,
                    const EvolutionConfig& config);

/// Seeds until the population is full. Throws InfeasibleConfiguration after
/// 10 x capacity consecutive rejected candidates (duplicates included).
Population seed_population(const EvolutionConfig& config, Rng& rng, std::size_t* epochs = nullptr);

struct GenerationRecord {
  std::size_t generation = 0;
  Complexity best;
  double min_complexity = 0.0;
  double mean_complexity = 0.0;
  std::size_t admissions = 0;
  std::size_t cumulative_epochs = 0;

  bool operator==(const GenerationRecord&) const = default;
};

struct RunLog {
  std::vector<GenerationRecord> records;
  std::optional<Genotype> champion;
};

/// Runlog CSV with 12 significant digits.
void write_runlog_csv(std::ostream& out, const RunLog& log);

/// Resumable evolution run.
class Evolver {
 public:
  explicit Evolver(EvolutionConfig config);

  /// Seeds the population; must be called once before step().
  void seed();
  /// Runs one generation. Returns false once the stagnation limit is reached.
  bool step();
  bool finished() const;
  /// seed() then step() until finished.
  void run();

  const EvolutionConfig& config() const { return config_; }
  const Population& population() const { return *population_; }
  bool seeded() const { return population_.has_value(); }
  std::size_t generation() const { return generation_; }
  std::size_t stagnation() const { return stagnation_; }
  std::size_t cumulative_epochs() const { return epochs_; }
  const std::vector<GenerationRecord>& records() const { return records_; }
  RunLog log() const;

  /// Writes population, RNG state and history. A restored run continues
  /// exactly as the original would have.
  void save_checkpoint(std::ostream& out) const;
  static Evolver load_checkpoint(std::istream& in, const EvolutionConfig& config);

 private:
  EvolutionConfig config_;
  Rng rng_;
  std::optional<Population> population_;
  std::size_t generation_ = 0;
  std::size_t stagnation_ = 0;
  std::size_t epochs_ = 0;
  std::vector<GenerationRecord> records_;
};

RunLog evolve(const EvolutionConfig& config);

}  // namespace probevo
