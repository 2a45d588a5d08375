#pragma once

#include <cstddef>
#include <string_view>

#include "probevo/image.hpp"
#include "probevo/irprop.hpp"
#include "probevo/network.hpp"

namespace probevo {

/// Quantity watched by the stall detector.
enum class ConvergenceMeasure {
  kMseTimesRecognized,     // mse * fraction recognized
  kMseTimesMisrecognized,  // mse * (1 - fraction recognized)
};

ConvergenceMeasure parse_convergence_measure(std::string_view text);
std::string_view to_string(ConvergenceMeasure measure);

struct TrainingConfig {
  std::size_t stall_epochs = 1000;  // N_c
  double epsilon = 0.01;
  std::size_t max_epochs = 20000;
  ConvergenceMeasure measure = ConvergenceMeasure::kMseTimesRecognized;
  IRpropParams irprop;

  void validate() const;
};

enum class TrainingStatus { kFullyRecognized, kStalled };

enum class StallReason { kNone, kNoProgress, kEpochLimit, kNonFinite };

struct TrainingOutcome {
  TrainingStatus status = TrainingStatus::kStalled;
  StallReason reason = StallReason::kNone;
  Network weights;
  std::size_t epochs = 0;
  double mse = 0.0;
  double fraction_recognized = 0.0;

  bool recognized() const { return status == TrainingStatus::kFullyRecognized; }
};

/// Watched value for one evaluation. Falls back to the mse when the product
/// is zero without full recognition, so the window still sees progress.
double convergence_value(const Evaluation& eval, ConvergenceMeasure measure);

/// Full-batch iRprop+ training from `net` until every pixel is recognized or
/// training stalls. Epoch 0 is the untouched initial network. Training stalls
/// when the watched value has not fallen below (1 - epsilon) times its last
/// reference for stall_epochs epochs, or at max_epochs. Deterministic.
TrainingOutcome train_to_recognition(Network net, const BinaryImage& img,
                                     const TrainingConfig& config);

}  // namespace probevo
