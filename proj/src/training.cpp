#include "probevo/training.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace probevo {

ConvergenceMeasure parse_convergence_measure(std::string_view text) {
  if (text == "recognized") return ConvergenceMeasure::kMseTimesRecognized;
  if (text == "misrecognized") return ConvergenceMeasure::kMseTimesMisrecognized;
  throw std::invalid_argument("convergence measure must be 'recognized' or 'misrecognized', got '" +
                              std::string(text) + "'");
}

std::string_view to_string(ConvergenceMeasure measure) {
  return measure == ConvergenceMeasure::kMseTimesMisrecognized ? "misrecognized" : "recognized";
}

void TrainingConfig::validate() const {
  if (stall_epochs < 1) throw std::invalid_argument("stall_epochs must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must be in (0, 1)");
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
  irprop.validate();
}

double convergence_value(const Evaluation& eval, ConvergenceMeasure measure) {
  const double share = measure == ConvergenceMeasure::kMseTimesRecognized
                           ? eval.fraction_recognized
                           : 1.0 - eval.fraction_recognized;
  const double value = eval.mse * share;
  return value > 0.0 ? value : eval.mse;
}

TrainingOutcome train_to_recognition(Network net, const BinaryImage& img,
                                     const TrainingConfig& config) {
  config.validate();
  TrainingOutcome outcome{.weights = net};
  auto finish = [&](TrainingStatus status, StallReason reason, std::size_t epochs,
                    const Evaluation& eval) {
    outcome.status = status;
    outcome.reason = reason;
    outcome.weights = net;
    outcome.epochs = epochs;
    outcome.mse = eval.mse;
    outcome.fraction_recognized = eval.fraction_recognized;
    return outcome;
  };

  LossGradient pass = loss_and_gradient(net, img);
  if (pass.eval.fraction_recognized == 1.0) {
    return finish(TrainingStatus::kFullyRecognized, StallReason::kNone, 0, pass.eval);
  }
  IRpropState state(net.param_count(), config.irprop);
  double reference = convergence_value(pass.eval, config.measure);
  std::size_t last_progress = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    irprop_plus_step(net, pass.grad, state, pass.eval.mse);
    pass = loss_and_gradient(net, img);
    if (!std::isfinite(pass.eval.mse) || !net.all_finite()) {
      return finish(TrainingStatus::kStalled, StallReason::kNonFinite, epoch, pass.eval);
    }
    if (pass.eval.fraction_recognized == 1.0) {
      return finish(TrainingStatus::kFullyRecognized, StallReason::kNone, epoch, pass.eval);
    }
    const double watched = convergence_value(pass.eval, config.measure);
    if (watched < (1.0 - config.epsilon) * reference) {
      reference = watched;
      last_progress = epoch;
    } else if (epoch - last_progress >= config.stall_epochs) {
      return finish(TrainingStatus::kStalled, StallReason::kNoProgress, epoch, pass.eval);
    }
  }
  return finish(TrainingStatus::kStalled, StallReason::kEpochLimit, config.max_epochs, pass.eval);
}

}  // namespace probevo
