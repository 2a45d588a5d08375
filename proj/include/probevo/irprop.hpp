#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "probevo/network.hpp"

namespace probevo {

struct IRpropParams {
  double eta_plus = 1.2;
  double eta_minus = 0.5;
  double delta_initial = 0.1;
  double delta_min = 1e-6;
  double delta_max = 50.0;

  void validate() const;
};

/// Per-parameter memory of iRprop+.
struct IRpropState {
  IRpropState(std::size_t params, IRpropParams p = {});

  IRpropParams config;
  std::vector<double> step;         // current step size per parameter
  std::vector<double> prev_grad;    // zeroed after a sign change
  std::vector<double> prev_update;  // last applied weight change
  double prev_error;                // +inf until the first step
};

/// One iRprop+ update. `current_error` is the error at the weights `grad` was
/// taken at. On a gradient sign change the step shrinks and, only if the error
/// grew since the last step, the previous weight change is undone.
void irprop_plus_step(std::span<double> params, std::span<const double> grad,
                      IRpropState& state, double current_error);
void irprop_plus_step(Network& net, std::span<const double> grad, IRpropState& state,
                      double current_error);

}  // namespace probevo
