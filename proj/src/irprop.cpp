#include "probevo/irprop.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace probevo {

void IRpropParams::validate() const {
  if (!(eta_minus > 0.0 && eta_minus < 1.0 && eta_plus > 1.0)) {
    throw std::invalid_argument("iRprop+ needs 0 < eta- < 1 < eta+");
  }
  if (!(delta_min > 0.0 && delta_min <= delta_initial && delta_initial <= delta_max)) {
    throw std::invalid_argument("iRprop+ needs 0 < delta_min <= delta0 <= delta_max");
  }
}

IRpropState::IRpropState(std::size_t params, IRpropParams p)
    : config(p),
      step(params, p.delta_initial),
      prev_grad(params, 0.0),
      prev_update(params, 0.0),
      prev_error(std::numeric_limits<double>::infinity()) {
  config.validate();
}

namespace {
double sign(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }
}  // namespace

void irprop_plus_step(std::span<double> params, std::span<const double> grad,
                      IRpropState& state, double current_error) {
  const std::size_t n = params.size();
  if (grad.size() != n || state.step.size() != n) {
    throw std::invalid_argument("iRprop+ state, gradient and parameter sizes differ");
  }
  const auto& cfg = state.config;
  const bool error_grew = current_error > state.prev_error;
  for (std::size_t i = 0; i < n; ++i) {
    double g = grad[i];
    const double agreement = state.prev_grad[i] * g;
    if (agreement > 0.0) {
      state.step[i] = std::min(state.step[i] * cfg.eta_plus, cfg.delta_max);
      state.prev_update[i] = -sign(g) * state.step[i];
      params[i] += state.prev_update[i];
    } else if (agreement < 0.0) {
      state.step[i] = std::max(state.step[i] * cfg.eta_minus, cfg.delta_min);
      if (error_grew) {
        params[i] -= state.prev_update[i];
        state.prev_update[i] = -state.prev_update[i];
      } else {
        state.prev_update[i] = 0.0;
      }
      g = 0.0;
    } else {
      state.prev_update[i] = -sign(g) * state.step[i];
      params[i] += state.prev_update[i];
    }
    state.prev_grad[i] = g;
  }
  state.prev_error = current_error;
}

void irprop_plus_step(Network& net, std::span<const double> grad, IRpropState& state,
                      double current_error) {
  irprop_plus_step(net.params(), grad, state, current_error);
}

}  // namespace probevo
