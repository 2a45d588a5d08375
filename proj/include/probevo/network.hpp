#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "probevo/image.hpp"

namespace probevo {

/// Scaled hyperbolic tangent a*tanh(b*x).
inline constexpr double kActivationScale = 1.7159;
inline constexpr double kActivationSlope = 2.0 / 3.0;

/// tanh from a branch-free polynomial exp, usable inside `omp simd` loops.
/// Agrees with std::tanh to a few ulp.
inline double tanh_kernel(double x) {
  // e = exp(-2|x|) = 2^k * exp(r), |r| <= ln2/2; inputs past 20 saturate.
  const double ax = std::fabs(x);
  const double a = ax > 20.0 ? 20.0 : ax;  // written so NaN passes through
  const double y = -2.0 * a;
  const double shifter = 0x1.8p52;
  const double kd = y * 0x1.71547652b82fep0 + shifter;
  const double k = kd - shifter;
  const double r = (y - k * 0x1.62e42fefa3800p-1) - k * 0x1.ef35793c76730p-45;
  double p = 1.0 / 479001600.0;
  p = p * r + 1.0 / 39916800.0;
  p = p * r + 1.0 / 3628800.0;
  p = p * r + 1.0 / 362880.0;
  p = p * r + 1.0 / 40320.0;
  p = p * r + 1.0 / 5040.0;
  p = p * r + 1.0 / 720.0;
  p = p * r + 1.0 / 120.0;
  p = p * r + 1.0 / 24.0;
  p = p * r + 1.0 / 6.0;
  p = p * r + 0.5;
  p = p * r + 1.0;
  p = p * r + 1.0;
  const std::int64_t bits = (std::bit_cast<std::int64_t>(kd) + 1023) << 52;
  const double e = p * std::bit_cast<double>(bits);
  // Near zero 1 - e cancels; use the expm1 series of y directly there.
  double m = 1.0 / 121645100408832000.0;
  m = m * y + 1.0 / 6402373705728000.0;
  m = m * y + 1.0 / 355687428096000.0;
  m = m * y + 1.0 / 20922789888000.0;
  m = m * y + 1.0 / 1307674368000.0;
  m = m * y + 1.0 / 87178291200.0;
  m = m * y + 1.0 / 6227020800.0;
  m = m * y + 1.0 / 479001600.0;
  m = m * y + 1.0 / 39916800.0;
  m = m * y + 1.0 / 3628800.0;
  m = m * y + 1.0 / 362880.0;
  m = m * y + 1.0 / 40320.0;
  m = m * y + 1.0 / 5040.0;
  m = m * y + 1.0 / 720.0;
  m = m * y + 1.0 / 120.0;
  m = m * y + 1.0 / 24.0;
  m = m * y + 1.0 / 6.0;
  m = m * y + 0.5;
  m = m * y + 1.0;
  m = m * y;
  const double em1 = a < 0.5 ? m : e - 1.0;  // exp(-2|x|) - 1
  const double t = -em1 / (2.0 + em1);
  return std::copysign(t, x);
}

double activation(double x);
double activation_derivative(double x);

/// Neuron counts per layer, input first. Always 2 inputs (x, y) and 1 output.
class LayerSizes {
 public:
  LayerSizes() : sizes_{2, 1} {}
  explicit LayerSizes(std::vector<std::size_t> sizes);

  /// Parses "2-4-3-1".
  static LayerSizes parse(const std::string& text);

  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::size_t layers() const { return sizes_.size(); }
  std::size_t operator[](std::size_t i) const { return sizes_[i]; }
  std::string label() const;

  bool operator==(const LayerSizes&) const = default;

 private:
  std::vector<std::size_t> sizes_;
};

/// Connection weights plus one bias per non-input neuron.
std::size_t weight_count(const LayerSizes& sizes);

/// Maps pixel (row, col) to inputs in [-1, 1]; a single row/column maps to 0.
struct Coord {
  double x;
  double y;
};
Coord pixel_coord(Dims dims, std::size_t row, std::size_t col);

/// Feed-forward network; all parameters live in one flat vector. For each
/// connection layer l (feeding layer l+1) the block is the fan_in x fan_out
/// weight matrix in row-major order followed by fan_out biases.
class Network {
 public:
  explicit Network(LayerSizes sizes);
  Network(LayerSizes sizes, std::vector<double> params);

  /// Uniform weights and biases on [-limit, limit].
  static Network random(const LayerSizes& sizes, std::mt19937_64& rng, double limit = 0.5);

  const LayerSizes& layer_sizes() const { return sizes_; }
  std::span<const double> params() const { return params_; }
  std::span<double> params() { return params_; }
  std::size_t param_count() const { return params_.size(); }

  /// Offset of the block feeding layer `layer` (1-based destination layer).
  std::size_t block_offset(std::size_t layer) const { return offsets_[layer - 1]; }
  double& weight(std::size_t layer, std::size_t from, std::size_t to);
  double weight(std::size_t layer, std::size_t from, std::size_t to) const;
  double& bias(std::size_t layer, std::size_t to);
  double bias(std::size_t layer, std::size_t to) const;

  bool all_finite() const;

  bool operator==(const Network&) const = default;

 private:
  LayerSizes sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

double forward(const Network& net, Coord coord);

struct Evaluation {
  double mse = 0.0;
  double fraction_recognized = 0.0;
};

/// Targets are +1 for color 1 and -1 for color 0; a pixel is recognized when
/// the output has the target's sign (an output of exactly 0 never is).
Evaluation evaluate(const Network& net, const BinaryImage& img);

struct LossGradient {
  Evaluation eval;
  std::vector<double> grad;  // d(mse)/d(param), same layout as Network::params
};

/// Full-batch backpropagation over every pixel. Evaluation is at the same
/// weights the gradient is taken at.
LossGradient loss_and_gradient(const Network& net, const BinaryImage& img);
std::vector<double> gradient(const Network& net, const BinaryImage& img);

// Weight CSV: header "layer,from,to,value"; layer is the destination layer
// (1-based), biases use from = -1. Values are written with 17 significant
// digits so a reload is exact.
void write_weights_csv(std::ostream& out, const Network& net);
Network read_weights_csv(std::istream& in);

}  // namespace probevo
