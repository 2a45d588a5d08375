#include "probevo/network.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace probevo {

double activation(double x) { return kActivationScale * tanh_kernel(kActivationSlope * x); }

double activation_derivative(double x) {
  const double t = tanh_kernel(kActivationSlope * x);
  return kActivationScale * kActivationSlope * (1.0 - t * t);
}

LayerSizes::LayerSizes(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("network needs at least two layers");
  if (sizes_.front() != 2) throw std::invalid_argument("network input layer must have 2 neurons");
  if (sizes_.back() != 1) throw std::invalid_argument("network output layer must have 1 neuron");
  for (auto n : sizes_) {
    if (n == 0) throw std::invalid_argument("layer sizes must be positive");
  }
}

LayerSizes LayerSizes::parse(const std::string& text) {
  std::vector<std::size_t> sizes;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('-', start), text.size());
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + start, text.data() + end, value);
    if (ec != std::errc{} || ptr != text.data() + end) {
      throw std::invalid_argument("bad network configuration '" + text + "'");
    }
    sizes.push_back(value);
    start = end + 1;
  }
  return LayerSizes(std::move(sizes));
}

std::string LayerSizes::label() const {
  std::string out;
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(sizes_[i]);
  }
  return out;
}

std::size_t weight_count(const LayerSizes& sizes) {
  std::size_t total = 0;
  for (std::size_t l = 1; l < sizes.layers(); ++l) total += (sizes[l - 1] + 1) * sizes[l];
  return total;
}

Coord pixel_coord(Dims dims, std::size_t row, std::size_t col) {
  auto scale = [](std::size_t i, std::size_t n) {
    return n > 1 ? 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) - 1.0 : 0.0;
  };
  return {scale(col, dims.width), scale(row, dims.height)};
}

Network::Network(LayerSizes sizes) : sizes_(std::move(sizes)) {
  std::size_t offset = 0;
  for (std::size_t l = 1; l < sizes_.layers(); ++l) {
    offsets_.push_back(offset);
    offset += (sizes_[l - 1] + 1) * sizes_[l];
  }
  params_.assign(offset, 0.0);
}

Network::Network(LayerSizes sizes, std::vector<double> params) : Network(std::move(sizes)) {
  if (params.size() != params_.size()) {
    throw std::invalid_argument("parameter count does not match layer sizes");
  }
  params_ = std::move(params);
}

Network Network::random(const LayerSizes& sizes, std::mt19937_64& rng, double limit) {
  Network net(sizes);
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (auto& p : net.params_) p = dist(rng);
  return net;
}

double& Network::weight(std::size_t layer, std::size_t from, std::size_t to) {
  return params_[offsets_[layer - 1] + from * sizes_[layer] + to];
}
double Network::weight(std::size_t layer, std::size_t from, std::size_t to) const {
  return params_[offsets_[layer - 1] + from * sizes_[layer] + to];
}
double& Network::bias(std::size_t layer, std::size_t to) {
  return params_[offsets_[layer - 1] + sizes_[layer - 1] * sizes_[layer] + to];
}
double Network::bias(std::size_t layer, std::size_t to) const {
  return params_[offsets_[layer - 1] + sizes_[layer - 1] * sizes_[layer] + to];
}

bool Network::all_finite() const {
  for (double p : params_)
    if (!std::isfinite(p)) return false;
  return true;
}

namespace {

// Neuron-major activations for a whole batch of inputs: layer l holds
// sizes[l] rows of `n` values starting at base[l] * n.
struct BatchTrace {
  std::size_t n = 0;
  std::vector<std::size_t> base;
  std::vector<double> out;

  BatchTrace(const LayerSizes& sizes, std::size_t batch) : n(batch) {
    std::size_t total = 0;
    for (auto k : sizes.sizes()) {
      base.push_back(total);
      total += k;
    }
    out.assign(total * n, 0.0);
  }
  double* layer(std::size_t l) { return out.data() + base[l] * n; }
  const double* layer(std::size_t l) const { return out.data() + base[l] * n; }
};

void forward_batch(const Network& net, BatchTrace& trace) {
  const auto& sizes = net.layer_sizes();
  const auto params = net.params();
  const std::size_t n = trace.n;
  for (std::size_t l = 1; l < sizes.layers(); ++l) {
    const std::size_t fan_in = sizes[l - 1];
    const std::size_t fan_out = sizes[l];
    const double* w = params.data() + net.block_offset(l);
    const double* b = w + fan_in * fan_out;
    const double* in = trace.layer(l - 1);
    double* out = trace.layer(l);
    for (std::size_t j = 0; j < fan_out; ++j) {
      double* z = out + j * n;
      const double bias = b[j];
#pragma omp simd
      for (std::size_t p = 0; p < n; ++p) z[p] = bias;
      for (std::size_t i = 0; i < fan_in; ++i) {
        const double wij = w[i * fan_out + j];
        const double* a = in + i * n;
#pragma omp simd
        for (std::size_t p = 0; p < n; ++p) z[p] += wij * a[p];
      }
    }
    double* z = out;
    const std::size_t count = fan_out * n;
#pragma omp simd
    for (std::size_t k = 0; k < count; ++k) {
      z[k] = kActivationScale * tanh_kernel(kActivationSlope * z[k]);
    }
  }
}

// Derivative of the activation expressed through its output y = a*tanh(b*x).
inline double slope_from_output(double y) {
  const double t = y / kActivationScale;
  return kActivationScale * kActivationSlope * (1.0 - t * t);
}

// Inputs are the pixel coordinates in row-major pixel order.
BatchTrace image_trace(const LayerSizes& sizes, Dims dims) {
  BatchTrace trace(sizes, dims.height * dims.width);
  double* xs = trace.layer(0);
  double* ys = xs + trace.n;
  std::size_t p = 0;
  for (std::size_t r = 0; r < dims.height; ++r) {
    for (std::size_t c = 0; c < dims.width; ++c, ++p) {
      const Coord coord = pixel_coord(dims, r, c);
      xs[p] = coord.x;
      ys[p] = coord.y;
    }
  }
  return trace;
}

Evaluation score(const BatchTrace& trace, const BinaryImage& img, std::size_t output_layer) {
  const double* o = trace.layer(output_layer);
  const auto& pixels = img.pixels();
  double sq = 0.0;
  std::size_t hits = 0;
  for (std::size_t p = 0; p < trace.n; ++p) {
    const double t = pixels[p] ? 1.0 : -1.0;
    sq += (o[p] - t) * (o[p] - t);
    hits += pixels[p] ? o[p] > 0.0 : o[p] < 0.0;
  }
  const double n = static_cast<double>(trace.n);
  return {sq / n, static_cast<double>(hits) / n};
}

}  // namespace

double forward(const Network& net, Coord coord) {
  BatchTrace trace(net.layer_sizes(), 1);
  trace.out[0] = coord.x;
  trace.out[1] = coord.y;
  forward_batch(net, trace);
  return trace.out.back();
}

Evaluation evaluate(const Network& net, const BinaryImage& img) {
  BatchTrace trace = image_trace(net.layer_sizes(), img.dims());
  forward_batch(net, trace);
  return score(trace, img, net.layer_sizes().layers() - 1);
}

LossGradient loss_and_gradient(const Network& net, const BinaryImage& img) {
  const auto& sizes = net.layer_sizes();
  const std::size_t last = sizes.layers() - 1;
  BatchTrace trace = image_trace(sizes, img.dims());
  forward_batch(net, trace);

  LossGradient result;
  result.eval = score(trace, img, last);
  result.grad.assign(net.param_count(), 0.0);

  const std::size_t n = trace.n;
  const double scale = 2.0 / static_cast<double>(n);
  const auto& pixels = img.pixels();
  // delta[l] = d(mse)/d(pre-activation) of layer l, same layout as trace.
  std::vector<double> delta(trace.out.size(), 0.0);
  {
    const double* o = trace.layer(last);
    double* d = delta.data() + trace.base[last] * n;
    for (std::size_t p = 0; p < n; ++p) {
      const double t = pixels[p] ? 1.0 : -1.0;
      d[p] = scale * (o[p] - t) * slope_from_output(o[p]);
    }
  }

  const auto params = net.params();
  for (std::size_t l = last; l >= 1; --l) {
    const std::size_t fan_in = sizes[l - 1];
    const std::size_t fan_out = sizes[l];
    const std::size_t off = net.block_offset(l);
    double* gw = result.grad.data() + off;
    double* gb = gw + fan_in * fan_out;
    const double* w = params.data() + off;
    const double* d = delta.data() + trace.base[l] * n;
    const double* in = trace.layer(l - 1);
    double* d_in = delta.data() + trace.base[l - 1] * n;

    for (std::size_t j = 0; j < fan_out; ++j) {
      const double* dj = d + j * n;
      double sum = 0.0;
#pragma omp simd reduction(+ : sum)
      for (std::size_t p = 0; p < n; ++p) sum += dj[p];
      gb[j] = sum;
      for (std::size_t i = 0; i < fan_in; ++i) {
        const double* a = in + i * n;
        double dot = 0.0;
#pragma omp simd reduction(+ : dot)
        for (std::size_t p = 0; p < n; ++p) dot += a[p] * dj[p];
        gw[i * fan_out + j] = dot;
      }
    }
    if (l == 1) break;
    for (std::size_t i = 0; i < fan_in; ++i) {
      double* di = d_in + i * n;
      const double* a = in + i * n;
#pragma omp simd
      for (std::size_t p = 0; p < n; ++p) di[p] = 0.0;
      for (std::size_t j = 0; j < fan_out; ++j) {
        const double wij = w[i * fan_out + j];
        const double* dj = d + j * n;
#pragma omp simd
        for (std::size_t p = 0; p < n; ++p) di[p] += wij * dj[p];
      }
#pragma omp simd
      for (std::size_t p = 0; p < n; ++p) di[p] *= slope_from_output(a[p]);
    }
  }
  return result;
}

std::vector<double> gradient(const Network& net, const BinaryImage& img) {
  return loss_and_gradient(net, img).grad;
}

void write_weights_csv(std::ostream& out, const Network& net) {
  const auto& sizes = net.layer_sizes();
  char buf[64];
  out << "layer,from,to,value\n";
  auto emit = [&](std::size_t layer, long from, std::size_t to, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << layer << ',' << from << ',' << to << ',' << buf << '\n';
  };
  for (std::size_t l = 1; l < sizes.layers(); ++l) {
    for (std::size_t i = 0; i < sizes[l - 1]; ++i)
      for (std::size_t j = 0; j < sizes[l]; ++j)
        emit(l, static_cast<long>(i), j, net.weight(l, i, j));
    for (std::size_t j = 0; j < sizes[l]; ++j) emit(l, -1, j, net.bias(l, j));
  }
}

Network read_weights_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("layer,from,to,value", 0) != 0) {
    throw std::runtime_error("weights csv: missing header");
  }
  // (layer, from, to) -> value; layer sizes are inferred from the indices.
  std::map<std::tuple<std::size_t, long, std::size_t>, double> entries;
  std::vector<std::size_t> sizes{0};
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    std::string field[4];
    for (int k = 0; k < 4; ++k) {
      if (!std::getline(row, field[k], k < 3 ? ',' : '\n')) {
        throw std::runtime_error("weights csv: short row '" + line + "'");
      }
    }
    std::size_t layer = 0;
    std::size_t to = 0;
    long from = 0;
    try {
      layer = std::stoul(field[0]);
      from = std::stol(field[1]);
      to = std::stoul(field[2]);
    } catch (const std::exception&) {
      throw std::runtime_error("weights csv: bad index in '" + line + "'");
    }
    char* end = nullptr;
    const double value = std::strtod(field[3].c_str(), &end);
    if (layer == 0 || from < -1 || end == field[3].c_str()) {
      throw std::runtime_error("weights csv: bad row '" + line + "'");
    }
    if (sizes.size() <= layer) sizes.resize(layer + 1, 0);
    sizes[layer] = std::max(sizes[layer], to + 1);
    if (from >= 0) sizes[layer - 1] = std::max(sizes[layer - 1], static_cast<std::size_t>(from) + 1);
    entries[{layer, from, to}] = value;
  }
  Network net{LayerSizes(sizes)};
  if (entries.size() != net.param_count()) {
    throw std::runtime_error("weights csv: expected " + std::to_string(net.param_count()) +
                             " values, found " + std::to_string(entries.size()));
  }
  for (const auto& [key, value] : entries) {
    const auto [layer, from, to] = key;
    if (from < 0) {
      net.bias(layer, to) = value;
    } else {
      net.weight(layer, static_cast<std::size_t>(from), to) = value;
    }
  }
  return net;
}

}  // namespace probevo
