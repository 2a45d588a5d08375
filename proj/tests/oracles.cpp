#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace oracle {

namespace {
double possible(std::size_t cells, std::size_t positions) {
  const double by_alphabet = std::pow(2.0, static_cast<double>(cells));
  return std::min(by_alphabet, static_cast<double>(positions));
}
}  // namespace

double log_complexity_1d(const std::string& s) {
  double total = 0.0;
  const std::size_t n = s.size();
  for (std::size_t k = 1; k <= n; ++k) {
    std::set<std::string> words;
    for (std::size_t i = 0; i + k <= n; ++i) words.insert(s.substr(i, k));
    total += std::log(static_cast<double>(words.size())) - std::log(possible(k, n - k + 1));
  }
  return total;
}

std::size_t distinct_windows(const probevo::BinaryImage& img, std::size_t h, std::size_t w) {
  std::set<std::string> seen;
  for (std::size_t r = 0; r + h <= img.height(); ++r) {
    for (std::size_t c = 0; c + w <= img.width(); ++c) {
      std::string key;
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) key.push_back(img.at(r + i, c + j) ? '1' : '0');
      seen.insert(key);
    }
  }
  return seen.size();
}

double log_complexity_2d(const probevo::BinaryImage& img, bool squares_only) {
  double total = 0.0;
  for (std::size_t h = 1; h <= img.height(); ++h) {
    for (std::size_t w = 1; w <= img.width(); ++w) {
      if (squares_only && h != w) continue;
      const std::size_t positions = (img.height() - h + 1) * (img.width() - w + 1);
      total += std::log(static_cast<double>(distinct_windows(img, h, w))) -
               std::log(possible(h * w, positions));
    }
  }
  return total;
}

double output(const probevo::Network& net, double x, double y) {
  const auto& sizes = net.layer_sizes();
  std::vector<double> act{x, y};
  for (std::size_t l = 1; l < sizes.layers(); ++l) {
    std::vector<double> next(sizes[l]);
    for (std::size_t j = 0; j < sizes[l]; ++j) {
      double z = net.bias(l, j);
      for (std::size_t i = 0; i < sizes[l - 1]; ++i) z += net.weight(l, i, j) * act[i];
      next[j] = 1.7159 * std::tanh(2.0 / 3.0 * z);
    }
    act = std::move(next);
  }
  return act[0];
}

Eval evaluate(const probevo::Network& net, const probevo::BinaryImage& img) {
  double sq = 0.0;
  double hits = 0.0;
  const double H = static_cast<double>(img.height());
  const double W = static_cast<double>(img.width());
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t c = 0; c < img.width(); ++c) {
      const double x = W > 1 ? 2.0 * static_cast<double>(c) / (W - 1) - 1.0 : 0.0;
      const double y = H > 1 ? 2.0 * static_cast<double>(r) / (H - 1) - 1.0 : 0.0;
      const double t = img.at(r, c) ? 1.0 : -1.0;
      const double o = output(net, x, y);
      sq += (o - t) * (o - t);
      if (o * t > 0.0) hits += 1.0;
    }
  }
  return {sq / (H * W), hits / (H * W)};
}

std::vector<double> fd_gradient(const probevo::Network& net, const probevo::BinaryImage& img,
                                double step) {
  std::vector<double> grad(net.param_count());
  for (std::size_t i = 0; i < grad.size(); ++i) {
    probevo::Network plus = net;
    probevo::Network minus = net;
    plus.params()[i] += step;
    minus.params()[i] -= step;
    grad[i] = (oracle::evaluate(plus, img).mse - oracle::evaluate(minus, img).mse) / (2.0 * step);
  }
  return grad;
}

probevo::BinaryImage random_image(std::size_t h, std::size_t w, std::mt19937_64& rng) {
  std::bernoulli_distribution bit(0.5);
  probevo::BinaryImage img(h, w);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) img.set(r, c, bit(rng));
  return img;
}

probevo::BinaryImage half_plane(std::size_t h, std::size_t w) {
  probevo::BinaryImage img(h, w);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = w / 2; c < w; ++c) img.set(r, c, 1);
  return img;
}

}  // namespace oracle
