#pragma once

// Brute-force reference computations used as test oracles. None of these
// call into the library's complexity kernels or backpropagation.

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "probevo/image.hpp"
#include "probevo/network.hpp"

namespace oracle {

/// Log of the 1-D complexity of a binary digit string via std::set of substrings.
double log_complexity_1d(const std::string& s);

/// Number of distinct h x w windows, each serialized to a string.
std::size_t distinct_windows(const probevo::BinaryImage& img, std::size_t h, std::size_t w);

/// Log of the 2-D complexity over all rectangular shapes (or squares only).
double log_complexity_2d(const probevo::BinaryImage& img, bool squares_only = false);

/// Network output by explicit neuron-by-neuron summation via weight()/bias().
double output(const probevo::Network& net, double x, double y);

struct Eval {
  double mse;
  double fraction;
};
Eval evaluate(const probevo::Network& net, const probevo::BinaryImage& img);

/// Central finite differences of the mse.
std::vector<double> fd_gradient(const probevo::Network& net, const probevo::BinaryImage& img,
                                double step = 1e-5);

probevo::BinaryImage random_image(std::size_t h, std::size_t w, std::mt19937_64& rng);

/// Left half 0, right half 1 (column c is 1 iff c >= width/2).
probevo::BinaryImage half_plane(std::size_t h, std::size_t w);

}  // namespace oracle
