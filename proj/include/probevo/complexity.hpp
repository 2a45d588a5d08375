#pragma once

// Linguistic complexity of symbol strings and binary images.
//
// The vocabulary usage of a word size is the number of distinct words present
// divided by the number of words that could possibly be present, which is
// bounded both by the alphabet (|alphabet|^k) and by the number of positions
// (L - k + 1). Complexity is the product of usages over every word size. For
// images, words are axis-aligned, non-wrapping h x w windows.
//
// Products over hundreds of factors underflow, so scores carry their natural
// log; ordering comparisons must use log_value.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "probevo/image.hpp"

namespace probevo {

class SymbolString {
 public:
  SymbolString(std::vector<std::uint32_t> symbols, std::uint32_t alphabet_size);

  /// Each character is a symbol; alphabet is '0'..'0'+alphabet_size-1.
  static SymbolString from_digits(std::string_view digits, std::uint32_t alphabet_size = 2);

  std::size_t length() const { return symbols_.size(); }
  std::uint32_t alphabet_size() const { return alphabet_size_; }
  const std::vector<std::uint32_t>& symbols() const { return symbols_; }

 private:
  std::vector<std::uint32_t> symbols_;
  std::uint32_t alphabet_size_;
};

struct Complexity {
  double log_value = 0.0;

  double value() const;

  friend bool operator==(Complexity, Complexity) = default;
  friend auto operator<=>(Complexity a, Complexity b) { return a.log_value <=> b.log_value; }
};

/// One factor of the complexity product. For strings `height` is 1.
struct UsageEntry {
  std::size_t height = 1;
  std::size_t width = 1;
  std::uint64_t distinct = 0;
  std::uint64_t possible = 0;

  double usage() const { return static_cast<double>(distinct) / static_cast<double>(possible); }
  double log_usage() const;
};

using UsageProfile = std::vector<UsageEntry>;

enum class WindowShapes { kAllRectangles, kSquaresOnly };

WindowShapes parse_window_shapes(std::string_view text);
std::string_view to_string(WindowShapes shapes);

/// min(alphabet^cells, positions), saturating instead of overflowing.
std::uint64_t possible_words(std::uint64_t alphabet_size, std::uint64_t cells,
                             std::uint64_t positions);

// --- 1-D ---------------------------------------------------------------------

std::uint64_t count_distinct_words(const SymbolString& s, std::size_t k);
double vocabulary_usage_1d(const SymbolString& s, std::size_t k);
UsageProfile usage_profile_1d(const SymbolString& s);
Complexity complexity_1d(const SymbolString& s);

// --- 2-D ---------------------------------------------------------------------

std::uint64_t count_distinct_windows(const BinaryImage& img, std::size_t h, std::size_t w);
double vocabulary_usage_2d(const BinaryImage& img, std::size_t h, std::size_t w);

/// Factors in row-major shape order: (1,1), (1,2), ..., (H,W).
UsageProfile usage_profile_2d(const BinaryImage& img,
                              WindowShapes shapes = WindowShapes::kAllRectangles);

/// Window-shape kernel; widths are distributed over OpenMP threads when built
/// with OpenMP. Safe to call from inside another parallel region.
Complexity complexity_2d(const BinaryImage& img,
                         WindowShapes shapes = WindowShapes::kAllRectangles);

/// Single-threaded reference: hashes each window's row-major packed bits.
/// Slower than complexity_2d but structurally independent of it; the two must
/// agree bit for bit.
Complexity complexity_2d_serial(const BinaryImage& img,
                                WindowShapes shapes = WindowShapes::kAllRectangles);

}  // namespace probevo
