#include "probevo/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>


namespace probevo {

SymbolString::SymbolString(std::vector<std::uint32_t> symbols, std::uint32_t alphabet_size)
    : symbols_(std::move(symbols)), alphabet_size_(alphabet_size) {
  if (alphabet_size_ == 0) throw std::invalid_argument("alphabet size must be positive");
  if (symbols_.empty()) throw std::invalid_argument("symbol string must be non-empty");
  for (auto s : symbols_) {
    if (s >= alphabet_size_) throw std::invalid_argument("symbol outside alphabet");
  }
}

SymbolString SymbolString::from_digits(std::string_view digits, std::uint32_t alphabet_size) {
  std::vector<std::uint32_t> symbols;
  symbols.reserve(digits.size());
  for (char ch : digits) {
    if (ch < '0') throw std::invalid_argument("bad symbol character");
    symbols.push_back(static_cast<std::uint32_t>(ch - '0'));
  }
  return SymbolString(std::move(symbols), alphabet_size);
}

double Complexity::value() const { return std::exp(log_value); }

double UsageEntry::log_usage() const {
  return std::log(static_cast<double>(distinct)) - std::log(static_cast<double>(possible));
}

WindowShapes parse_window_shapes(std::string_view text) {
  if (text == "all" || text == "rectangles") return WindowShapes::kAllRectangles;
  if (text == "squares") return WindowShapes::kSquaresOnly;
  throw std::invalid_argument("window shapes must be 'all' or 'squares', got '" +
                              std::string(text) + "'");
}

std::string_view to_string(WindowShapes shapes) {
  return shapes == WindowShapes::kSquaresOnly ? "squares" : "all";
}

std::uint64_t possible_words(std::uint64_t alphabet_size, std::uint64_t cells,
                             std::uint64_t positions) {
  std::uint64_t bound = 1;
  for (std::uint64_t i = 0; i < cells && bound < positions; ++i) {
    bound *= alphabet_size;
    if (alphabet_size <= 1) break;
  }
  return std::min(bound, positions);
}

namespace {

// Replaces keys[i] by the dense rank of keys[i] among the distinct keys and
// returns the number of distinct keys. Equal keys get equal ranks.
std::uint32_t rank_in_place(std::vector<std::uint64_t>& keys,
                            std::vector<std::uint64_t>& sorted) {
  sorted.assign(keys.begin(), keys.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (auto& k : keys) {
    k = static_cast<std::uint64_t>(std::lower_bound(sorted.begin(), sorted.end(), k) -
                                   sorted.begin());
  }
  return static_cast<std::uint32_t>(sorted.size());
}

std::uint64_t pair_key(std::uint64_t hi, std::uint64_t lo) { return (hi << 32) | lo; }

void check_window(const BinaryImage& img, std::size_t h, std::size_t w) {
  if (h < 1 || h > img.height() || w < 1 || w > img.width()) {
    throw std::invalid_argument("window " + std::to_string(h) + "x" + std::to_string(w) +
                                " out of range for " + format_dims(img.dims()) + " image");
  }
}

bool shape_wanted(WindowShapes shapes, std::size_t h, std::size_t w) {
  return shapes == WindowShapes::kAllRectangles || h == w;
}

// Distinct-window counts for every height at one width, by iterated naming:
// a width-w row slice is named by (name of its width-(w-1) prefix, last pixel),
// and an h x w window by (name of its top (h-1) x w block, name of its bottom
// slice). Names are dense ranks, so two windows share a name iff their pixels
// are identical. counts[(h-1)*W + (w-1)] receives the result; 0 = not wanted.
void width_pass(const BinaryImage& img, std::size_t w, WindowShapes shapes,
                std::vector<std::uint64_t>& counts) {
  const std::size_t H = img.height();
  const std::size_t W = img.width();
  std::vector<std::uint64_t> slices(img.pixels().begin(), img.pixels().end());
  std::vector<std::uint64_t> sorted;
  std::uint32_t slice_names = 0;
  std::size_t cols = W;
  if (w == 1) {
    slice_names = rank_in_place(slices, sorted);
  }
  for (std::size_t k = 2; k <= w; ++k) {
    const std::size_t next_cols = W - k + 1;
    std::vector<std::uint64_t> keys(H * next_cols);
    for (std::size_t r = 0; r < H; ++r)
      for (std::size_t c = 0; c < next_cols; ++c)
        keys[r * next_cols + c] = pair_key(slices[r * cols + c], img.at(r, c + k - 1));
    slice_names = rank_in_place(keys, sorted);
    slices = std::move(keys);
    cols = next_cols;
  }

  if (shape_wanted(shapes, 1, w)) counts[w - 1] = slice_names;
  const std::size_t max_h = shapes == WindowShapes::kSquaresOnly ? std::min(w, H) : H;
  std::vector<std::uint64_t> windows = slices;
  for (std::size_t h = 2; h <= max_h; ++h) {
    const std::size_t rows = H - h + 1;
    windows.resize(rows * cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c)
        windows[r * cols + c] =
            pair_key(windows[r * cols + c], slices[(r + h - 1) * cols + c]);
    const std::uint32_t distinct = rank_in_place(windows, sorted);
    if (shape_wanted(shapes, h, w)) counts[(h - 1) * W + (w - 1)] = distinct;
  }
}

std::vector<std::uint64_t> distinct_counts(const BinaryImage& img, WindowShapes shapes) {
  const std::size_t W = img.width();
  std::vector<std::uint64_t> counts(img.height() * W, 0);
  const long widths = static_cast<long>(W);
#pragma omp parallel for schedule(dynamic) if (widths > 1)
  for (long w = widths; w >= 1; --w) {
    width_pass(img, static_cast<std::size_t>(w), shapes, counts);
  }
  return counts;
}

UsageEntry make_entry(const BinaryImage& img, std::size_t h, std::size_t w,
                      std::uint64_t distinct) {
  const std::uint64_t positions = (img.height() - h + 1) * (img.width() - w + 1);
  return {h, w, distinct, possible_words(2, h * w, positions)};
}

// Row-major bits of the h x w window at (r, c), packed 64 per word.
std::vector<std::uint64_t> pack_window(const BinaryImage& img, std::size_t r, std::size_t c,
                                       std::size_t h, std::size_t w) {
  std::vector<std::uint64_t> words((h * w + 63) / 64, 0);
  std::size_t bit = 0;
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j, ++bit)
      if (img.at(r + i, c + j)) words[bit / 64] |= std::uint64_t{1} << (bit % 64);
  return words;
}

std::uint64_t count_packed(const BinaryImage& img, std::size_t h, std::size_t w) {
  std::vector<std::vector<std::uint64_t>> patterns;
  patterns.reserve((img.height() - h + 1) * (img.width() - w + 1));
  for (std::size_t r = 0; r + h <= img.height(); ++r)
    for (std::size_t c = 0; c + w <= img.width(); ++c)
      patterns.push_back(pack_window(img, r, c, h, w));
  std::sort(patterns.begin(), patterns.end());
  return static_cast<std::uint64_t>(
      std::unique(patterns.begin(), patterns.end()) - patterns.begin());
}

// Summed smallest first, so the result depends only on the multiset of
// factors (e.g. transposing an image permutes them without changing the sum).
Complexity sum_factors(std::vector<double> logs) {
  std::sort(logs.begin(), logs.end());
  Complexity c;
  for (double v : logs) c.log_value += v;
  return c;
}

}  // namespace

std::uint64_t count_distinct_words(const SymbolString& s, std::size_t k) {
  if (k < 1 || k > s.length()) {
    throw std::invalid_argument("word length " + std::to_string(k) + " out of range for length " +
                                std::to_string(s.length()));
  }
  const auto& sym = s.symbols();
  std::vector<std::uint64_t> names(sym.begin(), sym.end());
  std::vector<std::uint64_t> sorted;
  std::uint32_t distinct = rank_in_place(names, sorted);
  for (std::size_t len = 2; len <= k; ++len) {
    names.pop_back();
    for (std::size_t i = 0; i < names.size(); ++i) names[i] = pair_key(names[i], sym[i + len - 1]);
    distinct = rank_in_place(names, sorted);
  }
  return distinct;
}

double vocabulary_usage_1d(const SymbolString& s, std::size_t k) {
  const std::uint64_t distinct = count_distinct_words(s, k);
  return static_cast<double>(distinct) /
         static_cast<double>(possible_words(s.alphabet_size(), k, s.length() - k + 1));
}

UsageProfile usage_profile_1d(const SymbolString& s) {
  UsageProfile profile;
  profile.reserve(s.length());
  for (std::size_t k = 1; k <= s.length(); ++k) {
    profile.push_back({1, k, count_distinct_words(s, k),
                       possible_words(s.alphabet_size(), k, s.length() - k + 1)});
  }
  return profile;
}

Complexity complexity_1d(const SymbolString& s) {
  std::vector<double> logs;
  for (const auto& e : usage_profile_1d(s)) logs.push_back(e.log_usage());
  return sum_factors(std::move(logs));
}

std::uint64_t count_distinct_windows(const BinaryImage& img, std::size_t h, std::size_t w) {
  check_window(img, h, w);
  return count_packed(img, h, w);
}

double vocabulary_usage_2d(const BinaryImage& img, std::size_t h, std::size_t w) {
  check_window(img, h, w);
  return make_entry(img, h, w, count_packed(img, h, w)).usage();
}

UsageProfile usage_profile_2d(const BinaryImage& img, WindowShapes shapes) {
  const auto counts = distinct_counts(img, shapes);
  UsageProfile profile;
  for (std::size_t h = 1; h <= img.height(); ++h)
    for (std::size_t w = 1; w <= img.width(); ++w)
      if (shape_wanted(shapes, h, w))
        profile.push_back(make_entry(img, h, w, counts[(h - 1) * img.width() + (w - 1)]));
  return profile;
}

Complexity complexity_2d(const BinaryImage& img, WindowShapes shapes) {
  std::vector<double> logs;
  for (const auto& e : usage_profile_2d(img, shapes)) logs.push_back(e.log_usage());
  return sum_factors(std::move(logs));
}

Complexity complexity_2d_serial(const BinaryImage& img, WindowShapes shapes) {
  std::vector<double> logs;
  for (std::size_t h = 1; h <= img.height(); ++h)
    for (std::size_t w = 1; w <= img.width(); ++w)
      if (shape_wanted(shapes, h, w))
        logs.push_back(make_entry(img, h, w, count_packed(img, h, w)).log_usage());
  return sum_factors(std::move(logs));
}

}  // namespace probevo
