#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace probevo {

struct Dims {
  std::size_t height = 20;
  std::size_t width = 20;

  bool operator==(const Dims&) const = default;
};

/// Parses "HxW" (e.g. "20x20").
Dims parse_dims(const std::string& text);
std::string format_dims(Dims dims);

/// H x W grid of binary pixels, stored row-major one byte per pixel.
class BinaryImage {
 public:
  BinaryImage() = default;
  BinaryImage(std::size_t height, std::size_t width, std::uint8_t fill = 0);
  explicit BinaryImage(Dims dims, std::uint8_t fill = 0)
      : BinaryImage(dims.height, dims.width, fill) {}

  /// Builds an image from rows of '0'/'1' characters. All rows must have equal
  /// length.
  static BinaryImage from_rows(const std::vector<std::string>& rows);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  Dims dims() const { return {height_, width_}; }
  std::size_t size() const { return pixels_.size(); }

  std::uint8_t at(std::size_t row, std::size_t col) const {
    return pixels_[row * width_ + col];
  }
  void set(std::size_t row, std::size_t col, std::uint8_t value) {
    pixels_[row * width_ + col] = value ? 1 : 0;
  }
  void flip(std::size_t row, std::size_t col) {
    pixels_[row * width_ + col] ^= 1;
  }

  const std::vector<std::uint8_t>& pixels() const { return pixels_; }

  BinaryImage complement() const;
  BinaryImage flip_horizontal() const;
  BinaryImage flip_vertical() const;
  BinaryImage rotate_180() const;
  BinaryImage transpose() const;

  std::size_t count_ones() const;
  std::size_t hamming_distance(const BinaryImage& other) const;

  std::string to_string() const;

  bool operator==(const BinaryImage&) const = default;
  auto operator<=>(const BinaryImage& other) const {
    if (auto c = height_ <=> other.height_; c != 0) return c;
    if (auto c = width_ <=> other.width_; c != 0) return c;
    return pixels_ <=> other.pixels_;
  }

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::uint8_t> pixels_;
};

// Plain PBM ("P1"). Comments ('#' to end of line) are skipped on read.
void write_pbm(std::ostream& out, const BinaryImage& img);
BinaryImage read_pbm(std::istream& in);
void save_pbm(const std::string& path, const BinaryImage& img);
BinaryImage load_pbm(const std::string& path);

}  // namespace probevo
