#include "probevo/image.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace probevo {

Dims parse_dims(const std::string& text) {
  const auto sep = text.find_first_of("xX");
  if (sep == std::string::npos) {
    throw std::invalid_argument("dims must look like HxW, got '" + text + "'");
  }
  auto parse = [&](std::string_view part) {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc{} || ptr != part.data() + part.size() || value == 0) {
      throw std::invalid_argument("bad dimension in '" + text + "'");
    }
    return value;
  };
  std::string_view view(text);
  return {parse(view.substr(0, sep)), parse(view.substr(sep + 1))};
}

std::string format_dims(Dims dims) {
  return std::to_string(dims.height) + "x" + std::to_string(dims.width);
}

BinaryImage::BinaryImage(std::size_t height, std::size_t width, std::uint8_t fill)
    : height_(height), width_(width), pixels_(height * width, fill ? 1 : 0) {
  if (height == 0 || width == 0) {
    throw std::invalid_argument("image dimensions must be positive");
  }
}

BinaryImage BinaryImage::from_rows(const std::vector<std::string>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw std::invalid_argument("empty image rows");
  }
  BinaryImage img(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != img.width_) {
      throw std::invalid_argument("ragged image rows");
    }
    for (std::size_t c = 0; c < img.width_; ++c) {
      const char ch = rows[r][c];
      if (ch != '0' && ch != '1') {
        throw std::invalid_argument("image rows may only contain '0' and '1'");
      }
      img.set(r, c, ch == '1');
    }
  }
  return img;
}

BinaryImage BinaryImage::complement() const {
  BinaryImage out = *this;
  for (auto& p : out.pixels_) p ^= 1;
  return out;
}

BinaryImage BinaryImage::flip_horizontal() const {
  BinaryImage out = *this;
  for (std::size_t r = 0; r < height_; ++r) {
    auto row = out.pixels_.begin() + static_cast<std::ptrdiff_t>(r * width_);
    std::reverse(row, row + static_cast<std::ptrdiff_t>(width_));
  }
  return out;
}

BinaryImage BinaryImage::flip_vertical() const {
  BinaryImage out(height_, width_);
  for (std::size_t r = 0; r < height_; ++r)
    for (std::size_t c = 0; c < width_; ++c) out.set(height_ - 1 - r, c, at(r, c));
  return out;
}

BinaryImage BinaryImage::rotate_180() const {
  BinaryImage out = *this;
  std::reverse(out.pixels_.begin(), out.pixels_.end());
  return out;
}

BinaryImage BinaryImage::transpose() const {
  BinaryImage out(width_, height_);
  for (std::size_t r = 0; r < height_; ++r)
    for (std::size_t c = 0; c < width_; ++c) out.set(c, r, at(r, c));
  return out;
}

std::size_t BinaryImage::count_ones() const {
  return static_cast<std::size_t>(std::count(pixels_.begin(), pixels_.end(), 1));
}

std::size_t BinaryImage::hamming_distance(const BinaryImage& other) const {
  if (dims() != other.dims()) {
    throw std::invalid_argument("hamming distance needs equal dimensions");
  }
  std::size_t d = 0;
  for (std::size_t i = 0; i < pixels_.size(); ++i) d += pixels_[i] != other.pixels_[i];
  return d;
}

std::string BinaryImage::to_string() const {
  std::string s;
  s.reserve(height_ * (width_ + 1));
  for (std::size_t r = 0; r < height_; ++r) {
    for (std::size_t c = 0; c < width_; ++c) s.push_back(at(r, c) ? '1' : '0');
    s.push_back('\n');
  }
  return s;
}

void write_pbm(std::ostream& out, const BinaryImage& img) {
  out << "P1\n" << img.width() << ' ' << img.height() << '\n';
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t c = 0; c < img.width(); ++c) {
      if (c) out << ' ';
      out << (img.at(r, c) ? '1' : '0');
    }
    out << '\n';
  }
}

namespace {

// Reads the next whitespace-delimited token, skipping '#' comments.
bool next_token(std::istream& in, std::string& token) {
  token.clear();
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      while (in.get(ch) && ch != '\n') {
      }
      if (!token.empty()) return true;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!token.empty()) return true;
      continue;
    }
    token.push_back(ch);
  }
  return !token.empty();
}

std::size_t parse_size(const std::string& token) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size() || value == 0) {
    throw std::runtime_error("pbm: bad size field '" + token + "'");
  }
  return value;
}

}  // namespace

BinaryImage read_pbm(std::istream& in) {
  std::string token;
  if (!next_token(in, token) || token != "P1") {
    throw std::runtime_error("pbm: expected magic P1");
  }
  if (!next_token(in, token)) throw std::runtime_error("pbm: missing width");
  const std::size_t width = parse_size(token);
  if (!next_token(in, token)) throw std::runtime_error("pbm: missing height");
  const std::size_t height = parse_size(token);

  BinaryImage img(height, width);
  std::size_t filled = 0;
  const std::size_t total = height * width;
  // Plain PBM allows pixels without separating whitespace.
  while (filled < total && next_token(in, token)) {
    for (char ch : token) {
      if (ch != '0' && ch != '1') throw std::runtime_error("pbm: bad pixel '" + token + "'");
      if (filled == total) throw std::runtime_error("pbm: too many pixels");
      img.set(filled / width, filled % width, ch == '1');
      ++filled;
    }
  }
  if (filled != total) throw std::runtime_error("pbm: truncated pixel data");
  return img;
}

void save_pbm(const std::string& path, const BinaryImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_pbm(out, img);
  if (!out) throw std::runtime_error("write failed: " + path);
}

BinaryImage load_pbm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return read_pbm(in);
}

}  // namespace probevo
