#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gradmix/error.hpp"

namespace gradmix {

struct Point {
  int row = 0;
  int col = 0;

  auto operator<=>(const Point&) const = default;
};

struct Frame {
  int height = 0;
  int width = 0;

  bool contains(Point p) const {
    return p.row >= 0 && p.col >= 0 && p.row < height && p.col < width;
  }
  std::size_t area() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  bool operator==(const Frame&) const = default;
};

/// Half-open axis-aligned rectangle: rows [top, top + height), cols
/// [left, left + width).
struct Rect {
  int top = 0;
  int left = 0;
  int height = 0;
  int width = 0;

  bool empty() const { return height <= 0 || width <= 0; }
  int bottom() const { return top + height; }  // exclusive
  int right() const { return left + width; }   // exclusive
  bool contains(Point p) const {
    return p.row >= top && p.col >= left && p.row < bottom() && p.col < right();
  }
  std::size_t area() const {
    return empty() ? 0 : static_cast<std::size_t>(height) * width;
  }
  Frame frame() const { return {height, width}; }
  Point to_local(Point p) const { return {p.row - top, p.col - left}; }
  Point to_global(Point p) const { return {p.row + top, p.col + left}; }
  bool operator==(const Rect&) const = default;
};

Rect bounding_union(const Rect& a, const Rect& b);
Rect intersect(const Rect& a, const Rect& b);
Rect expand(const Rect& r, int margin);
inline Rect full_rect(Frame f) { return {0, 0, f.height, f.width}; }

template <typename T>
class Raster {
 public:
  Raster() = default;
  Raster(int height, int width, T fill = T{})
      : height_(height), width_(width) {
    if (height < 0 || width < 0) throw Error("negative raster dimensions");
    pixels_.assign(static_cast<std::size_t>(height) * width, fill);
  }
  explicit Raster(Frame f, T fill = T{}) : Raster(f.height, f.width, fill) {}

  int height() const { return height_; }
  int width() const { return width_; }
  Frame frame() const { return {height_, width_}; }
  std::size_t size() const { return pixels_.size(); }

  T& operator()(int row, int col) { return pixels_[index(row, col)]; }
  const T& operator()(int row, int col) const {
    return pixels_[index(row, col)];
  }
  T& operator[](Point p) { return (*this)(p.row, p.col); }
  const T& operator[](Point p) const { return (*this)(p.row, p.col); }

  std::span<T> row(int r) {
    return {pixels_.data() + static_cast<std::size_t>(r) * width_,
            static_cast<std::size_t>(width_)};
  }
  std::span<const T> row(int r) const {
    return {pixels_.data() + static_cast<std::size_t>(r) * width_,
            static_cast<std::size_t>(width_)};
  }
  std::span<T> pixels() { return pixels_; }
  std::span<const T> pixels() const { return pixels_; }

  bool operator==(const Raster&) const = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width_ + col;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<T> pixels_;
};

/// Copies `rect` (which must lie inside the raster) into a new raster.
template <typename T>
Raster<T> crop(const Raster<T>& src, const Rect& rect) {
  if (intersect(rect, full_rect(src.frame())) != rect)
    throw Error("crop rectangle outside raster");
  Raster<T> out(rect.height, rect.width);
  for (int r = 0; r < rect.height; ++r) {
    auto in = src.row(rect.top + r).subspan(rect.left, rect.width);
    std::copy(in.begin(), in.end(), out.row(r).begin());
  }
  return out;
}

template <typename T>
void paste(Raster<T>& dst, const Raster<T>& patch, Point origin) {
  const Rect rect{origin.row, origin.col, patch.height(), patch.width()};
  if (intersect(rect, full_rect(dst.frame())) != rect)
    throw Error("paste rectangle outside raster");
  for (int r = 0; r < patch.height(); ++r) {
    auto in = patch.row(r);
    std::copy(in.begin(), in.end(),
              dst.row(origin.row + r).begin() + origin.col);
  }
}

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  std::uint8_t operator[](int channel) const {
    return channel == 0 ? r : channel == 1 ? g : b;
  }
  std::uint8_t& operator[](int channel) {
    return channel == 0 ? r : channel == 1 ? g : b;
  }
  bool operator==(const Rgb&) const = default;
};

using RgbImage = Raster<Rgb>;
using BinaryMask = Raster<std::uint8_t>;

/// Real-valued per-channel colour (r, g, b).
using Color = std::array<double, 3>;

/// Round half away from zero. The single rounding rule used for every
/// real-to-integer conversion in the library.
double round_half_away(double v);

/// round_half_away followed by clamping to [0, 255].
std::uint8_t to_channel(double v);

}  // namespace gradmix
