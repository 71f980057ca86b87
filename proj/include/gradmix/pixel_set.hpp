#pragma once

#include <span>
#include <vector>

#include "gradmix/raster.hpp"

namespace gradmix {

/// A set of in-frame pixel coordinates, kept sorted in row-major order
/// without duplicates.
class PixelSet {
 public:
  PixelSet() = default;
  explicit PixelSet(Frame frame) : frame_(frame) {}
  /// Sorts and deduplicates `points`. Throws if any point is out of frame.
  PixelSet(Frame frame, std::vector<Point> points);

  /// All nonzero pixels of `mask`, shifted by `origin` into `frame`.
  static PixelSet from_mask(const BinaryMask& mask, Frame frame,
                            Point origin = {0, 0});
  static PixelSet from_rect(Frame frame, const Rect& rect);

  Frame frame() const { return frame_; }
  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }
  bool contains(Point p) const;
  std::span<const Point> points() const { return points_; }
  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }

  /// Tight bounding rectangle; empty Rect for the empty set.
  Rect bounds() const;

  /// Rasterizes the set restricted to `rect` into a rect-sized mask.
  BinaryMask to_mask(const Rect& rect) const;

  bool intersects(const PixelSet& other) const;

  bool operator==(const PixelSet& other) const {
    return frame_ == other.frame_ && points_ == other.points_;
  }

 private:
  Frame frame_;
  std::vector<Point> points_;
};

PixelSet set_union(const PixelSet& a, const PixelSet& b);
PixelSet set_difference(const PixelSet& a, const PixelSet& b);
PixelSet set_intersection(const PixelSet& a, const PixelSet& b);

}  // namespace gradmix
