#include "gradmix/pixel_set.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

namespace gradmix {

double round_half_away(double v) { return std::round(v); }

std::uint8_t to_channel(double v) {
  const double r = round_half_away(v);
  return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

Rect bounding_union(const Rect& a, const Rect& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  const int top = std::min(a.top, b.top);
  const int left = std::min(a.left, b.left);
  return {top, left, std::max(a.bottom(), b.bottom()) - top,
          std::max(a.right(), b.right()) - left};
}

Rect intersect(const Rect& a, const Rect& b) {
  const int top = std::max(a.top, b.top);
  const int left = std::max(a.left, b.left);
  const int bottom = std::min(a.bottom(), b.bottom());
  const int right = std::min(a.right(), b.right());
  if (bottom <= top || right <= left) return {};
  return {top, left, bottom - top, right - left};
}

Rect expand(const Rect& r, int margin) {
  return {r.top - margin, r.left - margin, r.height + 2 * margin,
          r.width + 2 * margin};
}

PixelSet::PixelSet(Frame frame, std::vector<Point> points)
    : frame_(frame), points_(std::move(points)) {
  for (const Point& p : points_)
    if (!frame_.contains(p)) throw Error("pixel outside frame");
  std::sort(points_.begin(), points_.end());
  points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
}

PixelSet PixelSet::from_mask(const BinaryMask& mask, Frame frame,
                             Point origin) {
  std::vector<Point> pts;
  for (int r = 0; r < mask.height(); ++r) {
    auto row = mask.row(r);
    for (int c = 0; c < mask.width(); ++c)
      if (row[c]) pts.push_back({r + origin.row, c + origin.col});
  }
  // Row-major traversal already yields sorted unique points.
  PixelSet out(frame);
  for (const Point& p : pts)
    if (!frame.contains(p)) throw Error("pixel outside frame");
  out.points_ = std::move(pts);
  return out;
}

PixelSet PixelSet::from_rect(Frame frame, const Rect& rect) {
  std::vector<Point> pts;
  pts.reserve(rect.area());
  for (int r = rect.top; r < rect.bottom(); ++r)
    for (int c = rect.left; c < rect.right(); ++c) pts.push_back({r, c});
  return PixelSet(frame, std::move(pts));
}

bool PixelSet::contains(Point p) const {
  return std::binary_search(points_.begin(), points_.end(), p);
}

Rect PixelSet::bounds() const {
  if (points_.empty()) return {};
  int top = points_.front().row;
  int bottom = points_.back().row;
  int left = points_.front().col;
  int right = left;
  for (const Point& p : points_) {
    left = std::min(left, p.col);
    right = std::max(right, p.col);
  }
  return {top, left, bottom - top + 1, right - left + 1};
}

BinaryMask PixelSet::to_mask(const Rect& rect) const {
  BinaryMask mask(rect.height, rect.width, 0);
  for (const Point& p : points_)
    if (rect.contains(p)) mask[rect.to_local(p)] = 1;
  return mask;
}

bool PixelSet::intersects(const PixelSet& other) const {
  auto a = points_.begin();
  auto b = other.points_.begin();
  while (a != points_.end() && b != other.points_.end()) {
    if (*a < *b) {
      ++a;
    } else if (*b < *a) {
      ++b;
    } else {
      return true;
    }
  }
  return false;
}

namespace {

template <typename Op>
PixelSet combine(const PixelSet& a, const PixelSet& b, Op op) {
  if (!(a.frame() == b.frame())) throw Error("pixel sets use different frames");
  std::vector<Point> out;
  op(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return PixelSet(a.frame(), std::move(out));
}

}  // namespace

PixelSet set_union(const PixelSet& a, const PixelSet& b) {
  return combine(a, b, [](auto... args) { std::set_union(args...); });
}

PixelSet set_difference(const PixelSet& a, const PixelSet& b) {
  return combine(a, b, [](auto... args) { std::set_difference(args...); });
}

PixelSet set_intersection(const PixelSet& a, const PixelSet& b) {
  return combine(a, b, [](auto... args) { std::set_intersection(args...); });
}

}  // namespace gradmix
