#include "gradmix/imageops.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace gradmix {

namespace {

// Marks, per line, every cell within `k` of a set cell. Works in place on a
// strided view of `mask`.
void dilate_line(std::uint8_t* line, int n, std::ptrdiff_t stride, int k,
                 std::vector<int>& prefix) {
  prefix.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + (line[i * stride] ? 1 : 0);
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - k);
    const int hi = std::min(n, i + k + 1);
    line[i * stride] = prefix[hi] - prefix[lo] > 0 ? 1 : 0;
  }
}

}  // namespace

PixelSet dilate(const PixelSet& mask, int iterations) {
  if (iterations < 0) throw Error("dilate: negative iteration count");
  if (iterations == 0 || mask.empty()) return mask;
  const Frame frame = mask.frame();
  const Rect box = intersect(expand(mask.bounds(), iterations), full_rect(frame));
  BinaryMask work = mask.to_mask(box);
  std::vector<int> prefix;
  for (int r = 0; r < work.height(); ++r)
    dilate_line(work.row(r).data(), work.width(), 1, iterations, prefix);
  for (int c = 0; c < work.width(); ++c)
    dilate_line(work.row(0).data() + c, work.height(), work.width(), iterations,
                prefix);
  return PixelSet::from_mask(work, frame, {box.top, box.left});
}

namespace {

constexpr double kFar = 1e20;

// Felzenszwalb-Huttenlocher 1-D squared distance transform of `f` (length n).
void edt_1d(const double* f, double* d, int n, std::vector<int>& v,
            std::vector<double>& z) {
  v.assign(static_cast<std::size_t>(n), 0);
  z.assign(static_cast<std::size_t>(n) + 1, 0.0);
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  auto intersection = [&](int q, int p) {
    return ((f[q] + static_cast<double>(q) * q) -
            (f[p] + static_cast<double>(p) * p)) /
           (2.0 * (q - p));
  };
  for (int q = 1; q < n; ++q) {
    double s = intersection(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = intersection(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

DistanceField min_distance_field(Frame frame, const PixelSet& source) {
  if (source.empty()) throw Error("distance to empty set");
  for (const Point& p : source)
    if (!frame.contains(p)) throw Error("distance source outside frame");

  const int h = frame.height;
  const int w = frame.width;
  Raster<double> sq(frame, kFar);
  for (const Point& p : source) sq[p] = 0.0;

  std::vector<double> in(static_cast<std::size_t>(std::max(h, w)));
  std::vector<double> out(in.size());
  std::vector<int> v;
  std::vector<double> z;
  for (int c = 0; c < w; ++c) {
    for (int r = 0; r < h; ++r) in[r] = sq(r, c);
    edt_1d(in.data(), out.data(), h, v, z);
    for (int r = 0; r < h; ++r) sq(r, c) = out[r];
  }
  for (int r = 0; r < h; ++r) {
    auto row = sq.row(r);
    std::copy(row.begin(), row.end(), in.begin());
    edt_1d(in.data(), out.data(), w, v, z);
    std::copy(out.begin(), out.begin() + w, row.begin());
  }

  DistanceField field{Raster<double>(frame), source};
  auto dst = field.values.pixels();
  auto src = sq.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::sqrt(src[i]);
  return field;
}

Centroid centroid(const PixelSet& mask) {
  if (mask.empty()) throw Error("centroid of empty mask");
  double sr = 0.0;
  double sc = 0.0;
  for (const Point& p : mask) {
    sr += p.row;
    sc += p.col;
  }
  const double n = static_cast<double>(mask.size());
  return {sr / n, sc / n};
}

Offset centroid_offset(const Centroid& from, const Centroid& to) {
  return {static_cast<int>(round_half_away(to.row - from.row)),
          static_cast<int>(round_half_away(to.col - from.col))};
}

std::optional<PixelSet> translate_footprint(const PixelSet& mask, Offset offset,
                                            Frame frame) {
  std::vector<Point> out;
  out.reserve(mask.size());
  for (const Point& p : mask) {
    const Point q{p.row + offset.drow, p.col + offset.dcol};
    if (!frame.contains(q)) return std::nullopt;
    out.push_back(q);
  }
  return PixelSet(frame, std::move(out));
}

Color mean_color(const RgbImage& image, const PixelSet& region) {
  if (region.empty()) throw Error("mean colour of empty region");
  Color sum{0.0, 0.0, 0.0};
  for (const Point& p : region) {
    const Rgb& px = image[p];
    sum[0] += px.r;
    sum[1] += px.g;
    sum[2] += px.b;
  }
  const double n = static_cast<double>(region.size());
  return {sum[0] / n, sum[1] / n, sum[2] / n};
}

RgbImage shift_color(RgbImage image, const PixelSet& region, const Color& delta) {
  if (delta[0] == 0.0 && delta[1] == 0.0 && delta[2] == 0.0) return image;
  for (const Point& p : region) {
    if (!image.frame().contains(p)) throw Error("shift_color: region outside image");
    Rgb& px = image[p];
    for (int ch = 0; ch < 3; ++ch) px[ch] = to_channel(px[ch] + delta[ch]);
  }
  return image;
}

}  // namespace gradmix
