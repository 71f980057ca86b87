#pragma once

#include <cstdint>
#include <optional>

#include "gradmix/dataset.hpp"
#include "gradmix/pixel_set.hpp"
#include "gradmix/raster.hpp"

namespace gradmix {

/// Binary dilation with a 3x3 square kernel applied `iterations` times,
/// i.e. every pixel within Chebyshev distance `iterations` of the mask,
/// clipped to the mask's frame.
PixelSet dilate(const PixelSet& mask, int iterations);

/// Exact Euclidean distance from every pixel of a frame to its nearest
/// source pixel.
struct DistanceField {
  Raster<double> values;
  PixelSet source;
};

/// Two-pass exact transform (lower envelope of parabolas along columns, then
/// rows). Squared distances are integers and are computed exactly; the
/// square root is taken last. Throws on an empty source.
DistanceField min_distance_field(Frame frame, const PixelSet& source);

/// Arithmetic mean of the coordinates. Throws on an empty mask.
Centroid centroid(const PixelSet& mask);

struct Offset {
  int drow = 0;
  int dcol = 0;
  bool operator==(const Offset&) const = default;
};

/// Integer shift that moves `from` onto `to`, rounded per axis half away
/// from zero.
Offset centroid_offset(const Centroid& from, const Centroid& to);

/// Shifts every pixel by `offset` into `frame`. Returns nullopt (the
/// out-of-frame signal) if any shifted pixel falls outside; nothing is
/// clipped.
std::optional<PixelSet> translate_footprint(const PixelSet& mask, Offset offset,
                                            Frame frame);

/// Unrounded per-channel mean over `region`. Throws on an empty region.
Color mean_color(const RgbImage& image, const PixelSet& region);

/// Adds `delta` to every pixel in `region`, then rounds and clamps.
RgbImage shift_color(RgbImage image, const PixelSet& region, const Color& delta);

}  // namespace gradmix
