#pragma once

#include <vector>

#include "gradmix/pixel_set.hpp"
#include "gradmix/raster.hpp"

namespace gradmix {

/// Fill `hole` from its surroundings. `radius` is the neighbourhood radius
/// of the per-pixel estimator.
struct InpaintProblem {
  RgbImage image;
  PixelSet hole;
  int radius = 5;
};

/// Result of a fast-marching fill together with the arrival-time field and
/// the order in which hole pixels were finalized.
struct InpaintTrace {
  RgbImage image;
  Raster<double> arrival;  // 0 outside the hole
  std::vector<Point> order;
};

InpaintTrace inpaint_traced(const InpaintProblem& problem);

inline RgbImage inpaint(const InpaintProblem& problem) {
  return inpaint_traced(problem).image;
}

struct Gradient {
  double drow = 0.0;
  double dcol = 0.0;
};

/// Weighted first-order estimate of `target` from the pixels flagged in
/// `known` within Euclidean distance `radius`. Each contributor q adds
/// I(q) + grad I(q) . (target - q), weighted by
///   direction  |cos angle(target - q, grad_t)|  (1 when grad_t is zero)
///   distance   1 / |target - q|^2
///   level set  1 / (1 + |T(target) - T(q)|)
/// The image gradient at q uses central differences over known pixels,
/// one-sided differences where only one side is known, and 0 otherwise.
/// Throws "starved estimator" when no known pixel lies within radius.
Color pixel_estimate(const RgbImage& image, const BinaryMask& known,
                     Point target, Gradient grad_t,
                     const Raster<double>& arrival, int radius);

}  // namespace gradmix
