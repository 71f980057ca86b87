#include "gradmix/inpaint.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <tuple>

namespace gradmix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinDirection = 1e-6;

// Per-channel image gradient at q over known pixels.
std::array<Color, 2> image_gradient(const RgbImage& image,
                                    const BinaryMask& known, Point q) {
  const Frame f = image.frame();
  auto is_known = [&](Point p) { return f.contains(p) && known[p]; };
  std::array<Color, 2> g{};  // [0] = d/drow, [1] = d/dcol
  const Point steps[2][2] = {{{q.row - 1, q.col}, {q.row + 1, q.col}},
                             {{q.row, q.col - 1}, {q.row, q.col + 1}}};
  for (int axis = 0; axis < 2; ++axis) {
    const Point lo = steps[axis][0];
    const Point hi = steps[axis][1];
    const bool has_lo = is_known(lo);
    const bool has_hi = is_known(hi);
    for (int ch = 0; ch < 3; ++ch) {
      const double center = image[q][ch];
      if (has_lo && has_hi)
        g[axis][ch] = (image[hi][ch] - image[lo][ch]) / 2.0;
      else if (has_hi)
        g[axis][ch] = image[hi][ch] - center;
      else if (has_lo)
        g[axis][ch] = center - image[lo][ch];
    }
  }
  return g;
}

enum class State : std::uint8_t { kKnown, kBand, kInside };

// First-order upwind solution of |grad T| = 1 at p from frozen neighbours.
double solve_eikonal(const Raster<double>& t, const Raster<State>& state,
                     Point p) {
  const Frame f = t.frame();
  auto frozen = [&](int r, int c) {
    const Point q{r, c};
    return f.contains(q) && state[q] == State::kKnown ? t[q] : kInf;
  };
  const double a = std::min(frozen(p.row - 1, p.col), frozen(p.row + 1, p.col));
  const double b = std::min(frozen(p.row, p.col - 1), frozen(p.row, p.col + 1));
  if (a == kInf && b == kInf) return kInf;
  if (std::abs(a - b) >= 1.0) return std::min(a, b) + 1.0;
  return (a + b + std::sqrt(2.0 - (a - b) * (a - b))) / 2.0;
}

Gradient arrival_gradient(const Raster<double>& t, const Raster<State>& state,
                          Point p) {
  const Frame f = t.frame();
  auto usable = [&](Point q) {
    return f.contains(q) && state[q] != State::kInside && t[q] < kInf;
  };
  auto axis = [&](Point lo, Point hi) {
    const bool l = usable(lo);
    const bool h = usable(hi);
    if (l && h) return (t[hi] - t[lo]) / 2.0;
    if (h) return t[hi] - t[p];
    if (l) return t[p] - t[lo];
    return 0.0;
  };
  return {axis({p.row - 1, p.col}, {p.row + 1, p.col}),
          axis({p.row, p.col - 1}, {p.row, p.col + 1})};
}

}  // namespace

Color pixel_estimate(const RgbImage& image, const BinaryMask& known,
                     Point target, Gradient grad_t,
                     const Raster<double>& arrival, int radius) {
  const Frame f = image.frame();
  const double gnorm = std::hypot(grad_t.drow, grad_t.dcol);
  const double t_target = arrival[target];
  Color acc{0.0, 0.0, 0.0};
  double wsum = 0.0;
  const int r2 = radius * radius;
  for (int dr = -radius; dr <= radius; ++dr) {
    for (int dc = -radius; dc <= radius; ++dc) {
      const int dist2 = dr * dr + dc * dc;
      if (dist2 == 0 || dist2 > r2) continue;
      const Point q{target.row + dr, target.col + dc};
      if (!f.contains(q) || !known[q]) continue;
      // r = target - q
      const double rr = -dr;
      const double rc = -dc;
      const double dist = std::sqrt(static_cast<double>(dist2));
      double direction = 1.0;
      if (gnorm > 0.0)
        direction = std::max(
            std::abs((rr * grad_t.drow + rc * grad_t.dcol) / (dist * gnorm)),
            kMinDirection);
      const double distance = 1.0 / dist2;
      const double level = 1.0 / (1.0 + std::abs(t_target - arrival[q]));
      const double w = direction * distance * level;
      const auto g = image_gradient(image, known, q);
      for (int ch = 0; ch < 3; ++ch)
        acc[ch] += w * (image[q][ch] + g[0][ch] * rr + g[1][ch] * rc);
      wsum += w;
    }
  }
  if (!(wsum > 0.0)) throw Error("starved estimator");
  return {acc[0] / wsum, acc[1] / wsum, acc[2] / wsum};
}

InpaintTrace inpaint_traced(const InpaintProblem& problem) {
  const Frame f = problem.image.frame();
  if (problem.radius < 1) throw Error("inpaint: radius must be at least 1");
  if (!(problem.hole.frame() == f)) throw Error("inpaint: hole frame mismatch");

  InpaintTrace trace{problem.image, Raster<double>(f, 0.0), {}};
  if (problem.hole.empty()) return trace;
  if (problem.hole.size() >= f.area())
    throw Error("inpaint: hole covers the whole frame");

  Raster<State> state(f, State::kKnown);
  BinaryMask known(f, 1);
  for (const Point& p : problem.hole) {
    state[p] = State::kInside;
    known[p] = 0;
    trace.arrival[p] = kInf;
  }

  // Min-heap on (T, row, col): lexicographic tie-break makes the order
  // reproducible.
  using Entry = std::tuple<double, int, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  constexpr int kDr[4] = {-1, 1, 0, 0};
  constexpr int kDc[4] = {0, 0, -1, 1};
  for (const Point& p : problem.hole)
    for (int k = 0; k < 4; ++k) {
      const Point q{p.row + kDr[k], p.col + kDc[k]};
      if (f.contains(q) && state[q] == State::kKnown && known[q]) {
        state[q] = State::kBand;
        heap.emplace(0.0, q.row, q.col);
      }
    }

  trace.order.reserve(problem.hole.size());
  while (!heap.empty()) {
    const auto [t, row, col] = heap.top();
    heap.pop();
    const Point p{row, col};
    if (state[p] == State::kKnown || t != trace.arrival[p]) continue;

    if (!known[p]) {
      const Gradient g = arrival_gradient(trace.arrival, state, p);
      const Color est = pixel_estimate(trace.image, known, p, g, trace.arrival,
                                       problem.radius);
      Rgb& px = trace.image[p];
      for (int ch = 0; ch < 3; ++ch) px[ch] = to_channel(est[ch]);
      known[p] = 1;
      trace.order.push_back(p);
    }
    state[p] = State::kKnown;

    for (int k = 0; k < 4; ++k) {
      const Point q{p.row + kDr[k], p.col + kDc[k]};
      if (!f.contains(q) || state[q] == State::kKnown || known[q]) continue;
      const double tq = solve_eikonal(trace.arrival, state, q);
      if (tq < trace.arrival[q]) {
        trace.arrival[q] = tq;
        state[q] = State::kBand;
        heap.emplace(tq, q.row, q.col);
      }
    }
  }
  return trace;
}

}  // namespace gradmix
