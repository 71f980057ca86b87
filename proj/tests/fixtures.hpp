#pragma once

// Test-only oracles and fixture builders. Nothing here calls into the
// implementation paths it is used to check.

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "gradmix/dataset.hpp"
#include "gradmix/pixel_set.hpp"

namespace gradmix::testing {

namespace fs = std::filesystem;

inline PixelSet square(Frame f, int r0, int r1, int c0, int c1) {
  std::vector<Point> pts;
  for (int r = r0; r <= r1; ++r)
    for (int c = c0; c <= c1; ++c) pts.push_back({r, c});
  return PixelSet(f, std::move(pts));
}

inline PixelSet plus_shape(Frame f, Point c) {
  return PixelSet(f, {{c.row, c.col},
                      {c.row - 1, c.col},
                      {c.row + 1, c.col},
                      {c.row, c.col - 1},
                      {c.row, c.col + 1}});
}

inline PixelSet disc(Frame f, double cr, double cc, double radius) {
  std::vector<Point> pts;
  for (int r = 0; r < f.height; ++r)
    for (int c = 0; c < f.width; ++c)
      if ((r - cr) * (r - cr) + (c - cc) * (c - cc) <= radius * radius)
        pts.push_back({r, c});
  return PixelSet(f, std::move(pts));
}

/// All-pairs minimum Euclidean distance.
inline double brute_distance(Point u, const PixelSet& source) {
  double best = std::numeric_limits<double>::infinity();
  for (const Point& v : source) {
    const double dr = u.row - v.row;
    const double dc = u.col - v.col;
    best = std::min(best, std::sqrt(dr * dr + dc * dc));
  }
  return best;
}

/// Enumerates the Chebyshev ball of radius k around every pixel.
inline PixelSet chebyshev_ball(const PixelSet& mask, int k) {
  std::vector<Point> pts;
  const Frame f = mask.frame();
  for (int r = 0; r < f.height; ++r)
    for (int c = 0; c < f.width; ++c)
      for (const Point& p : mask)
        if (std::abs(p.row - r) <= k && std::abs(p.col - c) <= k) {
          pts.push_back({r, c});
          break;
        }
  return PixelSet(f, std::move(pts));
}

inline PixelSet random_set(Frame f, std::mt19937& gen, double density) {
  std::bernoulli_distribution keep(density);
  std::vector<Point> pts;
  for (int r = 0; r < f.height; ++r)
    for (int c = 0; c < f.width; ++c)
      if (keep(gen)) pts.push_back({r, c});
  if (pts.empty()) pts.push_back({f.height / 2, f.width / 2});
  return PixelSet(f, std::move(pts));
}

/// Random 4-connected blob grown from `seed`.
inline PixelSet random_blob(Frame f, Point seed, std::size_t size, std::mt19937& gen) {
  std::vector<Point> pts{seed};
  std::vector<Point> frontier{seed};
  std::vector<std::uint8_t> in(f.area(), 0);
  in[static_cast<std::size_t>(seed.row) * f.width + seed.col] = 1;
  const int dr[4] = {-1, 1, 0, 0};
  const int dc[4] = {0, 0, -1, 1};
  while (pts.size() < size && !frontier.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, frontier.size() - 1);
    const Point p = frontier[pick(gen)];
    std::uniform_int_distribution<int> dir(0, 3);
    const int k = dir(gen);
    const Point q{p.row + dr[k], p.col + dc[k]};
    if (!f.contains(q)) continue;
    auto& flag = in[static_cast<std::size_t>(q.row) * f.width + q.col];
    if (flag) continue;
    flag = 1;
    pts.push_back(q);
    frontier.push_back(q);
  }
  return PixelSet(f, std::move(pts));
}

inline Sample blank_sample(const std::string& id, Frame f, Rgb background) {
  Sample s;
  s.id = id;
  s.image = RgbImage(f, background);
  s.instances = LabelMap(f, 0);
  return s;
}

/// Labels `footprint` as instance `id` and paints it with a deterministic
/// texture around `color`.
inline void paint_instance(Sample& s, const PixelSet& footprint, InstanceId id,
                           ClassId cls, Rgb color, int texture = 0) {
  for (const Point& p : footprint) {
    s.instances[p] = id;
    const int t = texture ? ((p.row * 7 + p.col * 13) % (2 * texture + 1)) - texture : 0;
    s.image[p] = {static_cast<std::uint8_t>(std::clamp(color.r + t, 0, 255)),
                  static_cast<std::uint8_t>(std::clamp(color.g + t, 0, 255)),
                  static_cast<std::uint8_t>(std::clamp(color.b + t, 0, 255))};
  }
  s.class_of[id] = cls;
}

inline void texture_background(Sample& s, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_int_distribution<int> noise(-6, 6);
  for (int r = 0; r < s.image.height(); ++r)
    for (int c = 0; c < s.image.width(); ++c)
      if (s.instances(r, c) == 0) {
        Rgb& px = s.image(r, c);
        px.r = static_cast<std::uint8_t>(std::clamp(px.r + noise(gen), 0, 255));
        px.g = static_cast<std::uint8_t>(std::clamp(px.g + noise(gen), 0, 255));
        px.b = static_cast<std::uint8_t>(std::clamp(px.b + noise(gen), 0, 255));
      }
}

inline DatasetManifest three_class_manifest() {
  DatasetManifest m;
  m.taxonomy = {{1, "lymphocyte"}, {2, "epithelial"}, {3, "miscellaneous"}};
  m.major_classes = {1, 2};
  m.rare_classes = {3};
  return m;
}

inline fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() /
                       ("gradmix_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

/// Relative path -> bytes for every regular file under `root`.
inline std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file())
      out[e.path().lexically_relative(root).generic_string()] = slurp(e.path());
  return out;
}

}  // namespace gradmix::testing
