#include "gradmix/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gradmix {

namespace fs = std::filesystem;

SynthParams default_synth_params() {
  SynthParams p;
  p.images = 20;
  p.height = 256;
  p.width = 256;
  // Rares stay far enough from the edge that the neighbourhood blended
  // around them always lies inside the source image.
  p.border_margin = 14;
  p.classes = {
      {1, "lymphocyte", 24, 8.0, 10.0, 0.8, {72, 48, 140}, false},
      {2, "epithelial", 24, 9.0, 12.0, 0.8, {126, 74, 164}, false},
      {3, "miscellaneous", 3, 3.0, 4.0, 0.9, {164, 92, 128}, true},
  };
  return p;
}

std::size_t SynthCensus::total() const {
  std::size_t n = 0;
  for (const auto& [cls, count] : totals) n += count;
  return n;
}

namespace {

struct Ellipse {
  double row;
  double col;
  double semi_major;
  double semi_minor;
  double angle;
};

// Normalized radius (<= 1 inside) of pixel (r, c) relative to the ellipse.
double ellipse_rho(const Ellipse& e, int r, int c) {
  const double dy = r - e.row;
  const double dx = c - e.col;
  const double ca = std::cos(e.angle);
  const double sa = std::sin(e.angle);
  const double u = (dx * ca + dy * sa) / e.semi_major;
  const double v = (-dx * sa + dy * ca) / e.semi_minor;
  return std::sqrt(u * u + v * v);
}

}  // namespace

Sample synth_sample(const SynthParams& params, Rng& rng, const std::string& id) {
  const Frame frame{params.height, params.width};
  Sample s;
  s.id = id;
  s.image = RgbImage(frame);
  s.instances = LabelMap(frame, 0);

  for (Rgb& px : s.image.pixels())
    for (int ch = 0; ch < 3; ++ch)
      px[ch] = to_channel(params.background[ch] +
                          rng.uniform_int(-params.noise, params.noise));

  // Large classes first so the packing succeeds more often; shuffle within
  // a class for spatial randomness.
  std::vector<const SynthClass*> order;
  for (const SynthClass& cls : params.classes)
    for (int i = 0; i < cls.per_image; ++i) order.push_back(&cls);
  std::stable_sort(order.begin(), order.end(),
                   [](const SynthClass* a, const SynthClass* b) {
                     return a->max_radius > b->max_radius;
                   });

  BinaryMask blocked(frame, 0);
  const int margin = params.border_margin;
  std::size_t placed = 0;
  InstanceId next_id = 1;
  for (const SynthClass* cls : order) {
    bool ok = false;
    for (int attempt = 0; attempt < params.max_attempts && !ok; ++attempt) {
      Ellipse e;
      e.semi_major = rng.uniform(cls->min_radius, cls->max_radius);
      e.semi_minor = e.semi_major * rng.uniform(cls->min_aspect, 1.0);
      e.angle = rng.uniform(0.0, std::numbers::pi);
      const double reach = e.semi_major + 1.0;
      const double lo_r = margin + reach;
      const double hi_r = params.height - 1 - margin - reach;
      const double lo_c = margin + reach;
      const double hi_c = params.width - 1 - margin - reach;
      if (hi_r < lo_r || hi_c < lo_c) break;
      e.row = rng.uniform(lo_r, hi_r);
      e.col = rng.uniform(lo_c, hi_c);

      const int r0 = static_cast<int>(std::floor(e.row - reach));
      const int r1 = static_cast<int>(std::ceil(e.row + reach));
      const int c0 = static_cast<int>(std::floor(e.col - reach));
      const int c1 = static_cast<int>(std::ceil(e.col + reach));
      std::vector<std::pair<Point, double>> pixels;
      bool clash = false;
      for (int r = r0; r <= r1 && !clash; ++r)
        for (int c = c0; c <= c1; ++c) {
          const double rho = ellipse_rho(e, r, c);
          if (rho > 1.0) continue;
          if (r < margin || c < margin || r >= params.height - margin ||
              c >= params.width - margin || blocked(r, c)) {
            clash = true;
            break;
          }
          pixels.push_back({{r, c}, rho});
        }
      if (clash || pixels.empty()) continue;

      const InstanceId nid = next_id++;
      for (const auto& [p, rho] : pixels) {
        s.instances[p] = nid;
        const double shade = -14.0 * (1.0 - rho);
        Rgb& px = s.image[p];
        for (int ch = 0; ch < 3; ++ch)
          px[ch] = to_channel(cls->color[ch] + shade +
                              rng.uniform_int(-params.noise, params.noise));
        for (int dr = -params.gap; dr <= params.gap; ++dr)
          for (int dc = -params.gap; dc <= params.gap; ++dc) {
            const Point q{p.row + dr, p.col + dc};
            if (frame.contains(q)) blocked[q] = 1;
          }
      }
      s.class_of[nid] = cls->id;
      ++placed;
      ok = true;
    }
    if (!ok)
      throw Error("synth: infeasible packing for sample " + id + ": placed " +
                  std::to_string(placed) + " of " +
                  std::to_string(order.size()) + " nuclei");
  }
  return s;
}

SynthCensus synth_dataset(const SynthParams& params, std::uint64_t seed,
                          const fs::path& out_dir) {
  fs::create_directories(out_dir);
  DatasetManifest manifest;
  for (const SynthClass& cls : params.classes) {
    manifest.taxonomy[cls.id] = cls.name;
    (cls.rare ? manifest.rare_classes : manifest.major_classes).insert(cls.id);
  }
  validate_manifest(manifest);

  SynthCensus census;
  for (const SynthClass& cls : params.classes) census.totals[cls.id] = 0;
  for (int i = 0; i < params.images; ++i) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
    std::string index = std::to_string(i);
    if (index.size() < 3) index.insert(0, 3 - index.size(), '0');
    const Sample s = synth_sample(params, rng, params.id_prefix + index);
    const SamplePaths paths = SamplePaths::in_dir(out_dir, s.id);
    write_sample(s, paths);
    manifest.entries.push_back(
        {s.id, paths.image, paths.instances, paths.classes, "original"});
    std::map<ClassId, std::size_t> counts;
    for (const SynthClass& cls : params.classes) counts[cls.id] = 0;
    for (const auto& [label, cls] : s.class_of) {
      ++counts[cls];
      ++census.totals[cls];
    }
    census.per_image.push_back(std::move(counts));
  }
  write_manifest(out_dir / "manifest.json", manifest);
  return census;
}

}  // namespace gradmix
