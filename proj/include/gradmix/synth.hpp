#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gradmix/dataset.hpp"
#include "gradmix/rng.hpp"

namespace gradmix {

/// One nucleus class of the synthetic generator: filled ellipses with
/// semi-axes drawn from [min_radius, max_radius] and a textured mean colour.
struct SynthClass {
  ClassId id = 0;
  std::string name;
  int per_image = 0;
  double min_radius = 4.0;
  double max_radius = 6.0;
  double min_aspect = 0.8;  // minor/major semi-axis ratio lower bound
  Rgb color;
  bool rare = false;
};

struct SynthParams {
  int images = 1;
  int height = 128;
  int width = 128;
  std::vector<SynthClass> classes;
  int gap = 2;            // minimum background pixels between nuclei
  int border_margin = 2;  // minimum distance from any nucleus to the edge
  int max_attempts = 4000;
  Rgb background{228, 196, 214};
  int noise = 8;  // +- amplitude of the uniform texture noise
  std::string id_prefix = "img";
};

/// Three-class lymphocyte/epithelial/miscellaneous fixture with the
/// miscellaneous class rare and always smaller than half of any major.
SynthParams default_synth_params();

struct SynthCensus {
  std::vector<std::map<ClassId, std::size_t>> per_image;
  std::map<ClassId, std::size_t> totals;

  std::size_t total() const;
};

/// Generates one sample. Throws Error reporting the achieved count when the
/// requested nuclei cannot be packed within the attempt budget.
Sample synth_sample(const SynthParams& params, Rng& rng, const std::string& id);

/// Writes `params.images` samples plus `manifest.json` into `out_dir`.
/// Sample i uses Rng::stream(seed, i).
SynthCensus synth_dataset(const SynthParams& params, std::uint64_t seed,
                          const std::filesystem::path& out_dir);

}  // namespace gradmix
