#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gradmix/dataset.hpp"
#include "gradmix/mixer.hpp"
#include "gradmix/rng.hpp"

namespace gradmix {

enum class MixMode { kGradMix, kCutMix };
enum class ColorAdjust { kAll, kInterOnly, kOff };
enum class ColorMeanScope { kPhi, kAllNuclei };

std::string_view to_string(MixMode m);
std::string_view to_string(ColorAdjust c);
std::string_view to_string(ColorMeanScope s);
MixMode parse_mix_mode(std::string_view text);
ColorAdjust parse_color_adjust(std::string_view text);
ColorMeanScope parse_color_mean_scope(std::string_view text);

/// Every tunable of an augmentation run. The member initializers are the
/// documented defaults.
struct AugmentationConfig {
  MixMode mode = MixMode::kGradMix;
  double major_fraction = 0.8;
  double intra_image_prob = 0.6;
  double size_ratio = 0.5;  // rare.area < size_ratio * major.area
  int dilation_iterations = 1;
  int inpaint_radius = 5;
  NormMode norm = NormMode::kMax;
  bool protect_neighbors = true;
  ColorAdjust color_adjust = ColorAdjust::kAll;
  ColorMeanScope color_mean_scope = ColorMeanScope::kPhi;
  int max_reselect = 10;
  std::uint64_t seed = 0;

  MixerConfig mixer() const {
    return {dilation_iterations, inpaint_radius, norm, protect_neighbors};
  }
};

/// Throws Error on out-of-range values.
void validate_config(const AugmentationConfig& cfg);

/// Original samples with their inventories, shared read-only by workers.
struct DatasetContext {
  DatasetManifest manifest;
  std::vector<Sample> samples;
  std::vector<std::vector<NucleusRecord>> inventories;

  static DatasetContext load(const DatasetManifest& manifest);
  static DatasetContext from_samples(DatasetManifest manifest,
                                     std::vector<Sample> samples);
};

/// round(fraction * N) major-class records chosen uniformly without
/// replacement, returned in ascending id order.
std::vector<const NucleusRecord*> select_majors(
    const std::vector<NucleusRecord>& inventory, const DatasetManifest& manifest,
    double fraction, Rng& rng);

std::size_t selection_size(double fraction, std::size_t n);

struct RareChoice {
  std::size_t sample_index = 0;
  const NucleusRecord* record = nullptr;
  bool intra = false;
};

/// Draws rare candidates for one major. Construction flips the intra/inter
/// coin; draws stay in that pool for up to `max_reselect` redraws, then fall
/// back once to the other pool. Draws are without replacement.
class RareSampler {
 public:
  RareSampler(const DatasetContext& ctx, std::size_t target_index,
              const NucleusRecord& major, const AugmentationConfig& cfg,
              Rng& rng);

  std::optional<RareChoice> next();
  /// True if no rare nucleus was eligible in either pool.
  bool pools_empty() const { return pools_[0].empty() && pools_[1].empty(); }

 private:
  struct Candidate {
    std::size_t sample_index;
    std::size_t record_index;
  };
  std::optional<RareChoice> draw_from(int pool);

  const DatasetContext& ctx_;
  Rng& rng_;
  int max_reselect_;
  std::vector<Candidate> pools_[2];  // [0] intra, [1] inter
  std::vector<std::uint8_t> used_[2];
  std::size_t remaining_[2] = {0, 0};
  int current_ = -1;
  int draws_in_current_ = 0;
  bool fell_back_ = false;
};

/// Single draw: the first candidate RareSampler would propose.
std::optional<RareChoice> select_rare(const DatasetContext& ctx,
                                      std::size_t target_index,
                                      const NucleusRecord& major,
                                      const AugmentationConfig& cfg, Rng& rng);

/// delta = μ_target - μ_rare, where μ_target is the mean colour over
/// `target_region` (the union of the selected majors, or of all nuclei) and
/// μ_rare the mean over the rare footprint in its source image.
Color color_delta(const Sample& target, const PixelSet& target_region,
                  const Sample& source, const NucleusRecord& rare,
                  bool same_image, const AugmentationConfig& cfg);

struct ProvenanceRecord {
  std::string target;
  InstanceId major_id = 0;
  std::optional<std::string> source;
  std::optional<InstanceId> rare_id;
  std::optional<InstanceId> inserted_id;
  Offset offset;
  Color color_delta{0.0, 0.0, 0.0};
  std::string outcome;  // "applied" or "skipped:<reason>"
  NormMode norm = NormMode::kMax;
  std::uint64_t seed = 0;

  bool applied() const { return outcome == "applied"; }
};

std::string to_jsonl(const ProvenanceRecord& record);

struct AugmentResult {
  Sample sample;
  std::vector<ProvenanceRecord> provenance;
  std::size_t selected = 0;
  std::size_t applied = 0;
};

/// Augments sample `index` of the context with its own random stream
/// Rng::stream(cfg.seed, index). The original sample is left untouched.
AugmentResult augment_sample(const DatasetContext& ctx, std::size_t index,
                             const AugmentationConfig& cfg);

// ---------------------------------------------------------------------------
// Count reports

struct CountRow {
  std::string label;
  std::vector<std::size_t> counts;  // parallel to CountTable::classes
  std::size_t total = 0;
};

struct CountTable {
  std::vector<ClassId> classes;
  std::vector<std::string> names;
  std::vector<CountRow> rows;

  const CountRow* find(std::string_view label) const;
};

CountTable empty_table(const Taxonomy& taxonomy);
void add_counts(CountRow& row, const CountTable& table, const ClassMap& class_of);

/// Per-split counts of every sample listed in the manifest, in order of
/// first appearance of each split.
CountTable stats(const DatasetManifest& manifest);

std::string format_table(const CountTable& table);
std::string table_to_json(const CountTable& table);

struct DatasetReport {
  CountTable table;  // rows: original, augmented, combined
  std::vector<ProvenanceRecord> provenance;
  std::size_t selected = 0;
  std::size_t applied = 0;
};

/// Augments every sample, writes the augmented samples under
/// `out_dir/samples/`, a merged manifest `out_dir/manifest.json`, the
/// provenance log `out_dir/provenance.jsonl` and `out_dir/stats.json`.
/// Output bytes do not depend on `workers`.
DatasetReport augment_dataset(const DatasetManifest& manifest,
                              const AugmentationConfig& cfg,
                              const std::filesystem::path& out_dir,
                              int workers = 1);

}  // namespace gradmix
