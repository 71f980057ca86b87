#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "gradmix/dataset.hpp"
#include "gradmix/imageops.hpp"
#include "gradmix/pixel_set.hpp"

namespace gradmix {

/// Patch regions around one (major, rare) pair, all in frame coordinates.
///   outside  (O): patch pixels outside the dilated major footprint
///   rare     (Γ): the translated rare footprint
///   blend    (Λ): dilated major footprint minus the rare footprint
struct RegionPartition {
  Rect patch;
  PixelSet outside;
  PixelSet rare;
  PixelSet blend;
};

/// Patch = bounding box of dilate(major, iterations) ∪ rare, clipped to the
/// frame. Rare pixels take precedence where the two footprints overlap.
RegionPartition partition_regions(const PixelSet& major_footprint,
                                  const PixelSet& rare_translated,
                                  int dilation_iterations);

enum class NormMode { kMax, kSum };

std::string_view to_string(NormMode mode);
NormMode parse_norm_mode(std::string_view text);

/// Per-pixel blend weight over the partition's patch: 1 keeps the target
/// environment, 0 keeps the rare nucleus.
struct MixingMask {
  Rect patch;
  Raster<double> values;
  NormMode norm = NormMode::kMax;

  double at(Point frame_point) const { return values[patch.to_local(frame_point)]; }
};

/// 1 on O, 0 on Γ; on Λ the distance d(u) to the nearest Γ pixel divided by
/// max_Λ d (kMax) or Σ_Λ d (kSum), clamped to [0, 1].
MixingMask build_mixing_mask(const RegionPartition& partition, NormMode norm);

/// Per pixel and channel: round(m * background + (1 - m) * source), clamped.
RgbImage composite(const RgbImage& background, const RgbImage& source,
                   const MixingMask& mask);

struct MixerConfig {
  int dilation_iterations = 1;
  int inpaint_radius = 5;
  NormMode norm = NormMode::kMax;
  bool protect_neighbors = true;
};

/// A ready-to-apply rewrite of one sample region.
struct PatchEdit {
  Rect patch;
  RgbImage pixels;  // patch-sized
  InstanceId removed_id = 0;
  InstanceId inserted_id = 0;
  ClassId inserted_class = 0;
  PixelSet inserted_footprint;
  /// Label pixels reset to background before the insertion.
  PixelSet cleared;
  /// Pixels forced back to their original values.
  PixelSet protected_pixels;
  Offset offset;

  bool operator==(const PatchEdit&) const = default;
};

enum class SkipReason {
  kOutOfFrame,        // translated rare footprint leaves the target
  kSourceOutOfFrame,  // blended source neighbourhood leaves the source
  kNeighborOverlap,   // translated rare footprint hits another instance
  kPoolEmpty,         // no eligible rare nucleus
  kMajorRemoved,      // an earlier edit erased the selected major
};

std::string_view to_string(SkipReason reason);

using PairOutcome = std::variant<PatchEdit, SkipReason>;

/// Intermediate products of gradmix_pair, for inspection.
struct PairDebug {
  Offset offset;
  RegionPartition partition;
  MixingMask mask;
  RgbImage background;  // inpainted target patch
  RgbImage source;      // translated, colour-shifted source patch
  Raster<double> arrival;
};

/// Replaces `major` in `target` with `rare` taken from `source` (which may be
/// the same sample). `color_delta` is added to the rare footprint pixels.
PairOutcome gradmix_pair(const Sample& target, const NucleusRecord& major,
                         const Sample& source, const NucleusRecord& rare,
                         const Color& color_delta, const MixerConfig& cfg,
                         PairDebug* debug = nullptr);

/// Baseline: copies the rare's bounding rectangle wholesale onto the major
/// centroid and clears every target label inside it.
PairOutcome cutmix_pair(const Sample& target, const NucleusRecord& major,
                        const Sample& source, const NucleusRecord& rare,
                        const Color& color_delta);

/// Throws on an id collision (the inserted id already exists).
void apply_edit_in_place(Sample& sample, const PatchEdit& edit);
Sample apply_edit(Sample sample, const PatchEdit& edit);

}  // namespace gradmix
