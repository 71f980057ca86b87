#include "gradmix/mixer.hpp"

#include <algorithm>
#include <set>

#include "gradmix/inpaint.hpp"

namespace gradmix {

namespace {

enum Region : std::uint8_t { kOutside = 0, kRare = 1, kBlend = 2 };

PixelSet shift_into(const PixelSet& set, Point origin, Frame frame) {
  std::vector<Point> out;
  out.reserve(set.size());
  for (const Point& p : set) out.push_back({p.row - origin.row, p.col - origin.col});
  return PixelSet(frame, std::move(out));
}

}  // namespace

RegionPartition partition_regions(const PixelSet& major_footprint,
                                  const PixelSet& rare_translated,
                                  int dilation_iterations) {
  if (major_footprint.empty()) throw Error("partition: empty major footprint");
  if (rare_translated.empty()) throw Error("partition: empty rare footprint");
  const Frame frame = major_footprint.frame();
  if (!(rare_translated.frame() == frame))
    throw Error("partition: footprints use different frames");

  const PixelSet dilated = dilate(major_footprint, dilation_iterations);
  RegionPartition part;
  part.patch = intersect(bounding_union(dilated.bounds(), rare_translated.bounds()),
                         full_rect(frame));
  Raster<std::uint8_t> region(part.patch.frame(), kOutside);
  for (const Point& p : dilated) region[part.patch.to_local(p)] = kBlend;
  for (const Point& p : rare_translated) region[part.patch.to_local(p)] = kRare;

  std::vector<Point> outside, rare, blend;
  for (int r = 0; r < part.patch.height; ++r)
    for (int c = 0; c < part.patch.width; ++c) {
      const Point g = part.patch.to_global({r, c});
      switch (region(r, c)) {
        case kOutside: outside.push_back(g); break;
        case kRare: rare.push_back(g); break;
        default: blend.push_back(g); break;
      }
    }
  part.outside = PixelSet(frame, std::move(outside));
  part.rare = PixelSet(frame, std::move(rare));
  part.blend = PixelSet(frame, std::move(blend));
  return part;
}

std::string_view to_string(NormMode mode) {
  return mode == NormMode::kMax ? "max" : "sum";
}

NormMode parse_norm_mode(std::string_view text) {
  if (text == "max") return NormMode::kMax;
  if (text == "sum") return NormMode::kSum;
  throw Error("unknown norm mode '" + std::string(text) + "'");
}

MixingMask build_mixing_mask(const RegionPartition& partition, NormMode norm) {
  if (partition.rare.empty()) throw Error("mixing mask: empty rare region");
  const Rect& patch = partition.patch;
  MixingMask mask{patch, Raster<double>(patch.frame(), 1.0), norm};
  const Point origin{patch.top, patch.left};
  for (const Point& p : partition.rare) mask.values[patch.to_local(p)] = 0.0;
  if (partition.blend.empty()) return mask;

  const DistanceField field = min_distance_field(
      patch.frame(), shift_into(partition.rare, origin, patch.frame()));
  double denom = 0.0;
  for (const Point& p : partition.blend) {
    const double d = field.values[patch.to_local(p)];
    denom = norm == NormMode::kMax ? std::max(denom, d) : denom + d;
  }
  for (const Point& p : partition.blend) {
    const Point local = patch.to_local(p);
    mask.values[local] = std::clamp(field.values[local] / denom, 0.0, 1.0);
  }
  return mask;
}

RgbImage composite(const RgbImage& background, const RgbImage& source,
                   const MixingMask& mask) {
  if (!(background.frame() == source.frame()) ||
      !(background.frame() == mask.values.frame()))
    throw Error("composite: dimension mismatch");
  RgbImage out(background.frame());
  auto bg = background.pixels();
  auto src = source.pixels();
  auto m = mask.values.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (m[i] == 1.0) {
      dst[i] = bg[i];
    } else if (m[i] == 0.0) {
      dst[i] = src[i];
    } else {
      for (int ch = 0; ch < 3; ++ch)
        dst[i][ch] = to_channel(m[i] * bg[i][ch] + (1.0 - m[i]) * src[i][ch]);
    }
  }
  return out;
}

std::string_view to_string(SkipReason reason) {
  switch (reason) {
    case SkipReason::kOutOfFrame: return "out-of-frame";
    case SkipReason::kSourceOutOfFrame: return "source-out-of-frame";
    case SkipReason::kNeighborOverlap: return "neighbor-overlap";
    case SkipReason::kPoolEmpty: return "pool-empty";
    case SkipReason::kMajorRemoved: return "major-removed";
  }
  return "unknown";
}

PairOutcome gradmix_pair(const Sample& target, const NucleusRecord& major,
                         const Sample& source, const NucleusRecord& rare,
                         const Color& color_delta, const MixerConfig& cfg,
                         PairDebug* debug) {
  const Frame frame = target.frame();
  const Offset offset = centroid_offset(rare.centroid, major.centroid);
  auto translated = translate_footprint(rare.footprint, offset, frame);
  if (!translated) return SkipReason::kOutOfFrame;

  if (cfg.protect_neighbors)
    for (const Point& p : *translated) {
      const InstanceId label = target.instances[p];
      if (label != 0 && label != major.id) return SkipReason::kNeighborOverlap;
    }

  RegionPartition part =
      partition_regions(major.footprint, *translated, cfg.dilation_iterations);
  MixingMask mask = build_mixing_mask(part, cfg.norm);
  const Rect& patch = part.patch;

  // Source patch: the rare's neighbourhood moved rigidly by `offset`. Only
  // pixels with weight below 1 are ever read from it.
  RgbImage src_patch(patch.frame());
  const Frame src_frame = source.frame();
  for (int r = 0; r < patch.height; ++r)
    for (int c = 0; c < patch.width; ++c) {
      const Point g = patch.to_global({r, c});
      const Point pre{g.row - offset.drow, g.col - offset.dcol};
      if (src_frame.contains(pre)) {
        src_patch(r, c) = source.image[pre];
      } else if (mask.values(r, c) < 1.0) {
        return SkipReason::kSourceOutOfFrame;
      } else {
        src_patch(r, c) = target.image[g];
      }
    }
  const Point origin{patch.top, patch.left};
  src_patch = shift_color(std::move(src_patch),
                          shift_into(part.rare, origin, patch.frame()),
                          color_delta);

  // Background: the target with the major nucleus inpainted away. The
  // window extends past the patch so the estimator sees a full neighbourhood.
  const Rect window =
      intersect(expand(patch, cfg.inpaint_radius + 1), full_rect(frame));
  const Point window_origin{window.top, window.left};
  InpaintProblem problem{crop(target.image, window),
                         shift_into(major.footprint, window_origin, window.frame()),
                         cfg.inpaint_radius};
  InpaintTrace filled = inpaint_traced(problem);
  const Rect patch_in_window{patch.top - window.top, patch.left - window.left,
                             patch.height, patch.width};
  RgbImage background = crop(filled.image, patch_in_window);

  PatchEdit edit;
  edit.patch = patch;
  edit.pixels = composite(background, src_patch, mask);
  edit.offset = offset;
  if (cfg.protect_neighbors) {
    std::vector<Point> kept;
    for (int r = 0; r < patch.height; ++r)
      for (int c = 0; c < patch.width; ++c) {
        const Point g = patch.to_global({r, c});
        const InstanceId label = target.instances[g];
        if (label != 0 && label != major.id) {
          edit.pixels(r, c) = target.image[g];
          kept.push_back(g);
        }
      }
    edit.protected_pixels = PixelSet(frame, std::move(kept));
  } else {
    edit.protected_pixels = PixelSet(frame);
  }
  edit.removed_id = major.id;
  edit.inserted_id = target.max_instance_id() + 1;
  edit.inserted_class = rare.class_id;
  edit.inserted_footprint = *translated;
  edit.cleared = major.footprint;

  if (debug) {
    debug->offset = offset;
    debug->arrival = crop(filled.arrival, patch_in_window);
    debug->partition = std::move(part);
    debug->mask = std::move(mask);
    debug->background = std::move(background);
    debug->source = std::move(src_patch);
  }
  return edit;
}

PairOutcome cutmix_pair(const Sample& target, const NucleusRecord& major,
                        const Sample& source, const NucleusRecord& rare,
                        const Color& color_delta) {
  const Frame frame = target.frame();
  const Offset offset = centroid_offset(rare.centroid, major.centroid);
  auto translated = translate_footprint(rare.footprint, offset, frame);
  if (!translated) return SkipReason::kOutOfFrame;
  const Rect region{rare.bbox.top + offset.drow, rare.bbox.left + offset.dcol,
                    rare.bbox.height, rare.bbox.width};
  if (intersect(region, full_rect(frame)) != region) return SkipReason::kOutOfFrame;

  const Point rare_origin{rare.bbox.top, rare.bbox.left};
  PatchEdit edit;
  edit.patch = region;
  edit.pixels = shift_color(crop(source.image, rare.bbox),
                            shift_into(rare.footprint, rare_origin, region.frame()),
                            color_delta);
  edit.offset = offset;
  edit.removed_id = major.id;
  edit.inserted_id = target.max_instance_id() + 1;
  edit.inserted_class = rare.class_id;
  edit.inserted_footprint = *translated;
  edit.cleared = set_union(PixelSet::from_rect(frame, region), major.footprint);
  edit.protected_pixels = PixelSet(frame);
  return edit;
}

void apply_edit_in_place(Sample& sample, const PatchEdit& edit) {
  if (sample.class_of.count(edit.inserted_id))
    throw Error("apply_edit: id collision on instance " +
                std::to_string(edit.inserted_id));
  paste(sample.image, edit.pixels, {edit.patch.top, edit.patch.left});

  std::set<InstanceId> touched;
  for (const Point& p : edit.cleared) {
    InstanceId& label = sample.instances[p];
    if (label != 0 && label != edit.removed_id) touched.insert(label);
    label = 0;
  }
  for (const Point& p : edit.inserted_footprint) {
    InstanceId& label = sample.instances[p];
    if (label != 0 && label != edit.removed_id) touched.insert(label);
    label = edit.inserted_id;
  }
  sample.class_of.erase(edit.removed_id);
  // Truncated neighbours survive only if some pixel is left.
  for (InstanceId id : touched) {
    const auto px = sample.instances.pixels();
    if (std::find(px.begin(), px.end(), id) == px.end()) sample.class_of.erase(id);
  }
  sample.class_of[edit.inserted_id] = edit.inserted_class;
}

Sample apply_edit(Sample sample, const PatchEdit& edit) {
  apply_edit_in_place(sample, edit);
  return sample;
}

}  // namespace gradmix
