#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gradmix/pixel_set.hpp"
#include "gradmix/raster.hpp"

namespace gradmix {

using InstanceId = std::uint32_t;
using ClassId = int;
using LabelMap = Raster<InstanceId>;
using ClassMap = std::map<InstanceId, ClassId>;
using Taxonomy = std::map<ClassId, std::string>;

/// Largest instance id representable in the 16-bit instance-map format.
inline constexpr InstanceId kMaxInstanceId = 65535;

struct Centroid {
  double row = 0.0;
  double col = 0.0;
};

/// An RGB image with its instance map and instance -> class assignment.
struct Sample {
  std::string id;
  RgbImage image;
  LabelMap instances;
  ClassMap class_of;

  Frame frame() const { return image.frame(); }
  InstanceId max_instance_id() const {
    return class_of.empty() ? 0 : class_of.rbegin()->first;
  }
  bool operator==(const Sample&) const = default;
};

/// Throws Error when the image and instance map disagree in size, or when
/// labels and class entries do not correspond one to one. When `taxonomy`
/// is given, every class id must appear in it.
void validate_sample(const Sample& sample, const Taxonomy* taxonomy = nullptr);

struct NucleusRecord {
  InstanceId id = 0;
  ClassId class_id = 0;
  PixelSet footprint;
  std::size_t area = 0;
  Centroid centroid;
  Rect bbox;
};

/// One record per distinct nonzero label, ascending by id.
std::vector<NucleusRecord> build_inventory(const Sample& sample);

/// Record for `id` recomputed from the current instance map, scanning only
/// `search`. Returns nullopt if the label no longer has any pixel there.
std::optional<NucleusRecord> find_record(const Sample& sample, InstanceId id,
                                         const Rect& search);

// ---------------------------------------------------------------------------
// On-disk format

struct ManifestEntry {
  std::string id;
  std::filesystem::path image;
  std::filesystem::path instances;
  std::filesystem::path classes;
  std::string split = "original";
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  Taxonomy taxonomy;
  std::set<ClassId> major_classes;
  std::set<ClassId> rare_classes;

  bool is_major(ClassId c) const { return major_classes.count(c) != 0; }
  bool is_rare(ClassId c) const { return rare_classes.count(c) != 0; }
};

void validate_manifest(const DatasetManifest& manifest);

/// Relative entry paths are resolved against `base_dir`.
DatasetManifest parse_manifest(const std::string& text,
                               const std::filesystem::path& base_dir);
DatasetManifest load_manifest(const std::filesystem::path& path);
/// Entry paths are written relative to the manifest's directory.
std::string format_manifest(const DatasetManifest& manifest,
                            const std::filesystem::path& base_dir);
void write_manifest(const std::filesystem::path& path,
                    const DatasetManifest& manifest);

std::string format_class_map(const ClassMap& class_of);
ClassMap parse_class_map(const std::string& text);

Sample load_sample(const ManifestEntry& entry,
                   const Taxonomy* taxonomy = nullptr);

struct SamplePaths {
  std::filesystem::path image;
  std::filesystem::path instances;
  std::filesystem::path classes;

  /// <dir>/<id>.png, <dir>/<id>_inst.png, <dir>/<id>_classes.json
  static SamplePaths in_dir(const std::filesystem::path& dir,
                            const std::string& id);
};

void write_sample(const Sample& sample, const SamplePaths& paths);

}  // namespace gradmix
