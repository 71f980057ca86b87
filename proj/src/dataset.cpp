#include "gradmix/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <json.hpp>

#include "gradmix/png_io.hpp"

namespace gradmix {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void validate_sample(const Sample& sample, const Taxonomy* taxonomy) {
  if (!(sample.image.frame() == sample.instances.frame()))
    throw Error("sample " + sample.id + ": dimension mismatch between image " +
                std::to_string(sample.image.height()) + "x" +
                std::to_string(sample.image.width()) + " and instance map " +
                std::to_string(sample.instances.height()) + "x" +
                std::to_string(sample.instances.width()));
  std::set<InstanceId> seen;
  for (InstanceId label : sample.instances.pixels())
    if (label != 0) seen.insert(label);
  for (InstanceId label : seen)
    if (!sample.class_of.count(label))
      throw Error("sample " + sample.id + ": unlabeled instance " +
                  std::to_string(label));
  for (const auto& [label, cls] : sample.class_of) {
    if (label == 0)
      throw Error("sample " + sample.id + ": class map assigns background id 0");
    if (!seen.count(label))
      throw Error("sample " + sample.id + ": class map lists instance " +
                  std::to_string(label) + " absent from the instance map");
    if (cls < 1)
      throw Error("sample " + sample.id + ": invalid class id " +
                  std::to_string(cls));
    if (taxonomy && !taxonomy->count(cls))
      throw Error("sample " + sample.id + ": class id " + std::to_string(cls) +
                  " not in taxonomy");
  }
}

namespace {

NucleusRecord make_record(InstanceId id, ClassId cls, Frame frame,
                          std::vector<Point> pts) {
  NucleusRecord rec;
  rec.id = id;
  rec.class_id = cls;
  rec.area = pts.size();
  double sr = 0.0;
  double sc = 0.0;
  for (const Point& p : pts) {
    sr += p.row;
    sc += p.col;
  }
  rec.centroid = {sr / static_cast<double>(rec.area),
                  sc / static_cast<double>(rec.area)};
  rec.footprint = PixelSet(frame, std::move(pts));
  rec.bbox = rec.footprint.bounds();
  return rec;
}

}  // namespace

std::vector<NucleusRecord> build_inventory(const Sample& sample) {
  std::map<InstanceId, std::vector<Point>> pixels;
  const LabelMap& map = sample.instances;
  for (int r = 0; r < map.height(); ++r) {
    auto row = map.row(r);
    for (int c = 0; c < map.width(); ++c)
      if (row[c] != 0) pixels[row[c]].push_back({r, c});
  }
  std::vector<NucleusRecord> out;
  out.reserve(pixels.size());
  for (auto& [id, pts] : pixels) {
    auto it = sample.class_of.find(id);
    if (it == sample.class_of.end())
      throw Error("sample " + sample.id + ": unlabeled instance " +
                  std::to_string(id));
    out.push_back(make_record(id, it->second, sample.frame(), std::move(pts)));
  }
  return out;
}

std::optional<NucleusRecord> find_record(const Sample& sample, InstanceId id,
                                         const Rect& search) {
  auto it = sample.class_of.find(id);
  if (it == sample.class_of.end()) return std::nullopt;
  const Rect area = intersect(search, full_rect(sample.frame()));
  std::vector<Point> pts;
  for (int r = area.top; r < area.bottom(); ++r)
    for (int c = area.left; c < area.right(); ++c)
      if (sample.instances(r, c) == id) pts.push_back({r, c});
  if (pts.empty()) return std::nullopt;
  return make_record(id, it->second, sample.frame(), std::move(pts));
}

// ---------------------------------------------------------------------------

namespace {

int parse_int_key(const std::string& key, const char* what) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), v);
  if (ec != std::errc() || ptr != key.data() + key.size())
    throw Error(std::string("malformed ") + what + " key '" + key + "'");
  return v;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string relative_to(const fs::path& p, const fs::path& base) {
  const fs::path abs_p = fs::weakly_canonical(fs::absolute(p));
  const fs::path abs_base = fs::weakly_canonical(fs::absolute(base));
  fs::path rel = abs_p.lexically_relative(abs_base);
  return (rel.empty() ? abs_p : rel).generic_string();
}

}  // namespace

void validate_manifest(const DatasetManifest& m) {
  if (m.major_classes.empty()) throw Error("manifest: major_classes is empty");
  if (m.rare_classes.empty()) throw Error("manifest: rare_classes is empty");
  for (ClassId c : m.major_classes)
    if (m.rare_classes.count(c))
      throw Error("manifest: class designation overlap (class " +
                  std::to_string(c) + " is both major and rare)");
  for (ClassId c : m.major_classes)
    if (!m.taxonomy.count(c))
      throw Error("manifest: major class " + std::to_string(c) +
                  " not in taxonomy");
  for (ClassId c : m.rare_classes)
    if (!m.taxonomy.count(c))
      throw Error("manifest: rare class " + std::to_string(c) +
                  " not in taxonomy");
  std::set<std::string> ids;
  for (const ManifestEntry& e : m.entries)
    if (!ids.insert(e.id).second)
      throw Error("manifest: duplicate sample id '" + e.id + "'");
}

DatasetManifest parse_manifest(const std::string& text,
                               const fs::path& base_dir) {
  DatasetManifest m;
  try {
    const json doc = json::parse(text);
    for (const auto& e : doc.at("entries")) {
      ManifestEntry entry;
      entry.id = e.at("id").get<std::string>();
      entry.image = resolve(base_dir, e.at("image").get<std::string>());
      entry.instances = resolve(base_dir, e.at("instances").get<std::string>());
      entry.classes = resolve(base_dir, e.at("classes").get<std::string>());
      if (e.contains("split")) entry.split = e.at("split").get<std::string>();
      m.entries.push_back(std::move(entry));
    }
    for (const auto& [key, name] : doc.at("taxonomy").items())
      m.taxonomy[parse_int_key(key, "taxonomy")] = name.get<std::string>();
    for (const auto& c : doc.at("major_classes"))
      m.major_classes.insert(c.get<ClassId>());
    for (const auto& c : doc.at("rare_classes"))
      m.rare_classes.insert(c.get<ClassId>());
  } catch (const json::exception& e) {
    throw Error(std::string("manifest: malformed document: ") + e.what());
  }
  validate_manifest(m);
  return m;
}

DatasetManifest load_manifest(const fs::path& path) {
  const auto bytes = io::read_file(path);
  return parse_manifest(std::string(bytes.begin(), bytes.end()),
                        path.parent_path());
}

std::string format_manifest(const DatasetManifest& m, const fs::path& base_dir) {
  ordered_json doc;
  doc["entries"] = ordered_json::array();
  for (const ManifestEntry& e : m.entries) {
    ordered_json j;
    j["id"] = e.id;
    j["image"] = relative_to(e.image, base_dir);
    j["instances"] = relative_to(e.instances, base_dir);
    j["classes"] = relative_to(e.classes, base_dir);
    j["split"] = e.split;
    doc["entries"].push_back(std::move(j));
  }
  ordered_json tax = ordered_json::object();
  for (const auto& [id, name] : m.taxonomy) tax[std::to_string(id)] = name;
  doc["taxonomy"] = std::move(tax);
  doc["major_classes"] = m.major_classes;
  doc["rare_classes"] = m.rare_classes;
  return doc.dump(2) + "\n";
}

void write_manifest(const fs::path& path, const DatasetManifest& m) {
  io::write_text_atomic(path, format_manifest(m, path.parent_path()));
}

std::string format_class_map(const ClassMap& class_of) {
  ordered_json doc = ordered_json::object();
  for (const auto& [id, cls] : class_of) doc[std::to_string(id)] = cls;
  return doc.dump(2) + "\n";
}

ClassMap parse_class_map(const std::string& text) {
  ClassMap out;
  try {
    const json doc = json::parse(text);
    if (!doc.is_object()) throw Error("class map: expected a JSON object");
    for (const auto& [key, cls] : doc.items()) {
      const int id = parse_int_key(key, "class map");
      if (id < 1) throw Error("class map: invalid instance id " + key);
      out[static_cast<InstanceId>(id)] = cls.get<ClassId>();
    }
  } catch (const json::exception& e) {
    throw Error(std::string("class map: malformed document: ") + e.what());
  }
  return out;
}

Sample load_sample(const ManifestEntry& entry, const Taxonomy* taxonomy) {
  Sample s;
  s.id = entry.id;
  s.image = png::read_rgb(entry.image);
  const Raster<std::uint16_t> labels = png::read_gray16(entry.instances);
  s.instances = LabelMap(labels.height(), labels.width());
  std::copy(labels.pixels().begin(), labels.pixels().end(),
            s.instances.pixels().begin());
  const auto bytes = io::read_file(entry.classes);
  try {
    s.class_of = parse_class_map(std::string(bytes.begin(), bytes.end()));
  } catch (const Error& e) {
    throw Error(entry.classes.string() + ": " + e.what());
  }
  validate_sample(s, taxonomy);
  return s;
}

SamplePaths SamplePaths::in_dir(const fs::path& dir, const std::string& id) {
  return {dir / (id + ".png"), dir / (id + "_inst.png"),
          dir / (id + "_classes.json")};
}

void write_sample(const Sample& sample, const SamplePaths& paths) {
  validate_sample(sample);
  Raster<std::uint16_t> labels(sample.instances.height(),
                               sample.instances.width());
  auto src = sample.instances.pixels();
  auto dst = labels.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i] > kMaxInstanceId)
      throw Error("sample " + sample.id + ": instance id " +
                  std::to_string(src[i]) + " exceeds the 16-bit label range");
    dst[i] = static_cast<std::uint16_t>(src[i]);
  }
  // Encode everything first so a failure leaves no partial sample behind.
  const auto image_bytes = png::encode_rgb(sample.image);
  const auto label_bytes = png::encode_gray16(labels);
  const std::string classes = format_class_map(sample.class_of);
  io::write_file_atomic(paths.image, image_bytes);
  io::write_file_atomic(paths.instances, label_bytes);
  io::write_text_atomic(paths.classes, classes);
}

}  // namespace gradmix
