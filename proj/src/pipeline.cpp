#include "gradmix/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <json.hpp>
#include <thread>

#include "gradmix/imageops.hpp"
#include "gradmix/png_io.hpp"

namespace gradmix {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(MixMode m) {
  return m == MixMode::kGradMix ? "gradmix" : "cutmix";
}

std::string_view to_string(ColorAdjust c) {
  switch (c) {
    case ColorAdjust::kAll: return "all";
    case ColorAdjust::kInterOnly: return "inter";
    case ColorAdjust::kOff: return "off";
  }
  return "all";
}

std::string_view to_string(ColorMeanScope s) {
  return s == ColorMeanScope::kPhi ? "phi" : "all-nuclei";
}

MixMode parse_mix_mode(std::string_view text) {
  if (text == "gradmix") return MixMode::kGradMix;
  if (text == "cutmix") return MixMode::kCutMix;
  throw Error("unknown mode '" + std::string(text) + "'");
}

ColorAdjust parse_color_adjust(std::string_view text) {
  if (text == "all") return ColorAdjust::kAll;
  if (text == "inter" || text == "inter_only" || text == "inter-only")
    return ColorAdjust::kInterOnly;
  if (text == "off") return ColorAdjust::kOff;
  throw Error("unknown color adjustment '" + std::string(text) + "'");
}

ColorMeanScope parse_color_mean_scope(std::string_view text) {
  if (text == "phi") return ColorMeanScope::kPhi;
  if (text == "all-nuclei" || text == "all_nuclei") return ColorMeanScope::kAllNuclei;
  throw Error("unknown color mean scope '" + std::string(text) + "'");
}

void validate_config(const AugmentationConfig& cfg) {
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0))
      throw Error(std::string(name) + " must lie in [0, 1]");
  };
  unit(cfg.major_fraction, "major fraction");
  unit(cfg.intra_image_prob, "intra-image probability");
  if (!(cfg.size_ratio > 0.0)) throw Error("size ratio must be positive");
  if (cfg.dilation_iterations < 0) throw Error("dilation iterations must be >= 0");
  if (cfg.inpaint_radius < 1) throw Error("inpaint radius must be >= 1");
  if (cfg.max_reselect < 0) throw Error("max reselect must be >= 0");
}

DatasetContext DatasetContext::load(const DatasetManifest& manifest) {
  std::vector<Sample> samples;
  samples.reserve(manifest.entries.size());
  for (const ManifestEntry& e : manifest.entries)
    samples.push_back(load_sample(e, &manifest.taxonomy));
  return from_samples(manifest, std::move(samples));
}

DatasetContext DatasetContext::from_samples(DatasetManifest manifest,
                                            std::vector<Sample> samples) {
  DatasetContext ctx;
  ctx.manifest = std::move(manifest);
  ctx.samples = std::move(samples);
  for (const Sample& s : ctx.samples) {
    validate_sample(s, &ctx.manifest.taxonomy);
    ctx.inventories.push_back(build_inventory(s));
  }
  return ctx;
}

std::size_t selection_size(double fraction, std::size_t n) {
  return static_cast<std::size_t>(round_half_away(fraction * static_cast<double>(n)));
}

std::vector<const NucleusRecord*> select_majors(
    const std::vector<NucleusRecord>& inventory, const DatasetManifest& manifest,
    double fraction, Rng& rng) {
  std::vector<const NucleusRecord*> pool;
  for (const NucleusRecord& rec : inventory)
    if (manifest.is_major(rec.class_id)) pool.push_back(&rec);
  const std::size_t k = std::min(selection_size(fraction, pool.size()), pool.size());
  // Partial Fisher-Yates over the id-ordered pool.
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_index(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end(),
            [](const NucleusRecord* a, const NucleusRecord* b) { return a->id < b->id; });
  return pool;
}

RareSampler::RareSampler(const DatasetContext& ctx, std::size_t target_index,
                         const NucleusRecord& major, const AugmentationConfig& cfg,
                         Rng& rng)
    : ctx_(ctx), rng_(rng), max_reselect_(cfg.max_reselect) {
  const double limit = cfg.size_ratio * static_cast<double>(major.area);
  for (std::size_t s = 0; s < ctx.inventories.size(); ++s) {
    const auto& inv = ctx.inventories[s];
    for (std::size_t i = 0; i < inv.size(); ++i)
      if (ctx.manifest.is_rare(inv[i].class_id) &&
          static_cast<double>(inv[i].area) < limit)
        pools_[s == target_index ? 0 : 1].push_back({s, i});
  }
  for (int p = 0; p < 2; ++p) {
    used_[p].assign(pools_[p].size(), 0);
    remaining_[p] = pools_[p].size();
  }
  if (pools_empty()) return;
  const bool intra = rng_.bernoulli(cfg.intra_image_prob);
  current_ = intra ? 0 : 1;
  if (pools_[current_].empty()) {
    current_ = 1 - current_;
    fell_back_ = true;
  }
}

std::optional<RareChoice> RareSampler::draw_from(int pool) {
  if (remaining_[pool] == 0) return std::nullopt;
  std::size_t i;
  do {
    i = rng_.uniform_index(pools_[pool].size());
  } while (used_[pool][i]);
  used_[pool][i] = 1;
  --remaining_[pool];
  ++draws_in_current_;
  const Candidate& c = pools_[pool][i];
  return RareChoice{c.sample_index, &ctx_.inventories[c.sample_index][c.record_index],
                    pool == 0};
}

std::optional<RareChoice> RareSampler::next() {
  if (current_ < 0) return std::nullopt;
  const bool exhausted =
      draws_in_current_ > max_reselect_ || remaining_[current_] == 0;
  if (exhausted) {
    const int other = 1 - current_;
    if (fell_back_ || remaining_[other] == 0) return std::nullopt;
    current_ = other;
    fell_back_ = true;
    draws_in_current_ = 0;
  }
  return draw_from(current_);
}

std::optional<RareChoice> select_rare(const DatasetContext& ctx,
                                      std::size_t target_index,
                                      const NucleusRecord& major,
                                      const AugmentationConfig& cfg, Rng& rng) {
  RareSampler sampler(ctx, target_index, major, cfg, rng);
  return sampler.next();
}

namespace {

Color delta_from_means(const std::optional<Color>& target_mean,
                       const Sample& source, const NucleusRecord& rare,
                       bool same_image, const AugmentationConfig& cfg) {
  if (cfg.color_adjust == ColorAdjust::kOff) return {0.0, 0.0, 0.0};
  if (cfg.color_adjust == ColorAdjust::kInterOnly && same_image)
    return {0.0, 0.0, 0.0};
  if (!target_mean) throw Error("colour adjustment needs a non-empty target region");
  const Color rare_mean = mean_color(source.image, rare.footprint);
  return {(*target_mean)[0] - rare_mean[0], (*target_mean)[1] - rare_mean[1],
          (*target_mean)[2] - rare_mean[2]};
}

}  // namespace

Color color_delta(const Sample& target, const PixelSet& target_region,
                  const Sample& source, const NucleusRecord& rare,
                  bool same_image, const AugmentationConfig& cfg) {
  std::optional<Color> mean;
  if (!target_region.empty()) mean = mean_color(target.image, target_region);
  return delta_from_means(mean, source, rare, same_image, cfg);
}

std::string to_jsonl(const ProvenanceRecord& r) {
  ordered_json j;
  j["target"] = r.target;
  j["major_id"] = r.major_id;
  j["source"] = r.source ? ordered_json(*r.source) : ordered_json(nullptr);
  j["rare_id"] = r.rare_id ? ordered_json(*r.rare_id) : ordered_json(nullptr);
  j["inserted_id"] = r.inserted_id ? ordered_json(*r.inserted_id) : ordered_json(nullptr);
  j["offset"] = {r.offset.drow, r.offset.dcol};
  j["color_delta"] = {r.color_delta[0], r.color_delta[1], r.color_delta[2]};
  j["outcome"] = r.outcome;
  j["norm"] = std::string(to_string(r.norm));
  j["seed"] = r.seed;
  return j.dump();
}

AugmentResult augment_sample(const DatasetContext& ctx, std::size_t index,
                             const AugmentationConfig& cfg) {
  const Sample& original = ctx.samples.at(index);
  Rng rng = Rng::stream(cfg.seed, index);
  const auto phi =
      select_majors(ctx.inventories[index], ctx.manifest, cfg.major_fraction, rng);

  AugmentResult result;
  result.sample = original;
  result.sample.id = original.id + "_" + std::string(to_string(cfg.mode));
  result.selected = phi.size();

  std::optional<Color> target_mean;
  if (cfg.color_adjust != ColorAdjust::kOff && !phi.empty()) {
    std::vector<Point> pts;
    if (cfg.color_mean_scope == ColorMeanScope::kPhi) {
      for (const NucleusRecord* rec : phi)
        pts.insert(pts.end(), rec->footprint.begin(), rec->footprint.end());
    } else {
      for (const NucleusRecord& rec : ctx.inventories[index])
        pts.insert(pts.end(), rec.footprint.begin(), rec.footprint.end());
    }
    target_mean = mean_color(original.image, PixelSet(original.frame(), std::move(pts)));
  }

  const MixerConfig mixer = cfg.mixer();
  for (const NucleusRecord* selected : phi) {
    ProvenanceRecord pr;
    pr.target = original.id;
    pr.major_id = selected->id;
    pr.norm = cfg.norm;
    pr.seed = cfg.seed;

    const auto major = find_record(result.sample, selected->id, selected->bbox);
    if (!major) {
      pr.outcome = "skipped:" + std::string(to_string(SkipReason::kMajorRemoved));
      result.provenance.push_back(std::move(pr));
      continue;
    }

    RareSampler sampler(ctx, index, *major, cfg, rng);
    SkipReason last = SkipReason::kPoolEmpty;
    bool applied = false;
    while (auto choice = sampler.next()) {
      const Sample& source = ctx.samples[choice->sample_index];
      const NucleusRecord& rare = *choice->record;
      const Color delta =
          delta_from_means(target_mean, source, rare, choice->intra, cfg);
      pr.source = source.id;
      pr.rare_id = rare.id;
      pr.color_delta = delta;
      pr.offset = centroid_offset(rare.centroid, major->centroid);
      PairOutcome outcome =
          cfg.mode == MixMode::kGradMix
              ? gradmix_pair(result.sample, *major, source, rare, delta, mixer)
              : cutmix_pair(result.sample, *major, source, rare, delta);
      if (auto* edit = std::get_if<PatchEdit>(&outcome)) {
        apply_edit_in_place(result.sample, *edit);
        pr.inserted_id = edit->inserted_id;
        applied = true;
        break;
      }
      last = std::get<SkipReason>(outcome);
    }
    if (applied) {
      pr.outcome = "applied";
      ++result.applied;
    } else {
      pr.outcome = "skipped:" + std::string(to_string(last));
    }
    result.provenance.push_back(std::move(pr));
  }
  return result;
}

// ---------------------------------------------------------------------------

const CountRow* CountTable::find(std::string_view label) const {
  for (const CountRow& row : rows)
    if (row.label == label) return &row;
  return nullptr;
}

CountTable empty_table(const Taxonomy& taxonomy) {
  CountTable t;
  for (const auto& [id, name] : taxonomy) {
    t.classes.push_back(id);
    t.names.push_back(name);
  }
  return t;
}

void add_counts(CountRow& row, const CountTable& table, const ClassMap& class_of) {
  row.counts.resize(table.classes.size(), 0);
  for (const auto& [id, cls] : class_of) {
    auto it = std::find(table.classes.begin(), table.classes.end(), cls);
    if (it == table.classes.end())
      throw Error("class id " + std::to_string(cls) + " not in taxonomy");
    ++row.counts[static_cast<std::size_t>(it - table.classes.begin())];
    ++row.total;
  }
}

namespace {

CountRow sum_rows(const CountTable& t, const std::string& label) {
  CountRow out{label, std::vector<std::size_t>(t.classes.size(), 0), 0};
  for (const CountRow& row : t.rows) {
    for (std::size_t i = 0; i < row.counts.size(); ++i) out.counts[i] += row.counts[i];
    out.total += row.total;
  }
  return out;
}

}  // namespace

CountTable stats(const DatasetManifest& manifest) {
  CountTable t = empty_table(manifest.taxonomy);
  for (const ManifestEntry& e : manifest.entries) {
    const auto bytes = io::read_file(e.classes);
    const ClassMap class_of = parse_class_map(std::string(bytes.begin(), bytes.end()));
    auto it = std::find_if(t.rows.begin(), t.rows.end(),
                           [&](const CountRow& r) { return r.label == e.split; });
    if (it == t.rows.end()) {
      t.rows.push_back({e.split, std::vector<std::size_t>(t.classes.size(), 0), 0});
      it = t.rows.end() - 1;
    }
    add_counts(*it, t, class_of);
  }
  if (t.rows.size() != 1) t.rows.push_back(sum_rows(t, "all"));
  return t;
}

std::string format_table(const CountTable& t) {
  std::vector<std::string> header{"split"};
  header.insert(header.end(), t.names.begin(), t.names.end());
  header.push_back("Total");
  std::vector<std::vector<std::string>> cells{header};
  for (const CountRow& row : t.rows) {
    std::vector<std::string> line{row.label};
    for (std::size_t c : row.counts) line.push_back(std::to_string(c));
    line.push_back(std::to_string(row.total));
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : cells)
    for (std::size_t i = 0; i < line.size(); ++i)
      width[i] = std::max(width[i], line[i].size());
  std::string out;
  for (const auto& line : cells) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      const std::string pad(width[i] - line[i].size(), ' ');
      if (i == 0) {
        out += line[i] + pad;
      } else {
        out += "  " + pad + line[i];
      }
    }
    out += '\n';
  }
  return out;
}

std::string table_to_json(const CountTable& t) {
  ordered_json doc;
  doc["classes"] = ordered_json::array();
  for (std::size_t i = 0; i < t.classes.size(); ++i)
    doc["classes"].push_back({{"id", t.classes[i]}, {"name", t.names[i]}});
  doc["rows"] = ordered_json::array();
  for (const CountRow& row : t.rows) {
    ordered_json counts = ordered_json::object();
    for (std::size_t i = 0; i < t.classes.size(); ++i)
      counts[t.names[i]] = i < row.counts.size() ? row.counts[i] : 0;
    doc["rows"].push_back(
        {{"split", row.label}, {"counts", counts}, {"total", row.total}});
  }
  return doc.dump(2) + "\n";
}

DatasetReport augment_dataset(const DatasetManifest& manifest,
                              const AugmentationConfig& cfg,
                              const fs::path& out_dir, int workers) {
  validate_config(cfg);
  const DatasetContext ctx = DatasetContext::load(manifest);
  const fs::path sample_dir = out_dir / "samples";
  fs::create_directories(sample_dir);

  struct Slot {
    std::string id;
    ClassMap class_of;
    SamplePaths paths;
    std::vector<ProvenanceRecord> provenance;
    std::size_t selected = 0;
    std::size_t applied = 0;
  };
  const std::size_t n = ctx.samples.size();
  std::vector<Slot> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        AugmentResult r = augment_sample(ctx, i, cfg);
        Slot& slot = slots[i];
        slot.paths = SamplePaths::in_dir(sample_dir, r.sample.id);
        write_sample(r.sample, slot.paths);
        slot.id = r.sample.id;
        slot.class_of = std::move(r.sample.class_of);
        slot.provenance = std::move(r.provenance);
        slot.selected = r.selected;
        slot.applied = r.applied;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(workers, static_cast<int>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    for (std::thread& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  DatasetReport report;
  report.table = empty_table(manifest.taxonomy);
  CountRow original{"original", {}, 0};
  CountRow augmented{"augmented", {}, 0};
  original.counts.assign(report.table.classes.size(), 0);
  augmented.counts.assign(report.table.classes.size(), 0);
  DatasetManifest merged = manifest;
  std::string log;
  for (std::size_t i = 0; i < n; ++i) {
    add_counts(original, report.table, ctx.samples[i].class_of);
    add_counts(augmented, report.table, slots[i].class_of);
    merged.entries.push_back({slots[i].id, slots[i].paths.image,
                              slots[i].paths.instances, slots[i].paths.classes,
                              "augmented"});
    for (ProvenanceRecord& pr : slots[i].provenance) {
      log += to_jsonl(pr) + "\n";
      report.provenance.push_back(std::move(pr));
    }
    report.selected += slots[i].selected;
    report.applied += slots[i].applied;
  }
  report.table.rows = {original, augmented};
  report.table.rows.push_back(sum_rows(report.table, "combined"));

  validate_manifest(merged);
  io::write_text_atomic(out_dir / "provenance.jsonl", log);
  io::write_text_atomic(out_dir / "stats.json", table_to_json(report.table));
  write_manifest(out_dir / "manifest.json", merged);
  return report;
}

}  // namespace gradmix
