#include "gradmix/cli.hpp"

#include <CLI11.hpp>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <map>

#include "gradmix/imageops.hpp"
#include "gradmix/png_io.hpp"
#include "gradmix/synth.hpp"

namespace gradmix::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string on_off(bool v) { return v ? "on" : "off"; }

bool parse_on_off(const std::string& v) {
  if (v == "on") return true;
  if (v == "off") return false;
  throw Error("expected on|off, got '" + v + "'");
}

// String-typed mirror of AugmentationConfig, bound to the CLI flags. Each
// field starts at the AugmentationConfig default so help text and behaviour
// share one source.
struct ConfigFlags {
  std::string mode;
  std::string norm;
  double major_fraction;
  double intra_prob;
  double size_ratio;
  int dilate_iters;
  int inpaint_radius;
  std::string protect_neighbors;
  std::string color_adjust;
  std::string color_mean_scope;
  int max_reselect;
  std::uint64_t seed;
  std::string config_path;

  ConfigFlags() {
    const AugmentationConfig d;
    mode = to_string(d.mode);
    norm = to_string(d.norm);
    major_fraction = d.major_fraction;
    intra_prob = d.intra_image_prob;
    size_ratio = d.size_ratio;
    dilate_iters = d.dilation_iterations;
    inpaint_radius = d.inpaint_radius;
    protect_neighbors = on_off(d.protect_neighbors);
    color_adjust = to_string(d.color_adjust);
    color_mean_scope = to_string(d.color_mean_scope);
    max_reselect = d.max_reselect;
    seed = d.seed;
  }
};

using Setter = std::function<void(AugmentationConfig&, const json&)>;

const std::map<std::string, Setter>& config_setters() {
  static const std::map<std::string, Setter> setters = {
      {"seed", [](auto& c, const json& v) { c.seed = v.get<std::uint64_t>(); }},
      {"mode", [](auto& c, const json& v) { c.mode = parse_mix_mode(v.get<std::string>()); }},
      {"norm", [](auto& c, const json& v) { c.norm = parse_norm_mode(v.get<std::string>()); }},
      {"major-fraction", [](auto& c, const json& v) { c.major_fraction = v.get<double>(); }},
      {"intra-prob", [](auto& c, const json& v) { c.intra_image_prob = v.get<double>(); }},
      {"size-ratio", [](auto& c, const json& v) { c.size_ratio = v.get<double>(); }},
      {"dilate-iters", [](auto& c, const json& v) { c.dilation_iterations = v.get<int>(); }},
      {"inpaint-radius", [](auto& c, const json& v) { c.inpaint_radius = v.get<int>(); }},
      {"protect-neighbors",
       [](auto& c, const json& v) {
         c.protect_neighbors = v.is_boolean() ? v.get<bool>() : parse_on_off(v.get<std::string>());
       }},
      {"color-adjust",
       [](auto& c, const json& v) { c.color_adjust = parse_color_adjust(v.get<std::string>()); }},
      {"color-mean-scope",
       [](auto& c, const json& v) {
         c.color_mean_scope = parse_color_mean_scope(v.get<std::string>());
       }},
      {"max-reselect", [](auto& c, const json& v) { c.max_reselect = v.get<int>(); }},
  };
  return setters;
}

void add_config_flags(CLI::App* app, ConfigFlags& f) {
  app->add_option("--seed", f.seed, "Random seed")->capture_default_str();
  app->add_option("--mode", f.mode, "Mixing mode")
      ->check(CLI::IsMember({"gradmix", "cutmix"}))
      ->capture_default_str();
  app->add_option("--norm", f.norm, "Mixing-mask normalization")
      ->check(CLI::IsMember({"max", "sum"}))
      ->capture_default_str();
  app->add_option("--major-fraction", f.major_fraction,
                  "Fraction of major-class nuclei replaced per image")
      ->capture_default_str();
  app->add_option("--intra-prob", f.intra_prob,
                  "Probability of drawing the rare nucleus from the same image")
      ->capture_default_str();
  app->add_option("--size-ratio", f.size_ratio,
                  "Rare area must be below size-ratio * major area")
      ->capture_default_str();
  app->add_option("--dilate-iters", f.dilate_iters,
                  "3x3 dilations applied to the major footprint")
      ->capture_default_str();
  app->add_option("--inpaint-radius", f.inpaint_radius,
                  "Neighbourhood radius of the inpainting estimator")
      ->capture_default_str();
  app->add_option("--protect-neighbors", f.protect_neighbors,
                  "Keep other instances' pixels and labels intact")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  app->add_option("--color-adjust", f.color_adjust, "Colour adjustment policy")
      ->check(CLI::IsMember({"all", "inter", "off"}))
      ->capture_default_str();
  app->add_option("--color-mean-scope", f.color_mean_scope,
                  "Nuclei averaged for the target colour")
      ->check(CLI::IsMember({"phi", "all-nuclei"}))
      ->capture_default_str();
  app->add_option("--max-reselect", f.max_reselect,
                  "Redraws after a geometric skip before switching pools")
      ->capture_default_str();
  app->add_option("--config", f.config_path,
                  "JSON file with the same keys as these flags; flags override it");
}

// File first, then any flag given on the command line.
AugmentationConfig resolve_config(const CLI::App* app, const ConfigFlags& f,
                                  bool& norm_given) {
  AugmentationConfig cfg;
  norm_given = false;
  if (!f.config_path.empty()) {
    const auto bytes = io::read_file(f.config_path);
    const std::string text(bytes.begin(), bytes.end());
    apply_config_json(cfg, text);
    norm_given = json::parse(text).contains("norm");
  }
  auto given = [&](const char* name) { return app->count(name) > 0; };
  if (given("--seed")) cfg.seed = f.seed;
  if (given("--mode")) cfg.mode = parse_mix_mode(f.mode);
  if (given("--norm")) {
    cfg.norm = parse_norm_mode(f.norm);
    norm_given = true;
  }
  if (given("--major-fraction")) cfg.major_fraction = f.major_fraction;
  if (given("--intra-prob")) cfg.intra_image_prob = f.intra_prob;
  if (given("--size-ratio")) cfg.size_ratio = f.size_ratio;
  if (given("--dilate-iters")) cfg.dilation_iterations = f.dilate_iters;
  if (given("--inpaint-radius")) cfg.inpaint_radius = f.inpaint_radius;
  if (given("--protect-neighbors")) cfg.protect_neighbors = parse_on_off(f.protect_neighbors);
  if (given("--color-adjust")) cfg.color_adjust = parse_color_adjust(f.color_adjust);
  if (given("--color-mean-scope"))
    cfg.color_mean_scope = parse_color_mean_scope(f.color_mean_scope);
  if (given("--max-reselect")) cfg.max_reselect = f.max_reselect;
  validate_config(cfg);
  return cfg;
}

void warn_ignored(const AugmentationConfig& cfg, bool norm_given, std::ostream& err) {
  if (cfg.mode == MixMode::kCutMix && norm_given)
    err << "gradmix: warning: --norm is ignored in cutmix mode\n";
}

const NucleusRecord& find_in(const std::vector<NucleusRecord>& inv, InstanceId id,
                             const std::string& sample) {
  for (const NucleusRecord& r : inv)
    if (r.id == id) return r;
  throw Error("instance " + std::to_string(id) + " not found in sample " + sample);
}

std::size_t find_sample(const DatasetContext& ctx, const std::string& id) {
  for (std::size_t i = 0; i < ctx.samples.size(); ++i)
    if (ctx.samples[i].id == id) return i;
  throw Error("sample '" + id + "' not in manifest");
}

Raster<std::uint16_t> to_gray16(const Raster<double>& values, double scale) {
  Raster<std::uint16_t> out(values.frame());
  auto src = values.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i)
    dst[i] = static_cast<std::uint16_t>(
        std::clamp(round_half_away(src[i] * scale), 0.0, 65535.0));
  return out;
}

struct InspectArgs {
  std::string manifest;
  std::string target;
  std::string source;
  InstanceId major = 0;
  InstanceId rare = 0;
  std::string out;
};

void run_inspect(const InspectArgs& a, const AugmentationConfig& cfg,
                 std::ostream& out) {
  const DatasetManifest manifest = load_manifest(a.manifest);
  const DatasetContext ctx = DatasetContext::load(manifest);
  const std::size_t ti = find_sample(ctx, a.target);
  const std::size_t si = find_sample(ctx, a.source);
  const Sample& target = ctx.samples[ti];
  const Sample& source = ctx.samples[si];
  const NucleusRecord& major = find_in(ctx.inventories[ti], a.major, a.target);
  const NucleusRecord& rare = find_in(ctx.inventories[si], a.rare, a.source);
  if (!manifest.is_major(major.class_id))
    throw Error("instance " + std::to_string(a.major) + " is not a major-class nucleus");
  if (!manifest.is_rare(rare.class_id))
    throw Error("instance " + std::to_string(a.rare) + " is not a rare-class nucleus");

  std::vector<Point> pts;
  if (cfg.color_mean_scope == ColorMeanScope::kPhi) {
    pts.assign(major.footprint.begin(), major.footprint.end());
  } else {
    for (const NucleusRecord& r : ctx.inventories[ti])
      pts.insert(pts.end(), r.footprint.begin(), r.footprint.end());
  }
  const Color delta = color_delta(target, PixelSet(target.frame(), std::move(pts)),
                                  source, rare, ti == si, cfg);

  const fs::path dir(a.out);
  fs::create_directories(dir);
  PairDebug debug;
  const PairOutcome outcome =
      cfg.mode == MixMode::kGradMix
          ? gradmix_pair(target, major, source, rare, delta, cfg.mixer(), &debug)
          : cutmix_pair(target, major, source, rare, delta);

  ordered_json summary;
  summary["target"] = a.target;
  summary["major_id"] = a.major;
  summary["source"] = a.source;
  summary["rare_id"] = a.rare;
  summary["mode"] = std::string(to_string(cfg.mode));
  summary["norm"] = std::string(to_string(cfg.norm));
  summary["major_area"] = major.area;
  summary["rare_area"] = rare.area;
  summary["size_constraint_met"] =
      static_cast<double>(rare.area) < cfg.size_ratio * static_cast<double>(major.area);
  summary["color_delta"] = {delta[0], delta[1], delta[2]};
  if (const auto* skip = std::get_if<SkipReason>(&outcome)) {
    summary["outcome"] = "skipped:" + std::string(to_string(*skip));
  } else {
    const PatchEdit& edit = std::get<PatchEdit>(outcome);
    summary["outcome"] = "applied";
    summary["offset"] = {edit.offset.drow, edit.offset.dcol};
    summary["patch"] = {edit.patch.top, edit.patch.left, edit.patch.height,
                        edit.patch.width};
    png::write_rgb(dir / "before.png", crop(target.image, edit.patch));
    png::write_rgb(dir / "after.png", edit.pixels);
    if (cfg.mode == MixMode::kGradMix) {
      summary["regions"] = {{"outside", debug.partition.outside.size()},
                            {"rare", debug.partition.rare.size()},
                            {"blend", debug.partition.blend.size()}};
      png::write_gray16(dir / "mask.png", to_gray16(debug.mask.values, 65535.0));
      RgbImage regions(edit.patch.frame(), Rgb{0, 0, 255});
      for (const Point& p : debug.partition.rare)
        regions[edit.patch.to_local(p)] = {255, 0, 0};
      for (const Point& p : debug.partition.blend)
        regions[edit.patch.to_local(p)] = {0, 255, 0};
      png::write_rgb(dir / "partition.png", regions);
      png::write_rgb(dir / "background.png", debug.background);
      png::write_rgb(dir / "source.png", debug.source);
      png::write_gray16(dir / "arrival.png", to_gray16(debug.arrival, 256.0));
    }
  }
  io::write_text_atomic(dir / "pair.json", summary.dump(2) + "\n");
  out << summary.dump(2) << "\n";
}

}  // namespace

void apply_config_json(AugmentationConfig& cfg, const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("config: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error("config: expected a JSON object");
  const auto& setters = config_setters();
  for (const auto& [key, value] : doc.items()) {
    auto it = setters.find(key);
    if (it == setters.end()) throw Error("config: unknown key '" + key + "'");
    try {
      it->second(cfg, value);
    } catch (const json::exception& e) {
      throw Error("config: bad value for '" + key + "': " + e.what());
    }
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rare-class nucleus augmentation (GradMix and CutMix)", "gradmix"};
  app.require_subcommand(1);

  ConfigFlags augment_flags;
  std::string manifest_path;
  std::string out_dir;
  int workers = 1;
  auto* augment = app.add_subcommand("augment", "Augment every sample of a dataset");
  augment->add_option("--manifest", manifest_path, "Dataset manifest (JSON)")->required();
  augment->add_option("--out", out_dir, "Output directory")->required();
  augment->add_option("--workers", workers, "Worker threads")->capture_default_str();
  add_config_flags(augment, augment_flags);

  std::string stats_manifest;
  std::string stats_json;
  auto* stats_cmd = app.add_subcommand("stats", "Per-class instance counts");
  stats_cmd->add_option("--manifest", stats_manifest, "Dataset manifest (JSON)")->required();
  stats_cmd->add_option("--json", stats_json, "Also write the table as JSON here");

  ConfigFlags inspect_flags;
  InspectArgs inspect_args;
  auto* inspect = app.add_subcommand("inspect", "Dump the artifacts of a single pair");
  inspect->add_option("--manifest", inspect_args.manifest, "Dataset manifest")->required();
  inspect->add_option("--target", inspect_args.target, "Target sample id")->required();
  inspect->add_option("--major", inspect_args.major, "Major instance id")->required();
  inspect->add_option("--source", inspect_args.source, "Source sample id")->required();
  inspect->add_option("--rare", inspect_args.rare, "Rare instance id")->required();
  inspect->add_option("--out", inspect_args.out, "Output directory")->required();
  add_config_flags(inspect, inspect_flags);

  SynthParams synth_params = default_synth_params();
  std::string synth_out;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", synth_seed, "Random seed")->capture_default_str();
  synth->add_option("--images", synth_params.images, "Number of images")->capture_default_str();
  synth->add_option("--height", synth_params.height, "Image height")->capture_default_str();
  synth->add_option("--width", synth_params.width, "Image width")->capture_default_str();
  synth->add_option("--lymphocytes", synth_params.classes[0].per_image,
                    "Lymphocytes per image (major)")
      ->capture_default_str();
  synth->add_option("--epithelial", synth_params.classes[1].per_image,
                    "Epithelial nuclei per image (major)")
      ->capture_default_str();
  synth->add_option("--misc", synth_params.classes[2].per_image,
                    "Miscellaneous nuclei per image (rare)")
      ->capture_default_str();

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (augment->parsed()) {
      bool norm_given = false;
      const AugmentationConfig cfg = resolve_config(augment, augment_flags, norm_given);
      warn_ignored(cfg, norm_given, err);
      const DatasetManifest manifest = load_manifest(manifest_path);
      const DatasetReport report = augment_dataset(manifest, cfg, out_dir, workers);
      out << format_table(report.table);
      out << "seed " << cfg.seed << ": " << report.applied << " of "
          << report.selected << " selected majors replaced\n";
    } else if (stats_cmd->parsed()) {
      const CountTable table = stats(load_manifest(stats_manifest));
      out << format_table(table);
      if (!stats_json.empty()) io::write_text_atomic(stats_json, table_to_json(table));
    } else if (inspect->parsed()) {
      bool norm_given = false;
      const AugmentationConfig cfg = resolve_config(inspect, inspect_flags, norm_given);
      warn_ignored(cfg, norm_given, err);
      run_inspect(inspect_args, cfg, out);
    } else if (synth->parsed()) {
      const SynthCensus census = synth_dataset(synth_params, synth_seed, synth_out);
      ordered_json doc;
      doc["seed"] = synth_seed;
      doc["images"] = synth_params.images;
      ordered_json totals = ordered_json::object();
      for (const auto& [cls, n] : census.totals) totals[std::to_string(cls)] = n;
      doc["totals"] = totals;
      doc["total"] = census.total();
      io::write_text_atomic(fs::path(synth_out) / "census.json", doc.dump(2) + "\n");
      out << doc.dump(2) << "\n";
    }
  } catch (const std::exception& e) {
    err << "gradmix: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace gradmix::cli
