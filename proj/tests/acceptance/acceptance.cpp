// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "fixtures.hpp"
#include "gradmix/cli.hpp"
#include "gradmix/imageops.hpp"
#include "gradmix/inpaint.hpp"
#include "gradmix/mixer.hpp"
#include "gradmix/pipeline.hpp"
#include "gradmix/synth.hpp"

using namespace gradmix;
using namespace gradmix::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

std::map<ClassId, std::size_t> class_counts(const ClassMap& m) {
  std::map<ClassId, std::size_t> out;
  for (const auto& [id, cls] : m) ++out[cls];
  return out;
}

PixelSet footprint_of(const Sample& s, InstanceId id) {
  std::vector<Point> pts;
  for (int r = 0; r < s.image.height(); ++r)
    for (int c = 0; c < s.image.width(); ++c)
      if (s.instances(r, c) == id) pts.push_back({r, c});
  return PixelSet(s.frame(), std::move(pts));
}

// 1 ---------------------------------------------------------------------------

Verdict mask_suite() {
  Verdict v;
  const auto start = Clock::now();
  SynthParams p = default_synth_params();
  p.height = p.width = 192;
  p.classes[0].per_image = 12;
  p.classes[1].per_image = 12;
  p.classes[2].per_image = 4;
  const DatasetManifest manifest = three_class_manifest();
  std::mt19937 gen(1234);
  int pairs = 0;
  for (std::uint64_t img = 0; pairs < 240; ++img) {
    Rng rng(img);
    const Sample s = synth_sample(p, rng, "m");
    const auto inv = build_inventory(s);
    std::vector<const NucleusRecord*> majors, rares;
    for (const NucleusRecord& r : inv)
      (manifest.is_major(r.class_id) ? majors : rares).push_back(&r);
    for (int k = 0; k < 20; ++k) {
      const NucleusRecord& major = *majors[gen() % majors.size()];
      const NucleusRecord& rare = *rares[gen() % rares.size()];
      // Random jitter around the major centroid so Γ is not always centred.
      const Offset base = centroid_offset(rare.centroid, major.centroid);
      const Offset off{base.drow + static_cast<int>(gen() % 5) - 2,
                       base.dcol + static_cast<int>(gen() % 5) - 2};
      const auto moved = translate_footprint(rare.footprint, off, s.frame());
      if (!moved) continue;
      const int iters = 1 + static_cast<int>(gen() % 3);
      const RegionPartition part = partition_regions(major.footprint, *moved, iters);
      if (part.blend.empty()) continue;
      ++pairs;
      const MixingMask mmax = build_mixing_mask(part, NormMode::kMax);
      const MixingMask msum = build_mixing_mask(part, NormMode::kSum);
      for (double x : mmax.values.pixels()) v.require(x >= 0.0 && x <= 1.0, "max mask range");
      for (double x : msum.values.pixels()) v.require(x >= 0.0 && x <= 1.0, "sum mask range");
      for (const Point& q : part.outside)
        v.require(mmax.at(q) == 1.0 && msum.at(q) == 1.0, "mask != 1 on O");
      for (const Point& q : part.rare)
        v.require(mmax.at(q) == 0.0 && msum.at(q) == 0.0, "mask != 0 on Gamma");

      std::vector<std::pair<double, double>> dm;
      double total = 0.0;
      double top = 0.0;
      for (const Point& q : part.blend) {
        dm.push_back({brute_distance(q, part.rare), mmax.at(q)});
        total += msum.at(q);
        top = std::max(top, mmax.at(q));
      }
      std::sort(dm.begin(), dm.end());
      for (std::size_t i = 1; i < dm.size(); ++i) {
        if (dm[i].first > dm[i - 1].first)
          v.require(dm[i].second > dm[i - 1].second, "max mode not strictly monotone");
        else
          v.require(dm[i].second == dm[i - 1].second, "max mode differs at equal distance");
      }
      v.require(top == 1.0, "max mode does not attain 1");
      v.require(std::abs(total - 1.0) <= 1e-9, "sum mode does not sum to 1");
    }
  }
  const double t = seconds_since(start);
  v.require(t < 10.0, "too slow");
  v.detail = (v.pass ? "" : v.detail + "; ") + std::to_string(pairs) + " pairs in " +
             std::to_string(t) + " s";
  return v;
}

// 2 ---------------------------------------------------------------------------

Verdict edt_oracle() {
  Verdict v;
  const auto start = Clock::now();
  std::mt19937 gen(2);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Frame f{32, 32};
    const PixelSet src = random_set(f, gen, 0.005 + 0.02 * (trial % 10));
    const DistanceField d = min_distance_field(f, src);
    for (int r = 0; r < 32; ++r)
      for (int c = 0; c < 32; ++c)
        worst = std::max(worst, std::abs(d.values(r, c) - brute_distance({r, c}, src)));
  }
  const double t = seconds_since(start);
  v.require(worst <= 1e-9, "distance mismatch");
  v.require(t < 5.0, "too slow");
  std::ostringstream os;
  os << "50 sets, max error " << worst << ", " << t << " s";
  v.detail = (v.pass ? "" : v.detail + "; ") + os.str();
  return v;
}

// 3 ---------------------------------------------------------------------------

Verdict inpainting() {
  Verdict v;
  std::mt19937 gen(3);
  const Frame f{48, 48};
  std::uniform_int_distribution<int> byte(0, 255);

  for (int k = 0; k < 20; ++k) {
    const RgbImage img(f, Rgb{static_cast<std::uint8_t>(byte(gen)),
                              static_cast<std::uint8_t>(byte(gen)),
                              static_cast<std::uint8_t>(byte(gen))});
    const Point seed{10 + static_cast<int>(gen() % 28), 10 + static_cast<int>(gen() % 28)};
    const PixelSet hole = random_blob(f, seed, 20 + gen() % 150, gen);
    const InpaintTrace tr = inpaint_traced({img, hole, 1 + static_cast<int>(gen() % 6)});
    v.require(tr.image == img, "constant image not a fixpoint");
    for (std::size_t i = 1; i < tr.order.size(); ++i)
      v.require(tr.arrival[tr.order[i - 1]] <= tr.arrival[tr.order[i]],
                "finalization order decreases in T");
  }

  for (int k = 0; k < 20; ++k) {
    RgbImage img(f);
    for (Rgb& px : img.pixels())
      px = {static_cast<std::uint8_t>(byte(gen)), static_cast<std::uint8_t>(byte(gen)),
            static_cast<std::uint8_t>(byte(gen))};
    const PixelSet hole = random_blob(f, {24, 24}, 30 + gen() % 200, gen);
    const InpaintTrace tr = inpaint_traced({img, hole, 5});
    for (int r = 0; r < f.height; ++r)
      for (int c = 0; c < f.width; ++c)
        if (!hole.contains({r, c}))
          v.require(tr.image(r, c) == img(r, c), "pixel outside the hole changed");
    for (std::size_t i = 1; i < tr.order.size(); ++i)
      v.require(tr.arrival[tr.order[i - 1]] <= tr.arrival[tr.order[i]],
                "finalization order decreases in T");
  }

  int worst = 0;
  for (int k = 0; k < 20; ++k) {
    const double a = std::uniform_real_distribution<double>(-3.0, 3.0)(gen);
    const double b = std::uniform_real_distribution<double>(-3.0, 3.0)(gen);
    RgbImage img(Frame{21, 21});
    for (int r = 0; r < 21; ++r)
      for (int c = 0; c < 21; ++c) {
        const double base = 128 + a * (r - 10) + b * (c - 10);
        img(r, c) = {to_channel(base), to_channel(255 - base), to_channel(base / 2 + 20)};
      }
    const Point p{static_cast<int>(5 + gen() % 11), static_cast<int>(5 + gen() % 11)};
    const PixelSet hole(img.frame(), {p});
    const int radius = 2 + k % 4;
    const RgbImage out = inpaint({img, hole, radius});
    BinaryMask known(img.frame(), 1);
    known[p] = 0;
    Raster<double> arrival(img.frame(), 0.0);
    arrival[p] = std::sqrt(2.0) / 2.0;
    const Color est = pixel_estimate(img, known, p, {0.0, 0.0}, arrival, radius);
    for (int ch = 0; ch < 3; ++ch)
      worst = std::max(worst, std::abs(out[p][ch] - static_cast<int>(to_channel(est[ch]))));
  }
  v.require(worst <= 1, "single-pixel estimate off by more than 1");
  v.detail = (v.pass ? "" : v.detail + "; ") + "20 constant, 20 random, 20 ramp holes; " +
             "max ramp deviation " + std::to_string(worst);
  return v;
}

// 4 ---------------------------------------------------------------------------

Verdict conservation() {
  Verdict v;
  const fs::path in = temp_dir("accept_conservation_in");
  const fs::path out = temp_dir("accept_conservation_out");
  SynthParams p = default_synth_params();  // 20 images, 51 nuclei, 3 rare
  const SynthCensus census = synth_dataset(p, 2024, in);
  const DatasetManifest manifest = load_manifest(in / "manifest.json");
  AugmentationConfig cfg;
  cfg.seed = 42;
  const DatasetReport report = augment_dataset(manifest, cfg, out, 1);

  const CountRow& orig = *report.table.find("original");
  const CountRow& aug = *report.table.find("augmented");
  const CountRow& all = *report.table.find("combined");
  const std::size_t rare_col = 2;
  v.require(orig.total == census.total(), "original total differs from the census");
  v.require(all.total == 2 * orig.total, "combined total is not twice the original");
  v.require(all.counts[rare_col] == 2 * orig.counts[rare_col] + report.applied,
            "rare combined != 2*rare + applied");

  const DatasetManifest merged = load_manifest(out / "manifest.json");
  std::size_t expected_total = 0;
  std::size_t logged_skips = 0;
  for (const ProvenanceRecord& pr : report.provenance)
    if (!pr.applied()) {
      ++logged_skips;
      v.require(pr.outcome.rfind("skipped:", 0) == 0 && pr.outcome.size() > 8,
                "skip without a reason");
    }
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const Sample before = load_sample(manifest.entries[i]);
    const Sample after = load_sample(merged.entries[manifest.entries.size() + i]);
    v.require(before.class_of.size() == after.class_of.size(),
              "instance count not conserved in " + before.id);
    std::size_t majors = 0;
    for (const auto& [id, cls] : before.class_of) majors += manifest.is_major(cls);
    const std::size_t quota = selection_size(0.8, majors);
    expected_total += quota;
    std::size_t applied = 0, selected = 0;
    for (const ProvenanceRecord& pr : report.provenance)
      if (pr.target == before.id) {
        ++selected;
        applied += pr.applied();
      }
    v.require(selected == quota, "selection quota missed in " + before.id);
    v.require(applied <= quota, "more replacements than selections");
    const auto cb = class_counts(before.class_of);
    const auto ca = class_counts(after.class_of);
    v.require(ca.at(3) == cb.at(3) + applied, "rare increase != applied in " + before.id);
  }
  v.require(report.selected == expected_total, "selected total");
  v.require(report.applied + logged_skips == report.selected, "shortfall not logged");
  // The fixture keeps every rare smaller than the smallest major and away
  // from the borders, so each selected major must be replaced.
  v.require(report.applied == expected_total, "feasible fixture left majors unreplaced");

  std::ostringstream os;
  os << census.total() << " -> " << all.total << " nuclei, rare " << orig.counts[rare_col]
     << " -> " << all.counts[rare_col] << ", applied " << report.applied << " of "
     << expected_total << ", skips logged " << logged_skips;
  v.detail = (v.pass ? "" : v.detail + "; ") + os.str();
  return v;
}

// 5 ---------------------------------------------------------------------------

Verdict sampling() {
  Verdict v;
  const Frame f{40, 40};
  Sample a = blank_sample("a", f, {200, 180, 190});
  paint_instance(a, square(f, 5, 14, 5, 14), 1, 1, {100, 100, 100});
  paint_instance(a, square(f, 25, 27, 25, 27), 2, 3, {120, 90, 100});
  Sample b = blank_sample("b", f, {200, 180, 190});
  paint_instance(b, square(f, 25, 27, 25, 27), 1, 3, {30, 30, 30});
  const DatasetContext ctx = DatasetContext::from_samples(three_class_manifest(), {a, b});
  AugmentationConfig cfg;
  Rng rng(5);
  int intra = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i)
    intra += select_rare(ctx, 0, ctx.inventories[0][0], cfg, rng)->intra;
  const double share = static_cast<double>(intra) / draws;
  v.require(share >= 0.58 && share <= 0.62, "intra share outside [0.58, 0.62]");

  SynthParams p = default_synth_params();
  p.height = p.width = 200;
  p.classes[0].per_image = 7;
  p.classes[1].per_image = 6;
  const DatasetManifest m = three_class_manifest();
  int images = 0;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Rng gen(seed);
    SynthParams q = p;
    q.classes[0].per_image = 1 + static_cast<int>(seed % 9);
    const Sample s = synth_sample(q, gen, "s");
    const auto inv = build_inventory(s);
    std::size_t nm = 0;
    for (const NucleusRecord& r : inv) nm += m.is_major(r.class_id);
    Rng pick(seed * 7 + 1);
    const auto phi = select_majors(inv, m, 0.8, pick);
    const double want = round_half_away(0.8 * static_cast<double>(nm)) / static_cast<double>(nm);
    v.require(static_cast<double>(phi.size()) / static_cast<double>(nm) == want,
              "selected fraction differs for N^m=" + std::to_string(nm));
    ++images;
  }
  std::ostringstream os;
  os << "intra share " << share << " over " << draws << " draws; exact fraction on "
     << images << " images";
  v.detail = (v.pass ? "" : v.detail + "; ") + os.str();
  return v;
}

// 6 ---------------------------------------------------------------------------

Verdict protection() {
  Verdict v;
  SynthParams p = default_synth_params();
  p.images = 2;
  p.height = p.width = 160;
  p.border_margin = 10;
  p.classes[0].per_image = 11;
  p.classes[1].per_image = 11;
  p.classes[2].per_image = 4;
  p.classes[2].min_radius = 10;
  p.classes[2].max_radius = 14;
  p.gap = 1;
  std::mt19937 gen(6);
  int runs = 0, applied = 0, overlaps = 0;
  for (std::uint64_t seed = 0; runs < 100; ++seed) {
    const fs::path dir = temp_dir("accept_protect");
    synth_dataset(p, seed, dir);
    const DatasetContext ctx = DatasetContext::load(load_manifest(dir / "manifest.json"));
    for (std::size_t idx = 0; idx < ctx.samples.size() && runs < 100; ++idx, ++runs) {
      AugmentationConfig cfg;
      cfg.seed = gen();
      cfg.size_ratio = 3.0;  // let rares larger than majors through
      cfg.dilation_iterations = 1 + static_cast<int>(gen() % 3);
      cfg.major_fraction = 1.0;
      const AugmentResult r = augment_sample(ctx, idx, cfg);
      const Sample& before = ctx.samples[idx];
      applied += static_cast<int>(r.applied);
      for (const ProvenanceRecord& pr : r.provenance)
        overlaps += pr.outcome == "skipped:neighbor-overlap";
      std::set<InstanceId> replaced;
      for (const ProvenanceRecord& pr : r.provenance)
        if (pr.applied()) replaced.insert(pr.major_id);
      for (const auto& [id, cls] : before.class_of) {
        if (replaced.count(id)) continue;
        if (!r.sample.class_of.count(id)) {
          v.require(false, "instance " + std::to_string(id) + " vanished");
          continue;
        }
        const PixelSet fp = footprint_of(before, id);
        v.require(footprint_of(r.sample, id) == fp, "footprint changed");
        for (const Point& q : fp) v.require(r.sample.image[q] == before.image[q], "pixels changed");
      }
    }
  }

  // CutMix contrast: a neighbour inside the pasted rectangle gets cut.
  const Frame f{40, 40};
  Sample s = blank_sample("c", f, {200, 180, 190});
  paint_instance(s, square(f, 10, 14, 10, 14), 1, 1, {90, 60, 140});
  paint_instance(s, square(f, 10, 14, 16, 20), 2, 2, {120, 70, 150});
  paint_instance(s, disc(f, 30, 30, 4.5), 3, 3, {40, 20, 80});
  const DatasetManifest m = three_class_manifest();
  const fs::path dir = temp_dir("accept_cutmix");
  write_sample(s, SamplePaths::in_dir(dir, "c"));
  DatasetManifest cm = m;
  const SamplePaths sp = SamplePaths::in_dir(dir, "c");
  cm.entries.push_back({"c", sp.image, sp.instances, sp.classes, "original"});
  write_manifest(dir / "manifest.json", cm);
  std::ostringstream out, err;
  const int status = cli::run({"augment", "--manifest", (dir / "manifest.json").string(), "--out",
                               (dir / "out").string(), "--mode", "cutmix", "--major-fraction",
                               "1", "--size-ratio", "3"},
                              out, err);
  v.require(status == 0, "cutmix run failed: " + err.str());
  std::size_t before_px = 0, after_px = 0;
  if (status == 0) {
    const DatasetManifest res = load_manifest(dir / "out" / "manifest.json");
    const Sample after = load_sample(res.entries.back());
    before_px = footprint_of(s, 2).size();
    after_px = footprint_of(after, 2).size();
    v.require(after_px < before_px, "cutmix left the neighbour intact");
  }
  std::ostringstream os;
  os << runs << " augmentations, " << applied << " replacements, " << overlaps
     << " overlap skips; cutmix neighbour " << before_px << " -> " << after_px << " px";
  v.detail = (v.pass ? "" : v.detail + "; ") + os.str();
  return v;
}

// 7 ---------------------------------------------------------------------------

Verdict determinism() {
  Verdict v;
  const fs::path in = temp_dir("accept_det_in");
  SynthParams p = default_synth_params();
  p.images = 8;
  synth_dataset(p, 7, in);
  std::map<std::string, std::string> trees[2];
  const int workers[2] = {1, 8};
  for (int k = 0; k < 2; ++k) {
    const fs::path out = temp_dir("accept_det_out" + std::to_string(workers[k]));
    std::ostringstream o, e;
    const int status =
        cli::run({"augment", "--manifest", (in / "manifest.json").string(), "--out",
                  out.string(), "--seed", "42", "--workers", std::to_string(workers[k])},
                 o, e);
    v.require(status == 0, "augment failed: " + e.str());
    trees[k] = tree_contents(out);
  }
  v.require(!trees[0].empty() && trees[0].count("provenance.jsonl"), "missing outputs");
  v.require(trees[0] == trees[1], "output trees differ");
  v.detail = (v.pass ? "" : v.detail + "; ") + std::to_string(trees[0].size()) +
             " files byte-identical at 1 and 8 workers";
  return v;
}

// 8 ---------------------------------------------------------------------------

Verdict performance() {
  Verdict v;
  SynthParams p = default_synth_params();
  p.images = 1;
  p.height = p.width = 1000;
  p.classes[0].per_image = 240;
  p.classes[1].per_image = 235;
  p.classes[2].per_image = 25;
  const fs::path in = temp_dir("accept_perf_in");
  const fs::path out = temp_dir("accept_perf_out");
  synth_dataset(p, 8, in);
  const auto start = Clock::now();
  AugmentationConfig cfg;
  cfg.seed = 42;
  const DatasetReport report = augment_dataset(load_manifest(in / "manifest.json"), cfg, out, 1);
  const double t = seconds_since(start);
  v.require(t < 10.0, "too slow");
  std::ostringstream os;
  os << "500 nuclei, " << report.applied << " replacements in " << t << " s";
  v.detail = (v.pass ? "" : v.detail + "; ") + os.str();
  return v;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"mask suite", mask_suite},
      {"distance transform oracle", edt_oracle},
      {"inpainting", inpainting},
      {"conservation and bookkeeping", conservation},
      {"sampling statistics", sampling},
      {"neighbour protection", protection},
      {"determinism", determinism},
      {"performance", performance},
  };
  int failed = 0;
  int n = 0;
  for (const auto& [name, fn] : criteria) {
    ++n;
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " " << n << " " << name << ": " << v.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
