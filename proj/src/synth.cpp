#include "roidet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "roidet/errors.hpp"
#include "roidet/rng.hpp"

namespace roidet {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Disc {
  double cx;
  double cy;
  double r;
};

Polygon blob(Rng& rng, const Disc& d) {
  const int n = rng.between(7, 11);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  std::vector<Point> v;
  v.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double jitter = rng.uniform(-0.3, 0.3);
    const double theta = phase + 2.0 * std::numbers::pi * (i + jitter) / n;
    const double radius = d.r * rng.uniform(0.7, 1.0);
    v.push_back({d.cx + radius * std::cos(theta), d.cy + radius * std::sin(theta)});
  }
  return Polygon(std::move(v));
}

std::uint8_t noisy(Rng& rng, std::uint8_t mean, double sigma) {
  const double v = std::round(rng.normal(mean, sigma));
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

json polygons_json(const std::vector<Polygon>& polys) {
  json arr = json::array();
  for (const auto& p : polys) {
    json pts = json::array();
    for (const auto& v : p.vertices()) pts.push_back({v.x, v.y});
    arr.push_back(std::move(pts));
  }
  return arr;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace

SyntheticSlide generate_slide(const SynthConfig& config, Label label, std::uint64_t seed) {
  if (!is_slide_label(label)) throw Error(ErrorCode::Validation, "slide label must be melanoma or nevus");
  Rng rng(seed);
  SyntheticSlide slide;
  slide.label = label;

  const double w = config.width;
  const double h = config.height;
  const int n_regions = rng.between(config.min_regions, config.max_regions);
  std::vector<Disc> discs;
  for (int attempt = 0; attempt < 500 && static_cast<int>(discs.size()) < n_regions; ++attempt) {
    const double r = std::min(rng.uniform(config.min_region_radius, config.max_region_radius),
                              0.45 * std::min(w, h));
    const Disc d{rng.uniform(r, w - r), rng.uniform(r, h - r), r};
    const bool clear = std::all_of(discs.begin(), discs.end(), [&](const Disc& o) {
      return std::hypot(d.cx - o.cx, d.cy - o.cy) > d.r + o.r + 16.0;
    });
    if (clear) discs.push_back(d);
  }
  for (const auto& d : discs) slide.planted.push_back(blob(rng, d));

  // At least the drawn share of regions is annotated.
  const double share = rng.uniform(config.min_annotated, config.max_annotated);
  const auto n_annotated = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(share * static_cast<double>(slide.planted.size()) - 1e-9)),
      1, slide.planted.size());
  std::vector<std::size_t> pick(slide.planted.size());
  for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
  rng.shuffle(pick);
  pick.resize(n_annotated);
  std::sort(pick.begin(), pick.end());
  for (std::size_t i : pick) slide.annotated.push_back(slide.planted[i]);

  const double side = config.other_region_size;
  for (int attempt = 0; attempt < 500 && static_cast<int>(slide.other.size()) < config.other_regions;
       ++attempt) {
    if (side > w || side > h) break;
    const double x = rng.uniform(0.0, w - side);
    const double y = rng.uniform(0.0, h - side);
    const Disc box{x + side / 2, y + side / 2, side * std::numbers::sqrt2 / 2};
    const bool clear = std::all_of(discs.begin(), discs.end(), [&](const Disc& o) {
      return std::hypot(box.cx - o.cx, box.cy - o.cy) > box.r + o.r + 8.0;
    });
    if (clear) {
      slide.other.emplace_back(std::vector<Point>{{x, y}, {x + side, y}, {x + side, y + side}, {x, y + side}});
    }
  }

  const Rgb tumor = label == Label::Melanoma ? config.melanoma : config.nevus;
  slide.image = RgbImage(config.width, config.height);
  for (int y = 0; y < config.height; ++y) {
    for (int x = 0; x < config.width; ++x) {
      const Point c{x + 0.5, y + 0.5};
      const Rgb& mean = point_in_any(c, slide.planted) ? tumor : config.stroma;
      slide.image.set(x, y, {noisy(rng, mean[0], config.sigma), noisy(rng, mean[1], config.sigma),
                             noisy(rng, mean[2], config.sigma)});
    }
  }
  return slide;
}

fs::path generate_synthetic(const SynthConfig& config, int patch_size, std::uint64_t seed,
                            const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir / "images", ec);
  if (!ec) fs::create_directories(out_dir / "annotations", ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + out_dir.string() + ": " + ec.message());

  const auto n = static_cast<std::size_t>(config.count);
  const auto n_melanoma = static_cast<std::size_t>(std::llround(static_cast<double>(n) / 2.0));
  std::vector<Label> labels(n, Label::Nevus);
  std::fill_n(labels.begin(), n_melanoma, Label::Melanoma);
  Rng label_rng(mix_seed(seed, 0));
  label_rng.shuffle(labels);

  json manifest = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "slide_%03zu", i);
    const SyntheticSlide s = generate_slide(config, labels[i], mix_seed(seed, i + 1));
    const std::string image_rel = std::string("images/") + id + ".png";
    const std::string ann_rel = std::string("annotations/") + id + ".json";
    write_png(out_dir / image_rel, s.image);
    const json ann = {{"roi", polygons_json(s.annotated)}, {"other", polygons_json(s.other)}};
    write_text(out_dir / ann_rel, ann.dump() + "\n");
    manifest.push_back({{"slide_id", id},
                        {"image", image_rel},
                        {"label", std::string(to_string(labels[i]))},
                        {"annotations", ann_rel},
                        {"patch_size", patch_size}});
  }
  const fs::path manifest_path = out_dir / "manifest.json";
  write_text(manifest_path, manifest.dump(2) + "\n");
  return manifest_path;
}

}  // namespace roidet
