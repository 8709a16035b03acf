#include "roidet/ingestion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "roidet/errors.hpp"
#include "roidet/rng.hpp"

namespace roidet {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

std::vector<Polygon> parse_polygons(const json& j, const std::string& key, const fs::path& src) {
  std::vector<Polygon> out;
  if (!j.contains(key) || j.at(key).is_null()) return out;
  const json& arr = j.at(key);
  if (!arr.is_array()) {
    throw Error(ErrorCode::ParseError, src.string() + ": \"" + key + "\" must be an array");
  }
  for (const auto& poly : arr) {
    std::vector<Point> pts;
    if (!poly.is_array()) {
      throw Error(ErrorCode::ParseError, src.string() + ": polygon must be an array of [x,y]");
    }
    for (const auto& xy : poly) {
      if (!xy.is_array() || xy.size() != 2 || !xy[0].is_number() || !xy[1].is_number()) {
        throw Error(ErrorCode::ParseError, src.string() + ": vertex must be [x,y]");
      }
      pts.push_back({xy[0].get<double>(), xy[1].get<double>()});
    }
    out.emplace_back(std::move(pts));
  }
  return out;
}

std::size_t rounded_count(double frac, std::size_t n) {
  return static_cast<std::size_t>(std::llround(frac * static_cast<double>(n)));
}

}  // namespace

const SlideRecord& DatasetCatalog::find(const std::string& slide_id) const {
  for (const auto& s : slides) {
    if (s.slide_id == slide_id) return s;
  }
  throw Error(ErrorCode::InvalidInput, "unknown slide_id '" + slide_id + "'");
}

DatasetCatalog load_catalog(const fs::path& manifest_path) {
  const json j = read_json_file(manifest_path);
  if (!j.is_array()) {
    throw Error(ErrorCode::ParseError, manifest_path.string() + ": manifest must be a JSON array");
  }
  const fs::path base = manifest_path.parent_path();
  DatasetCatalog catalog;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& e = j[i];
    const std::string where = manifest_path.string() + " entry " + std::to_string(i);
    try {
      SlideRecord rec;
      rec.slide_id = e.at("slide_id").get<std::string>();
      if (!seen.insert(rec.slide_id).second) {
        throw Error(ErrorCode::DuplicateId, "duplicate slide_id '" + rec.slide_id + "'");
      }
      rec.image_path = base / e.at("image").get<std::string>();
      const auto label_text = e.at("label").get<std::string>();
      const auto label = parse_label(label_text);
      if (!label || !is_slide_label(*label)) {
        throw Error(ErrorCode::UnknownLabel, where + ": unknown slide label '" + label_text + "'");
      }
      rec.slide_label = *label;
      if (e.contains("annotations") && !e.at("annotations").is_null()) {
        rec.annotation_path = base / e.at("annotations").get<std::string>();
      }
      if (e.contains("patch_size")) {
        rec.patch_size = e.at("patch_size").get<int>();
        if (rec.patch_size < 1) {
          throw Error(ErrorCode::Validation, where + ": patch_size must be >= 1");
        }
      }
      catalog.slides.push_back(std::move(rec));
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::ParseError, where + ": " + ex.what());
    }
  }
  return catalog;
}

AnnotationSet load_annotations(const fs::path& path) {
  const json j = read_json_file(path);
  if (!j.is_object()) {
    throw Error(ErrorCode::ParseError, path.string() + ": annotation file must be a JSON object");
  }
  AnnotationSet ann;
  ann.roi_polygons = parse_polygons(j, "roi", path);
  ann.other_polygons = parse_polygons(j, "other", path);
  return ann;
}

std::vector<LabeledPatch> extract_labeled_patches(const SlideRecord& slide, const AnnotationSet& ann,
                                                  const PatchGrid& grid, int image_width,
                                                  int image_height, double tau,
                                                  int coverage_samples) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw Error(ErrorCode::Validation, "tau must be in (0, 1]");
  }
  if (grid != grid_from_slide(image_width, image_height, slide.patch_size)) {
    throw Error(ErrorCode::GeometryMismatch,
                "grid does not match image " + std::to_string(image_width) + "x" +
                    std::to_string(image_height) + " of slide '" + slide.slide_id + "'");
  }
  std::vector<LabeledPatch> out;
  out.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const PatchRef p = grid.at(i);
    LabeledPatch lp{slide.slide_id, p, std::nullopt};
    if (patch_coverage(p, grid, ann.roi_polygons, coverage_samples) >= tau) {
      lp.label = slide.slide_label;
    } else if (patch_coverage(p, grid, ann.other_polygons, coverage_samples) >= tau) {
      lp.label = Label::Other;
    }
    out.push_back(std::move(lp));
  }
  return out;
}

std::vector<PatchRef> annotated_patches(const AnnotationSet& ann, const PatchGrid& grid, double tau,
                                        int coverage_samples) {
  std::vector<PatchRef> out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const PatchRef p = grid.at(i);
    if (patch_coverage(p, grid, ann.roi_polygons, coverage_samples) >= tau) out.push_back(p);
  }
  return out;
}

SplitPlan make_split(const DatasetCatalog& catalog, double train_frac, std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw Error(ErrorCode::DegenerateSplit, "train fraction must be in (0, 1), got " +
                                                std::to_string(train_frac));
  }
  std::vector<std::string> ids;
  ids.reserve(catalog.slides.size());
  for (const auto& s : catalog.slides) ids.push_back(s.slide_id);

  Rng rng(seed);
  rng.shuffle(ids);
  const std::size_t n_train = rounded_count(train_frac, ids.size());
  if (n_train == 0 || n_train >= ids.size()) {
    throw Error(ErrorCode::DegenerateSplit,
                "split of " + std::to_string(ids.size()) + " slides leaves an empty side");
  }
  SplitPlan plan;
  plan.seed = seed;
  plan.train_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  plan.test_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
  return plan;
}

std::vector<SplitPlan> subsample_training(const SplitPlan& plan, double fraction, int repeats,
                                          std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::Validation, "subsample fraction must be in (0, 1]");
  }
  if (repeats < 1) throw Error(ErrorCode::Validation, "repeats must be >= 1");
  const std::size_t size = rounded_count(fraction, plan.train_ids.size());
  if (size == 0) {
    throw Error(ErrorCode::DegenerateSplit, "subsample of " + std::to_string(plan.train_ids.size()) +
                                                " training slides at fraction " +
                                                std::to_string(fraction) + " is empty");
  }
  std::vector<SplitPlan> out;
  out.reserve(static_cast<std::size_t>(repeats));
  for (int r = 0; r < repeats; ++r) {
    const std::uint64_t sub_seed = mix_seed(seed, static_cast<std::uint64_t>(r));
    std::vector<std::size_t> idx(plan.train_ids.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(sub_seed);
    rng.shuffle(idx);
    idx.resize(size);
    // Keep the parent's order so fraction 1.0 reproduces the parent exactly.
    std::sort(idx.begin(), idx.end());
    SplitPlan sub;
    sub.seed = sub_seed;
    sub.test_ids = plan.test_ids;
    for (std::size_t i : idx) sub.train_ids.push_back(plan.train_ids[i]);
    out.push_back(std::move(sub));
  }
  return out;
}

std::string to_json(const SplitPlan& plan) {
  json j;
  j["seed"] = plan.seed;
  j["train_ids"] = plan.train_ids;
  j["test_ids"] = plan.test_ids;
  return j.dump(2);
}

std::string to_jsonl(const std::vector<LabeledPatch>& patches) {
  std::ostringstream out;
  for (const auto& p : patches) {
    json j;
    j["slide_id"] = p.slide_id;
    j["row"] = p.patch.row;
    j["col"] = p.patch.col;
    j["label"] = p.label ? json(std::string(to_string(*p.label))) : json(nullptr);
    out << j.dump() << '\n';
  }
  return out.str();
}

}  // namespace roidet
