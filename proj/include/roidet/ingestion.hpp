#pragma once
// Manifest and annotation loading, patch labeling, and dataset splits.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "roidet/geometry.hpp"
#include "roidet/label.hpp"

namespace roidet {

struct SlideRecord {
  std::string slide_id;
  std::filesystem::path image_path;
  Label slide_label = Label::Melanoma;
  std::optional<std::filesystem::path> annotation_path;
  int patch_size = 32;
};

struct AnnotationSet {
  std::vector<Polygon> roi_polygons;
  std::vector<Polygon> other_polygons;
};

struct LabeledPatch {
  std::string slide_id;
  PatchRef patch;
  std::optional<Label> label;  // nullopt: unannotated, excluded from training

  bool operator==(const LabeledPatch&) const = default;
};

struct DatasetCatalog {
  std::vector<SlideRecord> slides;

  const SlideRecord& find(const std::string& slide_id) const;
};

struct SplitPlan {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::uint64_t seed = 0;

  bool operator==(const SplitPlan&) const = default;
};

// Relative image/annotation paths resolve against the manifest's directory.
DatasetCatalog load_catalog(const std::filesystem::path& manifest_path);

AnnotationSet load_annotations(const std::filesystem::path& path);

inline constexpr double kDefaultTau = 0.5;

// `image_width`/`image_height` are the raster's real size; the grid must be the
// one derived from them and the slide's patch size.
std::vector<LabeledPatch> extract_labeled_patches(const SlideRecord& slide, const AnnotationSet& ann,
                                                  const PatchGrid& grid, int image_width,
                                                  int image_height, double tau = kDefaultTau,
                                                  int coverage_samples = kDefaultCoverageSamples);

// Patches whose ROI coverage reaches tau: the annotated region A.
std::vector<PatchRef> annotated_patches(const AnnotationSet& ann, const PatchGrid& grid,
                                        double tau = kDefaultTau,
                                        int coverage_samples = kDefaultCoverageSamples);

SplitPlan make_split(const DatasetCatalog& catalog, double train_frac, std::uint64_t seed);

std::vector<SplitPlan> subsample_training(const SplitPlan& plan, double fraction, int repeats,
                                          std::uint64_t seed);

std::string to_json(const SplitPlan& plan);

// One JSON object per line: {slide_id, row, col, label}; label null when unlabeled.
std::string to_jsonl(const std::vector<LabeledPatch>& patches);

}  // namespace roidet
