#pragma once
// Per-slide glue: load a slide with its annotations and features, run
// detection from a score map, and serialize the result record.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roidet/classifier.hpp"
#include "roidet/config.hpp"
#include "roidet/detection.hpp"
#include "roidet/image.hpp"
#include "roidet/ingestion.hpp"
#include "roidet/optics.hpp"

namespace roidet {

struct SlideData {
  SlideRecord record;
  RgbImage image;
  PatchGrid grid;
  std::optional<AnnotationSet> annotations;
  std::vector<FeatureVector> features;       // row-major, one per patch
  std::vector<LabeledPatch> labeled;         // empty without annotations
  std::vector<PatchRef> annotated;           // region A; empty without annotations
};

SlideData load_slide(const SlideRecord& record, const RunConfig& config);

// Loads every listed slide; order follows `ids`. May fan out across threads.
std::vector<SlideData> load_slides(const DatasetCatalog& catalog, const std::vector<std::string>& ids,
                                   const RunConfig& config);

// Training pairs from the labeled patches of the given slides.
std::vector<Example> training_examples(const std::vector<const SlideData*>& slides);

struct SlideResult {
  SlidePrediction prediction;
  RoiSelection selection;
  std::optional<double> iou;
  bool iou_empty_union = false;
  std::optional<double> patch_accuracy;
};

// Beta comes from the annotations unless `beta_override` is set; IoU needs annotations.
SlideResult detect_slide(const SlideData& slide, const ScoreMap& scores,
                         std::optional<double> beta_override = std::nullopt);

nlohmann::json to_json(const SlideResult& result);

nlohmann::json boundary_to_json(const ClusterBoundary& boundary, const PatchGrid& grid);

}  // namespace roidet
