#pragma once
// Slide-level voting, ranking, beta-budget ROI selection, patch IoU and
// repeat aggregation.

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "roidet/classifier.hpp"
#include "roidet/geometry.hpp"
#include "roidet/label.hpp"

namespace roidet {

struct SlidePrediction {
  std::string slide_id;
  Label predicted_label = Label::Melanoma;
  std::size_t votes_melanoma = 0;
  std::size_t votes_nevus = 0;
  std::size_t votes_other = 0;
};

struct RoiSelection {
  std::string slide_id;
  std::vector<PatchRef> ranked;
  std::set<PatchRef> selected;
  double beta = 0.0;
  std::size_t k_selected = 0;
};

struct EvalSummary {
  double patch_accuracy = 0.0;
  double slide_accuracy = 0.0;
  double iou = 0.0;
};

struct ConfidenceInterval {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t k = 0;
};

inline constexpr const char* kCiMethod = "normal approximation: mean +/- 1.96 * s / sqrt(k), s with k-1 denominator";

// Majority vote over argmax labels, ignoring "other". Ties go to the larger
// summed class probability, then melanoma. With no melanoma/nevus votes the
// mean probabilities decide.
SlidePrediction classify_slide(const ScoreMap& scores, std::string slide_id = {});

// All patches, descending by target-class probability, ties by row-major index.
std::vector<PatchRef> rank_patches(const ScoreMap& scores, Label target);

double annotated_ratio(std::size_t annotated_count, std::size_t total_count);

// k = round(n * beta), half away from zero.
std::size_t roi_budget(std::size_t n, double beta);

RoiSelection select_roi(std::vector<PatchRef> ranked, std::size_t n, double beta,
                        std::string slide_id = {});

// |A ∩ B| / |A ∪ B|; 0 when both are empty.
double patch_iou(const std::set<PatchRef>& annotated, const std::set<PatchRef>& predicted);

double patch_accuracy(const std::map<PatchRef, Label>& predictions,
                      const std::map<PatchRef, Label>& truth);

ConfidenceInterval aggregate_ci(std::span<const double> values);

}  // namespace roidet
