#include "roidet/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "roidet/errors.hpp"

namespace roidet {

SlidePrediction classify_slide(const ScoreMap& scores, std::string slide_id) {
  if (scores.empty()) throw Error(ErrorCode::EmptyInput, "cannot classify a slide with no patches");

  SlidePrediction pred;
  pred.slide_id = std::move(slide_id);
  double sum_mel = 0.0;
  double sum_nev = 0.0;
  for (const auto& s : scores.values()) {
    switch (s.argmax()) {
      case Label::Melanoma: ++pred.votes_melanoma; break;
      case Label::Nevus: ++pred.votes_nevus; break;
      case Label::Other: ++pred.votes_other; break;
    }
    sum_mel += s.p_melanoma;
    sum_nev += s.p_nevus;
  }

  if (pred.votes_melanoma != pred.votes_nevus) {
    pred.predicted_label = pred.votes_melanoma > pred.votes_nevus ? Label::Melanoma : Label::Nevus;
  } else {
    // Covers both a genuine tie and the all-"other" case; comparing sums over
    // the same n is the same decision as comparing means.
    pred.predicted_label = sum_nev > sum_mel ? Label::Nevus : Label::Melanoma;
  }
  return pred;
}

std::vector<PatchRef> rank_patches(const ScoreMap& scores, Label target) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double sa = scores[a][target];
    const double sb = scores[b][target];
    if (sa != sb) return sa > sb;
    return a < b;
  });
  std::vector<PatchRef> ranked;
  ranked.reserve(idx.size());
  for (std::size_t i : idx) ranked.push_back(scores.patch(i));
  return ranked;
}

double annotated_ratio(std::size_t annotated_count, std::size_t total_count) {
  if (total_count == 0) throw Error(ErrorCode::DivisionByZero, "slide has no patches");
  if (annotated_count > total_count) {
    throw Error(ErrorCode::InvalidCounts, "annotated patch count " + std::to_string(annotated_count) +
                                              " exceeds total " + std::to_string(total_count));
  }
  return static_cast<double>(annotated_count) / static_cast<double>(total_count);
}

std::size_t roi_budget(std::size_t n, double beta) {
  return static_cast<std::size_t>(std::round(static_cast<double>(n) * beta));
}

RoiSelection select_roi(std::vector<PatchRef> ranked, std::size_t n, double beta,
                        std::string slide_id) {
  if (ranked.size() != n) {
    throw Error(ErrorCode::InvalidInput, "ranking has " + std::to_string(ranked.size()) +
                                             " patches, expected " + std::to_string(n));
  }
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw Error(ErrorCode::InvalidInput, "beta must be in [0, 1]");
  }
  RoiSelection sel;
  sel.slide_id = std::move(slide_id);
  sel.beta = beta;
  sel.k_selected = roi_budget(n, beta);
  sel.selected.insert(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(sel.k_selected));
  sel.ranked = std::move(ranked);
  return sel;
}

double patch_iou(const std::set<PatchRef>& annotated, const std::set<PatchRef>& predicted) {
  std::size_t inter = 0;
  for (const auto& p : annotated) inter += predicted.count(p);
  const std::size_t uni = annotated.size() + predicted.size() - inter;
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double patch_accuracy(const std::map<PatchRef, Label>& predictions,
                      const std::map<PatchRef, Label>& truth) {
  if (truth.empty()) throw Error(ErrorCode::EmptyInput, "no labeled patches to evaluate");
  std::size_t correct = 0;
  for (const auto& [patch, label] : truth) {
    const auto it = predictions.find(patch);
    if (it == predictions.end()) {
      throw Error(ErrorCode::MissingPrediction, "no prediction for patch (" +
                                                    std::to_string(patch.row) + "," +
                                                    std::to_string(patch.col) + ")");
    }
    if (it->second == label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

ConfidenceInterval aggregate_ci(std::span<const double> values) {
  const std::size_t k = values.size();
  if (k < 2) {
    throw Error(ErrorCode::InsufficientRepeats,
                "need at least 2 repeats for a confidence interval, got " + std::to_string(k));
  }
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(k);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double s = std::sqrt(ss / static_cast<double>(k - 1));
  const double half = 1.96 * s / std::sqrt(static_cast<double>(k));
  return {mean, mean - half, mean + half, k};
}

}  // namespace roidet
