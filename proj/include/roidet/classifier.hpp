#pragma once
// Three-class patch scorer (melanoma / nevus / other).
//
// The built-in model is softmax regression over 14 handcrafted color features,
// trained with mini-batch SGD. Externally computed scores (for example from a
// deep network) can be imported instead and are interchangeable downstream.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roidet/geometry.hpp"
#include "roidet/image.hpp"
#include "roidet/label.hpp"

namespace roidet {

inline constexpr int kNumFeatures = 14;
inline constexpr int kHistogramBins = 8;

// [mean R, mean G, mean B, std R, std G, std B, gray histogram x8], all in [0,1].
using FeatureVector = std::array<double, kNumFeatures>;

struct ModelParams {
  std::array<std::array<double, kNumFeatures>, kNumClasses> weights{};
  std::array<double, kNumClasses> biases{};

  bool operator==(const ModelParams&) const = default;
};

// Same shape as the parameters.
using Gradient = ModelParams;

struct ScoreTriple {
  double p_melanoma = 0.0;
  double p_nevus = 0.0;
  double p_other = 0.0;

  double operator[](Label l) const {
    switch (l) {
      case Label::Melanoma: return p_melanoma;
      case Label::Nevus: return p_nevus;
      case Label::Other: return p_other;
    }
    return 0.0;
  }
  // Ties resolve toward the earlier class (melanoma, nevus, other).
  Label argmax() const;

  bool operator==(const ScoreTriple&) const = default;
};

struct TrainConfig {
  double learning_rate = 0.5;
  int epochs = 200;
  int batch_size = 32;
  std::uint64_t seed = 0;
  double l2 = 1e-4;
};

struct Example {
  FeatureVector features{};
  Label label = Label::Other;
};

// Dense per-patch scores in row-major grid order.
class ScoreMap {
 public:
  ScoreMap() = default;
  ScoreMap(int rows, int cols, std::vector<ScoreTriple> scores);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return scores_.size(); }
  bool empty() const noexcept { return scores_.empty(); }

  const ScoreTriple& at(PatchRef p) const;
  const ScoreTriple& operator[](std::size_t linear) const { return scores_[linear]; }
  PatchRef patch(std::size_t linear) const noexcept {
    return {static_cast<int>(linear / cols_), static_cast<int>(linear % cols_)};
  }
  const std::vector<ScoreTriple>& values() const noexcept { return scores_; }

  bool operator==(const ScoreMap&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<ScoreTriple> scores_;
};

// Features of the patch_size x patch_size block at (x0, y0). Throws
// GeometryMismatch when the block does not fit in the image.
FeatureVector extract_features(const RgbImage& image, int x0, int y0, int patch_size);

// Whole-image variant; the image must be square.
FeatureVector extract_features(const RgbImage& block);

std::vector<FeatureVector> extract_grid_features(const RgbImage& slide, const PatchGrid& grid,
                                                 int threads = 1);

ScoreTriple softmax_forward(const ModelParams& params, const FeatureVector& f);

// Mean cross-entropy plus 0.5 * l2 * ||W||^2 (biases unregularized).
double loss(const ModelParams& params, std::span<const Example> batch, double l2);

Gradient loss_gradient(const ModelParams& params, std::span<const Example> batch, double l2);

struct TrainResult {
  ModelParams params;
  std::vector<double> epoch_losses;  // full-data loss after each epoch
};

TrainResult train_with_history(std::span<const Example> examples, const TrainConfig& config);

ModelParams train(std::span<const Example> examples, const TrainConfig& config);

ScoreMap score_features(const ModelParams& params, std::span<const FeatureVector> features,
                        const PatchGrid& grid);

ScoreMap score_slide(const ModelParams& params, const RgbImage& slide, const PatchGrid& grid,
                     int threads = 1);

// JSON-lines rows {slide_id, row, col, p_mel, p_nev, p_other}. When slide_id is
// given, rows for other slides are skipped.
ScoreMap import_scores(const std::filesystem::path& path, const PatchGrid& grid,
                       const std::optional<std::string>& slide_id = std::nullopt);

std::string scores_to_jsonl(const std::string& slide_id, const ScoreMap& scores);

std::string model_to_json(const ModelParams& params);
ModelParams model_from_json(const std::string& text);
void save_model(const std::filesystem::path& path, const ModelParams& params);
ModelParams load_model(const std::filesystem::path& path);

}  // namespace roidet
