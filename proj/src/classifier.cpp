#include "roidet/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "roidet/errors.hpp"
#include "roidet/rng.hpp"

namespace roidet {

using nlohmann::json;

Label ScoreTriple::argmax() const {
  Label best = Label::Melanoma;
  if (p_nevus > (*this)[best]) best = Label::Nevus;
  if (p_other > (*this)[best]) best = Label::Other;
  return best;
}

ScoreMap::ScoreMap(int rows, int cols, std::vector<ScoreTriple> scores)
    : rows_(rows), cols_(cols), scores_(std::move(scores)) {
  if (rows < 0 || cols < 0 ||
      scores_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw Error(ErrorCode::InvalidInput, "score map size does not match its grid");
  }
}

const ScoreTriple& ScoreMap::at(PatchRef p) const {
  if (p.row < 0 || p.row >= rows_ || p.col < 0 || p.col >= cols_) {
    throw Error(ErrorCode::InvalidInput, "patch outside score map");
  }
  return scores_[static_cast<std::size_t>(p.row) * cols_ + p.col];
}

namespace {

// Integer Rec.601 luma; equal channels map to themselves.
inline int gray_level(const Rgb& c) { return (299 * c[0] + 587 * c[1] + 114 * c[2] + 500) / 1000; }

template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers =
      std::clamp<std::size_t>(threads < 1 ? 1 : static_cast<std::size_t>(threads), 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
}

void check_finite(const ModelParams& p) {
  for (const auto& row : p.weights) {
    for (double v : row) {
      if (!std::isfinite(v)) throw Error(ErrorCode::NumericalError, "non-finite weight");
    }
  }
  for (double b : p.biases) {
    if (!std::isfinite(b)) throw Error(ErrorCode::NumericalError, "non-finite bias");
  }
}

}  // namespace

FeatureVector extract_features(const RgbImage& image, int x0, int y0, int patch_size) {
  if (patch_size < 1 || x0 < 0 || y0 < 0 || x0 + patch_size > image.width() ||
      y0 + patch_size > image.height()) {
    throw Error(ErrorCode::GeometryMismatch, "patch block does not fit inside the image");
  }
  std::array<double, 3> sum{};
  std::array<double, 3> sum_sq{};
  std::array<std::size_t, kHistogramBins> hist{};
  for (int y = y0; y < y0 + patch_size; ++y) {
    for (int x = x0; x < x0 + patch_size; ++x) {
      const Rgb c = image.at(x, y);
      for (int ch = 0; ch < 3; ++ch) {
        const double v = c[ch] / 255.0;
        sum[ch] += v;
        sum_sq[ch] += v * v;
      }
      ++hist[static_cast<std::size_t>(gray_level(c) / (256 / kHistogramBins))];
    }
  }
  const double count = static_cast<double>(patch_size) * patch_size;
  FeatureVector f{};
  for (int ch = 0; ch < 3; ++ch) {
    const double mean = sum[ch] / count;
    f[ch] = mean;
    f[3 + ch] = std::sqrt(std::max(0.0, sum_sq[ch] / count - mean * mean));
  }
  for (int b = 0; b < kHistogramBins; ++b) f[6 + b] = static_cast<double>(hist[b]) / count;
  return f;
}

FeatureVector extract_features(const RgbImage& block) {
  if (block.width() != block.height() || block.empty()) {
    throw Error(ErrorCode::GeometryMismatch, "patch block must be a non-empty square");
  }
  return extract_features(block, 0, 0, block.width());
}

std::vector<FeatureVector> extract_grid_features(const RgbImage& slide, const PatchGrid& grid,
                                                 int threads) {
  if (slide.width() != grid.slide_width() || slide.height() != grid.slide_height()) {
    throw Error(ErrorCode::GeometryMismatch, "slide raster does not match the patch grid");
  }
  std::vector<FeatureVector> out(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    const PixelRect r = grid.rect(grid.at(i));
    out[i] = extract_features(slide, r.x, r.y, r.width);
  });
  return out;
}

ScoreTriple softmax_forward(const ModelParams& params, const FeatureVector& f) {
  std::array<double, kNumClasses> logits{};
  for (int c = 0; c < kNumClasses; ++c) {
    double z = params.biases[c];
    for (int k = 0; k < kNumFeatures; ++k) z += params.weights[c][k] * f[k];
    if (!std::isfinite(z)) throw Error(ErrorCode::NumericalError, "non-finite logit");
    logits[c] = z;
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  std::array<double, kNumClasses> e{};
  double total = 0.0;
  for (int c = 0; c < kNumClasses; ++c) {
    e[c] = std::exp(logits[c] - top);
    total += e[c];
  }
  return {e[0] / total, e[1] / total, e[2] / total};
}

double loss(const ModelParams& params, std::span<const Example> batch, double l2) {
  if (batch.empty()) throw Error(ErrorCode::EmptyInput, "empty batch");
  double total = 0.0;
  for (const auto& ex : batch) {
    const ScoreTriple p = softmax_forward(params, ex.features);
    total -= std::log(std::max(p[ex.label], std::numeric_limits<double>::min()));
  }
  double reg = 0.0;
  for (const auto& row : params.weights) {
    for (double w : row) reg += w * w;
  }
  return total / static_cast<double>(batch.size()) + 0.5 * l2 * reg;
}

Gradient loss_gradient(const ModelParams& params, std::span<const Example> batch, double l2) {
  if (batch.empty()) throw Error(ErrorCode::EmptyInput, "empty batch");
  Gradient g;
  for (const auto& ex : batch) {
    const ScoreTriple p = softmax_forward(params, ex.features);
    for (int c = 0; c < kNumClasses; ++c) {
      const double delta = p[static_cast<Label>(c)] - (index_of(ex.label) == c ? 1.0 : 0.0);
      g.biases[c] += delta;
      for (int k = 0; k < kNumFeatures; ++k) g.weights[c][k] += delta * ex.features[k];
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (int c = 0; c < kNumClasses; ++c) {
    g.biases[c] *= inv;
    for (int k = 0; k < kNumFeatures; ++k) {
      g.weights[c][k] = g.weights[c][k] * inv + l2 * params.weights[c][k];
    }
  }
  return g;
}

TrainResult train_with_history(std::span<const Example> examples, const TrainConfig& config) {
  if (!(config.learning_rate > 0.0) || config.epochs < 1 || config.batch_size < 1 ||
      !(config.l2 >= 0.0)) {
    throw Error(ErrorCode::Validation, "invalid training configuration");
  }
  bool seen[kNumClasses] = {false, false, false};
  for (const auto& ex : examples) seen[index_of(ex.label)] = true;
  if (std::count(std::begin(seen), std::end(seen), true) < 2) {
    throw Error(ErrorCode::DegenerateTrainingSet,
                "training set needs examples of at least two distinct labels");
  }

  TrainResult result;
  ModelParams& params = result.params;
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Example> batch;
  batch.reserve(static_cast<std::size_t>(config.batch_size));
  Rng rng(config.seed);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(examples[order[i]]);
      const Gradient g = loss_gradient(params, batch, config.l2);
      for (int c = 0; c < kNumClasses; ++c) {
        params.biases[c] -= config.learning_rate * g.biases[c];
        for (int k = 0; k < kNumFeatures; ++k) {
          params.weights[c][k] -= config.learning_rate * g.weights[c][k];
        }
      }
    }
    check_finite(params);
    result.epoch_losses.push_back(loss(params, examples, config.l2));
  }
  return result;
}

ModelParams train(std::span<const Example> examples, const TrainConfig& config) {
  return train_with_history(examples, config).params;
}

ScoreMap score_features(const ModelParams& params, std::span<const FeatureVector> features,
                        const PatchGrid& grid) {
  if (features.size() != grid.size()) {
    throw Error(ErrorCode::GeometryMismatch, "feature count does not match the patch grid");
  }
  std::vector<ScoreTriple> scores;
  scores.reserve(features.size());
  for (const auto& f : features) scores.push_back(softmax_forward(params, f));
  return ScoreMap(grid.rows(), grid.cols(), std::move(scores));
}

ScoreMap score_slide(const ModelParams& params, const RgbImage& slide, const PatchGrid& grid,
                     int threads) {
  const auto features = extract_grid_features(slide, grid, threads);
  return score_features(params, features, grid);
}

ScoreMap import_scores(const std::filesystem::path& path, const PatchGrid& grid,
                       const std::optional<std::string>& slide_id) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open scores file " + path.string());

  std::vector<std::optional<ScoreTriple>> slots(grid.size());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::ParseError, where + ": " + e.what());
    }
    PatchRef p;
    ScoreTriple s;
    try {
      if (slide_id && j.at("slide_id").get<std::string>() != *slide_id) continue;
      p = {j.at("row").get<int>(), j.at("col").get<int>()};
      s = {j.at("p_mel").get<double>(), j.at("p_nev").get<double>(), j.at("p_other").get<double>()};
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, where + ": " + e.what());
    }
    const std::string name = "(" + std::to_string(p.row) + "," + std::to_string(p.col) + ")";
    if (!grid.contains(p)) {
      throw Error(ErrorCode::InvalidInput, where + ": patch " + name + " outside the grid");
    }
    for (double v : {s.p_melanoma, s.p_nevus, s.p_other}) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw Error(ErrorCode::InvalidDistribution,
                    where + ": probability out of [0,1] for patch " + name);
      }
    }
    const double sum = s.p_melanoma + s.p_nevus + s.p_other;
    if (std::abs(sum - 1.0) > 1e-6) {
      throw Error(ErrorCode::InvalidDistribution,
                  where + ": probabilities for patch " + name + " sum to " + std::to_string(sum));
    }
    s = {s.p_melanoma / sum, s.p_nevus / sum, s.p_other / sum};
    auto& slot = slots[grid.linear_index(p)];
    if (slot) throw Error(ErrorCode::DuplicatePatch, where + ": duplicate patch " + name);
    slot = s;
  }

  std::vector<ScoreTriple> scores;
  scores.reserve(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i]) {
      const PatchRef p = grid.at(i);
      throw Error(ErrorCode::IncompleteScores, path.string() + ": missing patch (" +
                                                   std::to_string(p.row) + "," +
                                                   std::to_string(p.col) + ")");
    }
    scores.push_back(*slots[i]);
  }
  return ScoreMap(grid.rows(), grid.cols(), std::move(scores));
}

std::string scores_to_jsonl(const std::string& slide_id, const ScoreMap& scores) {
  std::ostringstream out;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const PatchRef p = scores.patch(i);
    const ScoreTriple& s = scores[i];
    json j = {{"slide_id", slide_id}, {"row", p.row},         {"col", p.col},
              {"p_mel", s.p_melanoma}, {"p_nev", s.p_nevus}, {"p_other", s.p_other}};
    out << j.dump() << '\n';
  }
  return out.str();
}

std::string model_to_json(const ModelParams& params) {
  json j;
  j["weights"] = params.weights;
  j["biases"] = params.biases;
  return j.dump(2);
}

ModelParams model_from_json(const std::string& text) {
  ModelParams p;
  try {
    const json j = json::parse(text);
    const auto& w = j.at("weights");
    const auto& b = j.at("biases");
    if (w.size() != kNumClasses || b.size() != kNumClasses) {
      throw Error(ErrorCode::ParseError, "model must have 3 weight rows and 3 biases");
    }
    for (int c = 0; c < kNumClasses; ++c) {
      if (w[c].size() != kNumFeatures) {
        throw Error(ErrorCode::ParseError, "model weight rows must have 14 entries");
      }
      for (int k = 0; k < kNumFeatures; ++k) p.weights[c][k] = w[c][k].get<double>();
      p.biases[c] = b[c].get<double>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("model: ") + e.what());
  }
  check_finite(p);
  return p;
}

void save_model(const std::filesystem::path& path, const ModelParams& params) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write model " + path.string());
  out << model_to_json(params) << '\n';
}

ModelParams load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open model " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace roidet
