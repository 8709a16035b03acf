// roi-detect: command-line driver for the patch-based ROI detection pipeline.
//
//   roi-detect <command> --config <path> [--seed N] [--out DIR] [--scores FILE] [--beta F]
//
// Exit codes: 0 success, 2 validation error, 3 IO error, 4 degenerate data.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "roidet/classifier.hpp"
#include "roidet/config.hpp"
#include "roidet/detection.hpp"
#include "roidet/errors.hpp"
#include "roidet/experiment.hpp"
#include "roidet/ingestion.hpp"
#include "roidet/optics.hpp"
#include "roidet/pipeline.hpp"
#include "roidet/synth.hpp"
#include "roidet/visualization.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitDegenerate = 4;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::optional<std::string> scores;
  std::optional<std::string> model;
  std::optional<std::string> slide;
  std::optional<double> beta;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw roidet::Error(roidet::ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw roidet::Error(roidet::ErrorCode::Io, "write failed for " + path.string());
}

fs::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw roidet::Error(roidet::ErrorCode::Io, "cannot create " + dir + ": " + ec.message());
  return fs::path(dir);
}

roidet::RunConfig effective_config(const Options& opt) {
  roidet::RunConfig cfg = roidet::load_config(opt.config_path);
  if (opt.seed) cfg.seed = *opt.seed;
  return cfg;
}

roidet::DatasetCatalog catalog_for(const roidet::RunConfig& cfg) {
  if (cfg.manifest.empty()) {
    throw roidet::Error(roidet::ErrorCode::Validation, "config has no \"manifest\" path");
  }
  auto catalog = roidet::load_catalog(cfg.manifest);
  if (catalog.slides.empty()) {
    throw roidet::Error(roidet::ErrorCode::EmptyInput, "manifest lists no slides");
  }
  return catalog;
}

std::vector<std::string> target_ids(const Options& opt, const roidet::DatasetCatalog& catalog) {
  if (opt.slide) return {catalog.find(*opt.slide).slide_id};
  std::vector<std::string> ids;
  for (const auto& s : catalog.slides) ids.push_back(s.slide_id);
  return ids;
}

// Scores from the imported file when given, otherwise from the model.
class Scorer {
 public:
  explicit Scorer(const Options& opt) {
    if (opt.scores) {
      scores_path_ = opt.scores;
    } else if (opt.model) {
      model_ = roidet::load_model(*opt.model);
    } else {
      throw roidet::Error(roidet::ErrorCode::Validation, "either --model or --scores is required");
    }
  }

  roidet::ScoreMap operator()(const roidet::SlideData& slide) const {
    if (scores_path_) return roidet::import_scores(*scores_path_, slide.grid, slide.record.slide_id);
    return roidet::score_features(*model_, slide.features, slide.grid);
  }

 private:
  std::optional<fs::path> scores_path_;
  std::optional<roidet::ModelParams> model_;
};

void render_all(const roidet::SlideData& slide, const roidet::ScoreMap& scores,
                const roidet::SlideResult& result, const roidet::RunConfig& cfg,
                const fs::path& out, json* record) {
  const std::string& id = slide.record.slide_id;
  roidet::write_png(out / (id + ".overlay.png"),
                    roidet::render_overlay(slide.image, result.selection, slide.grid));
  std::vector<roidet::GridEdge> edges;
  try {
    const auto boundary = roidet::largest_cluster_boundary(result.selection, slide.grid, cfg.optics,
                                                           cfg.cluster_threshold);
    edges = boundary.edges;
    write_text(out / (id + ".boundary.json"), roidet::boundary_to_json(boundary, slide.grid).dump(2) + "\n");
  } catch (const roidet::Error& e) {
    if (e.code() != roidet::ErrorCode::NoCluster && e.code() != roidet::ErrorCode::EmptySelection) throw;
    if (record) (*record)["boundary_note"] = e.what();
    std::cerr << "[roi-detect] " << id << ": " << e.what() << "; boundary map left unmarked\n";
  }
  roidet::write_png(out / (id + ".boundary.png"), roidet::render_boundary(slide.image, edges, slide.grid));
  roidet::write_png(out / (id + ".heatmap.png"),
                    roidet::render_heatmap(slide.image, scores, result.prediction.predicted_label, slide.grid));
}

int cmd_synth(const Options& opt) {
  const auto cfg = effective_config(opt);
  const auto manifest = roidet::generate_synthetic(cfg.synth, cfg.patch_size, cfg.seed, ensure_dir(opt.out));
  std::cout << "wrote " << cfg.synth.count << " slides, manifest " << manifest.string() << "\n";
  return kExitOk;
}

int cmd_extract(const Options& opt) {
  const auto cfg = effective_config(opt);
  const auto catalog = catalog_for(cfg);
  const fs::path out = ensure_dir(opt.out);
  std::string dump;
  std::size_t labeled = 0;
  for (const auto& id : target_ids(opt, catalog)) {
    const auto slide = roidet::load_slide(catalog.find(id), cfg);
    for (const auto& lp : slide.labeled) labeled += lp.label.has_value();
    dump += roidet::to_jsonl(slide.labeled);
  }
  write_text(out / "labeled_patches.jsonl", dump);
  std::cout << "labeled patches: " << labeled << "\n";
  return kExitOk;
}

int cmd_train(const Options& opt) {
  const auto cfg = effective_config(opt);
  const auto catalog = catalog_for(cfg);
  const auto plan = roidet::make_split(catalog, cfg.train_frac, cfg.seed);
  const auto slides = roidet::load_slides(catalog, plan.train_ids, cfg);
  std::vector<const roidet::SlideData*> ptrs;
  for (const auto& s : slides) ptrs.push_back(&s);
  const auto examples = roidet::training_examples(ptrs);
  const auto result = roidet::train_with_history(examples, cfg.train);
  const fs::path out = ensure_dir(opt.out);
  roidet::save_model(out / "model.json", result.params);
  write_text(out / "split.json", roidet::to_json(plan) + "\n");
  std::cout << "trained on " << examples.size() << " patches from " << plan.train_ids.size()
            << " slides; final loss " << result.epoch_losses.back() << "\n";
  return kExitOk;
}

int cmd_score(const Options& opt) {
  const auto cfg = effective_config(opt);
  if (!opt.model) throw roidet::Error(roidet::ErrorCode::Validation, "score needs --model");
  const auto catalog = catalog_for(cfg);
  const auto params = roidet::load_model(*opt.model);
  std::string lines;
  for (const auto& id : target_ids(opt, catalog)) {
    const auto slide = roidet::load_slide(catalog.find(id), cfg);
    lines += roidet::scores_to_jsonl(id, roidet::score_features(params, slide.features, slide.grid));
  }
  write_text(ensure_dir(opt.out) / "scores.jsonl", lines);
  return kExitOk;
}

int cmd_detect(const Options& opt, bool render_only) {
  const auto cfg = effective_config(opt);
  const auto catalog = catalog_for(cfg);
  const Scorer scorer(opt);
  const fs::path out = ensure_dir(opt.out);
  for (const auto& id : target_ids(opt, catalog)) {
    const auto slide = roidet::load_slide(catalog.find(id), cfg);
    const auto scores = scorer(slide);
    const auto result = roidet::detect_slide(slide, scores, opt.beta);
    json record = roidet::to_json(result);
    render_all(slide, scores, result, cfg, out, render_only ? nullptr : &record);
    if (!render_only) write_text(out / (id + ".result.json"), record.dump(2) + "\n");
    std::cout << id << ": " << roidet::to_string(result.prediction.predicted_label)
              << " beta=" << result.selection.beta << " k=" << result.selection.k_selected;
    if (result.iou) std::cout << " iou=" << *result.iou;
    std::cout << "\n";
  }
  return kExitOk;
}

int cmd_evaluate(const Options& opt) {
  const auto cfg = effective_config(opt);
  const auto catalog = catalog_for(cfg);
  const Scorer scorer(opt);
  const auto plan = roidet::make_split(catalog, cfg.train_frac, cfg.seed);
  const std::vector<std::string> ids = opt.slide ? std::vector<std::string>{*opt.slide} : plan.test_ids;
  const auto slides = roidet::load_slides(catalog, ids, cfg);

  std::size_t correct_slides = 0;
  std::size_t correct_patches = 0;
  std::size_t total_patches = 0;
  double iou_sum = 0.0;
  std::size_t iou_count = 0;
  json records = json::array();
  for (const auto& slide : slides) {
    const auto scores = scorer(slide);
    const auto result = roidet::detect_slide(slide, scores, opt.beta);
    if (result.prediction.predicted_label == slide.record.slide_label) ++correct_slides;
    for (const auto& lp : slide.labeled) {
      if (!lp.label) continue;
      ++total_patches;
      correct_patches += scores.at(lp.patch).argmax() == *lp.label;
    }
    if (result.iou) {
      iou_sum += *result.iou;
      ++iou_count;
    }
    records.push_back(roidet::to_json(result));
  }
  json summary = {{"slides", slides.size()},
                  {"slide_accuracy", static_cast<double>(correct_slides) / static_cast<double>(slides.size())}};
  if (total_patches > 0) {
    summary["patch_accuracy"] = static_cast<double>(correct_patches) / static_cast<double>(total_patches);
  }
  if (iou_count > 0) summary["iou"] = iou_sum / static_cast<double>(iou_count);
  write_text(ensure_dir(opt.out) / "evaluation.json",
             json{{"summary", summary}, {"slides", records}}.dump(2) + "\n");
  std::cout << summary.dump() << "\n";
  return kExitOk;
}

int cmd_experiment(const Options& opt) {
  const auto cfg = effective_config(opt);
  const auto catalog = catalog_for(cfg);
  const auto report = roidet::run_experiment(cfg, catalog);
  roidet::write_report(report, ensure_dir(opt.out));
  std::cout << roidet::report_csv(report);
  return kExitOk;
}

int exit_code_for(const roidet::Error& e) {
  switch (e.category()) {
    case roidet::ErrorCategory::Io: return kExitIo;
    case roidet::ErrorCategory::Degenerate: return kExitDegenerate;
    case roidet::ErrorCategory::Validation: return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Patch-based region-of-interest detection for whole-slide images"};
  app.require_subcommand(1);
  Options opt;

  struct Command {
    const char* name;
    const char* help;
  };
  const std::vector<Command> commands = {
      {"synth", "generate a seeded synthetic dataset"},
      {"extract", "dump labeled patches as JSON lines"},
      {"train", "train the built-in patch classifier on the training split"},
      {"score", "write per-patch scores as JSON lines"},
      {"detect", "classify slides, select ROI patches and render maps"},
      {"evaluate", "patch/slide accuracy and IoU on the test split"},
      {"visualize", "render overlay, boundary and heatmap PNGs"},
      {"experiment", "repeated-subsample experiment with confidence intervals"},
  };
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", opt.config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "override the config seed");
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--scores", opt.scores, "imported scores file (JSON lines)");
    sub->add_option("--model", opt.model, "trained model file");
    sub->add_option("--slide", opt.slide, "restrict to one slide id");
    sub->add_option("--beta", opt.beta, "ROI budget ratio when annotations are absent")
        ->check(CLI::Range(0.0, 1.0));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (cmd == "synth") return cmd_synth(opt);
    if (cmd == "extract") return cmd_extract(opt);
    if (cmd == "train") return cmd_train(opt);
    if (cmd == "score") return cmd_score(opt);
    if (cmd == "detect") return cmd_detect(opt, false);
    if (cmd == "visualize") return cmd_detect(opt, true);
    if (cmd == "evaluate") return cmd_evaluate(opt);
    if (cmd == "experiment") return cmd_experiment(opt);
  } catch (const roidet::Error& e) {
    std::cerr << "roi-detect " << cmd << ": " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "roi-detect " << cmd << ": " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "roi-detect " << cmd << ": " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
