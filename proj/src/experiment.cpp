#include "roidet/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "roidet/classifier.hpp"
#include "roidet/detection.hpp"
#include "roidet/errors.hpp"
#include "roidet/pipeline.hpp"
#include "roidet/rng.hpp"

namespace roidet {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace

ExperimentReport run_experiment(const RunConfig& config, const DatasetCatalog& catalog) {
  validate(config);
  if (catalog.slides.empty()) throw Error(ErrorCode::EmptyInput, "catalog has no slides");
  if (config.repeats < 2) {
    throw Error(ErrorCode::InsufficientRepeats, "experiment needs repeats >= 2 for confidence intervals");
  }

  ExperimentReport report;
  report.split = make_split(catalog, config.train_frac, config.seed);

  std::vector<std::string> all_ids = report.split.train_ids;
  all_ids.insert(all_ids.end(), report.split.test_ids.begin(), report.split.test_ids.end());
  const std::vector<SlideData> slides = load_slides(catalog, all_ids, config);
  std::map<std::string, const SlideData*> by_id;
  for (const auto& s : slides) by_id.emplace(s.record.slide_id, &s);

  for (std::size_t fi = 0; fi < config.fractions.size(); ++fi) {
    const double fraction = config.fractions[fi];
    const auto subs = subsample_training(report.split, fraction, config.repeats,
                                         mix_seed(config.seed, 1000 + fi));
    std::vector<double> patch_acc;
    std::vector<double> slide_acc;
    std::vector<double> ious;

    for (int rep = 0; rep < config.repeats; ++rep) {
      const SplitPlan& sub = subs[static_cast<std::size_t>(rep)];
      std::vector<const SlideData*> train_slides;
      for (const auto& id : sub.train_ids) train_slides.push_back(by_id.at(id));
      const auto examples = training_examples(train_slides);
      TrainConfig tc = config.train;
      tc.seed = mix_seed(config.train.seed, sub.seed);
      const ModelParams params = train(examples, tc);

      std::size_t patches_correct = 0;
      std::size_t patches_total = 0;
      std::size_t slides_correct = 0;
      double iou_sum = 0.0;
      std::size_t iou_count = 0;
      for (const auto& id : sub.test_ids) {
        const SlideData& s = *by_id.at(id);
        const ScoreMap scores = score_features(params, s.features, s.grid);
        const SlideResult r = detect_slide(s, scores);
        if (r.prediction.predicted_label == s.record.slide_label) ++slides_correct;
        for (const auto& lp : s.labeled) {
          if (!lp.label) continue;
          ++patches_total;
          if (scores.at(lp.patch).argmax() == *lp.label) ++patches_correct;
        }
        if (r.iou) {
          iou_sum += *r.iou;
          ++iou_count;
        }
        json rec = to_json(r);
        rec["fraction"] = fraction;
        rec["repeat"] = rep;
        rec["true_label"] = std::string(to_string(s.record.slide_label));
        report.slide_records.push_back(std::move(rec));
      }
      if (patches_total == 0) throw Error(ErrorCode::EmptyInput, "test slides have no labeled patches");
      if (iou_count == 0) throw Error(ErrorCode::EmptyInput, "no test slide has annotations for IoU");

      CellResult cell{fraction,
                      rep,
                      sub.train_ids.size(),
                      static_cast<double>(patches_correct) / static_cast<double>(patches_total),
                      static_cast<double>(slides_correct) / static_cast<double>(sub.test_ids.size()),
                      iou_sum / static_cast<double>(iou_count)};
      patch_acc.push_back(cell.patch_accuracy);
      slide_acc.push_back(cell.slide_accuracy);
      ious.push_back(cell.iou);
      report.cells.push_back(cell);
    }

    for (const auto& [metric, values] : {std::pair{Metric::PatchAccuracy, &patch_acc},
                                         std::pair{Metric::SlideAccuracy, &slide_acc},
                                         std::pair{Metric::Iou, &ious}}) {
      const ConfidenceInterval ci = aggregate_ci(*values);
      report.rows.push_back({fraction, metric, ci.mean, ci.lower, ci.upper, ci.k});
    }
  }

  report.metadata = {
      {"config", config.source},
      {"effective_config", to_json(config)},
      {"prng", kPrngName},
      {"ci_method", kCiMethod},
      {"clustering_space", "patch-index"},
      {"classifier", "softmax regression over 14 color features, mini-batch SGD"},
      {"split", json::parse(to_json(report.split))},
  };
  return report;
}

std::string report_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "fraction,metric,mean,ci_low,ci_high,k\n";
  for (const auto& r : report.rows) {
    out << fixed(r.fraction, 4) << ',' << to_string(r.metric) << ',' << fixed(r.mean) << ','
        << fixed(r.ci_low) << ',' << fixed(r.ci_high) << ',' << r.k << '\n';
  }
  return out.str();
}

json report_json(const ExperimentReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"fraction", r.fraction},
                    {"metric", std::string(to_string(r.metric))},
                    {"mean", r.mean},
                    {"ci_low", r.ci_low},
                    {"ci_high", r.ci_high},
                    {"k", r.k}});
  }
  json cells = json::array();
  for (const auto& c : report.cells) {
    cells.push_back({{"fraction", c.fraction},
                     {"repeat", c.repeat},
                     {"train_slides", c.train_slides},
                     {"patch_acc", c.patch_accuracy},
                     {"slide_acc", c.slide_accuracy},
                     {"iou", c.iou}});
  }
  return {{"metadata", report.metadata}, {"rows", rows}, {"cells", cells}};
}

void write_report(const ExperimentReport& report, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + out_dir.string() + ": " + ec.message());
  write_file(out_dir / "report.csv", report_csv(report));
  write_file(out_dir / "report.json", report_json(report).dump(2) + "\n");
  std::ostringstream lines;
  for (const auto& rec : report.slide_records) lines << rec.dump() << '\n';
  write_file(out_dir / "slides.jsonl", lines.str());
}

}  // namespace roidet
