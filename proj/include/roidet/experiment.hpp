#pragma once
// Repeated-subsample experiment: for every training fraction and repeat, train
// on a subsample of the training pool and evaluate on the fixed test split.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roidet/config.hpp"
#include "roidet/ingestion.hpp"

namespace roidet {

enum class Metric { PatchAccuracy, SlideAccuracy, Iou };

constexpr std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::PatchAccuracy: return "patch_acc";
    case Metric::SlideAccuracy: return "slide_acc";
    case Metric::Iou: return "iou";
  }
  return "?";
}

struct ReportRow {
  double fraction = 0.0;
  Metric metric = Metric::SlideAccuracy;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t k = 0;
};

struct CellResult {
  double fraction = 0.0;
  int repeat = 0;
  std::size_t train_slides = 0;
  double patch_accuracy = 0.0;
  double slide_accuracy = 0.0;
  double iou = 0.0;
};

struct ExperimentReport {
  SplitPlan split;
  std::vector<CellResult> cells;
  std::vector<ReportRow> rows;
  std::vector<nlohmann::json> slide_records;  // one per test slide per cell
  nlohmann::json metadata;
};

ExperimentReport run_experiment(const RunConfig& config, const DatasetCatalog& catalog);

std::string report_csv(const ExperimentReport& report);
nlohmann::json report_json(const ExperimentReport& report);

// report.csv, report.json and slides.jsonl.
void write_report(const ExperimentReport& report, const std::filesystem::path& out_dir);

}  // namespace roidet
