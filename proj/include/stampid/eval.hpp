#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stampid/data.hpp"
#include "stampid/features.hpp"
#include "stampid/learn.hpp"

namespace stampid {

/// Rows are true labels, columns predicted labels.
struct ConfusionMatrix {
  std::vector<std::string> labels;
  std::vector<std::uint64_t> counts;

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<std::string> names);

  std::size_t size() const { return labels.size(); }
  std::uint64_t& at(std::size_t truth, std::size_t pred) {
    return counts[truth * labels.size() + pred];
  }
  std::uint64_t at(std::size_t truth, std::size_t pred) const {
    return counts[truth * labels.size() + pred];
  }
  std::uint64_t total() const;
  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t trace() const;

  /// Element-wise sum; label lists must match.
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion_matrix(std::span<const std::string> truth,
                                 std::span<const std::string> pred,
                                 const LabelSpace& labels);

/// trace / total; throws Errc::EmptyMatrix on an all-zero matrix.
double accuracy(const ConfusionMatrix& cm);

// ---------------------------------------------------------------------------
// Repeated-split experiments

enum class TestView {
  original,   ///< each test image once
  augmented,  ///< all five augmentation views of each test image
  rotated90,  ///< each test image rotated 90 degrees clockwise
};

struct ExperimentOptions {
  double ratio = 2.0 / 3.0;
  bool augment_train = false;
  TestView test_view = TestView::original;
  bool keep_models = false;
  unsigned threads = 0;
};

struct RunResult {
  std::uint64_t seed = 0;
  ConfusionMatrix matrix;
  double accuracy = 0.0;
};

struct ExperimentReport {
  Task task = Task::country;
  FeatureKind feature_kind = FeatureKind::hist;
  ModelKind model_kind = ModelKind::svm;
  int repeats = 0;
  std::vector<RunResult> per_run;
  double mean_accuracy = 0.0;
  ConfusionMatrix pooled;
  /// Trained models in run order; filled only with keep_models.
  std::vector<LinearModel> models;
};

/// Features of every manifest record, either the original view only or all
/// five augmentation views (in kAllViews order).
struct DatasetFeatures {
  FeatureKind kind = FeatureKind::hist;
  FeatureConfig config;
  bool all_views = false;
  std::vector<std::vector<FeatureVector>> per_record;
};

DatasetFeatures extract_dataset(const DatasetManifest& m, FeatureKind kind,
                                const FeatureConfig& cfg, bool all_views,
                                unsigned threads = 0);

/// For r in [0, repeats): split with seed base_seed + r, train with the same
/// seed, evaluate on the held-out records and record the matrix.
ExperimentReport run_experiment(const DatasetManifest& m, Task task,
                                FeatureKind kind, ModelKind model_kind,
                                const FeatureConfig& cfg, const TrainConfig& tc,
                                int repeats, std::uint64_t base_seed,
                                const ExperimentOptions& opts = {});

/// Same protocol over features that were already extracted.
ExperimentReport run_experiment(const DatasetFeatures& features,
                                const DatasetManifest& m, Task task,
                                ModelKind model_kind, const TrainConfig& tc,
                                int repeats, std::uint64_t base_seed,
                                const ExperimentOptions& opts = {});

// ---------------------------------------------------------------------------
// Rendering

enum class ReportFormat { text, csv };

std::string render_report(const ExperimentReport& rep, ReportFormat format);

struct ParsedRun {
  int run = 0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
};

struct ParsedReport {
  ConfusionMatrix pooled;
  std::vector<ParsedRun> runs;
  double mean_accuracy = 0.0;
};

/// Reads the CSV produced by render_report(rep, ReportFormat::csv).
ParsedReport parse_report_csv(std::string_view text);

}  // namespace stampid
