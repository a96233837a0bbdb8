#include "stampid/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "csv.hpp"
#include "stampid/error.hpp"

namespace stampid {

namespace {

constexpr std::string_view kReportHeader = "# stampid-report v1";

std::string percent(double acc) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", acc * 100.0);
  return buf;
}

std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
T parse_number(const std::string& s, const char* what) {
  T v{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error(Errc::ReportFormat, std::string("bad ") + what + " '" + s + "'");
  }
  return v;
}

double parse_double(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(Errc::ReportFormat, "bad accuracy '" + s + "'");
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> names)
    : labels(std::move(names)), counts(labels.size() * labels.size(), 0) {}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::uint64_t s = 0;
  for (std::size_t j = 0; j < size(); ++j) s += at(truth, j);
  return s;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < size(); ++i) s += at(i, i);
  return s;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.labels != labels) {
    throw Error(Errc::LengthMismatch, "cannot add confusion matrices over different labels");
  }
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  return *this;
}

ConfusionMatrix confusion_matrix(std::span<const std::string> truth,
                                 std::span<const std::string> pred,
                                 const LabelSpace& labels) {
  if (truth.size() != pred.size()) {
    throw Error(Errc::LengthMismatch, "truth and prediction lists differ in length");
  }
  ConfusionMatrix cm(labels.labels);
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const auto t = labels.index_of(truth[k]);
    const auto p = labels.index_of(pred[k]);
    if (!t || !p) {
      throw Error(Errc::UnknownLabel,
                  "unknown label '" + (t ? pred[k] : truth[k]) + "'");
    }
    ++cm.at(*t, *p);
  }
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  const std::uint64_t n = cm.total();
  if (n == 0) throw Error(Errc::EmptyMatrix, "accuracy of an empty confusion matrix");
  return static_cast<double>(cm.trace()) / static_cast<double>(n);
}

DatasetFeatures extract_dataset(const DatasetManifest& m, FeatureKind kind,
                                const FeatureConfig& cfg, bool all_views,
                                unsigned threads) {
  std::vector<std::size_t> all(m.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const std::array<View, 1> original = {View::original};
  const std::span<const View> views =
      all_views ? std::span<const View>(kAllViews) : std::span<const View>(original);
  return {kind, cfg, all_views, extract_views(m, all, kind, cfg, views, threads)};
}

ExperimentReport run_experiment(const DatasetFeatures& features,
                                const DatasetManifest& m, Task task,
                                ModelKind model_kind, const TrainConfig& tc,
                                int repeats, std::uint64_t base_seed,
                                const ExperimentOptions& opts) {
  if (repeats < 1) throw Error(Errc::InvalidConfig, "repeats must be >= 1");
  if (features.per_record.size() != m.size()) {
    throw Error(Errc::LengthMismatch, "feature table does not match the manifest");
  }
  const bool needs_views = opts.augment_train || opts.test_view != TestView::original;
  if (needs_views && !features.all_views) {
    throw Error(Errc::InvalidConfig, "augmentation needs features for all views");
  }
  const LabelSpace labels = m.label_space(task);

  ExperimentReport rep;
  rep.task = task;
  rep.feature_kind = features.kind;
  rep.model_kind = model_kind;
  rep.repeats = repeats;
  rep.pooled = ConfusionMatrix(labels.labels);

  for (int r = 0; r < repeats; ++r) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(r);
    const SplitResult split = stratified_split(m, task, opts.ratio, seed);

    std::vector<const FeatureVector*> x;
    std::vector<std::size_t> y;
    for (std::size_t idx : split.train) {
      const auto& views = features.per_record[idx];
      const std::size_t n = opts.augment_train ? views.size() : 1;
      const std::size_t label = labels.require_index(m.records[idx].label(task));
      for (std::size_t v = 0; v < n; ++v) {
        x.push_back(&views[v]);
        y.push_back(label);
      }
    }
    if (x.empty()) throw Error(Errc::EmptyTrainingSet, "split left no training samples");
    const std::size_t dim = x.front()->dim();
    Matrix xa(x.size(), dim + 1);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i]->dim() != dim) {
        throw Error(Errc::InconsistentFeatureDims, "feature dimensions differ across records");
      }
      std::copy(x[i]->values.begin(), x[i]->values.end(), xa.row(i).begin());
    }
    TrainConfig run_tc = tc;
    run_tc.seed = seed;
    LinearModel model = train_model_dense(model_kind, std::move(xa), y, labels, run_tc,
                                          features.kind, features.config);

    std::vector<std::string> truth;
    std::vector<std::string> pred;
    for (std::size_t idx : split.test) {
      const auto& views = features.per_record[idx];
      auto evaluate = [&](const FeatureVector& fv) {
        truth.push_back(m.records[idx].label(task));
        pred.push_back(predict_label(model, fv));
      };
      switch (opts.test_view) {
        case TestView::original:
          evaluate(views[0]);
          break;
        case TestView::augmented:
          for (const auto& fv : views) evaluate(fv);
          break;
        case TestView::rotated90:
          evaluate(views[static_cast<std::size_t>(View::rot90)]);
          break;
      }
    }
    RunResult run;
    run.seed = seed;
    run.matrix = confusion_matrix(truth, pred, labels);
    run.accuracy = accuracy(run.matrix);
    rep.pooled += run.matrix;
    rep.per_run.push_back(std::move(run));
    if (opts.keep_models) rep.models.push_back(std::move(model));
  }
  double sum = 0.0;
  for (const auto& run : rep.per_run) sum += run.accuracy;
  rep.mean_accuracy = sum / static_cast<double>(rep.per_run.size());
  return rep;
}

ExperimentReport run_experiment(const DatasetManifest& m, Task task,
                                FeatureKind kind, ModelKind model_kind,
                                const FeatureConfig& cfg, const TrainConfig& tc,
                                int repeats, std::uint64_t base_seed,
                                const ExperimentOptions& opts) {
  const bool all_views = opts.augment_train || opts.test_view != TestView::original;
  const DatasetFeatures features = extract_dataset(m, kind, cfg, all_views, opts.threads);
  return run_experiment(features, m, task, model_kind, tc, repeats, base_seed, opts);
}

std::string render_report(const ExperimentReport& rep, ReportFormat format) {
  std::ostringstream out;
  const auto& cm = rep.pooled;
  if (format == ReportFormat::csv) {
    out << kReportHeader << '\n';
    out << "label";
    for (const auto& l : cm.labels) out << ',' << detail::csv_field(l);
    out << '\n';
    for (std::size_t i = 0; i < cm.size(); ++i) {
      out << detail::csv_field(cm.labels[i]);
      for (std::size_t j = 0; j < cm.size(); ++j) out << ',' << cm.at(i, j);
      out << '\n';
    }
    out << "run,seed,accuracy\n";
    for (std::size_t r = 0; r < rep.per_run.size(); ++r) {
      out << r << ',' << rep.per_run[r].seed << ',' << exact(rep.per_run[r].accuracy)
          << '\n';
    }
    out << "mean," << exact(rep.mean_accuracy) << '\n';
    return out.str();
  }

  out << "task: " << to_string(rep.task) << "  feature: " << to_string(rep.feature_kind)
      << "  model: " << to_string(rep.model_kind) << "  repeats: " << rep.repeats << '\n';
  out << "pooled confusion matrix (rows: true, columns: predicted)\n";
  std::size_t width = 5;
  for (const auto& l : cm.labels) width = std::max(width, l.size());
  for (auto c : cm.counts) width = std::max(width, std::to_string(c).size());
  auto pad = [&](const std::string& s) {
    return std::string(width - std::min(width, s.size()), ' ') + s;
  };
  out << pad("");
  for (const auto& l : cm.labels) out << "  " << pad(l);
  out << '\n';
  for (std::size_t i = 0; i < cm.size(); ++i) {
    out << pad(cm.labels[i]);
    for (std::size_t j = 0; j < cm.size(); ++j) out << "  " << pad(std::to_string(cm.at(i, j)));
    out << '\n';
  }
  for (std::size_t r = 0; r < rep.per_run.size(); ++r) {
    out << "run " << r << " (seed " << rep.per_run[r].seed
        << ") accuracy: " << percent(rep.per_run[r].accuracy) << '\n';
  }
  out << "mean accuracy: " << percent(rep.mean_accuracy) << '\n';
  return out.str();
}

ParsedReport parse_report_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kReportHeader) {
    throw Error(Errc::ReportFormat, "missing '# stampid-report v1' header");
  }
  ParsedReport rep;
  std::vector<std::string> f;
  auto next = [&]() {
    try {
      return detail::read_csv_record(in, f);
    } catch (const Error& e) {
      throw Error(Errc::ReportFormat, e.what());
    }
  };
  if (!next() || f.empty() || f[0] != "label") {
    throw Error(Errc::ReportFormat, "missing label row");
  }
  rep.pooled = ConfusionMatrix(std::vector<std::string>(f.begin() + 1, f.end()));
  const std::size_t c = rep.pooled.size();
  for (std::size_t i = 0; i < c; ++i) {
    if (!next() || f.size() != c + 1 || f[0] != rep.pooled.labels[i]) {
      throw Error(Errc::ReportFormat, "malformed matrix row " + std::to_string(i));
    }
    for (std::size_t j = 0; j < c; ++j) {
      rep.pooled.at(i, j) = parse_number<std::uint64_t>(f[j + 1], "count");
    }
  }
  if (!next() || f != std::vector<std::string>{"run", "seed", "accuracy"}) {
    throw Error(Errc::ReportFormat, "missing run,seed,accuracy header");
  }
  bool have_mean = false;
  while (next()) {
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() == 2 && f[0] == "mean") {
      rep.mean_accuracy = parse_double(f[1]);
      have_mean = true;
      continue;
    }
    if (f.size() != 3 || have_mean) throw Error(Errc::ReportFormat, "malformed run row");
    rep.runs.push_back({parse_number<int>(f[0], "run index"),
                        parse_number<std::uint64_t>(f[1], "seed"), parse_double(f[2])});
  }
  if (!have_mean) throw Error(Errc::ReportFormat, "missing mean row");
  return rep;
}

}  // namespace stampid
