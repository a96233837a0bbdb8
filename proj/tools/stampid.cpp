// stampid: classify stamp images by country or year.
//
//   stampid scan <root> --out manifest.csv
//   stampid train --manifest manifest.csv --task country --feature all --model svm --out model.json
//   stampid eval --manifest manifest.csv --feature hog --model logreg --repeats 5
//   stampid predict model.json stamp.png
//   stampid dump-features stamp.png --feature hog --dump-hog hog.png
//
// Exit codes: 0 success, 1 usage error, 2 data or model error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stampid/data.hpp"
#include "stampid/error.hpp"
#include "stampid/eval.hpp"
#include "stampid/features.hpp"
#include "stampid/imgio.hpp"
#include "stampid/learn.hpp"

namespace fs = std::filesystem;
using namespace stampid;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// Raised for flag combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FeatureFlags {
  FeatureConfig cfg;

  void add(CLI::App* app) {
    app->add_option("--size", cfg.canonical_size, "canonical image side in pixels")
        ->capture_default_str();
    app->add_option("--hist-bins", cfg.hist_bins)->capture_default_str();
    app->add_option("--hog-cell", cfg.hog_cell)->capture_default_str();
    app->add_option("--hog-block", cfg.hog_block)->capture_default_str();
    app->add_option("--hog-orientations", cfg.hog_orientations)->capture_default_str();
    app->add_option("--daisy-step", cfg.daisy_step)->capture_default_str();
    app->add_option("--daisy-radius", cfg.daisy_radius)->capture_default_str();
    app->add_option("--daisy-rings", cfg.daisy_rings)->capture_default_str();
    app->add_option("--daisy-histograms", cfg.daisy_histograms)->capture_default_str();
    app->add_option("--daisy-orientations", cfg.daisy_orientations)->capture_default_str();
  }
};

struct TrainFlags {
  TrainConfig tc;

  void add(CLI::App* app) {
    app->add_option("--learning-rate", tc.learning_rate)->capture_default_str();
    app->add_option("--lambda", tc.l2_lambda, "L2 penalty on non-bias weights")
        ->capture_default_str();
    app->add_option("--epochs", tc.epochs_sgd, "passes over the training data")
        ->capture_default_str();
    app->add_option("--batch-size", tc.batch_size)->capture_default_str();
  }
};

struct DataFlags {
  std::string manifest;
  std::string root;
  std::string task = "country";
  std::string feature = "hist";
  std::string model = "svm";
  std::uint64_t seed = 0;
  double ratio = 2.0 / 3.0;
  bool augment = false;
  unsigned threads = 0;

  void add(CLI::App* app) {
    auto* m = app->add_option("--manifest", manifest, "CSV manifest (path,country,year)");
    auto* r = app->add_option("--root", root, "dataset directory root/<country>/<year>/");
    m->excludes(r);
    app->add_option("--task", task)->check(CLI::IsMember({"country", "year"}))
        ->capture_default_str();
    app->add_option("--feature", feature)
        ->check(CLI::IsMember({"hist", "hog", "daisy", "all"}))
        ->capture_default_str();
    app->add_option("--model", model)->check(CLI::IsMember({"svm", "logreg"}))
        ->capture_default_str();
    app->add_option("--seed", seed)->capture_default_str();
    app->add_option("--ratio", ratio, "training fraction per class")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    app->add_flag("--augment", augment, "add flipped and rotated copies to training data");
    app->add_option("--threads", threads, "feature extraction workers (0 = all cores)");
  }

  DatasetManifest load() const {
    if (!manifest.empty()) return read_manifest_csv(manifest);
    return scan_dataset(root);
  }

  void require_source() const {
    if (manifest.empty() && root.empty()) {
      throw UsageError("one of --manifest or --root is required");
    }
    if (!(ratio > 0.0 && ratio < 1.0)) throw UsageError("--ratio must be in (0, 1)");
  }
};

// Writes through a sibling temp file so a failed run never leaves a partial
// output behind.
void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out << content;
    if (!out) throw Error(Errc::Io, "failed writing " + path.string());
  }
  fs::rename(tmp, path);
}

void validate_configs(const FeatureConfig& cfg, const TrainConfig* tc) {
  try {
    cfg.validate();
    if (tc) tc->validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

std::string format_percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v * 100.0);
  return buf;
}

int cmd_scan(const std::string& root, const std::string& out) {
  const DatasetManifest m = scan_dataset(root);
  std::ostringstream csv;
  write_manifest_csv(m, csv);
  write_atomic(out, csv.str());

  std::map<std::string, std::size_t> by_country;
  std::map<std::string, std::size_t> by_year;
  for (const auto& r : m.records) {
    ++by_country[r.country];
    ++by_year[r.year];
  }
  std::cout << m.size() << " records written to " << out << '\n';
  std::cout << "countries:\n";
  for (const auto& [k, n] : by_country) std::cout << "  " << k << ": " << n << '\n';
  std::cout << "years:\n";
  for (const auto& [k, n] : by_year) std::cout << "  " << k << ": " << n << '\n';
  if (m.ignored_files > 0) {
    std::cerr << "warning: ignored " << m.ignored_files << " non-image entries\n";
  }
  return kExitOk;
}

int cmd_train(const DataFlags& data, const FeatureConfig& cfg, TrainConfig tc,
              bool full, const std::string& out) {
  const DatasetManifest m = data.load();
  const Task task = parse_task(data.task);
  const FeatureKind kind = parse_feature_kind(data.feature);
  const ModelKind model_kind = parse_model_kind(data.model);
  const LabelSpace labels = m.label_space(task);
  tc.seed = data.seed;

  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  if (full) {
    train_idx.resize(m.size());
    std::iota(train_idx.begin(), train_idx.end(), std::size_t{0});
  } else {
    SplitResult split = stratified_split(m, task, data.ratio, data.seed);
    train_idx = std::move(split.train);
    test_idx = std::move(split.test);
  }

  const FeatureMatrix train =
      build_feature_matrix(m, train_idx, kind, cfg, data.augment, data.threads);
  const auto& y = task == Task::country ? train.y_country : train.y_year;
  const LinearModel model = train_model(model_kind, train.x, y, labels, tc, cfg);

  if (!test_idx.empty()) {
    const FeatureMatrix test =
        build_feature_matrix(m, test_idx, kind, cfg, false, data.threads);
    const auto& truth = task == Task::country ? test.y_country : test.y_year;
    std::vector<std::string> pred;
    pred.reserve(test.x.size());
    for (const auto& fv : test.x) pred.push_back(predict_label(model, fv));
    const ConfusionMatrix cm = confusion_matrix(truth, pred, labels);
    std::cout << "held-out accuracy: " << format_percent(accuracy(cm)) << " ("
              << cm.trace() << "/" << cm.total() << ")\n";
  }
  write_atomic(out, model_to_json(model));
  std::cout << "model written to " << out << " (" << to_string(model_kind) << ", "
            << labels.size() << " classes, " << model.feature_dim << " features)\n";
  return kExitOk;
}

int cmd_eval(const DataFlags& data, const FeatureConfig& cfg, const TrainConfig& tc,
             int repeats, bool eval_augmented, bool eval_rotated, const std::string& out) {
  const DatasetManifest m = data.load();
  ExperimentOptions opts;
  opts.ratio = data.ratio;
  opts.augment_train = data.augment;
  opts.threads = data.threads;
  if (eval_augmented) opts.test_view = TestView::augmented;
  if (eval_rotated) opts.test_view = TestView::rotated90;
  const ExperimentReport rep =
      run_experiment(m, parse_task(data.task), parse_feature_kind(data.feature),
                     parse_model_kind(data.model), cfg, tc, repeats, data.seed, opts);
  std::cout << render_report(rep, ReportFormat::text);
  if (!out.empty()) write_atomic(out, render_report(rep, ReportFormat::csv));
  return kExitOk;
}

int cmd_predict(const std::string& model_path, const std::string& image_path) {
  const LinearModel model = load_model(model_path);
  const FeatureVector fv =
      extract(load_image(image_path), model.feature_kind, model.feature_config);
  std::cout << "label: " << predict_label(model, fv) << '\n';
  if (model.kind == ModelKind::logreg) {
    const auto p = predict_proba(model, fv);
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
    std::cout << "probabilities:\n";
    char buf[64];
    for (std::size_t i : order) {
      std::snprintf(buf, sizeof buf, "%.17g", p[i]);
      std::cout << "  " << model.label_space.labels[i] << ' ' << buf << '\n';
    }
  }
  return kExitOk;
}

int cmd_dump(const std::string& image_path, const std::string& feature,
             const FeatureConfig& cfg, const std::string& out, const std::string& dump_hog) {
  const ImageRGB img = load_image(image_path);
  const FeatureVector fv = extract(img, parse_feature_kind(feature), cfg);
  nlohmann::json doc{{"kind", to_string(fv.kind)}, {"dim", fv.dim()}, {"values", fv.values}};
  const std::string text = doc.dump() + "\n";
  if (!dump_hog.empty()) {
    const ImageGray gray =
        to_grayscale(resize_bilinear(img, cfg.canonical_size, cfg.canonical_size));
    save_png(render_hog(hog_cell_histograms(gray, cfg)), dump_hog);
  }
  if (out.empty()) {
    std::cout << text;
  } else {
    write_atomic(out, text);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stamp image classification by country and year"};
  app.require_subcommand(1);

  std::string scan_root;
  std::string scan_out;
  auto* scan = app.add_subcommand("scan", "index a root/<country>/<year>/ image tree");
  scan->add_option("root", scan_root, "dataset directory")->required();
  scan->add_option("--out", scan_out, "manifest CSV to write")->required();

  DataFlags train_data;
  FeatureFlags train_features;
  TrainFlags train_flags;
  bool train_full = false;
  std::string train_out;
  auto* train = app.add_subcommand("train", "train a model and write it as JSON");
  train_data.add(train);
  train_features.add(train);
  train_flags.add(train);
  train->add_flag("--full", train_full, "train on every record instead of a split");
  train->add_option("--out", train_out, "model JSON to write")->required();

  DataFlags eval_data;
  FeatureFlags eval_features;
  TrainFlags eval_flags;
  int repeats = 5;
  bool eval_augmented = false;
  bool eval_rotated = false;
  std::string eval_out;
  auto* eval = app.add_subcommand("eval", "repeated split / train / test experiment");
  eval_data.add(eval);
  eval_features.add(eval);
  eval_flags.add(eval);
  eval->add_option("--repeats", repeats, "independent splits")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  auto* aug_flag =
      eval->add_flag("--eval-augmented", eval_augmented, "test on all 5 views of each image");
  eval->add_flag("--eval-rotated", eval_rotated, "test on 90-degree rotated images")
      ->excludes(aug_flag);
  eval->add_option("--out", eval_out, "CSV report to write");

  std::string predict_model;
  std::string predict_image;
  auto* predict = app.add_subcommand("predict", "classify one image with a saved model");
  predict->add_option("model", predict_model, "model JSON")->required();
  predict->add_option("image", predict_image, "PNG or JPEG image")->required();

  std::string dump_image;
  std::string dump_feature = "hog";
  std::string dump_out;
  std::string dump_hog;
  FeatureFlags dump_features;
  auto* dump = app.add_subcommand("dump-features", "print the descriptor of one image");
  dump->add_option("image", dump_image, "PNG or JPEG image")->required();
  dump->add_option("--feature", dump_feature)
      ->check(CLI::IsMember({"hist", "hog", "daisy", "all"}))
      ->capture_default_str();
  dump->add_option("--out", dump_out, "JSON file (default: standard output)");
  dump->add_option("--dump-hog", dump_hog, "PNG rendering of the HOG cells");
  dump_features.add(dump);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (scan->parsed()) return cmd_scan(scan_root, scan_out);
    if (train->parsed()) {
      train_data.require_source();
      validate_configs(train_features.cfg, &train_flags.tc);
      return cmd_train(train_data, train_features.cfg, train_flags.tc, train_full, train_out);
    }
    if (eval->parsed()) {
      eval_data.require_source();
      validate_configs(eval_features.cfg, &eval_flags.tc);
      return cmd_eval(eval_data, eval_features.cfg, eval_flags.tc, repeats, eval_augmented,
                      eval_rotated, eval_out);
    }
    if (predict->parsed()) return cmd_predict(predict_model, predict_image);
    if (dump->parsed()) {
      validate_configs(dump_features.cfg, nullptr);
      return cmd_dump(dump_image, dump_feature, dump_features.cfg, dump_out, dump_hog);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error [" << errc_name(e.code()) << "]: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
