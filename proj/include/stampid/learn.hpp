#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stampid/features.hpp"

namespace stampid {

enum class ModelKind { svm, logreg };
enum class Task { country, year };

std::string_view to_string(ModelKind kind);
std::string_view to_string(Task task);
ModelKind parse_model_kind(std::string_view name);
Task parse_task(std::string_view name);

struct LabelSpace {
  Task task = Task::country;
  std::vector<std::string> labels;

  std::size_t size() const { return labels.size(); }
  std::optional<std::size_t> index_of(std::string_view name) const;
  /// Throws Errc::LabelOutsideSpace for unknown names.
  std::size_t require_index(std::string_view name) const;
  /// Labels must be distinct and non-empty.
  void validate() const;

  bool operator==(const LabelSpace&) const = default;
};

struct TrainConfig {
  double learning_rate = 0.01;
  double l2_lambda = 1e-4;
  int epochs_sgd = 100;
  int batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Row-major sample matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * cols, cols};
  }
};

/// Per-dimension affine map x -> (x - mean) / scale fitted on training data.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  /// Mean and standard deviation of the first `columns` columns; variances
  /// are floored at 1e-8.
  static Standardizer fit(const Matrix& x, std::size_t columns);
  static Standardizer fit(const Matrix& x) { return fit(x, x.cols); }
  static Standardizer identity(std::size_t dim);

  void apply(std::span<const double> in, std::span<double> out) const;

  bool operator==(const Standardizer&) const = default;
};

struct LinearModel {
  ModelKind kind = ModelKind::logreg;
  LabelSpace label_space;
  FeatureKind feature_kind = FeatureKind::hist;
  FeatureConfig feature_config;
  std::size_t feature_dim = 0;
  Standardizer standardizer;
  /// classes x (feature_dim + 1), row-major; the last column is the bias.
  std::vector<double> weights;

  std::size_t classes() const { return label_space.size(); }
  std::size_t row_length() const { return feature_dim + 1; }
  std::span<double> row(std::size_t c) {
    return {weights.data() + c * row_length(), row_length()};
  }
  std::span<const double> row(std::size_t c) const {
    return {weights.data() + c * row_length(), row_length()};
  }
  std::string config_fingerprint() const { return feature_config.fingerprint(); }

  bool operator==(const LinearModel&) const = default;
};

/// A zero-weight model with an identity standardizer.
LinearModel make_zero_model(ModelKind kind, LabelSpace labels,
                            FeatureKind feature_kind, std::size_t feature_dim,
                            FeatureConfig feature_config = {});

// ---------------------------------------------------------------------------
// Training objectives

/// Loss and gradient of a training objective at W.
///
/// logreg: weighted mean of -log softmax(W x~)_y, plus (lambda/2)|W|^2 over
/// non-bias entries.
/// svm: for every class c the weighted mean of max(0, 1 - s_c w_c.x~) with
/// s_c = +1 when y == c else -1, summed over classes, plus the same penalty.
/// The subgradient at a hinge kink is taken as zero.
///
/// `x` holds augmented rows (last column 1). `subset` restricts the sum to
/// those rows (all rows when empty). `sample_weights`, when given, has one
/// entry per row of `x`.
struct Objective {
  double loss = 0.0;
  std::vector<double> gradient;
};

Objective evaluate_objective(ModelKind kind, const Matrix& x,
                             std::span<const std::size_t> y,
                             std::span<const double> weights, std::size_t classes,
                             double l2_lambda,
                             std::span<const std::size_t> subset = {},
                             std::span<const double> sample_weights = {});

/// Appends the constant-1 bias column.
Matrix augment_bias(const Matrix& x);

/// Max over weights of |g_a - g_n| / max(1, |g_a| + |g_n|), comparing the
/// analytic gradient to central differences with step eps. For svm, throws
/// Errc::KinkTooClose if any |1 - s w_c.x~| < 10 eps.
double gradient_check(ModelKind kind, const Matrix& x,
                      std::span<const std::string> y, const LabelSpace& labels,
                      std::span<const double> weights, double eps,
                      double l2_lambda = 1e-4);

// ---------------------------------------------------------------------------
// Training and prediction

/// Standardizes the features, then runs seeded mini-batch (sub)gradient
/// descent from zero weights for tc.epochs_sgd passes. Bit-reproducible for
/// identical inputs.
LinearModel train_model(ModelKind kind, std::span<const FeatureVector> x,
                        std::span<const std::string> y, const LabelSpace& labels,
                        const TrainConfig& tc, const FeatureConfig& fcfg = {});

/// Same as train_model, over a dense sample matrix. `x` must have
/// feature_dim + 1 columns; the last column is overwritten with the bias 1.
/// Taken by value because it is standardized in place.
LinearModel train_model_dense(ModelKind kind, Matrix x,
                              std::span<const std::size_t> y,
                              const LabelSpace& labels, const TrainConfig& tc,
                              FeatureKind feature_kind,
                              const FeatureConfig& fcfg = {});

LinearModel train_logreg(std::span<const FeatureVector> x,
                         std::span<const std::string> y, const LabelSpace& labels,
                         const TrainConfig& tc, const FeatureConfig& fcfg = {});
LinearModel train_svm(std::span<const FeatureVector> x,
                      std::span<const std::string> y, const LabelSpace& labels,
                      const TrainConfig& tc, const FeatureConfig& fcfg = {});

/// W x~ on the standardized input.
std::vector<double> predict_scores(const LinearModel& m, const FeatureVector& x);

/// Max-shifted softmax. logreg models only.
std::vector<double> predict_proba(const LinearModel& m, const FeatureVector& x);
std::vector<double> softmax(std::span<const double> scores);

/// Index of the largest score; ties go to the lowest index.
std::size_t argmax(std::span<const double> scores);
const std::string& predict_label(const LinearModel& m, const FeatureVector& x);

// ---------------------------------------------------------------------------
// Persistence (versioned JSON)

inline constexpr int kModelFormatVersion = 1;

std::string model_to_json(const LinearModel& m);
LinearModel model_from_json(std::string_view text);
void save_model(const LinearModel& m, const std::filesystem::path& path);
LinearModel load_model(const std::filesystem::path& path);

}  // namespace stampid
