#include "stampid/learn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "stampid/error.hpp"
#include "stampid/rng.hpp"

namespace stampid {

namespace {

constexpr double kVarianceFloor = 1e-8;

// Four independent accumulators; the summation order is fixed so results
// stay reproducible.
double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

std::vector<std::size_t> label_indices(std::span<const std::string> y,
                                       const LabelSpace& labels) {
  std::vector<std::size_t> out;
  out.reserve(y.size());
  for (const auto& name : y) out.push_back(labels.require_index(name));
  return out;
}

void check_finite(const LinearModel& m) {
  for (double w : m.weights) {
    if (!std::isfinite(w)) {
      throw Error(Errc::NonFinite, "training diverged: non-finite weight");
    }
  }
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::svm ? "svm" : "logreg";
}

std::string_view to_string(Task task) {
  return task == Task::country ? "country" : "year";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "svm") return ModelKind::svm;
  if (name == "logreg") return ModelKind::logreg;
  throw Error(Errc::InvalidConfig, "unknown model kind '" + std::string(name) + "'");
}

Task parse_task(std::string_view name) {
  if (name == "country") return Task::country;
  if (name == "year") return Task::year;
  throw Error(Errc::InvalidConfig, "unknown task '" + std::string(name) + "'");
}

std::optional<std::size_t> LabelSpace::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t LabelSpace::require_index(std::string_view name) const {
  if (auto i = index_of(name)) return *i;
  throw Error(Errc::LabelOutsideSpace,
              "label '" + std::string(name) + "' is not in the label space");
}

void LabelSpace::validate() const {
  if (labels.empty()) throw Error(Errc::InvalidConfig, "label space is empty");
  std::set<std::string> seen;
  for (const auto& l : labels) {
    if (l.empty()) throw Error(Errc::InvalidConfig, "empty label name");
    if (!seen.insert(l).second) {
      throw Error(Errc::InvalidConfig, "duplicate label '" + l + "'");
    }
  }
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(Errc::InvalidConfig, "learning_rate must be positive");
  }
  if (!(l2_lambda >= 0.0) || !std::isfinite(l2_lambda)) {
    throw Error(Errc::InvalidConfig, "l2_lambda must be non-negative");
  }
  if (epochs_sgd < 1) throw Error(Errc::InvalidConfig, "epochs_sgd must be >= 1");
  if (batch_size < 1) throw Error(Errc::InvalidConfig, "batch_size must be >= 1");
}

Standardizer Standardizer::fit(const Matrix& x, std::size_t columns) {
  Standardizer s;
  s.mean.assign(columns, 0.0);
  s.scale.assign(columns, 1.0);
  if (x.rows == 0) return s;
  const double n = static_cast<double>(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) axpy(1.0, x.row(i).data(), s.mean.data(), columns);
  for (double& m : s.mean) m /= n;
  std::vector<double> var(columns, 0.0);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto r = x.row(i);
    for (std::size_t j = 0; j < columns; ++j) {
      const double d = r[j] - s.mean[j];
      var[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < columns; ++j) {
    s.scale[j] = std::sqrt(std::max(var[j] / n, kVarianceFloor));
  }
  return s;
}

Standardizer Standardizer::identity(std::size_t dim) {
  return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
}

void Standardizer::apply(std::span<const double> in, std::span<double> out) const {
  for (std::size_t j = 0; j < in.size(); ++j) out[j] = (in[j] - mean[j]) / scale[j];
}

LinearModel make_zero_model(ModelKind kind, LabelSpace labels,
                            FeatureKind feature_kind, std::size_t feature_dim,
                            FeatureConfig feature_config) {
  LinearModel m;
  m.kind = kind;
  m.label_space = std::move(labels);
  m.feature_kind = feature_kind;
  m.feature_config = feature_config;
  m.feature_dim = feature_dim;
  m.standardizer = Standardizer::identity(feature_dim);
  m.weights.assign(m.label_space.size() * (feature_dim + 1), 0.0);
  return m;
}

Matrix augment_bias(const Matrix& x) {
  Matrix out(x.rows, x.cols + 1);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto src = x.row(i);
    auto dst = out.row(i);
    std::copy(src.begin(), src.end(), dst.begin());
    dst[x.cols] = 1.0;
  }
  return out;
}

Objective evaluate_objective(ModelKind kind, const Matrix& x,
                             std::span<const std::size_t> y,
                             std::span<const double> weights, std::size_t classes,
                             double l2_lambda, std::span<const std::size_t> subset,
                             std::span<const double> sample_weights) {
  const std::size_t cols = x.cols;
  if (weights.size() != classes * cols) {
    throw Error(Errc::InconsistentFeatureDims, "weight matrix does not match samples");
  }
  if (y.size() != x.rows) {
    throw Error(Errc::LengthMismatch, "label count does not match sample count");
  }
  if (!sample_weights.empty() && sample_weights.size() != x.rows) {
    throw Error(Errc::LengthMismatch, "sample weight count does not match sample count");
  }

  Objective obj;
  obj.gradient.assign(weights.size(), 0.0);
  std::vector<double> z(classes);
  std::vector<double> p(classes);
  double total_weight = 0.0;

  auto visit = [&](std::size_t i) {
    const double wi = sample_weights.empty() ? 1.0 : sample_weights[i];
    total_weight += wi;
    const double* xi = x.data.data() + i * cols;
    for (std::size_t c = 0; c < classes; ++c) {
      z[c] = dot(weights.data() + c * cols, xi, cols);
    }
    if (kind == ModelKind::logreg) {
      const double zmax = *std::max_element(z.begin(), z.end());
      double sum = 0.0;
      for (std::size_t c = 0; c < classes; ++c) {
        p[c] = std::exp(z[c] - zmax);
        sum += p[c];
      }
      obj.loss += wi * (zmax + std::log(sum) - z[y[i]]);
      for (std::size_t c = 0; c < classes; ++c) {
        const double coef = wi * (p[c] / sum - (c == y[i] ? 1.0 : 0.0));
        axpy(coef, xi, obj.gradient.data() + c * cols, cols);
      }
    } else {
      for (std::size_t c = 0; c < classes; ++c) {
        const double s = c == y[i] ? 1.0 : -1.0;
        const double slack = 1.0 - s * z[c];
        if (slack > 0.0) {
          obj.loss += wi * slack;
          axpy(-wi * s, xi, obj.gradient.data() + c * cols, cols);
        }
      }
    }
  };

  if (subset.empty()) {
    for (std::size_t i = 0; i < x.rows; ++i) visit(i);
  } else {
    for (std::size_t i : subset) visit(i);
  }

  if (total_weight > 0.0) {
    obj.loss /= total_weight;
    for (double& g : obj.gradient) g /= total_weight;
  }
  if (l2_lambda > 0.0) {
    double ss = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      for (std::size_t j = 0; j + 1 < cols; ++j) {
        const double w = weights[c * cols + j];
        ss += w * w;
        obj.gradient[c * cols + j] += l2_lambda * w;
      }
    }
    obj.loss += 0.5 * l2_lambda * ss;
  }
  return obj;
}

double gradient_check(ModelKind kind, const Matrix& x,
                      std::span<const std::string> y, const LabelSpace& labels,
                      std::span<const double> weights, double eps,
                      double l2_lambda) {
  if (y.size() != x.rows) {
    throw Error(Errc::LengthMismatch, "label count does not match sample count");
  }
  const Matrix xa = augment_bias(x);
  const auto yi = label_indices(y, labels);
  const std::size_t classes = labels.size();
  if (weights.size() != classes * xa.cols) {
    throw Error(Errc::InconsistentFeatureDims, "weight matrix does not match samples");
  }

  if (kind == ModelKind::svm) {
    for (std::size_t i = 0; i < xa.rows; ++i) {
      for (std::size_t c = 0; c < classes; ++c) {
        const double s = c == yi[i] ? 1.0 : -1.0;
        const double z = dot(weights.data() + c * xa.cols, xa.row(i).data(), xa.cols);
        if (std::abs(1.0 - s * z) < 10.0 * eps) {
          throw Error(Errc::KinkTooClose,
                      "sample " + std::to_string(i) + " sits on a hinge kink");
        }
      }
    }
  }

  const Objective analytic =
      evaluate_objective(kind, xa, yi, weights, classes, l2_lambda);
  std::vector<double> w(weights.begin(), weights.end());
  double worst = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double orig = w[j];
    w[j] = orig + eps;
    const double up = evaluate_objective(kind, xa, yi, w, classes, l2_lambda).loss;
    w[j] = orig - eps;
    const double down = evaluate_objective(kind, xa, yi, w, classes, l2_lambda).loss;
    w[j] = orig;
    const double numeric = (up - down) / (2.0 * eps);
    const double ga = analytic.gradient[j];
    const double err =
        std::abs(ga - numeric) / std::max(1.0, std::abs(ga) + std::abs(numeric));
    worst = std::max(worst, err);
  }
  return worst;
}

LinearModel train_model(ModelKind kind, std::span<const FeatureVector> x,
                        std::span<const std::string> y, const LabelSpace& labels,
                        const TrainConfig& tc, const FeatureConfig& fcfg) {
  if (x.empty()) throw Error(Errc::EmptyTrainingSet, "no training samples");
  if (x.size() != y.size()) {
    throw Error(Errc::LengthMismatch, "sample and label counts differ");
  }
  const FeatureKind fkind = x.front().kind;
  const std::size_t dim = x.front().dim();
  for (const auto& v : x) {
    if (v.kind != fkind || v.dim() != dim) {
      throw Error(Errc::InconsistentFeatureDims,
                  "training vectors differ in kind or dimension");
    }
  }
  Matrix xa(x.size(), dim + 1);
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::copy(x[i].values.begin(), x[i].values.end(), xa.row(i).begin());
  }
  return train_model_dense(kind, std::move(xa), label_indices(y, labels), labels, tc,
                           fkind, fcfg);
}

LinearModel train_model_dense(ModelKind kind, Matrix xa,
                              std::span<const std::size_t> y,
                              const LabelSpace& labels, const TrainConfig& tc,
                              FeatureKind feature_kind, const FeatureConfig& fcfg) {
  tc.validate();
  labels.validate();
  if (xa.rows == 0) throw Error(Errc::EmptyTrainingSet, "no training samples");
  if (xa.cols == 0) throw Error(Errc::InconsistentFeatureDims, "sample matrix has no columns");
  if (y.size() != xa.rows) {
    throw Error(Errc::LengthMismatch, "sample and label counts differ");
  }
  if (xa.rows < labels.size()) {
    throw Error(Errc::EmptyTrainingSet, "fewer training samples than classes");
  }
  for (std::size_t label : y) {
    if (label >= labels.size()) {
      throw Error(Errc::LabelOutsideSpace, "label index outside the label space");
    }
  }
  const std::size_t dim = xa.cols - 1;
  LinearModel model = make_zero_model(kind, labels, feature_kind, dim, fcfg);

  // Fit on the first dim columns, then standardize in place.
  Standardizer& st = model.standardizer;
  st = Standardizer::fit(xa, dim);
  for (std::size_t i = 0; i < xa.rows; ++i) {
    auto r = xa.row(i);
    st.apply(r.first(dim), r.first(dim));
    r[dim] = 1.0;
  }

  Rng rng(tc.seed);
  std::vector<std::size_t> order(xa.rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(tc.batch_size);
  for (int epoch = 0; epoch < tc.epochs_sgd; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t len = std::min(batch, order.size() - start);
      const std::span<const std::size_t> subset(order.data() + start, len);
      const Objective obj = evaluate_objective(kind, xa, y, model.weights,
                                               labels.size(), tc.l2_lambda, subset);
      axpy(-tc.learning_rate, obj.gradient.data(), model.weights.data(),
           model.weights.size());
    }
  }
  check_finite(model);
  return model;
}

LinearModel train_logreg(std::span<const FeatureVector> x,
                         std::span<const std::string> y, const LabelSpace& labels,
                         const TrainConfig& tc, const FeatureConfig& fcfg) {
  return train_model(ModelKind::logreg, x, y, labels, tc, fcfg);
}

LinearModel train_svm(std::span<const FeatureVector> x,
                      std::span<const std::string> y, const LabelSpace& labels,
                      const TrainConfig& tc, const FeatureConfig& fcfg) {
  return train_model(ModelKind::svm, x, y, labels, tc, fcfg);
}

std::vector<double> predict_scores(const LinearModel& m, const FeatureVector& x) {
  if (x.kind != m.feature_kind || x.dim() != m.feature_dim) {
    throw Error(Errc::FeatureMismatch,
                "model expects " + std::string(to_string(m.feature_kind)) + "/" +
                    std::to_string(m.feature_dim) + " features, got " +
                    std::string(to_string(x.kind)) + "/" + std::to_string(x.dim()));
  }
  std::vector<double> xs(m.feature_dim + 1);
  m.standardizer.apply(x.values, std::span<double>(xs).first(m.feature_dim));
  xs[m.feature_dim] = 1.0;
  std::vector<double> scores(m.classes());
  for (std::size_t c = 0; c < m.classes(); ++c) {
    scores[c] = dot(m.row(c).data(), xs.data(), xs.size());
  }
  return scores;
}

std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> p(scores.begin(), scores.end());
  if (p.empty()) return p;
  const double zmax = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

std::vector<double> predict_proba(const LinearModel& m, const FeatureVector& x) {
  if (m.kind != ModelKind::logreg) {
    throw Error(Errc::WrongModelKind, "probabilities need a logreg model");
  }
  return softmax(predict_scores(m, x));
}

std::size_t argmax(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

const std::string& predict_label(const LinearModel& m, const FeatureVector& x) {
  return m.label_space.labels[argmax(predict_scores(m, x))];
}

}  // namespace stampid
