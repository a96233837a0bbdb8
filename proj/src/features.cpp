#include "stampid/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <string>

#include "stampid/error.hpp"

namespace stampid {

namespace {

constexpr double kNormEps = 1e-6;

void require(bool ok, const std::string& msg) {
  if (!ok) throw Error(Errc::InvalidConfig, msg);
}

double l2_norm(std::span<const double> v) {
  double ss = 0.0;
  for (double x : v) ss += x * x;
  return std::sqrt(ss);
}

int kind_rank(FeatureKind k) { return static_cast<int>(k); }

}  // namespace

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::hist: return "hist";
    case FeatureKind::hog: return "hog";
    case FeatureKind::daisy: return "daisy";
    case FeatureKind::all: return "all";
  }
  return "hist";
}

FeatureKind parse_feature_kind(std::string_view name) {
  if (name == "hist") return FeatureKind::hist;
  if (name == "hog") return FeatureKind::hog;
  if (name == "daisy") return FeatureKind::daisy;
  if (name == "all") return FeatureKind::all;
  throw Error(Errc::InvalidConfig,
              "unknown feature kind '" + std::string(name) + "'");
}

void FeatureConfig::validate() const {
  require(canonical_size >= 1, "canonical_size must be >= 1");
  require(hist_bins >= 1 && hist_bins <= 256, "hist_bins must be in [1, 256]");
  require(hog_cell >= 1, "hog_cell must be >= 1");
  require(hog_block >= 1, "hog_block must be >= 1");
  require(hog_orientations >= 1, "hog_orientations must be >= 1");
  require(canonical_size % hog_cell == 0,
          "canonical_size must be divisible by hog_cell");
  require(canonical_size / hog_cell >= hog_block,
          "hog_block exceeds the number of cells");
  require(daisy_step >= 1, "daisy_step must be >= 1");
  require(daisy_radius >= 1, "daisy_radius must be >= 1");
  require(daisy_rings >= 1, "daisy_rings must be >= 1");
  require(daisy_histograms >= 1, "daisy_histograms must be >= 1");
  require(daisy_orientations >= 1, "daisy_orientations must be >= 1");
  require(2 * daisy_radius < canonical_size,
          "daisy_radius must be below canonical_size / 2");
}

std::string FeatureConfig::fingerprint() const {
  const int fields[] = {canonical_size,   hist_bins,        hog_cell,
                        hog_block,        hog_orientations, daisy_step,
                        daisy_radius,     daisy_rings,      daisy_histograms,
                        daisy_orientations};
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (int f : fields) {
    auto u = static_cast<std::uint32_t>(f);
    for (int b = 0; b < 4; ++b) {
      h ^= (u >> (8 * b)) & 0xFFu;
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::size_t feature_dim(FeatureKind kind, const FeatureConfig& cfg) {
  switch (kind) {
    case FeatureKind::hist:
      return static_cast<std::size_t>(3 * cfg.hist_bins);
    case FeatureKind::hog:
      return hog_dim(cfg.canonical_size, cfg.canonical_size, cfg);
    case FeatureKind::daisy:
      return daisy_grid(cfg.canonical_size, cfg.canonical_size, cfg).size() *
             daisy_point_dim(cfg);
    case FeatureKind::all:
      return feature_dim(FeatureKind::hist, cfg) +
             feature_dim(FeatureKind::hog, cfg) +
             feature_dim(FeatureKind::daisy, cfg);
  }
  return 0;
}

FeatureVector color_histogram(const ImageRGB& img, const FeatureConfig& cfg) {
  const int bins = cfg.hist_bins;
  FeatureVector out{FeatureKind::hist,
                    std::vector<double>(static_cast<std::size_t>(3 * bins), 0.0)};
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  if (n == 0) return out;
  std::vector<std::size_t> counts(out.values.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      const int v = img.pixels[i * 3 + c];
      ++counts[static_cast<std::size_t>(c * bins + v * bins / 256)];
    }
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out.values[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
  }
  return out;
}

double GradientField::magnitude(std::size_t i) const {
  return std::sqrt(gx[i] * gx[i] + gy[i] * gy[i]);
}

GradientField compute_gradients(const ImageGray& img) {
  GradientField g{img.width, img.height, {}, {}};
  const std::size_t n = img.pixels.size();
  g.gx.resize(n);
  g.gy.resize(n);
  for (int y = 0; y < img.height; ++y) {
    const int ym = std::max(y - 1, 0);
    const int yp = std::min(y + 1, img.height - 1);
    for (int x = 0; x < img.width; ++x) {
      const int xm = std::max(x - 1, 0);
      const int xp = std::min(x + 1, img.width - 1);
      const std::size_t i = static_cast<std::size_t>(y) * img.width + x;
      g.gx[i] = img.at(xp, y) - img.at(xm, y);
      g.gy[i] = img.at(x, yp) - img.at(x, ym);
    }
  }
  return g;
}

std::size_t hog_dim(int width, int height, const FeatureConfig& cfg) {
  const int cx = width / cfg.hog_cell;
  const int cy = height / cfg.hog_cell;
  if (cx < cfg.hog_block || cy < cfg.hog_block) return 0;
  return static_cast<std::size_t>(cx - cfg.hog_block + 1) *
         static_cast<std::size_t>(cy - cfg.hog_block + 1) *
         static_cast<std::size_t>(cfg.hog_block * cfg.hog_block) *
         static_cast<std::size_t>(cfg.hog_orientations);
}

HogCells hog_cell_histograms(const ImageGray& img, const FeatureConfig& cfg) {
  const int cell = cfg.hog_cell;
  if (img.width % cell != 0 || img.height % cell != 0) {
    throw Error(Errc::DimensionNotDivisible,
                "image " + std::to_string(img.width) + "x" +
                    std::to_string(img.height) +
                    " is not divisible by HOG cell " + std::to_string(cell));
  }
  const int bins = cfg.hog_orientations;
  HogCells cells{img.width / cell, img.height / cell, bins, {}};
  cells.bins.assign(static_cast<std::size_t>(cells.cells_x) * cells.cells_y * bins,
                    0.0);

  const GradientField g = compute_gradients(img);
  const double bin_width = 180.0 / bins;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * img.width + x;
      const double m = g.magnitude(i);
      if (m == 0.0) continue;
      double theta = std::atan2(g.gy[i], g.gx[i]) * 180.0 / std::numbers::pi;
      if (theta < 0.0) theta += 180.0;
      if (theta >= 180.0) theta -= 180.0;
      const double pos = theta / bin_width;
      int lo = static_cast<int>(std::floor(pos));
      double frac = pos - lo;
      if (lo >= bins) {
        lo = bins - 1;
        frac = 1.0;
      }
      const int hi = (lo + 1) % bins;
      double* h = cells.bins.data() +
                  (static_cast<std::size_t>(y / cell) * cells.cells_x + x / cell) *
                      bins;
      h[lo] += m * (1.0 - frac);
      h[hi] += m * frac;
    }
  }
  return cells;
}

FeatureVector hog(const ImageGray& img, const FeatureConfig& cfg) {
  const HogCells cells = hog_cell_histograms(img, cfg);
  const int block = cfg.hog_block;
  if (cells.cells_x < block || cells.cells_y < block) {
    throw Error(Errc::InvalidDimensions,
                "image too small for a " + std::to_string(block) + "x" +
                    std::to_string(block) + " HOG block");
  }
  const std::size_t block_len =
      static_cast<std::size_t>(block * block) * cells.orientations;
  FeatureVector out{FeatureKind::hog, {}};
  out.values.reserve(hog_dim(img.width, img.height, cfg));
  std::vector<double> v(block_len);
  for (int by = 0; by + block <= cells.cells_y; ++by) {
    for (int bx = 0; bx + block <= cells.cells_x; ++bx) {
      auto it = v.begin();
      for (int cy = by; cy < by + block; ++cy) {
        for (int cx = bx; cx < bx + block; ++cx) {
          const auto h = cells.cell(cx, cy);
          it = std::copy(h.begin(), h.end(), it);
        }
      }
      double ss = 0.0;
      for (double x : v) ss += x * x;
      const double denom = std::sqrt(ss + kNormEps * kNormEps);
      for (double x : v) out.values.push_back(x / denom);
    }
  }
  return out;
}

ImageGray render_hog(const HogCells& cells, int tile) {
  ImageGray out(cells.cells_x * tile, cells.cells_y * tile, 0.0);
  const double peak = cells.bins.empty()
                          ? 0.0
                          : *std::max_element(cells.bins.begin(), cells.bins.end());
  if (peak <= 0.0) return out;
  const double half = 0.5 * (tile - 1);
  const int steps = 2 * tile;
  for (int cy = 0; cy < cells.cells_y; ++cy) {
    for (int cx = 0; cx < cells.cells_x; ++cx) {
      const auto h = cells.cell(cx, cy);
      const double ox = cx * tile + half;
      const double oy = cy * tile + half;
      for (int b = 0; b < cells.orientations; ++b) {
        const double w = h[b] / peak;
        if (w <= 0.0) continue;
        // Edges run perpendicular to the gradient.
        const double angle =
            (b * 180.0 / cells.orientations + 90.0) * std::numbers::pi / 180.0;
        const double dx = std::cos(angle);
        const double dy = std::sin(angle);
        for (int s = -steps; s <= steps; ++s) {
          const double t = half * s / steps;
          const int px = static_cast<int>(std::lround(ox + t * dx));
          const int py = static_cast<int>(std::lround(oy + t * dy));
          if (px < 0 || py < 0 || px >= out.width || py >= out.height) continue;
          out.at(px, py) = std::max(out.at(px, py), w);
        }
      }
    }
  }
  return out;
}

FeatureVector concat_features(std::span<const FeatureVector> parts) {
  if (parts.empty()) {
    throw Error(Errc::EmptyInput, "concat_features needs at least one part");
  }
  std::vector<const FeatureVector*> ordered;
  ordered.reserve(parts.size());
  for (const auto& p : parts) {
    for (double v : p.values) {
      if (!std::isfinite(v)) {
        throw Error(Errc::NonFinite, "non-finite value in feature part");
      }
    }
    ordered.push_back(&p);
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const FeatureVector* a, const FeatureVector* b) {
                     return kind_rank(a->kind) < kind_rank(b->kind);
                   });
  FeatureVector out{FeatureKind::all, {}};
  for (const FeatureVector* p : ordered) {
    const double norm = l2_norm(p->values);
    for (double v : p->values) out.values.push_back(norm > 0.0 ? v / norm : v);
  }
  return out;
}

FeatureVector extract(const ImageRGB& img, FeatureKind kind,
                      const FeatureConfig& cfg) {
  cfg.validate();
  const ImageRGB canon =
      resize_bilinear(img, cfg.canonical_size, cfg.canonical_size);
  switch (kind) {
    case FeatureKind::hist:
      return color_histogram(canon, cfg);
    case FeatureKind::hog:
      return hog(to_grayscale(canon), cfg);
    case FeatureKind::daisy:
      return daisy(to_grayscale(canon), cfg);
    case FeatureKind::all: {
      const ImageGray gray = to_grayscale(canon);
      const FeatureVector parts[] = {color_histogram(canon, cfg), hog(gray, cfg),
                                     daisy(gray, cfg)};
      return concat_features(parts);
    }
  }
  throw Error(Errc::InvalidConfig, "unknown feature kind");
}

}  // namespace stampid
