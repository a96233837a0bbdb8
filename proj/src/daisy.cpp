#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "stampid/error.hpp"
#include "stampid/features.hpp"

namespace stampid {

namespace {

// Sub-histograms whose norm falls below this are zeroed instead of scaled.
constexpr double kDaisyEps = 1e-6;

double ring_radius(const FeatureConfig& cfg, int ring) {
  return static_cast<double>(cfg.daisy_radius) * (ring + 1) / cfg.daisy_rings;
}

using Plane = std::vector<double>;

// Separable convolution with edge replication.
Plane smooth(const Plane& src, int w, int h, const std::vector<double>& kernel) {
  const int r = static_cast<int>(kernel.size() / 2);
  Plane tmp(src.size());
  Plane out(src.size());
  std::vector<double> padded(static_cast<std::size_t>(w + 2 * r));
  for (int y = 0; y < h; ++y) {
    const double* row = src.data() + static_cast<std::size_t>(y) * w;
    for (int x = -r; x < w + r; ++x) padded[x + r] = row[std::clamp(x, 0, w - 1)];
    double* dst = tmp.data() + static_cast<std::size_t>(y) * w;
    for (int k = 0; k <= 2 * r; ++k) {
      const double kv = kernel[k];
      const double* shifted = padded.data() + k;
      for (int x = 0; x < w; ++x) dst[x] += kv * shifted[x];
    }
  }
  for (int y = 0; y < h; ++y) {
    double* dst = out.data() + static_cast<std::size_t>(y) * w;
    for (int k = -r; k <= r; ++k) {
      const double kv = kernel[k + r];
      const double* row =
          tmp.data() + static_cast<std::size_t>(std::clamp(y + k, 0, h - 1)) * w;
      for (int x = 0; x < w; ++x) dst[x] += kv * row[x];
    }
  }
  return out;
}

void normalize_or_zero(double* v, int n) {
  double ss = 0.0;
  for (int i = 0; i < n; ++i) ss += v[i] * v[i];
  const double norm = std::sqrt(ss);
  if (norm < kDaisyEps) {
    std::fill(v, v + n, 0.0);
    return;
  }
  for (int i = 0; i < n; ++i) v[i] /= norm;
}

}  // namespace

double daisy_sigma(const FeatureConfig& cfg, int ring) {
  if (ring < 0) return daisy_sigma(cfg, 0) / 2.0;
  return static_cast<double>(cfg.daisy_radius) * (ring + 1) /
         (2.0 * cfg.daisy_rings);
}

std::vector<double> gaussian_kernel(double sigma) {
  const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    const double v = std::exp(-0.5 * i * i / (sigma * sigma));
    k[i + r] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

std::vector<DaisyPoint> daisy_ring_offsets(const FeatureConfig& cfg, int ring) {
  const double radius = ring_radius(cfg, ring);
  std::vector<DaisyPoint> offsets;
  offsets.reserve(static_cast<std::size_t>(cfg.daisy_histograms));
  for (int j = 0; j < cfg.daisy_histograms; ++j) {
    const double a = 2.0 * std::numbers::pi * j / cfg.daisy_histograms;
    offsets.push_back({static_cast<int>(std::lround(radius * std::cos(a))),
                       static_cast<int>(std::lround(radius * std::sin(a)))});
  }
  return offsets;
}

std::vector<DaisyPoint> daisy_grid(int width, int height,
                                   const FeatureConfig& cfg) {
  const int r = cfg.daisy_radius;
  const int span_x = width - 1 - 2 * r;
  const int span_y = height - 1 - 2 * r;
  if (span_x < 0 || span_y < 0) {
    throw Error(Errc::RadiusTooLarge,
                "DAISY radius " + std::to_string(r) + " does not fit a " +
                    std::to_string(width) + "x" + std::to_string(height) +
                    " image");
  }
  const int step = cfg.daisy_step;
  const int nx = span_x / step + 1;
  const int ny = span_y / step + 1;
  const int x0 = r + (span_x - (nx - 1) * step) / 2;
  const int y0 = r + (span_y - (ny - 1) * step) / 2;
  std::vector<DaisyPoint> pts;
  pts.reserve(static_cast<std::size_t>(nx) * ny);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) pts.push_back({x0 + ix * step, y0 + iy * step});
  }
  return pts;
}

std::size_t daisy_point_dim(const FeatureConfig& cfg) {
  return static_cast<std::size_t>(cfg.daisy_orientations) *
         static_cast<std::size_t>(cfg.daisy_rings * cfg.daisy_histograms + 1);
}

FeatureVector daisy(const ImageGray& img, const FeatureConfig& cfg) {
  const auto grid = daisy_grid(img.width, img.height, cfg);
  const int w = img.width;
  const int h = img.height;
  const int orients = cfg.daisy_orientations;
  const GradientField g = compute_gradients(img);

  // max(0, cos(theta_k - theta)) * m is the positive part of the gradient
  // projected onto direction theta_k.
  std::vector<Plane> maps(static_cast<std::size_t>(orients));
  for (int k = 0; k < orients; ++k) {
    const double a = 2.0 * std::numbers::pi * k / orients;
    const double ca = std::cos(a);
    const double sa = std::sin(a);
    Plane& m = maps[k];
    m.resize(g.gx.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
      m[i] = std::max(0.0, ca * g.gx[i] + sa * g.gy[i]);
    }
  }

  // layers[0] is the center smoothing, layers[r + 1] ring r.
  const int rings = cfg.daisy_rings;
  std::vector<std::vector<Plane>> layers(static_cast<std::size_t>(rings + 1));
  for (int layer = 0; layer <= rings; ++layer) {
    const auto kernel = gaussian_kernel(daisy_sigma(cfg, layer - 1));
    layers[layer].reserve(maps.size());
    for (const Plane& m : maps) layers[layer].push_back(smooth(m, w, h, kernel));
  }

  std::vector<std::vector<DaisyPoint>> offsets;
  for (int r = 0; r < rings; ++r) offsets.push_back(daisy_ring_offsets(cfg, r));

  FeatureVector out{FeatureKind::daisy,
                    std::vector<double>(grid.size() * daisy_point_dim(cfg), 0.0)};
  double* dst = out.values.data();
  auto sample = [&](const std::vector<Plane>& layer, int x, int y) {
    const std::size_t i = static_cast<std::size_t>(y) * w + x;
    for (int k = 0; k < orients; ++k) dst[k] = layer[k][i];
    normalize_or_zero(dst, orients);
    dst += orients;
  };
  for (const DaisyPoint& p : grid) {
    sample(layers[0], p.x, p.y);
    for (int r = 0; r < rings; ++r) {
      for (const DaisyPoint& o : offsets[r]) sample(layers[r + 1], p.x + o.x, p.y + o.y);
    }
  }
  return out;
}

}  // namespace stampid
