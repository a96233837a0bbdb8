#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stampid/imgio.hpp"

namespace stampid {

enum class FeatureKind { hist, hog, daisy, all };

std::string_view to_string(FeatureKind kind);
FeatureKind parse_feature_kind(std::string_view name);

struct FeatureConfig {
  int canonical_size = 128;
  int hist_bins = 32;
  int hog_cell = 8;
  int hog_block = 2;
  int hog_orientations = 9;
  int daisy_step = 16;
  int daisy_radius = 15;
  int daisy_rings = 3;
  int daisy_histograms = 8;
  int daisy_orientations = 8;

  /// Throws Errc::InvalidConfig when a count is < 1, the canonical size is
  /// not a multiple of the HOG cell, or the DAISY radius does not fit.
  void validate() const;

  /// Stable 64-bit FNV-1a digest of every field, rendered as 16 hex digits.
  std::string fingerprint() const;

  bool operator==(const FeatureConfig&) const = default;
};

struct FeatureVector {
  FeatureKind kind = FeatureKind::hist;
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  bool operator==(const FeatureVector&) const = default;
};

/// Descriptor length for images of canonical size.
std::size_t feature_dim(FeatureKind kind, const FeatureConfig& cfg);

// ---------------------------------------------------------------------------
// Color histogram

/// Per-channel histograms of hist_bins bins, each normalized to unit mass,
/// laid out as [R | G | B]. Value v lands in bin floor(v * bins / 256).
FeatureVector color_histogram(const ImageRGB& img, const FeatureConfig& cfg);

// ---------------------------------------------------------------------------
// Gradients

/// Centered [-1, 0, 1] differences with edge replication.
struct GradientField {
  int width = 0;
  int height = 0;
  std::vector<double> gx;
  std::vector<double> gy;

  double magnitude(std::size_t i) const;
};

GradientField compute_gradients(const ImageGray& img);

// ---------------------------------------------------------------------------
// HOG

/// Unnormalized per-cell orientation histograms, cell-major
/// (row of cells, then column, then bin).
struct HogCells {
  int cells_x = 0;
  int cells_y = 0;
  int orientations = 0;
  std::vector<double> bins;

  std::span<const double> cell(int cx, int cy) const {
    return {bins.data() + (static_cast<std::size_t>(cy) * cells_x + cx) *
                              orientations,
            static_cast<std::size_t>(orientations)};
  }
};

/// Orientation bin b is centered on b * 180 / orientations degrees, so the
/// bin containing 0 degrees is bin 0. Each pixel's magnitude is split
/// linearly between the two nearest bin centers, wrapping at 180.
HogCells hog_cell_histograms(const ImageGray& img, const FeatureConfig& cfg);

/// Block-normalized HOG: hog_block x hog_block cells per block, one-cell
/// stride, v / sqrt(|v|^2 + eps^2) with eps = 1e-6.
FeatureVector hog(const ImageGray& img, const FeatureConfig& cfg);

std::size_t hog_dim(int width, int height, const FeatureConfig& cfg);

/// Star-plot rendering of cell histograms, one tile per cell with a line per
/// orientation bin drawn along the edge direction; brightness follows the
/// bin weight relative to the strongest bin in the image.
ImageGray render_hog(const HogCells& cells, int tile = 16);

// ---------------------------------------------------------------------------
// DAISY

struct DaisyPoint {
  int x;
  int y;
};

/// Centers of the dense lattice. Points are spaced daisy_step apart and the
/// lattice is centered inside the band where every ring sample stays in the
/// image. Throws Errc::RadiusTooLarge when no such point exists.
std::vector<DaisyPoint> daisy_grid(int width, int height,
                                   const FeatureConfig& cfg);

/// Gaussian standard deviation used for ring r; ring -1 is the center.
double daisy_sigma(const FeatureConfig& cfg, int ring);

/// Integer offsets (nearest pixel) of the sample points on ring r.
std::vector<DaisyPoint> daisy_ring_offsets(const FeatureConfig& cfg, int ring);

/// Truncated (radius ceil(3 sigma)) Gaussian normalized to unit sum.
std::vector<double> gaussian_kernel(double sigma);

std::size_t daisy_point_dim(const FeatureConfig& cfg);

/// Dense DAISY: signed, cosine-rectified orientation maps smoothed per ring,
/// sampled at the center and on daisy_rings rings of daisy_histograms points
/// around every lattice point. Each O-bin sub-histogram is L2-normalized
/// with eps = 1e-6; zero sub-histograms stay zero.
FeatureVector daisy(const ImageGray& img, const FeatureConfig& cfg);

// ---------------------------------------------------------------------------
// Composition

/// L2-normalizes each part (zero parts pass through), orders them as
/// hist, hog, daisy and concatenates. Result kind is `all`.
FeatureVector concat_features(std::span<const FeatureVector> parts);

/// Resize to canonical size, convert as needed and run the extractor(s).
FeatureVector extract(const ImageRGB& img, FeatureKind kind,
                      const FeatureConfig& cfg);

}  // namespace stampid
