#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "stampid/error.hpp"
#include "stampid/features.hpp"
#include "support.hpp"

using namespace stampid;
using stampid::testing::random_gray;
using stampid::testing::random_rgb;

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Straight-line gradient at (x, y) with clamped neighbours.
std::pair<double, double> oracle_gradient(const ImageGray& img, int x, int y) {
  auto px = [&](int xx, int yy) {
    return img.at(std::clamp(xx, 0, img.width - 1), std::clamp(yy, 0, img.height - 1));
  };
  return {px(x + 1, y) - px(x - 1, y), px(x, y + 1) - px(x, y - 1)};
}

// Triangular-kernel view of linear orientation voting: bin b gets
// m * max(0, 1 - d(theta, center_b) / width) with circular distance d.
std::vector<double> oracle_cell(const ImageGray& img, int cx, int cy, int cell, int bins) {
  std::vector<double> h(bins, 0.0);
  const double width = 180.0 / bins;
  for (int y = cy * cell; y < (cy + 1) * cell; ++y) {
    for (int x = cx * cell; x < (cx + 1) * cell; ++x) {
      const auto [gx, gy] = oracle_gradient(img, x, y);
      const double m = std::hypot(gx, gy);
      if (m == 0.0) continue;
      const double theta = std::fmod(std::atan2(gy, gx) * 180.0 / std::numbers::pi + 360.0, 180.0);
      for (int b = 0; b < bins; ++b) {
        double d = std::abs(theta - b * width);
        d = std::min(d, 180.0 - d);
        h[b] += m * std::max(0.0, 1.0 - d / width);
      }
    }
  }
  return h;
}

}  // namespace

TEST_CASE("color_histogram examples") {
  FeatureConfig cfg;
  SUBCASE("all black, 4 bins") {
    cfg.hist_bins = 4;
    const auto fv = color_histogram(stampid::testing::solid_rgb(2, 2, 0, 0, 0), cfg);
    CHECK(fv.kind == FeatureKind::hist);
    CHECK(fv.values == std::vector<double>{1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0});
  }
  SUBCASE("single red pixel, 2 bins") {
    cfg.hist_bins = 2;
    const auto fv = color_histogram(stampid::testing::solid_rgb(1, 1, 255, 0, 0), cfg);
    CHECK(fv.values == std::vector<double>{0, 1, 1, 0, 1, 0});
  }
  SUBCASE("black and mid gray, 2 bins") {
    cfg.hist_bins = 2;
    ImageRGB img(2, 1, {0, 0, 0, 128, 128, 128});
    // 128 * 2 / 256 = 1, so each channel splits evenly.
    const auto fv = color_histogram(img, cfg);
    CHECK(fv.values == std::vector<double>{0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
  }
}

TEST_CASE("color_histogram channel mass is one") {
  stampid::Rng rng(9);
  FeatureConfig cfg;
  for (int trial = 0; trial < 30; ++trial) {
    cfg.hist_bins = 1 + static_cast<int>(rng.below(64));
    const auto img = random_rgb(rng, 1 + static_cast<int>(rng.below(30)),
                                1 + static_cast<int>(rng.below(30)));
    const auto fv = color_histogram(img, cfg);
    REQUIRE(fv.dim() == static_cast<std::size_t>(3 * cfg.hist_bins));
    for (int c = 0; c < 3; ++c) {
      const auto begin = fv.values.begin() + c * cfg.hist_bins;
      CHECK(std::accumulate(begin, begin + cfg.hist_bins, 0.0) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("gradient field under 180 degree rotation") {
  stampid::Rng rng(17);
  const ImageGray img = random_gray(rng, 9, 7);
  ImageGray rot(9, 7);
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 9; ++x) rot.at(8 - x, 6 - y) = img.at(x, y);
  const auto g = compute_gradients(img);
  const auto gr = compute_gradients(rot);
  for (int y = 1; y < 6; ++y) {
    for (int x = 1; x < 8; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * 9 + x;
      const std::size_t j = static_cast<std::size_t>(6 - y) * 9 + (8 - x);
      CHECK(gr.gx[j] == -g.gx[i]);
      CHECK(gr.gy[j] == -g.gy[i]);
      // Unsigned orientation is unchanged.
      if (g.magnitude(i) > 0) {
        const double a = std::fmod(std::atan2(g.gy[i], g.gx[i]) + 2 * std::numbers::pi, std::numbers::pi);
        const double b = std::fmod(std::atan2(gr.gy[j], gr.gx[j]) + 2 * std::numbers::pi, std::numbers::pi);
        const double d = std::min(std::abs(a - b), std::numbers::pi - std::abs(a - b));
        CHECK(d < 1e-12);
      }
    }
  }
}

TEST_CASE("hog dimension and zero input") {
  FeatureConfig cfg;
  const auto fv = hog(ImageGray(16, 16, 0.4), cfg);
  CHECK(fv.dim() == 36);
  CHECK(std::all_of(fv.values.begin(), fv.values.end(), [](double v) { return v == 0.0; }));
  for (int s : {24, 40, 64}) {
    const auto z = hog(ImageGray(s, s, 0.9), cfg);
    CHECK(std::all_of(z.values.begin(), z.values.end(), [](double v) { return v == 0.0; }));
  }
  CHECK(hog_dim(128, 128, cfg) == 15u * 15u * 4u * 9u);
}

TEST_CASE("hog rejects sizes not divisible by the cell") {
  FeatureConfig cfg;
  try {
    hog(ImageGray(20, 16), cfg);
    FAIL("expected DimensionNotDivisible");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DimensionNotDivisible);
  }
}

TEST_CASE("hog vertical step edge votes into the 0 degree bin") {
  // Left half 0, right half 1: gx = 1 at the two columns next to the step,
  // gy = 0, so theta = 0 exactly, which is the center of bin 0.
  FeatureConfig cfg;
  ImageGray img(16, 16, 0.0);
  for (int y = 0; y < 16; ++y)
    for (int x = 8; x < 16; ++x) img.at(x, y) = 1.0;
  const auto cells = hog_cell_histograms(img, cfg);
  for (int cy = 0; cy < 2; ++cy) {
    for (int cx = 0; cx < 2; ++cx) {
      const auto h = cells.cell(cx, cy);
      CHECK(h[0] == doctest::Approx(8.0));
      for (int b = 1; b < 9; ++b) CHECK(h[b] == 0.0);
    }
  }
  const auto fv = hog(img, cfg);
  double bin0 = 0.0;
  double rest = 0.0;
  for (std::size_t i = 0; i < fv.dim(); ++i) (i % 9 == 0 ? bin0 : rest) += fv.values[i];
  CHECK(bin0 > 0.0);
  CHECK(rest == 0.0);
}

TEST_CASE("hog cell histograms match a triangular-kernel oracle") {
  stampid::Rng rng(23);
  FeatureConfig cfg;
  for (int bins : {9, 4, 7}) {
    cfg.hog_orientations = bins;
    const ImageGray img = random_gray(rng, 24, 16);
    const auto cells = hog_cell_histograms(img, cfg);
    for (int cy = 0; cy < cells.cells_y; ++cy) {
      for (int cx = 0; cx < cells.cells_x; ++cx) {
        const auto expected = oracle_cell(img, cx, cy, cfg.hog_cell, bins);
        const auto got = cells.cell(cx, cy);
        for (int b = 0; b < bins; ++b) CHECK(got[b] == doctest::Approx(expected[b]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("hog invariants on random images") {
  stampid::Rng rng(31);
  FeatureConfig cfg;
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 8 * (2 + static_cast<int>(rng.below(4)));
    const int h = 8 * (2 + static_cast<int>(rng.below(4)));
    const ImageGray img = random_gray(rng, w, h);
    const auto cells = hog_cell_histograms(img, cfg);
    const auto g = compute_gradients(img);
    for (int cy = 0; cy < cells.cells_y; ++cy) {
      for (int cx = 0; cx < cells.cells_x; ++cx) {
        double mass = 0.0;
        for (int y = cy * 8; y < cy * 8 + 8; ++y)
          for (int x = cx * 8; x < cx * 8 + 8; ++x) mass += g.magnitude(static_cast<std::size_t>(y) * w + x);
        const auto hcell = cells.cell(cx, cy);
        CHECK(std::accumulate(hcell.begin(), hcell.end(), 0.0) == doctest::Approx(mass).epsilon(1e-12));
      }
    }
    const auto fv = hog(img, cfg);
    CHECK(fv.dim() == hog_dim(w, h, cfg));
    const std::size_t block = 4 * 9;
    for (std::size_t b = 0; b < fv.dim(); b += block) {
      const std::span<const double> v(fv.values.data() + b, block);
      CHECK(norm2(v) <= 1.0 + 1e-6);
      CHECK(std::all_of(v.begin(), v.end(), [](double x) { return x >= 0.0; }));
    }
  }
}

TEST_CASE("render_hog draws something for textured input") {
  stampid::Rng rng(2);
  FeatureConfig cfg;
  const auto cells = hog_cell_histograms(random_gray(rng, 32, 16), cfg);
  const ImageGray vis = render_hog(cells, 12);
  CHECK(vis.width == 4 * 12);
  CHECK(vis.height == 2 * 12);
  CHECK(*std::max_element(vis.pixels.begin(), vis.pixels.end()) == doctest::Approx(1.0));
}

TEST_CASE("daisy layout arithmetic") {
  FeatureConfig cfg;
  CHECK(daisy_point_dim(cfg) == 200);
  // Centers must satisfy 15 <= c <= 112; 15, 31, ..., 111 gives 7 per axis.
  const auto grid = daisy_grid(128, 128, cfg);
  CHECK(grid.size() == 49);
  CHECK(grid.front().x == 15);
  CHECK(grid.back().x == 111);
  CHECK(feature_dim(FeatureKind::daisy, cfg) == 49u * 200u);
  CHECK(daisy_sigma(cfg, 0) == doctest::Approx(2.5));
  CHECK(daisy_sigma(cfg, 2) == doctest::Approx(7.5));
  CHECK(daisy_sigma(cfg, -1) == doctest::Approx(1.25));
}

TEST_CASE("daisy radius must fit the image") {
  FeatureConfig cfg;
  try {
    daisy(ImageGray(20, 20), cfg);
    FAIL("expected RadiusTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::RadiusTooLarge);
  }
}

TEST_CASE("daisy on a constant image is all zero") {
  FeatureConfig cfg;
  const auto fv = daisy(ImageGray(64, 64, 0.7), cfg);
  CHECK(fv.dim() == daisy_grid(64, 64, cfg).size() * 200);
  CHECK(std::all_of(fv.values.begin(), fv.values.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("daisy sub-histograms are unit or zero") {
  stampid::Rng rng(41);
  FeatureConfig cfg;
  ImageGray img = random_gray(rng, 64, 64);
  // Flatten one corner so some sub-histograms are exactly zero.
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) img.at(x, y) = 0.5;
  const auto fv = daisy(img, cfg);
  int zeros = 0;
  for (std::size_t i = 0; i < fv.dim(); i += 8) {
    const double n = norm2(std::span<const double>(fv.values.data() + i, 8));
    if (n == 0.0) {
      ++zeros;
    } else {
      CHECK(n == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  CHECK(zeros > 0);
}

TEST_CASE("daisy matches a brute-force per-pixel oracle") {
  // Radial pattern around an off-center point, single lattice point.
  FeatureConfig cfg;
  cfg.daisy_step = 64;
  const int size = 48;
  ImageGray img(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double r = std::hypot(x - 20.3, y - 26.1);
      img.at(x, y) = 0.5 + 0.4 * std::cos(r / 3.0) + 0.001 * x;
    }
  }
  const auto fv = daisy(img, cfg);
  REQUIRE(fv.dim() == 200);

  const int orients = cfg.daisy_orientations;
  // Center: valid band [15, 32], span 17, one point at 15 + 17 / 2 = 23.
  const int cx = 23;
  const int cy = 23;
  auto kernel = [](double sigma) {
    const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k;
    double s = 0.0;
    for (int i = -r; i <= r; ++i) {
      k.push_back(std::exp(-(i * i) / (2.0 * sigma * sigma)));
      s += k.back();
    }
    for (double& v : k) v /= s;
    return k;
  };
  auto oriented = [&](int x, int y, int k) {
    const auto [gx, gy] = oracle_gradient(img, std::clamp(x, 0, size - 1), std::clamp(y, 0, size - 1));
    const double m = std::hypot(gx, gy);
    if (m == 0.0) return 0.0;
    const double theta = std::atan2(gy, gx);
    const double theta_k = 2.0 * std::numbers::pi * k / orients;
    return std::max(0.0, std::cos(theta_k - theta)) * m;
  };
  auto histogram = [&](int x, int y, double sigma) {
    const auto kern = kernel(sigma);
    const int r = static_cast<int>(kern.size() / 2);
    std::vector<double> h(orients, 0.0);
    for (int k = 0; k < orients; ++k) {
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          h[k] += kern[dx + r] * kern[dy + r] * oriented(x + dx, y + dy, k);
        }
      }
    }
    const double n = norm2(h);
    for (double& v : h) v = n < 1e-6 ? 0.0 : v / n;
    return h;
  };

  std::vector<double> expected;
  const double ring_sigma0 = 15.0 / 6.0;
  auto append = [&](const std::vector<double>& h) { expected.insert(expected.end(), h.begin(), h.end()); };
  append(histogram(cx, cy, ring_sigma0 / 2.0));
  for (int r = 0; r < 3; ++r) {
    const double radius = 15.0 * (r + 1) / 3.0;
    const double sigma = 15.0 * (r + 1) / 6.0;
    for (int j = 0; j < 8; ++j) {
      const double a = 2.0 * std::numbers::pi * j / 8.0;
      append(histogram(cx + static_cast<int>(std::lround(radius * std::cos(a))),
                       cy + static_cast<int>(std::lround(radius * std::sin(a))), sigma));
    }
  }
  REQUIRE(expected.size() == fv.dim());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(fv.values[i] == doctest::Approx(expected[i]).epsilon(1e-10));
  }
}

TEST_CASE("concat_features normalizes each part") {
  SUBCASE("unit and zero parts") {
    const FeatureVector parts[] = {{FeatureKind::hist, {3, 4}}, {FeatureKind::hog, {0, 0}}};
    const auto fv = concat_features(parts);
    CHECK(fv.kind == FeatureKind::all);
    REQUIRE(fv.dim() == 4);
    CHECK(fv.values[0] == doctest::Approx(0.6));
    CHECK(fv.values[1] == doctest::Approx(0.8));
    CHECK(fv.values[2] == 0.0);
    CHECK(fv.values[3] == 0.0);
  }
  SUBCASE("single unit part") {
    const FeatureVector parts[] = {{FeatureKind::hist, {1}}};
    CHECK(concat_features(parts).values == std::vector<double>{1});
  }
  SUBCASE("parts are ordered hist, hog, daisy") {
    const FeatureVector parts[] = {{FeatureKind::daisy, {2}}, {FeatureKind::hist, {-5}}, {FeatureKind::hog, {7}}};
    CHECK(concat_features(parts).values == std::vector<double>{-1, 1, 1});
  }
  SUBCASE("empty input") {
    try {
      concat_features({});
      FAIL("expected EmptyInput");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::EmptyInput);
    }
  }
}

TEST_CASE("extract dimensions and determinism") {
  FeatureConfig cfg;
  stampid::Rng rng(77);
  const auto img = random_rgb(rng, 90, 70);
  const auto hist = extract(img, FeatureKind::hist, cfg);
  CHECK(hist.kind == FeatureKind::hist);
  CHECK(hist.dim() == 96);
  const auto all = extract(img, FeatureKind::all, cfg);
  CHECK(all.kind == FeatureKind::all);
  // 96 + 15*15*4*9 + 7*7*8*(3*8+1)
  CHECK(all.dim() == 96u + 8100u + 9800u);
  CHECK(all.dim() == feature_dim(FeatureKind::all, cfg));
  CHECK(extract(img, FeatureKind::all, cfg) == all);
}

TEST_CASE("feature config validation and fingerprint") {
  FeatureConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  FeatureConfig bad = cfg;
  bad.hog_cell = 7;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.daisy_radius = 64;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.hist_bins = 0;
  CHECK_THROWS_AS(bad.validate(), Error);

  FeatureConfig other = cfg;
  other.hog_block = 4;
  CHECK(cfg.fingerprint() == FeatureConfig{}.fingerprint());
  CHECK(cfg.fingerprint() != other.fingerprint());
  CHECK(cfg.fingerprint().size() == 16);
  CHECK(parse_feature_kind("daisy") == FeatureKind::daisy);
  CHECK_THROWS_AS(parse_feature_kind("sift"), Error);
}
