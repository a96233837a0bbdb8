#include "stampid/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace stampid {

namespace fs = std::filesystem;

namespace {

std::array<double, 3> hsv_to_rgb(double h, double s, double v) {
  h = std::fmod(h, 360.0);
  if (h < 0.0) h += 360.0;
  const double c = v * s;
  const double hp = h / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  std::array<double, 3> rgb{};
  switch (static_cast<int>(hp)) {
    case 0: rgb = {c, x, 0}; break;
    case 1: rgb = {x, c, 0}; break;
    case 2: rgb = {0, c, x}; break;
    case 3: rgb = {0, x, c}; break;
    case 4: rgb = {x, 0, c}; break;
    default: rgb = {c, 0, x}; break;
  }
  const double m = v - c;
  for (double& ch : rgb) ch += m;
  return rgb;
}

}  // namespace

std::string synthetic_class_name(int cls) {
  static constexpr std::array<const char*, 5> names = {
      "China", "Japan", "Malaysia", "Singapore", "South-Korea"};
  if (cls >= 0 && cls < static_cast<int>(names.size())) return names[cls];
  return "class" + std::to_string(cls);
}

ImageRGB synthetic_image(int cls, const SyntheticSpec& spec, Rng& rng) {
  const double hue = 360.0 * cls / spec.classes + rng.uniform(-8.0, 8.0);
  const double orient_deg = 180.0 * cls / spec.classes + rng.uniform(-5.0, 5.0);
  const double period = rng.uniform(10.0, 16.0);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double sat = rng.uniform(0.6, 0.9);
  const double val = rng.uniform(0.55, 0.85);
  const double a = orient_deg * std::numbers::pi / 180.0;
  const double ca = std::cos(a);
  const double sa = std::sin(a);

  ImageRGB img(spec.size, spec.size);
  for (int y = 0; y < spec.size; ++y) {
    for (int x = 0; x < spec.size; ++x) {
      const double t =
          0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * (x * ca + y * sa) / period + phase);
      const auto rgb = hsv_to_rgb(hue, sat, val * (0.55 + 0.45 * t));
      for (int c = 0; c < 3; ++c) {
        const double v = rgb[c] * 255.0 + spec.noise_sigma * rng.normal();
        img.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return img;
}

DatasetManifest write_synthetic_dataset(const fs::path& root, const SyntheticSpec& spec) {
  Rng rng(spec.seed);
  for (int cls = 0; cls < spec.classes; ++cls) {
    const std::string name = synthetic_class_name(cls);
    for (int k = 0; k < spec.per_class; ++k) {
      const fs::path dir = root / name / std::to_string(2011 + k % 5);
      fs::create_directories(dir);
      char file[32];
      std::snprintf(file, sizeof file, "img_%03d.png", k);
      save_png(synthetic_image(cls, spec, rng), dir / file);
    }
  }
  return scan_dataset(root);
}

}  // namespace stampid
