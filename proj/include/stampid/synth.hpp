#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "stampid/data.hpp"
#include "stampid/imgio.hpp"
#include "stampid/rng.hpp"

namespace stampid {

/// Seeded generator of stamp-like test images. Each class has its own
/// dominant hue and stripe orientation; images vary in hue, saturation,
/// brightness, stripe period and phase, plus per-pixel Gaussian noise.
struct SyntheticSpec {
  int classes = 5;
  int per_class = 100;
  int size = 128;
  std::uint64_t seed = 2024;
  double noise_sigma = 12.0;  ///< in 8-bit intensity units
};

/// Country-style names for the first five classes, "class<N>" afterwards.
std::string synthetic_class_name(int cls);

ImageRGB synthetic_image(int cls, const SyntheticSpec& spec, Rng& rng);

/// Writes root/<class>/<year>/img_<k>.png for every image and returns the
/// scanned manifest. Years cycle through 2011..2015.
DatasetManifest write_synthetic_dataset(const std::filesystem::path& root,
                                        const SyntheticSpec& spec);

}  // namespace stampid
