#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace stampid {

/// 8-bit RGB raster, row-major, interleaved R,G,B.
struct ImageRGB {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  ImageRGB() = default;
  ImageRGB(int w, int h);
  ImageRGB(int w, int h, std::vector<std::uint8_t> data);

  std::uint8_t& at(int x, int y, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }

  bool operator==(const ImageRGB&) const = default;
};

/// Single-channel luminance raster with values in [0,1].
struct ImageGray {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  ImageGray() = default;
  ImageGray(int w, int h, double fill = 0.0);
  ImageGray(int w, int h, std::vector<double> data);

  double& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  double at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }

  bool operator==(const ImageGray&) const = default;
};

/// Decodes a PNG or JPEG file. The format is sniffed from the leading bytes,
/// not the extension. Alpha is dropped and gray sources come back with
/// R=G=B.
ImageRGB load_image(const std::filesystem::path& path);

void save_png(const ImageRGB& img, const std::filesystem::path& path);
void save_png(const ImageGray& img, const std::filesystem::path& path);

/// BT.601 luma scaled to [0,1].
ImageGray to_grayscale(const ImageRGB& img);

// Pixel-center aligned bilinear resampling with edge clamping. Resizing to
// the source size returns an exact copy.
ImageRGB resize_bilinear(const ImageRGB& img, int target_w, int target_h);
ImageGray resize_bilinear(const ImageGray& img, int target_w, int target_h);

}  // namespace stampid
