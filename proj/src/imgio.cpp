#include "stampid/imgio.hpp"

#include <png.h>
// jpeglib.h needs FILE and size_t declared first.
#include <cstdio>
#include <jpeglib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <fstream>
#include <iterator>
#include <string>

#include "stampid/error.hpp"

namespace stampid {

namespace fs = std::filesystem;

ImageRGB::ImageRGB(int w, int h)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0) {}

ImageRGB::ImageRGB(int w, int h, std::vector<std::uint8_t> data)
    : width(w), height(h), pixels(std::move(data)) {
  if (pixels.size() != static_cast<std::size_t>(w) * h * 3) {
    throw Error(Errc::InvalidDimensions, "pixel buffer does not match " +
                                             std::to_string(w) + "x" +
                                             std::to_string(h) + "x3");
  }
}

ImageGray::ImageGray(int w, int h, double fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

ImageGray::ImageGray(int w, int h, std::vector<double> data)
    : width(w), height(h), pixels(std::move(data)) {
  if (pixels.size() != static_cast<std::size_t>(w) * h) {
    throw Error(Errc::InvalidDimensions, "pixel buffer does not match " +
                                             std::to_string(w) + "x" +
                                             std::to_string(h));
  }
}

namespace {

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw Error(Errc::FileNotFound, "no such file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::FileNotFound, "cannot open: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool is_png(const std::vector<std::uint8_t>& bytes) {
  static constexpr std::array<std::uint8_t, 8> sig = {0x89, 'P', 'N', 'G',
                                                      0x0D, 0x0A, 0x1A, 0x0A};
  return bytes.size() >= sig.size() &&
         std::equal(sig.begin(), sig.end(), bytes.begin());
}

bool is_jpeg(const std::vector<std::uint8_t>& bytes) {
  return bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 &&
         bytes[2] == 0xFF;
}

ImageRGB decode_png(const std::vector<std::uint8_t>& bytes,
                    const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(Errc::CorruptImage,
                "PNG decode failed for " + path.string() + ": " + image.message);
  }
  // Decode as RGBA so alpha can be discarded without compositing.
  image.format = PNG_FORMAT_RGBA;
  std::vector<std::uint8_t> rgba(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, rgba.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error(Errc::CorruptImage,
                "PNG decode failed for " + path.string() + ": " + msg);
  }
  const int w = static_cast<int>(image.width);
  const int h = static_cast<int>(image.height);
  if (w < 1 || h < 1) {
    throw Error(Errc::CorruptImage, "empty PNG: " + path.string());
  }
  ImageRGB out(w, h);
  const std::size_t n = static_cast<std::size_t>(w) * h;
  for (std::size_t i = 0; i < n; ++i) {
    out.pixels[i * 3 + 0] = rgba[i * 4 + 0];
    out.pixels[i * 3 + 1] = rgba[i * 4 + 1];
    out.pixels[i * 3 + 2] = rgba[i * 4 + 2];
  }
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_silence(j_common_ptr, int) {}

ImageRGB decode_jpeg(const std::vector<std::uint8_t>& bytes,
                     const fs::path& path) {
  jpeg_decompress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = jpeg_error_exit;
  err.pub.emit_message = jpeg_silence;

  // Everything touched after setjmp lives outside this frame so a longjmp
  // never skips a destructor.
  std::vector<std::uint8_t> pixels;
  int w = 0;
  int h = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(Errc::CorruptImage, "JPEG decode failed for " + path.string() +
                                        ": " + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  w = static_cast<int>(cinfo.output_width);
  h = static_cast<int>(cinfo.output_height);
  pixels.resize(static_cast<std::size_t>(w) * h * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = pixels.data() +
                   static_cast<std::size_t>(cinfo.output_scanline) * w * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return ImageRGB(w, h, std::move(pixels));
}

template <typename Image>
void check_target(const Image& img, int target_w, int target_h) {
  if (target_w < 1 || target_h < 1) {
    throw Error(Errc::InvalidDimensions,
                "resize target must be at least 1x1, got " +
                    std::to_string(target_w) + "x" + std::to_string(target_h));
  }
  if (img.width < 1 || img.height < 1) {
    throw Error(Errc::InvalidDimensions, "cannot resize an empty image");
  }
}

// Source coordinate and weights for one destination index along an axis.
struct Tap {
  int lo;
  int hi;
  double frac;
};

std::vector<Tap> make_taps(int src, int dst) {
  std::vector<Tap> taps(dst);
  const double scale = static_cast<double>(src) / dst;
  for (int i = 0; i < dst; ++i) {
    double s = (i + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src - 1));
    const int lo = static_cast<int>(std::floor(s));
    const int hi = std::min(lo + 1, src - 1);
    taps[i] = {lo, hi, s - lo};
  }
  return taps;
}

}  // namespace

ImageRGB load_image(const fs::path& path) {
  const auto bytes = read_file(path);
  if (is_png(bytes)) return decode_png(bytes, path);
  if (is_jpeg(bytes)) return decode_jpeg(bytes, path);
  throw Error(Errc::UnsupportedFormat,
              "not a PNG or JPEG file: " + path.string());
}

void save_png(const ImageRGB& img, const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.pixels.data(), 0,
                               nullptr)) {
    throw Error(Errc::Io, "cannot write PNG " + path.string() + ": " +
                              image.message);
  }
}

void save_png(const ImageGray& img, const fs::path& path) {
  ImageRGB rgb(img.width, img.height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const double v = std::clamp(img.pixels[i], 0.0, 1.0);
    const auto b = static_cast<std::uint8_t>(std::lround(v * 255.0));
    rgb.pixels[i * 3 + 0] = b;
    rgb.pixels[i * 3 + 1] = b;
    rgb.pixels[i * 3 + 2] = b;
  }
  save_png(rgb, path);
}

ImageGray to_grayscale(const ImageRGB& img) {
  ImageGray out(img.width, img.height);
  const std::size_t n = out.pixels.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double y = (0.299 * img.pixels[i * 3 + 0] +
                      0.587 * img.pixels[i * 3 + 1] +
                      0.114 * img.pixels[i * 3 + 2]) /
                     255.0;
    out.pixels[i] = std::clamp(y, 0.0, 1.0);
  }
  return out;
}

ImageRGB resize_bilinear(const ImageRGB& img, int target_w, int target_h) {
  check_target(img, target_w, target_h);
  if (target_w == img.width && target_h == img.height) return img;
  const auto xs = make_taps(img.width, target_w);
  const auto ys = make_taps(img.height, target_h);
  ImageRGB out(target_w, target_h);
  for (int y = 0; y < target_h; ++y) {
    const Tap& ty = ys[y];
    for (int x = 0; x < target_w; ++x) {
      const Tap& tx = xs[x];
      for (int c = 0; c < 3; ++c) {
        const double top = img.at(tx.lo, ty.lo, c) * (1.0 - tx.frac) +
                           img.at(tx.hi, ty.lo, c) * tx.frac;
        const double bottom = img.at(tx.lo, ty.hi, c) * (1.0 - tx.frac) +
                              img.at(tx.hi, ty.hi, c) * tx.frac;
        const double v = top * (1.0 - ty.frac) + bottom * ty.frac;
        out.at(x, y, c) =
            static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

ImageGray resize_bilinear(const ImageGray& img, int target_w, int target_h) {
  check_target(img, target_w, target_h);
  if (target_w == img.width && target_h == img.height) return img;
  const auto xs = make_taps(img.width, target_w);
  const auto ys = make_taps(img.height, target_h);
  ImageGray out(target_w, target_h);
  for (int y = 0; y < target_h; ++y) {
    const Tap& ty = ys[y];
    for (int x = 0; x < target_w; ++x) {
      const Tap& tx = xs[x];
      // std::lerp stays inside [a, b], so the output range never grows.
      const double top = std::lerp(img.at(tx.lo, ty.lo), img.at(tx.hi, ty.lo), tx.frac);
      const double bottom =
          std::lerp(img.at(tx.lo, ty.hi), img.at(tx.hi, ty.hi), tx.frac);
      out.at(x, y) = std::lerp(top, bottom, ty.frac);
    }
  }
  return out;
}

}  // namespace stampid
