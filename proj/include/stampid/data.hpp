#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "stampid/features.hpp"
#include "stampid/imgio.hpp"
#include "stampid/learn.hpp"

namespace stampid {

struct SampleRecord {
  std::filesystem::path path;
  std::string country;
  std::string year;

  const std::string& label(Task task) const {
    return task == Task::country ? country : year;
  }
  bool operator==(const SampleRecord&) const = default;
};

struct DatasetManifest {
  std::vector<SampleRecord> records;
  std::vector<std::string> countries;
  std::vector<std::string> years;
  /// Entries skipped while scanning (non-image files, misplaced files).
  std::size_t ignored_files = 0;

  /// Validates the records (non-empty fields, unique paths) and derives the
  /// sorted label sets. Record order is kept.
  static DatasetManifest from_records(std::vector<SampleRecord> records);

  std::size_t size() const { return records.size(); }
  const std::vector<std::string>& labels(Task task) const {
    return task == Task::country ? countries : years;
  }
  LabelSpace label_space(Task task) const { return {task, labels(task)}; }
};

/// Walks root/<country>/<year>/<file>.{png,jpg,jpeg}. Records are sorted by
/// (country, year, filename) and carry absolute paths.
DatasetManifest scan_dataset(const std::filesystem::path& root);

/// CSV with header `path,country,year`. Relative paths are resolved against
/// the directory holding the CSV file.
DatasetManifest read_manifest_csv(const std::filesystem::path& csv);
DatasetManifest parse_manifest_csv(std::istream& in,
                                   const std::filesystem::path& base_dir = {});
void write_manifest_csv(const DatasetManifest& m, std::ostream& out);

struct SplitResult {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
  double ratio = 2.0 / 3.0;
};

/// Per class (under `task`): shuffle with a generator seeded from
/// (seed, class name), send the first round(ratio * n) records to train and
/// the rest to test. Both index lists come back sorted.
SplitResult stratified_split(const DatasetManifest& m, Task task, double ratio,
                             std::uint64_t seed);

ImageRGB flip_horizontal(const ImageRGB& img);
ImageRGB flip_vertical(const ImageRGB& img);
ImageRGB rotate90_cw(const ImageRGB& img);
ImageRGB rotate180(const ImageRGB& img);

/// Augmentation views in the order produced by augment_image.
enum class View { original, hflip, vflip, rot90, rot180 };
inline constexpr std::size_t kViewCount = 5;
inline constexpr std::array<View, kViewCount> kAllViews = {
    View::original, View::hflip, View::vflip, View::rot90, View::rot180};

ImageRGB apply_view(const ImageRGB& img, View view);

/// [original, horizontal flip, vertical flip, rotate90 clockwise, rotate180].
std::vector<ImageRGB> augment_image(const ImageRGB& img);

/// Extracts the requested views of every listed record. Result is
/// [position in indices][position in views]. Work is spread over `threads`
/// workers (0 = hardware concurrency) and assembled in index order; errors
/// name the offending file.
std::vector<std::vector<FeatureVector>> extract_views(
    const DatasetManifest& m, std::span<const std::size_t> indices,
    FeatureKind kind, const FeatureConfig& cfg, std::span<const View> views,
    unsigned threads = 0);

struct FeatureMatrix {
  std::vector<FeatureVector> x;
  std::vector<std::string> y_country;
  std::vector<std::string> y_year;
};

/// Features in index order; with `augment` each record contributes its 5
/// views consecutively and its labels are repeated accordingly.
FeatureMatrix build_feature_matrix(const DatasetManifest& m,
                                   std::span<const std::size_t> indices,
                                   FeatureKind kind, const FeatureConfig& cfg,
                                   bool augment, unsigned threads = 0);

}  // namespace stampid
