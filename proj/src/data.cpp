#include "stampid/data.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <thread>
#include <tuple>

#include "csv.hpp"
#include "stampid/error.hpp"
#include "stampid/rng.hpp"

namespace stampid {

namespace fs = std::filesystem;
using detail::csv_field;
using detail::read_csv_record;

namespace {

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<std::string> distinct_sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::vector<std::exception_ptr> errors(n);
  auto work = [&](std::atomic<std::size_t>& next) {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::atomic<std::size_t> next{0};
  if (threads <= 1) {
    work(next);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, std::ref(next));
    for (auto& t : pool) t.join();
  }
  // Report the lowest failing index so the error is independent of timing.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

DatasetManifest DatasetManifest::from_records(std::vector<SampleRecord> records) {
  DatasetManifest m;
  std::set<std::string> paths;
  std::vector<std::string> countries;
  std::vector<std::string> years;
  for (const auto& r : records) {
    if (r.path.empty() || r.country.empty() || r.year.empty()) {
      throw Error(Errc::ManifestFormat, "record with empty path, country or year");
    }
    if (!paths.insert(r.path.string()).second) {
      throw Error(Errc::ManifestFormat, "duplicate path " + r.path.string());
    }
    countries.push_back(r.country);
    years.push_back(r.year);
  }
  m.records = std::move(records);
  m.countries = distinct_sorted(std::move(countries));
  m.years = distinct_sorted(std::move(years));
  return m;
}

DatasetManifest scan_dataset(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(Errc::RootNotFound, "dataset root not found: " + root.string());
  }
  const fs::path base = fs::absolute(root).lexically_normal();
  std::vector<SampleRecord> records;
  std::size_t ignored = 0;
  for (const auto& country : fs::directory_iterator(base)) {
    if (!country.is_directory()) {
      ++ignored;
      continue;
    }
    for (const auto& year : fs::directory_iterator(country.path())) {
      if (!year.is_directory()) {
        ++ignored;
        continue;
      }
      for (const auto& file : fs::directory_iterator(year.path())) {
        if (!file.is_regular_file() || !has_image_extension(file.path())) {
          ++ignored;
          continue;
        }
        records.push_back({file.path(), country.path().filename().string(),
                           year.path().filename().string()});
      }
    }
  }
  if (records.empty()) {
    throw Error(Errc::EmptyDataset, "empty dataset: no images under " + root.string());
  }
  std::sort(records.begin(), records.end(),
            [](const SampleRecord& a, const SampleRecord& b) {
              return std::forward_as_tuple(a.country, a.year, a.path.filename().string()) <
                     std::forward_as_tuple(b.country, b.year, b.path.filename().string());
            });
  DatasetManifest m = DatasetManifest::from_records(std::move(records));
  m.ignored_files = ignored;
  return m;
}

DatasetManifest parse_manifest_csv(std::istream& in, const fs::path& base_dir) {
  std::vector<std::string> fields;
  if (!read_csv_record(in, fields) || fields.size() != 3 || fields[0] != "path" ||
      fields[1] != "country" || fields[2] != "year") {
    throw Error(Errc::ManifestFormat, "manifest must start with header path,country,year");
  }
  std::vector<SampleRecord> records;
  std::size_t line = 1;
  while (read_csv_record(in, fields)) {
    ++line;
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != 3) {
      throw Error(Errc::ManifestFormat,
                  "manifest line " + std::to_string(line) + ": expected 3 fields");
    }
    fs::path p = fields[0];
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    records.push_back({p.lexically_normal(), fields[1], fields[2]});
  }
  if (records.empty()) throw Error(Errc::EmptyDataset, "empty dataset: manifest has no rows");
  return DatasetManifest::from_records(std::move(records));
}

DatasetManifest read_manifest_csv(const fs::path& csv) {
  std::ifstream in(csv, std::ios::binary);
  if (!in) throw Error(Errc::FileNotFound, "cannot open manifest " + csv.string());
  return parse_manifest_csv(in, csv.parent_path());
}

void write_manifest_csv(const DatasetManifest& m, std::ostream& out) {
  out << "path,country,year\n";
  for (const auto& r : m.records) {
    out << csv_field(r.path.string()) << ',' << csv_field(r.country) << ','
        << csv_field(r.year) << '\n';
  }
}

SplitResult stratified_split(const DatasetManifest& m, Task task, double ratio,
                             std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error(Errc::InvalidConfig, "split ratio must be in (0, 1)");
  }
  std::map<std::string, std::vector<std::size_t>> classes;
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    classes[m.records[i].label(task)].push_back(i);
  }
  SplitResult out;
  out.seed = seed;
  out.ratio = ratio;
  for (auto& [name, members] : classes) {
    if (members.size() < 2) {
      throw Error(Errc::ClassTooSmall, "class '" + name + "' has fewer than 2 records");
    }
    Rng rng(mix_seed(seed, name));
    rng.shuffle(std::span<std::size_t>(members));
    const auto n_train = static_cast<std::size_t>(
        std::llround(ratio * static_cast<double>(members.size())));
    out.train.insert(out.train.end(), members.begin(), members.begin() + n_train);
    out.test.insert(out.test.end(), members.begin() + n_train, members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

ImageRGB flip_horizontal(const ImageRGB& img) {
  ImageRGB out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) out.at(img.width - 1 - x, y, c) = img.at(x, y, c);
  return out;
}

ImageRGB flip_vertical(const ImageRGB& img) {
  ImageRGB out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) out.at(x, img.height - 1 - y, c) = img.at(x, y, c);
  return out;
}

ImageRGB rotate90_cw(const ImageRGB& img) {
  ImageRGB out(img.height, img.width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) out.at(img.height - 1 - y, x, c) = img.at(x, y, c);
  return out;
}

ImageRGB rotate180(const ImageRGB& img) {
  ImageRGB out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c)
        out.at(img.width - 1 - x, img.height - 1 - y, c) = img.at(x, y, c);
  return out;
}

ImageRGB apply_view(const ImageRGB& img, View view) {
  switch (view) {
    case View::original: return img;
    case View::hflip: return flip_horizontal(img);
    case View::vflip: return flip_vertical(img);
    case View::rot90: return rotate90_cw(img);
    case View::rot180: return rotate180(img);
  }
  return img;
}

std::vector<ImageRGB> augment_image(const ImageRGB& img) {
  std::vector<ImageRGB> out;
  out.reserve(kViewCount);
  for (View v : kAllViews) out.push_back(apply_view(img, v));
  return out;
}

std::vector<std::vector<FeatureVector>> extract_views(
    const DatasetManifest& m, std::span<const std::size_t> indices,
    FeatureKind kind, const FeatureConfig& cfg, std::span<const View> views,
    unsigned threads) {
  cfg.validate();
  for (std::size_t idx : indices) {
    if (idx >= m.records.size()) {
      throw Error(Errc::InvalidConfig, "record index " + std::to_string(idx) + " out of range");
    }
  }
  std::vector<std::vector<FeatureVector>> out(indices.size());
  parallel_for(indices.size(), threads, [&](std::size_t i) {
    const SampleRecord& rec = m.records[indices[i]];
    try {
      const ImageRGB img = load_image(rec.path);
      std::vector<FeatureVector> row;
      row.reserve(views.size());
      for (View v : views) row.push_back(extract(apply_view(img, v), kind, cfg));
      out[i] = std::move(row);
    } catch (const Error& e) {
      throw Error(e.code(), rec.path.string() + ": " + e.what());
    }
  });
  return out;
}

FeatureMatrix build_feature_matrix(const DatasetManifest& m,
                                   std::span<const std::size_t> indices,
                                   FeatureKind kind, const FeatureConfig& cfg,
                                   bool augment, unsigned threads) {
  const std::array<View, 1> original = {View::original};
  const std::span<const View> views =
      augment ? std::span<const View>(kAllViews) : std::span<const View>(original);
  auto features = extract_views(m, indices, kind, cfg, views, threads);
  FeatureMatrix fm;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const SampleRecord& rec = m.records[indices[i]];
    for (auto& v : features[i]) {
      fm.x.push_back(std::move(v));
      fm.y_country.push_back(rec.country);
      fm.y_year.push_back(rec.year);
    }
  }
  return fm;
}

}  // namespace stampid
