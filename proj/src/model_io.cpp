#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "stampid/error.hpp"
#include "stampid/learn.hpp"

namespace stampid {

namespace {

using nlohmann::json;

json config_to_json(const FeatureConfig& c) {
  return json{{"canonical_size", c.canonical_size},
              {"hist_bins", c.hist_bins},
              {"hog_cell", c.hog_cell},
              {"hog_block", c.hog_block},
              {"hog_orientations", c.hog_orientations},
              {"daisy_step", c.daisy_step},
              {"daisy_radius", c.daisy_radius},
              {"daisy_rings", c.daisy_rings},
              {"daisy_histograms", c.daisy_histograms},
              {"daisy_orientations", c.daisy_orientations}};
}

FeatureConfig config_from_json(const json& j) {
  FeatureConfig c;
  c.canonical_size = j.at("canonical_size").get<int>();
  c.hist_bins = j.at("hist_bins").get<int>();
  c.hog_cell = j.at("hog_cell").get<int>();
  c.hog_block = j.at("hog_block").get<int>();
  c.hog_orientations = j.at("hog_orientations").get<int>();
  c.daisy_step = j.at("daisy_step").get<int>();
  c.daisy_radius = j.at("daisy_radius").get<int>();
  c.daisy_rings = j.at("daisy_rings").get<int>();
  c.daisy_histograms = j.at("daisy_histograms").get<int>();
  c.daisy_orientations = j.at("daisy_orientations").get<int>();
  return c;
}

void require_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw Error(Errc::ModelFormat, std::string("non-finite value in ") + what);
    }
  }
}

}  // namespace

std::string model_to_json(const LinearModel& m) {
  json weights = json::array();
  for (std::size_t c = 0; c < m.classes(); ++c) {
    const auto r = m.row(c);
    weights.push_back(std::vector<double>(r.begin(), r.end()));
  }
  // nlohmann emits the shortest decimal that parses back to the same double.
  json doc{{"format_version", kModelFormatVersion},
           {"kind", to_string(m.kind)},
           {"task", to_string(m.label_space.task)},
           {"labels", m.label_space.labels},
           {"feature_kind", to_string(m.feature_kind)},
           {"feature_dim", m.feature_dim},
           {"feature_config", config_to_json(m.feature_config)},
           {"config_fingerprint", m.config_fingerprint()},
           {"standardizer",
            {{"mean", m.standardizer.mean}, {"scale", m.standardizer.scale}}},
           {"weights", std::move(weights)}};
  return doc.dump(1) + "\n";
}

LinearModel model_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::ModelFormat, std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error(Errc::ModelFormat,
                  "unsupported model format_version " + std::to_string(version) +
                      " (expected " + std::to_string(kModelFormatVersion) + ")");
    }
    LinearModel m;
    m.kind = parse_model_kind(doc.at("kind").get<std::string>());
    m.label_space.task = parse_task(doc.at("task").get<std::string>());
    m.label_space.labels = doc.at("labels").get<std::vector<std::string>>();
    m.label_space.validate();
    m.feature_kind = parse_feature_kind(doc.at("feature_kind").get<std::string>());
    m.feature_dim = doc.at("feature_dim").get<std::size_t>();
    m.feature_config = config_from_json(doc.at("feature_config"));
    m.feature_config.validate();
    if (doc.contains("config_fingerprint") &&
        doc["config_fingerprint"].get<std::string>() != m.config_fingerprint()) {
      throw Error(Errc::ModelFormat, "feature_config does not match its fingerprint");
    }
    m.standardizer.mean = doc.at("standardizer").at("mean").get<std::vector<double>>();
    m.standardizer.scale = doc.at("standardizer").at("scale").get<std::vector<double>>();
    if (m.standardizer.mean.size() != m.feature_dim ||
        m.standardizer.scale.size() != m.feature_dim) {
      throw Error(Errc::ModelFormat, "standardizer length does not match feature_dim");
    }
    const auto& rows = doc.at("weights");
    if (!rows.is_array() || rows.size() != m.classes()) {
      throw Error(Errc::ModelFormat, "weights must have one row per label");
    }
    m.weights.reserve(m.classes() * m.row_length());
    for (const auto& r : rows) {
      auto v = r.get<std::vector<double>>();
      if (v.size() != m.row_length()) {
        throw Error(Errc::ModelFormat, "weight row length must be feature_dim + 1");
      }
      m.weights.insert(m.weights.end(), v.begin(), v.end());
    }
    require_finite(m.weights, "weights");
    require_finite(m.standardizer.mean, "standardizer mean");
    require_finite(m.standardizer.scale, "standardizer scale");
    return m;
  } catch (const json::exception& e) {
    throw Error(Errc::ModelFormat, std::string("malformed model file: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::ModelFormat) throw;
    throw Error(Errc::ModelFormat, std::string("malformed model file: ") + e.what());
  }
}

void save_model(const LinearModel& m, const std::filesystem::path& path) {
  const std::string text = model_to_json(m);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write model to " + path.string());
  out << text;
  if (!out) throw Error(Errc::Io, "failed writing model to " + path.string());
}

LinearModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::FileNotFound, "cannot open model " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace stampid
