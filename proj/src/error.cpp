#include "stampid/error.hpp"

namespace stampid {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::CorruptImage: return "CorruptImage";
    case Errc::InvalidDimensions: return "InvalidDimensions";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::DimensionNotDivisible: return "DimensionNotDivisible";
    case Errc::RadiusTooLarge: return "RadiusTooLarge";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::NonFinite: return "NonFinite";
    case Errc::EmptyTrainingSet: return "EmptyTrainingSet";
    case Errc::LabelOutsideSpace: return "LabelOutsideSpace";
    case Errc::InconsistentFeatureDims: return "InconsistentFeatureDims";
    case Errc::FeatureMismatch: return "FeatureMismatch";
    case Errc::WrongModelKind: return "WrongModelKind";
    case Errc::KinkTooClose: return "KinkTooClose";
    case Errc::RootNotFound: return "RootNotFound";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::ClassTooSmall: return "ClassTooSmall";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::UnknownLabel: return "UnknownLabel";
    case Errc::EmptyMatrix: return "EmptyMatrix";
    case Errc::ModelFormat: return "ModelFormat";
    case Errc::ManifestFormat: return "ManifestFormat";
    case Errc::ReportFormat: return "ReportFormat";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace stampid
