#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stampid {

enum class Errc {
  FileNotFound,
  UnsupportedFormat,
  CorruptImage,
  InvalidDimensions,
  InvalidConfig,
  DimensionNotDivisible,
  RadiusTooLarge,
  EmptyInput,
  NonFinite,
  EmptyTrainingSet,
  LabelOutsideSpace,
  InconsistentFeatureDims,
  FeatureMismatch,
  WrongModelKind,
  KinkTooClose,
  RootNotFound,
  EmptyDataset,
  ClassTooSmall,
  LengthMismatch,
  UnknownLabel,
  EmptyMatrix,
  ModelFormat,
  ManifestFormat,
  ReportFormat,
  Io,
};

std::string_view errc_name(Errc code);

// Every failure raised by the library carries one of the codes above so the
// CLI can map it onto an exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace stampid
