#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace slrma {

enum class Errc {
  InvalidArgument,
  NonSymmetric,
  NoConvergence,
  SizeOverflow,
  SingularShift,
  BadLevels,
  Disconnected,
  IndexOutOfRange,
  RankTooLarge,
  RankDeficient,
  NotConverged,
  TargetUnreachable,
  CorruptStream,
  BadMagic,
  VersionUnsupported,
  DigestMismatch,
  FormatError,
  DimensionMismatch,
  ConnectivityMismatch,
  ShapeMismatch,
  InfinitePsnr,
  DegenerateSequence,
};

inline std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NonSymmetric: return "NonSymmetric";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::SizeOverflow: return "SizeOverflow";
    case Errc::SingularShift: return "SingularShift";
    case Errc::BadLevels: return "BadLevels";
    case Errc::Disconnected: return "Disconnected";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::RankTooLarge: return "RankTooLarge";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::NotConverged: return "NotConverged";
    case Errc::TargetUnreachable: return "TargetUnreachable";
    case Errc::CorruptStream: return "CorruptStream";
    case Errc::BadMagic: return "BadMagic";
    case Errc::VersionUnsupported: return "VersionUnsupported";
    case Errc::DigestMismatch: return "DigestMismatch";
    case Errc::FormatError: return "FormatError";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::ConnectivityMismatch: return "ConnectivityMismatch";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::InfinitePsnr: return "InfinitePsnr";
    case Errc::DegenerateSequence: return "DegenerateSequence";
  }
  return "Unknown";
}

// All library failures are reported through this exception; code() carries
// the machine-readable reason.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace slrma
