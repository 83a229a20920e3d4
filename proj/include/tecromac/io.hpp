#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "tecromac/tensor.hpp"

namespace tecromac {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public IoError {
 public:
  using IoError::IoError;
};

/// A directory of binary netpbm frames (P5 grayscale or P6 RGB, 8 or 16 bit).
///
/// Frames are ordered by file name; zero-padded numeric names therefore give
/// time order. Files without a .pgm/.ppm/.pnm extension are ignored.
struct FrameDirSpec {
  std::filesystem::path path;
  std::string prefix = "frame_";
  /// 1 or 3; used when writing.
  int channels = 1;
  /// 8 or 16; used when writing.
  int bit_depth = 8;
  /// Minimum zero-padded width of the frame number when writing.
  int digits = 4;
};

ImageSequence load_frames(const FrameDirSpec &spec);
/// Values are clamped to [0, 1] and rounded to the nearest code. The spec's
/// channel count must match the sequence.
void save_frames(const ImageSequence &seq, const FrameDirSpec &spec);

/// Raw tensor file: "TCRM", version byte, m n c t as little-endian u32,
/// element type byte (1 = f32, 2 = f64), then values with i fastest, then j,
/// k, l.
inline constexpr std::array<char, 4> kRawMagic{'T', 'C', 'R', 'M'};
inline constexpr std::uint8_t kRawVersion = 1;
inline constexpr std::size_t kRawHeaderSize = 22;

enum class RawElement : std::uint8_t { f32 = 1, f64 = 2 };

void save_raw(const ImageSequence &seq, const std::filesystem::path &path, RawElement element = RawElement::f64);
ImageSequence load_raw(const std::filesystem::path &path);

/// One 8-bit grayscale frame per time step; 255 marks observed, 0 cloud.
void save_mask(const ObservationMask &mask, const std::filesystem::path &dir, const std::string &prefix = "mask_");
/// Nonzero pixels are observed.
ObservationMask load_mask(const std::filesystem::path &dir);
/// Same, and checks the mask against the sequence dimensions.
ObservationMask load_mask(const std::filesystem::path &dir, const Dims &expected);

/// Load a sequence from either a raw tensor file or a frame directory.
ImageSequence load_sequence(const std::filesystem::path &path);

}  // namespace tecromac
