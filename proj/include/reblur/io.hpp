/* Copyright 2026 The Reblur Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef REBLUR_IO_HPP_
#define REBLUR_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "reblur/core.hpp"

namespace reblur {

class IoError : public Error {
 public:
  using Error::Error;
};
class FileNotFoundError : public IoError {
 public:
  using IoError::IoError;
};
class MalformedPngError : public IoError {
 public:
  using IoError::IoError;
};
class UnsupportedChannelsError : public IoError {
 public:
  using IoError::IoError;
};
class FlowMagicError : public IoError {
 public:
  using IoError::IoError;
};
class TruncatedFlowError : public IoError {
 public:
  using IoError::IoError;
};

// ---- PNG -------------------------------------------------------------------

// Reads an 8- or 16-bit grayscale or RGB PNG and divides by the bit-depth
// maximum. Palette and sub-byte grayscale files are expanded first; files
// with an alpha channel are rejected.
Image load_image(const std::filesystem::path& path);

// Clamps to [0, 1], then rounds half up to the requested depth (8 or 16).
void save_image(const std::filesystem::path& path, const Image& image,
                int bit_depth = 8);

// Quantization used by save_image: floor(clamp(v) * max + 0.5).
std::uint16_t quantize(double value, int bit_depth);

// ---- Middlebury .flo ---------------------------------------------------------

inline constexpr float kFloMagic = 202021.25f;

FlowField load_flow(const std::filesystem::path& path);
void save_flow(const std::filesystem::path& path, const FlowField& flow);

// ---- Frame sequences -----------------------------------------------------------

// Loads every <digits>.png in the directory in lexicographic order. All names
// must be zero-padded to the same width.
std::vector<Image> load_frame_directory(const std::filesystem::path& dir);
void save_frame_directory(const std::filesystem::path& dir,
                          const std::vector<Image>& frames);

enum class Pattern { kCheckerboard, kNoise, kRamp };

Pattern parse_pattern(const std::string& name);
std::string pattern_name(Pattern pattern);

struct SequenceSpec {
  Pattern pattern = Pattern::kCheckerboard;
  int width = 64;
  int height = 64;
  Vec2 velocity{1.0, 0.0};  // pixels per frame
  int count = 9;
  std::uint64_t seed = 0;
  int channels = 1;
  int cell = 16;  // checkerboard square size in pixels
};

// Frames of a pattern translating at a constant velocity: frame i samples an
// oversized canvas at (x - i vx, y - i vy) plus a fixed origin, bilinearly
// with periodic wraparound. The origin keeps every sample inside the canvas
// so no border content is invented.
std::vector<Image> generate_synthetic_sequence(const SequenceSpec& spec);

struct BlurPair {
  Image blur_a;
  Image blur_b;
  Image sharp_a;
  Image sharp_b;
  // Known per-frame velocity when the frames come from the generator.
  std::optional<Vec2> true_velocity;
};

// blur_a is the mean of frames[0, window), sharp_a its central frame; blur_b
// and sharp_b are the same starting at frame `stride`. Requires an odd
// window and 2 * window + stride <= frames.size().
BlurPair synthesize_blur_pair(const std::vector<Image>& frames, int window,
                              int stride,
                              std::optional<Vec2> true_velocity = std::nullopt);

// Mean of frames[first, first + count) accumulated in index order.
Image average_frames(const std::vector<Image>& frames, int first, int count);

}  // namespace reblur

#endif  // REBLUR_IO_HPP_
