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
#include "reblur/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>

namespace reblur {

namespace fs = std::filesystem;

namespace {

// ---- libpng glue ---------------------------------------------------------------
//
// libpng reports errors through longjmp, so the C-level readers below keep
// every object that outlives setjmp in the caller's frame and return status
// codes; exceptions are raised only after libpng has been torn down.

enum class PngStatus { kOk, kOpenFailed, kNotPng, kMalformed, kAlpha };

struct RawPng {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint8_t> bytes;  // big-endian samples as stored in PNG rows
};

PngStatus read_png_raw(const char* path, RawPng* out) {
  FILE* fp = std::fopen(path, "rb");
  if (fp == nullptr) return PngStatus::kOpenFailed;
  png_byte header[8];
  if (std::fread(header, 1, 8, fp) != 8 || png_sig_cmp(header, 0, 8) != 0) {
    std::fclose(fp);
    return PngStatus::kNotPng;
  }
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) {
    std::fclose(fp);
    return PngStatus::kMalformed;
  }
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    std::fclose(fp);
    return PngStatus::kMalformed;
  }
  std::vector<png_bytep>* volatile rows = nullptr;
  if (setjmp(png_jmpbuf(png))) {
    delete rows;
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return PngStatus::kMalformed;
  }
  png_init_io(png, fp);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color_type & PNG_COLOR_MASK_ALPHA) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return PngStatus::kAlpha;
  }
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  out->width = png_get_image_width(png, info);
  out->height = png_get_image_height(png, info);
  out->channels = png_get_channels(png, info);
  out->bit_depth = png_get_bit_depth(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  out->bytes.assign(row_bytes * out->height, 0);
  rows = new std::vector<png_bytep>(out->height);
  for (std::uint32_t y = 0; y < out->height; ++y) {
    (*rows)[y] = out->bytes.data() + y * row_bytes;
  }
  png_read_image(png, rows->data());
  png_read_end(png, nullptr);
  delete rows;
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return PngStatus::kOk;
}

bool write_png_raw(const char* path, const RawPng& raw) {
  FILE* fp = std::fopen(path, "wb");
  if (fp == nullptr) return false;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) {
    std::fclose(fp);
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    std::fclose(fp);
    return false;
  }
  std::vector<png_bytep>* volatile rows = nullptr;
  if (setjmp(png_jmpbuf(png))) {
    delete rows;
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    return false;
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, raw.width, raw.height, raw.bit_depth,
               raw.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t row_bytes =
      static_cast<std::size_t>(raw.width) * raw.channels * (raw.bit_depth / 8);
  rows = new std::vector<png_bytep>(raw.height);
  for (std::uint32_t y = 0; y < raw.height; ++y) {
    (*rows)[y] = const_cast<png_bytep>(raw.bytes.data() + y * row_bytes);
  }
  png_write_image(png, rows->data());
  png_write_end(png, nullptr);
  delete rows;
  png_destroy_write_struct(&png, &info);
  return std::fclose(fp) == 0;
}

// ---- little-endian helpers -------------------------------------------------

template <typename T>
T from_little_endian(const unsigned char* bytes) {
  static_assert(sizeof(T) == 4);
  std::uint32_t v = static_cast<std::uint32_t>(bytes[0]) |
                    (static_cast<std::uint32_t>(bytes[1]) << 8) |
                    (static_cast<std::uint32_t>(bytes[2]) << 16) |
                    (static_cast<std::uint32_t>(bytes[3]) << 24);
  return std::bit_cast<T>(v);
}

template <typename T>
void append_little_endian(std::vector<unsigned char>& out, T value) {
  static_assert(sizeof(T) == 4);
  const auto v = std::bit_cast<std::uint32_t>(value);
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<unsigned char>(v >> (8 * k)));
}

std::vector<unsigned char> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFoundError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

bool is_zero_padded_png(const fs::path& p) {
  if (p.extension() != ".png") return false;
  const std::string stem = p.stem().string();
  return !stem.empty() &&
         std::all_of(stem.begin(), stem.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

std::uint16_t quantize(double value, int bit_depth) {
  const double max_value = bit_depth == 16 ? 65535.0 : 255.0;
  const double v = std::isfinite(value) ? std::clamp(value, 0.0, 1.0) : 0.0;
  return static_cast<std::uint16_t>(std::floor(v * max_value + 0.5));
}

Image load_image(const fs::path& path) {
  if (!fs::exists(path)) throw FileNotFoundError("no such file: " + path.string());
  RawPng raw;
  switch (read_png_raw(path.string().c_str(), &raw)) {
    case PngStatus::kOk:
      break;
    case PngStatus::kOpenFailed:
      throw FileNotFoundError("cannot open " + path.string());
    case PngStatus::kNotPng:
    case PngStatus::kMalformed:
      throw MalformedPngError("malformed PNG: " + path.string());
    case PngStatus::kAlpha:
      throw UnsupportedChannelsError("PNG with alpha channel is unsupported: " +
                                     path.string());
  }
  if (raw.channels != 1 && raw.channels != 3) {
    throw UnsupportedChannelsError("unsupported PNG channel count " +
                                   std::to_string(raw.channels));
  }
  if (raw.bit_depth != 8 && raw.bit_depth != 16) {
    throw MalformedPngError("unsupported PNG bit depth " + std::to_string(raw.bit_depth));
  }
  const std::size_t samples =
      static_cast<std::size_t>(raw.width) * raw.height * raw.channels;
  std::vector<double> data(samples);
  if (raw.bit_depth == 8) {
    for (std::size_t i = 0; i < samples; ++i) data[i] = raw.bytes[i] / 255.0;
  } else {
    for (std::size_t i = 0; i < samples; ++i) {
      const unsigned v = (static_cast<unsigned>(raw.bytes[2 * i]) << 8) | raw.bytes[2 * i + 1];
      data[i] = v / 65535.0;
    }
  }
  return Image(static_cast<int>(raw.width), static_cast<int>(raw.height),
               raw.channels, std::move(data));
}

void save_image(const fs::path& path, const Image& image, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw InvalidArgumentError("PNG bit depth must be 8 or 16");
  }
  RawPng raw;
  raw.width = static_cast<std::uint32_t>(image.width());
  raw.height = static_cast<std::uint32_t>(image.height());
  raw.channels = image.channels();
  raw.bit_depth = bit_depth;
  const auto values = image.data();
  raw.bytes.reserve(values.size() * (bit_depth / 8));
  for (double v : values) {
    const std::uint16_t q = quantize(v, bit_depth);
    if (bit_depth == 16) raw.bytes.push_back(static_cast<std::uint8_t>(q >> 8));
    raw.bytes.push_back(static_cast<std::uint8_t>(q & 0xff));
  }
  if (!write_png_raw(path.string().c_str(), raw)) {
    throw IoError("failed to write PNG " + path.string());
  }
}

FlowField load_flow(const fs::path& path) {
  if (!fs::exists(path)) throw FileNotFoundError("no such file: " + path.string());
  const std::vector<unsigned char> bytes = read_file(path);
  if (bytes.size() < 12) throw TruncatedFlowError("flow header truncated: " + path.string());
  if (from_little_endian<float>(bytes.data()) != kFloMagic) {
    throw FlowMagicError("bad .flo magic in " + path.string());
  }
  const auto width = from_little_endian<std::int32_t>(bytes.data() + 4);
  const auto height = from_little_endian<std::int32_t>(bytes.data() + 8);
  if (width <= 0 || height <= 0 || width > (1 << 16) || height > (1 << 16)) {
    throw TruncatedFlowError("implausible flow dimensions in " + path.string());
  }
  const std::size_t count = static_cast<std::size_t>(width) * height * 2;
  if (bytes.size() < 12 + 4 * count) {
    throw TruncatedFlowError("flow payload truncated: " + path.string());
  }
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = from_little_endian<float>(bytes.data() + 12 + 4 * i);
  }
  return FlowField(width, height, std::move(data));
}

void save_flow(const fs::path& path, const FlowField& flow) {
  std::vector<unsigned char> bytes;
  bytes.reserve(12 + 4 * flow.size());
  append_little_endian(bytes, kFloMagic);
  append_little_endian(bytes, static_cast<std::int32_t>(flow.width()));
  append_little_endian(bytes, static_cast<std::int32_t>(flow.height()));
  for (double v : flow.data()) append_little_endian(bytes, static_cast<float>(v));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

std::vector<Image> load_frame_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw FileNotFoundError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no PNG frames in " + dir.string());
  const std::size_t name_width = files.front().stem().string().size();
  for (const auto& f : files) {
    if (!is_zero_padded_png(f) || f.stem().string().size() != name_width) {
      throw IoError("frame names must be zero-padded numbers: " + f.filename().string());
    }
  }
  std::vector<Image> frames;
  frames.reserve(files.size());
  for (const auto& f : files) frames.push_back(load_image(f));
  for (const auto& f : frames) require_same_shape(frames.front(), f, "frame sequence");
  return frames;
}

void save_frame_directory(const fs::path& dir, const std::vector<Image>& frames) {
  fs::create_directories(dir);
  const int digits = std::max<int>(4, static_cast<int>(std::to_string(frames.size()).size()));
  for (std::size_t i = 0; i < frames.size(); ++i) {
    std::string name = std::to_string(i);
    name.insert(0, static_cast<std::size_t>(digits) - name.size(), '0');
    save_image(dir / (name + ".png"), frames[i]);
  }
}

Pattern parse_pattern(const std::string& name) {
  if (name == "checkerboard") return Pattern::kCheckerboard;
  if (name == "noise") return Pattern::kNoise;
  if (name == "ramp") return Pattern::kRamp;
  throw InvalidArgumentError("unknown pattern '" + name + "'");
}

std::string pattern_name(Pattern pattern) {
  switch (pattern) {
    case Pattern::kCheckerboard:
      return "checkerboard";
    case Pattern::kNoise:
      return "noise";
    case Pattern::kRamp:
      return "ramp";
  }
  return "unknown";
}

std::vector<Image> generate_synthetic_sequence(const SequenceSpec& spec) {
  if (spec.count < 1) throw InvalidArgumentError("sequence needs at least one frame");
  if (spec.width < 2 || spec.height < 2) {
    throw InvalidDimensionError("sequence frames need at least 2x2 pixels");
  }
  if (spec.cell < 1) throw InvalidArgumentError("checkerboard cell must be >= 1");
  if (!std::isfinite(spec.velocity.x) || !std::isfinite(spec.velocity.y)) {
    throw InvalidArgumentError("velocity must be finite");
  }
  const double travel_x = std::abs(spec.velocity.x) * (spec.count - 1);
  const double travel_y = std::abs(spec.velocity.y) * (spec.count - 1);
  const int canvas_w = spec.width + static_cast<int>(std::ceil(travel_x)) + 3;
  const int canvas_h = spec.height + static_cast<int>(std::ceil(travel_y)) + 3;
  // Integer origin so that integer velocities give exact crops.
  const int origin_x =
      1 + (spec.velocity.x > 0 ? static_cast<int>(std::ceil(travel_x)) : 0);
  const int origin_y =
      1 + (spec.velocity.y > 0 ? static_cast<int>(std::ceil(travel_y)) : 0);

  const int channels = spec.channels;
  std::vector<double> canvas(static_cast<std::size_t>(canvas_w) * canvas_h * channels);
  std::mt19937_64 rng(spec.seed);
  for (int y = 0; y < canvas_h; ++y) {
    for (int x = 0; x < canvas_w; ++x) {
      for (int c = 0; c < channels; ++c) {
        double v = 0.0;
        switch (spec.pattern) {
          case Pattern::kCheckerboard:
            v = ((x / spec.cell + y / spec.cell) % 2 == 0) ? 0.8 : 0.2;
            break;
          case Pattern::kNoise:
            v = unit_uniform(rng);
            break;
          case Pattern::kRamp:
            v = static_cast<double>(x) / (canvas_w - 1);
            break;
        }
        canvas[(static_cast<std::size_t>(y) * canvas_w + x) * channels + c] = v;
      }
    }
  }
  auto canvas_at = [&](int x, int y, int c) {
    x = ((x % canvas_w) + canvas_w) % canvas_w;
    y = ((y % canvas_h) + canvas_h) % canvas_h;
    return canvas[(static_cast<std::size_t>(y) * canvas_w + x) * channels + c];
  };

  std::vector<Image> frames;
  frames.reserve(static_cast<std::size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) {
    Image frame(spec.width, spec.height, channels, 0.0);
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        const double sx = x + origin_x - i * spec.velocity.x;
        const double sy = y + origin_y - i * spec.velocity.y;
        const double fx0 = std::floor(sx);
        const double fy0 = std::floor(sy);
        const double ax = sx - fx0;
        const double ay = sy - fy0;
        const int x0 = static_cast<int>(fx0);
        const int y0 = static_cast<int>(fy0);
        for (int c = 0; c < channels; ++c) {
          double v = canvas_at(x0, y0, c);
          if (ax != 0.0 || ay != 0.0) {
            v = (1.0 - ax) * (1.0 - ay) * v + ax * (1.0 - ay) * canvas_at(x0 + 1, y0, c) +
                (1.0 - ax) * ay * canvas_at(x0, y0 + 1, c) +
                ax * ay * canvas_at(x0 + 1, y0 + 1, c);
          }
          frame.at(x, y, c) = v;
        }
      }
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

Image average_frames(const std::vector<Image>& frames, int first, int count) {
  if (count < 1 || first < 0 ||
      static_cast<std::size_t>(first) + static_cast<std::size_t>(count) > frames.size()) {
    throw InvalidArgumentError("frame range out of bounds");
  }
  const Image& ref = frames[static_cast<std::size_t>(first)];
  Image out(ref.width(), ref.height(), ref.channels(), 0.0);
  auto acc = out.data();
  for (int k = first; k < first + count; ++k) {
    const Image& f = frames[static_cast<std::size_t>(k)];
    require_same_shape(ref, f, "average_frames");
    const auto v = f.data();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
  }
  for (double& v : acc) v /= static_cast<double>(count);
  return out;
}

BlurPair synthesize_blur_pair(const std::vector<Image>& frames, int window,
                              int stride, std::optional<Vec2> true_velocity) {
  if (window < 1 || window % 2 == 0) {
    throw InvalidArgumentError("window must be a positive odd number, got " +
                               std::to_string(window));
  }
  if (stride < 1) throw InvalidArgumentError("stride must be >= 1");
  if (static_cast<std::size_t>(2 * window + stride) > frames.size()) {
    throw InvalidArgumentError("insufficient frames: need " +
                               std::to_string(2 * window + stride) + ", have " +
                               std::to_string(frames.size()));
  }
  const int half = window / 2;
  BlurPair pair;
  pair.blur_a = average_frames(frames, 0, window);
  pair.blur_b = average_frames(frames, stride, window);
  pair.sharp_a = frames[static_cast<std::size_t>(half)];
  pair.sharp_b = frames[static_cast<std::size_t>(stride + half)];
  pair.true_velocity = true_velocity;
  return pair;
}

}  // namespace reblur
