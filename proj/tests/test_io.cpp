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
#include <png.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "oracles.hpp"
#include "reblur/io.hpp"
#include "reblur/reblur.hpp"

namespace reblur {
namespace {

namespace fs = std::filesystem;
using testing::make_rng;
using testing::random_image;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("reblur_io_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + "_" +
            std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& name) const { return path / name; }
};

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Image random_8bit(std::mt19937_64& rng, int w, int h, int c) {
  Image img(w, h, c);
  for (double& v : img.data()) v = from_byte(static_cast<unsigned>(rng() % 256));
  return img;
}

TEST_CASE("8-bit round trip is exact") {
  TempDir dir;
  auto rng = make_rng(1);
  for (int c : {1, 3}) {
    const Image img = random_8bit(rng, 13, 7, c);
    save_image(dir / "a.png", img);
    const Image back = load_image(dir / "a.png");
    CHECK(back.channels() == c);
    CHECK(testing::max_abs_diff(back.data(), img.data()) == 0.0);
    save_image(dir / "b.png", back);
    CHECK(read_bytes(dir / "a.png") == read_bytes(dir / "b.png"));
  }
}

TEST_CASE("16-bit round trip stays within half a level") {
  TempDir dir;
  auto rng = make_rng(2);
  const Image img = random_image(rng, 9, 9, 3);
  save_image(dir / "a.png", img, 16);
  const Image back = load_image(dir / "a.png");
  CHECK(testing::max_abs_diff(back.data(), img.data()) <= 0.5 / 65535 + 1e-12);
}

TEST_CASE("quantization rounds half up and clamps") {
  CHECK(quantize(0.5, 8) == 128);
  CHECK(quantize(-0.2, 8) == 0);
  CHECK(quantize(1.7, 8) == 255);
  CHECK(quantize(1.0, 16) == 65535);
  TempDir dir;
  save_image(dir / "half.png", Image(2, 2, 1, 0.5));
  CHECK(load_image(dir / "half.png").at(0, 0) == from_byte(128));
}

TEST_CASE("image load errors are distinct") {
  TempDir dir;
  CHECK_THROWS_AS(load_image(dir / "missing.png"), FileNotFoundError);
  {
    std::ofstream out(dir / "bad.png", std::ios::binary);
    out << "definitely not a png";
  }
  CHECK_THROWS_AS(load_image(dir / "bad.png"), MalformedPngError);

  png_image rgba{};
  rgba.version = PNG_IMAGE_VERSION;
  rgba.width = 2;
  rgba.height = 2;
  rgba.format = PNG_FORMAT_RGBA;
  const unsigned char pixels[16] = {};
  REQUIRE(png_image_write_to_file(&rgba, (dir / "rgba.png").c_str(), 0, pixels, 0, nullptr));
  CHECK_THROWS_AS(load_image(dir / "rgba.png"), UnsupportedChannelsError);
}

TEST_CASE("flow round trip and layout") {
  TempDir dir;
  auto rng = make_rng(3);
  FlowField flow(5, 4);
  for (double& v : flow.data()) v = static_cast<float>(testing::uniform(rng, -9, 9));
  save_flow(dir / "f.flo", flow);
  const FlowField back = load_flow(dir / "f.flo");
  CHECK(back.width() == 5);
  CHECK(back.height() == 4);
  CHECK(testing::max_abs_diff(back.data(), flow.data()) == 0.0);

  save_flow(dir / "z.flo", FlowField(2, 2));
  const std::string bytes = read_bytes(dir / "z.flo");
  CHECK(bytes.size() == 4 + 8 + 32);
  // 202021.25f little-endian, then width 2 and height 2.
  const std::string header("\x50\x49\x45\x48\x02\x00\x00\x00\x02\x00\x00\x00", 12);
  CHECK(bytes.substr(0, 12) == header);
}

TEST_CASE("flow load errors are distinct") {
  TempDir dir;
  CHECK_THROWS_AS(load_flow(dir / "missing.flo"), FileNotFoundError);
  save_flow(dir / "z.flo", FlowField(3, 3, Vec2{1, 2}));
  std::string bytes = read_bytes(dir / "z.flo");
  {
    std::string bad = bytes;
    bad[0] = 'X';
    std::ofstream(dir / "magic.flo", std::ios::binary) << bad;
  }
  CHECK_THROWS_AS(load_flow(dir / "magic.flo"), FlowMagicError);
  std::ofstream(dir / "short.flo", std::ios::binary) << bytes.substr(0, bytes.size() - 3);
  CHECK_THROWS_AS(load_flow(dir / "short.flo"), TruncatedFlowError);
}

TEST_CASE("frame directories load in name order") {
  TempDir dir;
  std::vector<Image> frames;
  for (int i = 0; i < 3; ++i) frames.emplace_back(4, 4, 1, from_byte(static_cast<unsigned>(10 * i)));
  save_frame_directory(dir.path, frames);
  const auto back = load_frame_directory(dir.path);
  REQUIRE(back.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(back[i].at(0, 0) == frames[i].at(0, 0));
  CHECK_THROWS_AS(load_frame_directory(dir / "nope"), FileNotFoundError);
}

TEST_CASE("window one returns the frames themselves") {
  auto rng = make_rng(4);
  std::vector<Image> frames;
  for (int i = 0; i < 4; ++i) frames.push_back(random_image(rng, 6, 6));
  const BlurPair p = synthesize_blur_pair(frames, 1, 2);
  CHECK(testing::max_abs_diff(p.blur_a.data(), p.sharp_a.data()) == 0.0);
  CHECK(testing::max_abs_diff(p.blur_b.data(), frames[2].data()) == 0.0);
}

TEST_CASE("constant frames average to themselves") {
  const std::vector<Image> frames(7, Image(5, 5, 3, 0.4));
  const BlurPair p = synthesize_blur_pair(frames, 3, 1);
  for (double v : p.blur_a.data()) CHECK(v == doctest::Approx(0.4));
}

TEST_CASE("pair synthesis argument checks") {
  const std::vector<Image> frames(6, Image(4, 4, 1));
  CHECK_THROWS_AS(synthesize_blur_pair(frames, 4, 1), InvalidArgumentError);
  CHECK_THROWS_AS(synthesize_blur_pair(frames, 3, 1), InvalidArgumentError);
  CHECK_NOTHROW(synthesize_blur_pair(frames, 1, 4));
}

void check_average_matches_reblur(Pattern pattern, Vec2 velocity) {
  SequenceSpec spec;
  spec.pattern = pattern;
  spec.width = 32;
  spec.height = 24;
  spec.velocity = velocity;
  spec.count = 13;
  spec.seed = 3;
  const auto frames = generate_synthetic_sequence(spec);
  const BlurPair p = synthesize_blur_pair(frames, 5, 3);
  const auto r = reblur(p.sharp_a, FlowField(32, 24, velocity), 2);
  const int mx = 2 * static_cast<int>(std::abs(velocity.x));
  const int my = 2 * static_cast<int>(std::abs(velocity.y));
  for (int y = my; y < 24 - my; ++y) {
    for (int x = mx; x < 32 - mx; ++x) {
      CHECK(std::abs(r.blurred.at(x, y) - p.blur_a.at(x, y)) <= 1e-6);
    }
  }
}

TEST_CASE("frame averaging equals warp reblurring for integer motion") {
  for (Pattern pattern : {Pattern::kCheckerboard, Pattern::kNoise}) {
    check_average_matches_reblur(pattern, Vec2{1, 0});
    check_average_matches_reblur(pattern, Vec2{2, 0});
    check_average_matches_reblur(pattern, Vec2{1, 1});
  }
}

TEST_CASE("sequence generator examples") {
  SequenceSpec spec;
  spec.pattern = Pattern::kNoise;
  spec.width = 12;
  spec.height = 10;
  spec.velocity = {0, 0};
  spec.count = 3;
  auto frames = generate_synthetic_sequence(spec);
  CHECK(testing::max_abs_diff(frames[0].data(), frames[2].data()) == 0.0);

  spec.velocity = {2, 1};
  frames = generate_synthetic_sequence(spec);
  for (int y = 1; y < 10; ++y) {
    for (int x = 2; x < 12; ++x) CHECK(frames[1].at(x, y) == frames[0].at(x - 2, y - 1));
  }

  spec.pattern = Pattern::kRamp;
  spec.velocity = {0.5, 0};
  frames = generate_synthetic_sequence(spec);
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x + 1 < 12; ++x) {
      CHECK(std::abs(frames[2].at(x + 1, y) - frames[0].at(x, y)) <= 1e-12);
    }
  }

  spec.seed = 9;
  spec.pattern = Pattern::kNoise;
  const auto again = generate_synthetic_sequence(spec);
  CHECK(testing::max_abs_diff(generate_synthetic_sequence(spec)[1].data(), again[1].data()) == 0.0);
  CHECK(parse_pattern("ramp") == Pattern::kRamp);
  CHECK_THROWS_AS(parse_pattern("stripes"), InvalidArgumentError);
}

}  // namespace
}  // namespace reblur
