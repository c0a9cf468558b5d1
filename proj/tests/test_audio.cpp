// Copyright 2026 The EBEN Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>

#include "eben/audio.hpp"
#include "eben/error.hpp"
#include "oracles.hpp"

using namespace eben;

namespace {

std::filesystem::path tmp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("eben_audio_" + name);
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// A tiny hand-rolled WAV so the reader is checked against raw bytes, not the
// writer.
std::vector<std::uint8_t> raw_wav(std::uint16_t format, std::uint16_t channels,
                                  std::uint32_t rate, std::uint16_t bits,
                                  const std::vector<std::uint8_t>& payload) {
  std::vector<std::uint8_t> b;
  auto u16 = [&](std::uint16_t v) {
    b.push_back(v & 0xFF);
    b.push_back(v >> 8);
  };
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xFF);
  };
  auto tag = [&](const char* t) { b.insert(b.end(), t, t + 4); };
  tag("RIFF");
  u32(36 + static_cast<std::uint32_t>(payload.size()));
  tag("WAVE");
  tag("fmt ");
  u32(16);
  u16(format);
  u16(channels);
  u32(rate);
  u32(rate * channels * bits / 8);
  u16(channels * bits / 8);
  u16(bits);
  tag("data");
  u32(static_cast<std::uint32_t>(payload.size()));
  b.insert(b.end(), payload.begin(), payload.end());
  return b;
}

void dump(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("pcm16 read scales by 1/32768") {
  const auto path = tmp_file("pcm_max.wav");
  dump(path, raw_wav(1, 1, 16000, 16, {0xFF, 0x7F}));  // single sample 32767
  const AudioBuffer buf = read_wav(path);
  CHECK(buf.size() == 1);
  CHECK(buf.sample_rate_hz == 16000);
  CHECK(buf.samples[0] == doctest::Approx(32767.0 / 32768.0).epsilon(1e-12));
}

TEST_CASE("all-zero pcm16 file") {
  const auto path = tmp_file("pcm_zero.wav");
  dump(path, raw_wav(1, 1, 16000, 16, std::vector<std::uint8_t>(32000, 0)));
  const AudioBuffer buf = read_wav(path);
  CHECK(buf.size() == 16000);
  CHECK(buf.sample_rate_hz == 16000);
  CHECK(buf.samples.abs().maxCoeff() == 0.0);
}

TEST_CASE("float32 round trip is bit identical") {
  AudioBuffer buf;
  buf.sample_rate_hz = 16000;
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  buf.samples.resize(4096);
  for (Eigen::Index i = 0; i < buf.size(); ++i)
    buf.samples[i] = static_cast<double>(dist(gen));  // float-exact values

  const auto path = tmp_file("float_rt.wav");
  write_wav(path, buf, WavEncoding::kFloat32);
  const AudioBuffer back = read_wav(path);
  REQUIRE(back.size() == buf.size());
  CHECK(back.sample_rate_hz == 16000);
  CHECK((back.samples == buf.samples).all());
}

TEST_CASE("pcm16 write encodes 0.5 as 16384 and clamps 1.5") {
  AudioBuffer buf;
  buf.samples.resize(1);

  buf.samples[0] = 0.5;
  const auto path = tmp_file("pcm_half.wav");
  WavWriteStats stats = write_wav(path, buf, WavEncoding::kPcm16);
  CHECK(stats.clipped == 0);
  std::vector<std::uint8_t> bytes = slurp(path);
  REQUIRE(bytes.size() == 46);
  std::int16_t stored;
  std::memcpy(&stored, bytes.data() + 44, 2);
  CHECK(stored == 16384);

  buf.samples[0] = 1.5;
  stats = write_wav(path, buf, WavEncoding::kPcm16);
  CHECK(stats.clipped == 1);
  bytes = slurp(path);
  std::memcpy(&stored, bytes.data() + 44, 2);
  CHECK(stored == 32767);

  // 1.0 saturates the 16-bit grid but is not outside [-1, 1].
  buf.samples[0] = 1.0;
  stats = write_wav(path, buf, WavEncoding::kPcm16);
  CHECK(stats.clipped == 0);
}

TEST_CASE("pcm16 round trip error bounded by one LSB") {
  AudioBuffer buf;
  buf.sample_rate_hz = 16000;
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  buf.samples.resize(10000);
  for (Eigen::Index i = 0; i < buf.size(); ++i) buf.samples[i] = dist(gen);

  const auto path = tmp_file("pcm_rt.wav");
  write_wav(path, buf, WavEncoding::kPcm16);
  const AudioBuffer back = read_wav(path);
  CHECK((back.samples - buf.samples).abs().maxCoeff() <= 1.0 / 32768.0);
}

TEST_CASE("reader rejects what it should") {
  const auto path = tmp_file("bad.wav");

  dump(path, raw_wav(1, 2, 16000, 16, {0, 0, 0, 0}));
  CHECK_THROWS_WITH_AS(read_wav(path), doctest::Contains("NotMono"), Error);

  dump(path, raw_wav(2, 1, 16000, 16, {0, 0}));  // ADPCM tag
  CHECK_THROWS_AS(read_wav(path), Error);
  try {
    read_wav(path);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnsupportedEncoding);
  }

  dump(path, raw_wav(1, 1, 16000, 8, {0}));  // 8-bit PCM
  try {
    read_wav(path);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnsupportedEncoding);
  }

  dump(path, {'R', 'I', 'F', 'F', 0, 0});  // truncated
  try {
    read_wav(path);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMalformedHeader);
  }

  CHECK_THROWS_AS(read_wav(tmp_file("does_not_exist.wav")), Error);
}

TEST_CASE("peak_normalize") {
  AudioBuffer buf;
  buf.samples.resize(2);
  buf.samples << 0.1, -0.2;

  const AudioBuffer out = peak_normalize(buf, 1.0);
  CHECK(out.samples[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(out.samples[1] == doctest::Approx(-1.0).epsilon(1e-15));

  // Idempotent at the same target.
  const AudioBuffer again = peak_normalize(out, 1.0);
  CHECK((again.samples == out.samples).all());

  // The argmax sample is unchanged by normalization.
  const Eigen::ArrayXd noise = oracle::white_noise(99, 3000);
  AudioBuffer nb;
  nb.samples = noise;
  Eigen::Index argmax_before, argmax_after;
  nb.samples.abs().maxCoeff(&argmax_before);
  peak_normalize(nb, 0.7).samples.abs().maxCoeff(&argmax_after);
  CHECK(argmax_before == argmax_after);

  AudioBuffer zeros;
  zeros.samples = Eigen::ArrayXd::Zero(16);
  CHECK_THROWS_AS(peak_normalize(zeros, 1.0), Error);
  try {
    peak_normalize(zeros, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kAllZeroSignal);
  }
}
