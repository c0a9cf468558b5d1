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

#include "eben/audio.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "eben/error.hpp"

namespace eben {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatIeeeFloat = 3;

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw Error(ErrorCode::kMalformedHeader, "not a RIFF/WAVE file: " + path.string());

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* tag = reinterpret_cast<const char*>(bytes.data() + pos);
    const std::uint32_t chunk_size = read_u32(bytes.data() + pos + 4);
    pos += 8;
    if (pos + chunk_size > bytes.size())
      throw Error(ErrorCode::kMalformedHeader, "truncated chunk in " + path.string());
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (chunk_size < 16)
        throw Error(ErrorCode::kMalformedHeader, "fmt chunk too small");
      const std::uint8_t* f = bytes.data() + pos;
      format = read_u16(f);
      channels = read_u16(f + 2);
      rate = read_u32(f + 4);
      bits = read_u16(f + 14);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      data = bytes.data() + pos;
      data_size = chunk_size;
    }
    pos += chunk_size + (chunk_size & 1);  // chunks are word aligned
  }

  if (!have_fmt || data == nullptr)
    throw Error(ErrorCode::kMalformedHeader, "missing fmt or data chunk");
  if (format != kFormatPcm && format != kFormatIeeeFloat)
    throw Error(ErrorCode::kUnsupportedEncoding,
                "format tag " + std::to_string(format));
  if (channels != 1)
    throw Error(ErrorCode::kNotMono, std::to_string(channels) + " channels");
  if (rate == 0) throw Error(ErrorCode::kMalformedHeader, "zero sample rate");

  AudioBuffer buf;
  buf.sample_rate_hz = static_cast<int>(rate);
  if (format == kFormatPcm) {
    if (bits != 16)
      throw Error(ErrorCode::kUnsupportedEncoding,
                  "PCM " + std::to_string(bits) + "-bit");
    const std::size_t n = data_size / 2;
    buf.samples.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const std::int16_t v =
          static_cast<std::int16_t>(read_u16(data + 2 * i));
      buf.samples[static_cast<Eigen::Index>(i)] = static_cast<double>(v) / 32768.0;
    }
  } else {
    if (bits != 32)
      throw Error(ErrorCode::kUnsupportedEncoding,
                  "float " + std::to_string(bits) + "-bit");
    const std::size_t n = data_size / 4;
    buf.samples.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t u = read_u32(data + 4 * i);
      float f;
      std::memcpy(&f, &u, 4);
      if (!std::isfinite(f))
        throw Error(ErrorCode::kMalformedHeader, "non-finite sample in data");
      buf.samples[static_cast<Eigen::Index>(i)] = static_cast<double>(f);
    }
  }
  return buf;
}

WavWriteStats write_wav(const std::filesystem::path& path, const AudioBuffer& buf,
                        WavEncoding encoding) {
  if (buf.size() == 0) throw Error(ErrorCode::kEmptyBuffer, "refusing to write empty buffer");
  const bool pcm = encoding == WavEncoding::kPcm16;
  const std::uint16_t bytes_per = pcm ? 2 : 4;
  const std::uint32_t data_size = static_cast<std::uint32_t>(buf.size()) * bytes_per;

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, pcm ? kFormatPcm : kFormatIeeeFloat);
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(buf.sample_rate_hz));
  put_u32(out, static_cast<std::uint32_t>(buf.sample_rate_hz) * bytes_per);
  put_u16(out, bytes_per);
  put_u16(out, pcm ? 16 : 32);
  put_tag(out, "data");
  put_u32(out, data_size);

  WavWriteStats stats;
  if (pcm) {
    for (Eigen::Index i = 0; i < buf.size(); ++i) {
      const double x = buf.samples[i];
      if (x > 1.0 || x < -1.0) ++stats.clipped;
      long long v = std::llround(x * 32768.0);
      v = std::min<long long>(32767, std::max<long long>(-32768, v));
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
    }
  } else {
    for (Eigen::Index i = 0; i < buf.size(); ++i) {
      const float f = static_cast<float>(buf.samples[i]);
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      put_u32(out, u);
    }
  }

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
  os.write(reinterpret_cast<const char*>(out.data()),
           static_cast<std::streamsize>(out.size()));
  if (!os) throw Error(ErrorCode::kIoFailure, "short write to " + path.string());
  return stats;
}

AudioBuffer peak_normalize(const AudioBuffer& buf, double target_peak) {
  if (target_peak <= 0.0 || target_peak > 1.0)
    throw Error(ErrorCode::kInvalidParams, "target peak must be in (0, 1]");
  if (buf.size() == 0) throw Error(ErrorCode::kEmptyBuffer, "empty buffer");
  const double peak = buf.samples.abs().maxCoeff();
  if (peak == 0.0) throw Error(ErrorCode::kAllZeroSignal, "peak normalize of silence");
  AudioBuffer out;
  out.sample_rate_hz = buf.sample_rate_hz;
  out.samples = buf.samples * (target_peak / peak);
  return out;
}

}  // namespace eben
