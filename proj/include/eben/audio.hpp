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

#pragma once

#include <Eigen/Core>
#include <filesystem>

namespace eben {

// Mono signal in [-1, 1]. The only module that touches the filesystem for
// audio is the WAV reader/writer below; everything else stays in memory.
struct AudioBuffer {
  Eigen::ArrayXd samples;
  int sample_rate_hz = 16000;

  Eigen::Index size() const { return samples.size(); }
};

enum class WavEncoding { kPcm16, kFloat32 };

struct WavWriteStats {
  long clipped = 0;  // samples outside [-1, 1] clamped during encode
};

// Reads a mono RIFF/WAVE file. 16-bit PCM is scaled by 1/32768; 32-bit IEEE
// float passes through untouched.
AudioBuffer read_wav(const std::filesystem::path& path);

// pcm16 rounds to nearest and clamps to [-32768, 32767]; the clip count only
// reports samples that were outside [-1, 1] before encoding. float32 round
// trips bit-exactly.
WavWriteStats write_wav(const std::filesystem::path& path, const AudioBuffer& buf,
                        WavEncoding encoding);

// Rescales so max |sample| == target_peak. Idempotent at the same target.
AudioBuffer peak_normalize(const AudioBuffer& buf, double target_peak);

}  // namespace eben
