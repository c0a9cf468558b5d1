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
#include <iosfwd>
#include <vector>

#include "eben/audio.hpp"

namespace eben {

// Welch geometry: 512-sample Hann frames at 50% hop, grouped into 1.024 s
// estimation horizons (at 16 kHz) that also advance at 50%.
struct WelchConfig {
  int fft_size = 512;
  double segment_overlap = 0.5;
  int horizon_samples = 16384;

  int frame_hop() const { return static_cast<int>(fft_size * (1.0 - segment_overlap)); }
  int horizon_hop() const {
    return static_cast<int>(horizon_samples * (1.0 - segment_overlap));
  }
  int bins() const { return fft_size / 2 + 1; }
};

struct VadMask {
  std::vector<std::uint8_t> active;  // one flag per frame
  int frame_samples = 0;

  long active_frames() const;
};

// Frame active iff frame RMS (dB) >= peak frame RMS (dB) - threshold. An
// infinite threshold keeps every frame.
VadMask vad_mask(const AudioBuffer& ref, double threshold_db_below_peak,
                 int frame_samples);

struct SpectralDensities {
  Eigen::ArrayXd freq_hz;
  Eigen::ArrayXcd p_yx;  // cross density, X * conj(Y)
  Eigen::ArrayXd p_yy;
  Eigen::ArrayXd p_xx;
  int frames_averaged = 0;
};

long horizon_count(Eigen::Index samples, const WelchConfig& cfg);

// Averaged densities for one horizon. Scaling is consistent across the three
// outputs, so density ratios are scale free.
SpectralDensities welch_densities(const AudioBuffer& y, const AudioBuffer& x,
                                  const WelchConfig& cfg, long segment_index);

struct TransferFunctionEstimate {
  Eigen::ArrayXd freq_grid_hz;
  Eigen::ArrayXd median_db;
  Eigen::ArrayXd smoothed_db;  // 5-bin moving average of the median
  Eigen::ArrayXd p10_db;
  Eigen::ArrayXd p90_db;
  int n_segments = 0;
};

// Per active horizon the magnitude of P_yx / P_yy is taken in dB, then the
// pointwise median and 10th/90th percentiles aggregate across horizons. A
// horizon counts as active when at least half of the VAD frames it overlaps
// are active. Needs >= 3 active horizons.
TransferFunctionEstimate estimate_transfer(const AudioBuffer& y, const AudioBuffer& x,
                                           const WelchConfig& cfg, const VadMask& vad);

struct CoherenceCurve {
  Eigen::ArrayXd freq_grid_hz;
  Eigen::ArrayXd coherence;  // clamped to [0, 1]
  int frames_averaged = 0;
};

// |P_yx|^2 / (P_xx P_yy) averaged over every frame of the full recording.
// Needs at least 8 frames.
CoherenceCurve coherence(const AudioBuffer& y, const AudioBuffer& x,
                         const WelchConfig& cfg);

// CSV: freq_hz,median_db,smoothed_db,p10_db,p90_db,coherence. The percentile
// columns are loadable as random-response bounds by the degradation module.
void write_sysid_csv(std::ostream& os, const TransferFunctionEstimate& tf,
                     const CoherenceCurve* coh);

}  // namespace eben
