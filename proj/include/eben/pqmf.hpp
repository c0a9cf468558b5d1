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

#include "eben/audio.hpp"

namespace eben {

inline constexpr double kDefaultAttenDb = 75.0;
inline constexpr int kDefaultTapsPerBand = 8;

// Lowpass prototype for a cosine-modulated near-perfect-reconstruction bank.
// taps are exactly symmetric; the single designed degree of freedom is the
// cutoff, tuned so |H|^2 at the half-band-edge frequency pi/(2M) equals 1/2.
struct PrototypeFilter {
  Eigen::ArrayXd taps;
  int bands = 0;
  double cutoff_normalized = 0.0;  // omega_c / pi, in (0, 1/M)
  double atten_db = 0.0;
  double criterion_residual = 0.0;  // | |H(pi/2M)|^2 - 1/2 | at convergence

  int length() const { return static_cast<int>(taps.size()); }
  int taps_per_band() const { return length() / bands; }
};

// M analysis/synthesis kernels modulated from one prototype. synthesis_gain
// calibrates the interpolation gain so the analysis->synthesis cascade has
// unity passband gain (the raw gain M is off by the distortion-function
// mean, which otherwise dominates the reconstruction error).
struct PqmfBank {
  Eigen::MatrixXd analysis_kernels;   // rows h_i, M x N
  Eigen::MatrixXd synthesis_kernels;  // rows g_i = time-reversed h_i
  int bands = 0;
  double synthesis_gain = 0.0;

  int length() const { return static_cast<int>(analysis_kernels.cols()); }
  int delay() const { return length() - 1; }  // analysis+synthesis cascade
};

// Decimated multiband signal: one row per band at rate source_rate / bands.
struct SubbandTensor {
  Eigen::MatrixXd data;  // bands x frames
  int source_rate_hz = 16000;
  Eigen::Index source_length = 0;  // pre-padding sample count

  Eigen::Index bands() const { return data.rows(); }
  Eigen::Index frames() const { return data.cols(); }
};

// Kaiser-windowed ideal lowpass whose cutoff is bisected over (0, pi/M)
// until |H(pi/(2M))|^2 = 1/2 within 1e-9.
PrototypeFilter design_prototype(int bands, int taps_per_band,
                                 double atten_db = kDefaultAttenDb);

// Cosine modulation with the alternating +/- pi/4 phase pair; synthesis rows
// are the time reversal of the analysis rows.
PqmfBank modulate_bank(const PrototypeFilter& proto);

// Strided convolution with N-1 left zero padding: band i, frame t is the
// causal convolution of the input with h_i evaluated at t*M. Inputs whose
// length is not a multiple of M are zero padded; the original length is
// recorded on the tensor.
SubbandTensor analyze(const PqmfBank& bank, const AudioBuffer& buf);

// Zero-insertion upsampling by M, filtering with g_i, summation across bands
// and the calibrated gain. Output is trimmed back to the recorded source
// length; the cascade delays the signal by exactly N-1 samples.
AudioBuffer synthesize(const PqmfBank& bank, const SubbandTensor& sub);

enum class BandSelect { kLowest, kUpper };

// kLowest keeps bands [0, count); kUpper keeps bands [M-count, M).
SubbandTensor select_bands(const SubbandTensor& sub, BandSelect mode, int count);

// Text design report (taps as decimal literals, criterion residual, achieved
// attenuation, cascade calibration) for cross-implementation diffing.
void write_design_report(std::ostream& os, const PrototypeFilter& proto,
                         const PqmfBank& bank);

}  // namespace eben
