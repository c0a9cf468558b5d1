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
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "eben/audio.hpp"

namespace eben {

// Sentinel: disables noise injection entirely (output == input).
inline constexpr double kNoiseDisabledDb = -std::numeric_limits<double>::infinity();

inline constexpr double kInEarNoiseRelDb = -23.0;
inline constexpr double kInEarCutoffHz = 600.0;
inline constexpr double kInEarQ = 1.0;

// Second-order section with a0 normalized to 1. The lowpass design has unity
// DC gain and poles strictly inside the unit circle.
struct BiquadCoeffs {
  double b0 = 0, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;
  double fc_hz = 0, q_factor = 0, fs_hz = 0;
};

BiquadCoeffs design_biquad_lowpass(double fc_hz, double q, double fs_hz);

// Forward-backward filtering: zero phase, squared magnitude response. Edges
// use odd-reflection padding of 3*max(len(b), len(a)) samples plus
// steady-state initial conditions, then the padding is trimmed.
AudioBuffer filtfilt(const BiquadCoeffs& coeffs, const AudioBuffer& buf);

// Adds white Gaussian noise at rel_db relative to signal power, drawn from
// SplitMix64 + Box-Muller. Deterministic per seed.
AudioBuffer add_relative_noise(const AudioBuffer& buf, double rel_db, std::uint64_t seed);

struct DegradationReport {
  double measured_noise_rel_db = kNoiseDisabledDb;
  long clip_count = 0;  // output samples outside [-1, 1]
  std::string pipeline;
  std::uint64_t seed = 0;
};

// Fixed pipeline: zero-phase 2nd-order lowpass (600 Hz, Q=1) then -23 dB
// relative noise.
std::pair<AudioBuffer, DegradationReport> apply_psi_fixed(const AudioBuffer& buf,
                                                          std::uint64_t seed);

// Randomized response envelope: per-grid-point magnitudes are drawn
// log-uniformly between the bound curves, faded out by a Hann shape above
// apodize_start_hz and floored at -80 dB, then realized as a linear-phase
// FIR by frequency sampling.
struct RandomResponseSpec {
  Eigen::ArrayXd freq_grid_hz;
  Eigen::ArrayXd lower_db;
  Eigen::ArrayXd upper_db;
  double apodize_start_hz = 3000.0;
  int fir_length = 512;
  std::uint64_t seed = 0;
  double fs_hz = 16000.0;
};

// Plausible placeholder envelope for an in-ear response (strong lows, steep
// rolloff past 1 kHz). Ships as a default only; measured bound curves from
// the sysid CSV are the intended input.
RandomResponseSpec default_response_spec(double fs_hz = 16000.0);

// Bounds CSV: header row naming freq_hz plus either lower_db/upper_db or
// p10_db/p90_db columns (the sysid export is accepted directly).
RandomResponseSpec load_bounds_csv(const std::filesystem::path& path);

Eigen::ArrayXd sample_psi_random(const RandomResponseSpec& spec);

// Random pipeline: draw a response for spec.seed, filter with the realized
// linear-phase FIR (delay compensated), then -23 dB relative noise from the
// same stream.
std::pair<AudioBuffer, DegradationReport> apply_psi_random(const AudioBuffer& buf,
                                                           const RandomResponseSpec& spec);

enum class DegradePipeline { kFixed, kRandom };

struct BatchFileReport {
  std::string path;  // relative to the input directory
  std::uint64_t seed = 0;
  double rel_db = kNoiseDisabledDb;
  long clip_count = 0;
  std::string error;  // empty on success
};

struct BatchReport {
  std::vector<BatchFileReport> files;
  std::string pipeline;
  std::uint64_t master_seed = 0;
};

// Degrades every .wav under in_dir into out_dir (float32). Per-file seeds
// derive from (master_seed, relative path) so results are order independent;
// per-file errors are recorded and the batch continues.
BatchReport batch_degrade(const std::filesystem::path& in_dir,
                          const std::filesystem::path& out_dir,
                          DegradePipeline pipeline, std::uint64_t master_seed,
                          const RandomResponseSpec* bounds = nullptr);

}  // namespace eben
