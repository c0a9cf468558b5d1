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

#include "eben/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "eben/dsp.hpp"
#include "eben/error.hpp"
#include "eben/rng.hpp"

namespace eben {
namespace {

constexpr double kEnvelopeFloorDb = -80.0;

// One biquad pass over a raw array, direct form II transposed, with given
// initial state (scaled steady-state values for step transparency).
Eigen::ArrayXd biquad_pass(const BiquadCoeffs& c, const Eigen::ArrayXd& x,
                           double zi1_unit, double zi2_unit) {
  Eigen::ArrayXd y(x.size());
  double z1 = zi1_unit * x[0];
  double z2 = zi2_unit * x[0];
  for (Eigen::Index n = 0; n < x.size(); ++n) {
    const double v = x[n];
    const double out = c.b0 * v + z1;
    z1 = c.b1 * v - c.a1 * out + z2;
    z2 = c.b2 * v - c.a2 * out;
    y[n] = out;
  }
  return y;
}

// Steady-state (unit step) internal state of the transposed biquad.
void steady_state_zi(const BiquadCoeffs& c, double* zi1, double* zi2) {
  const double k = (c.b0 + c.b1 + c.b2) / (1.0 + c.a1 + c.a2);
  *zi2 = c.b2 - c.a2 * k;
  *zi1 = c.b1 - c.a1 * k + *zi2;
}

double mean_power(const Eigen::ArrayXd& x) { return x.square().mean(); }

long count_clipped(const Eigen::ArrayXd& x) {
  return (x.abs() > 1.0).count();
}

// Linear interpolation of a dB curve onto one frequency; flat extrapolation
// beyond the grid ends.
double interp_db(const Eigen::ArrayXd& grid, const Eigen::ArrayXd& vals, double f) {
  const Eigen::Index n = grid.size();
  if (f <= grid[0]) return vals[0];
  if (f >= grid[n - 1]) return vals[n - 1];
  Eigen::Index hi = 1;
  while (grid[hi] < f) ++hi;
  const double t = (f - grid[hi - 1]) / (grid[hi] - grid[hi - 1]);
  return vals[hi - 1] + t * (vals[hi] - vals[hi - 1]);
}

void validate_spec(const RandomResponseSpec& spec) {
  const Eigen::Index n = spec.freq_grid_hz.size();
  if (n < 2 || spec.lower_db.size() != n || spec.upper_db.size() != n)
    throw Error(ErrorCode::kInvalidSpec, "bounds grid malformed");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (spec.lower_db[i] > spec.upper_db[i])
      throw Error(ErrorCode::kInvalidSpec, "lower bound above upper bound");
    if (i > 0 && spec.freq_grid_hz[i] <= spec.freq_grid_hz[i - 1])
      throw Error(ErrorCode::kInvalidSpec, "frequency grid must ascend");
  }
  if (spec.fir_length < 8) throw Error(ErrorCode::kInvalidSpec, "fir_length too small");
  if (spec.fs_hz <= 0) throw Error(ErrorCode::kInvalidSpec, "bad sample rate");
  if (spec.apodize_start_hz <= 0 || spec.apodize_start_hz >= spec.fs_hz / 2)
    throw Error(ErrorCode::kInvalidSpec, "apodization start out of range");
  if (spec.freq_grid_hz[0] <= 0.0 ||
      spec.freq_grid_hz[n - 1] < 0.98 * spec.fs_hz / 2)
    throw Error(ErrorCode::kInvalidSpec, "bounds grid must cover (0, fs/2]");
}

// Draws the envelope on the spec grid and realizes it as a linear-phase FIR
// via frequency sampling on the fir_length DFT bins.
Eigen::ArrayXd realize_response(const RandomResponseSpec& spec, SplitMix64& rng) {
  const Eigen::Index n = spec.freq_grid_hz.size();
  Eigen::ArrayXd drawn_db(n);
  for (Eigen::Index i = 0; i < n; ++i)
    drawn_db[i] = rng.next_uniform(spec.lower_db[i], spec.upper_db[i]);

  const int l = spec.fir_length;
  const double nyquist = spec.fs_hz / 2.0;
  const int half = l / 2;
  Eigen::ArrayXd bins(half + 1);
  for (int k = 0; k <= half; ++k) {
    const double f = k * spec.fs_hz / l;
    double mag = std::pow(10.0, interp_db(spec.freq_grid_hz, drawn_db, f) / 20.0);
    if (f > spec.apodize_start_hz) {
      const double u = (f - spec.apodize_start_hz) / (nyquist - spec.apodize_start_hz);
      mag *= 0.5 * (1.0 + std::cos(M_PI * std::min(1.0, u)));
    }
    bins[k] = std::max(mag, std::pow(10.0, kEnvelopeFloorDb / 20.0));
  }

  Eigen::ArrayXd taps(l);
  const double center = 0.5 * (l - 1);
  for (int t = 0; t < l; ++t) {
    double acc = bins[0];
    for (int k = 1; k < half; ++k)
      acc += 2.0 * bins[k] * std::cos(2.0 * M_PI * k * (t - center) / l);
    // The Nyquist bin of an even-length linear-phase design contributes
    // cos(pi*(t - center)) == 0, so it is dropped.
    taps[t] = acc / l;
  }
  return taps;
}

}  // namespace

BiquadCoeffs design_biquad_lowpass(double fc_hz, double q, double fs_hz) {
  if (fs_hz <= 0 || fc_hz <= 0 || fc_hz >= fs_hz / 2 || q <= 0)
    throw Error(ErrorCode::kInvalidParams, "need 0 < fc < fs/2 and q > 0");
  // Bilinear-transform lowpass matched at fc (RBJ form); DC gain is exactly 1.
  const double w0 = 2.0 * M_PI * fc_hz / fs_hz;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double cw = std::cos(w0);
  const double a0 = 1.0 + alpha;
  BiquadCoeffs c;
  c.b0 = (1.0 - cw) / 2.0 / a0;
  c.b1 = (1.0 - cw) / a0;
  c.b2 = (1.0 - cw) / 2.0 / a0;
  c.a1 = -2.0 * cw / a0;
  c.a2 = (1.0 - alpha) / a0;
  c.fc_hz = fc_hz;
  c.q_factor = q;
  c.fs_hz = fs_hz;
  return c;
}

AudioBuffer filtfilt(const BiquadCoeffs& coeffs, const AudioBuffer& buf) {
  const Eigen::Index t = buf.size();
  constexpr Eigen::Index kOrder = 2;
  if (t <= 6 * kOrder)
    throw Error(ErrorCode::kBufferTooShort,
                "filtfilt needs more than " + std::to_string(6 * kOrder) + " samples");
  const Eigen::Index pad = 3 * 3;  // 3 * max(len(b), len(a))

  // Odd reflection at both ends.
  Eigen::ArrayXd ext(t + 2 * pad);
  for (Eigen::Index i = 0; i < pad; ++i)
    ext[i] = 2.0 * buf.samples[0] - buf.samples[pad - i];
  ext.segment(pad, t) = buf.samples;
  for (Eigen::Index i = 0; i < pad; ++i)
    ext[pad + t + i] = 2.0 * buf.samples[t - 1] - buf.samples[t - 2 - i];

  double zi1, zi2;
  steady_state_zi(coeffs, &zi1, &zi2);
  Eigen::ArrayXd fwd = biquad_pass(coeffs, ext, zi1, zi2);
  Eigen::ArrayXd rev = fwd.reverse();
  Eigen::ArrayXd bwd = biquad_pass(coeffs, rev, zi1, zi2);

  AudioBuffer out;
  out.sample_rate_hz = buf.sample_rate_hz;
  out.samples = bwd.reverse().segment(pad, t);
  return out;
}

AudioBuffer add_relative_noise(const AudioBuffer& buf, double rel_db, std::uint64_t seed) {
  if (rel_db == kNoiseDisabledDb) return buf;
  const double p = mean_power(buf.samples);
  if (p == 0.0) throw Error(ErrorCode::kAllZeroSignal, "noise level undefined for silence");
  const double sigma = std::sqrt(p * std::pow(10.0, rel_db / 10.0));
  SplitMix64 rng(seed);
  AudioBuffer out;
  out.sample_rate_hz = buf.sample_rate_hz;
  out.samples.resize(buf.size());
  for (Eigen::Index i = 0; i < buf.size(); ++i)
    out.samples[i] = buf.samples[i] + sigma * rng.next_gaussian();
  return out;
}

std::pair<AudioBuffer, DegradationReport> apply_psi_fixed(const AudioBuffer& buf,
                                                          std::uint64_t seed) {
  if (buf.sample_rate_hz != 16000)
    throw Error(ErrorCode::kInvalidParams, "pipeline expects 16 kHz input");
  const BiquadCoeffs c = design_biquad_lowpass(kInEarCutoffHz, kInEarQ, buf.sample_rate_hz);
  const AudioBuffer filtered = filtfilt(c, buf);
  AudioBuffer noisy = add_relative_noise(filtered, kInEarNoiseRelDb, seed);

  DegradationReport report;
  report.pipeline = "fixed";
  report.seed = seed;
  report.clip_count = count_clipped(noisy.samples);
  report.measured_noise_rel_db =
      dsp::db_from_power(mean_power(noisy.samples - filtered.samples) /
                         mean_power(filtered.samples));
  return {std::move(noisy), report};
}

RandomResponseSpec default_response_spec(double fs_hz) {
  // Placeholder envelope only: strong occluded lows, steep rolloff past
  // 1 kHz. Measured bound curves should replace it whenever available.
  RandomResponseSpec spec;
  spec.fs_hz = fs_hz;
  spec.freq_grid_hz.resize(13);
  spec.upper_db.resize(13);
  spec.lower_db.resize(13);
  spec.freq_grid_hz << 50, 100, 200, 400, 600, 800, 1000, 1500, 2000, 3000, 4000, 6000, 8000;
  spec.upper_db << 0, 2, 3, 3, 2, 0, -3, -8, -14, -24, -38, -50, -60;
  spec.lower_db << -10, -6, -4, -3, -4, -7, -12, -20, -28, -40, -55, -70, -80;
  return spec;
}

RandomResponseSpec load_bounds_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kInvalidSpec, "empty bounds file");

  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };

  const std::vector<std::string> header = split(line);
  int col_f = -1, col_lo = -1, col_hi = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "freq_hz") col_f = static_cast<int>(i);
    if (header[i] == "lower_db" || header[i] == "p10_db") col_lo = static_cast<int>(i);
    if (header[i] == "upper_db" || header[i] == "p90_db") col_hi = static_cast<int>(i);
  }
  if (col_f < 0 || col_lo < 0 || col_hi < 0)
    throw Error(ErrorCode::kInvalidSpec,
                "bounds CSV needs freq_hz plus lower_db/upper_db or p10_db/p90_db columns");

  std::vector<double> fs, lo, hi;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    const std::size_t need =
        static_cast<std::size_t>(std::max(col_f, std::max(col_lo, col_hi)));
    if (cells.size() <= need)
      throw Error(ErrorCode::kInvalidSpec, "short row in bounds CSV");
    const double f = std::stod(cells[col_f]);
    if (f <= 0.0) continue;  // DC row carries no usable bound
    fs.push_back(f);
    lo.push_back(std::stod(cells[col_lo]));
    hi.push_back(std::stod(cells[col_hi]));
  }
  if (fs.size() < 2) throw Error(ErrorCode::kInvalidSpec, "bounds CSV has too few rows");

  RandomResponseSpec spec;
  spec.freq_grid_hz = Eigen::Map<Eigen::ArrayXd>(fs.data(), fs.size());
  spec.lower_db = Eigen::Map<Eigen::ArrayXd>(lo.data(), lo.size());
  spec.upper_db = Eigen::Map<Eigen::ArrayXd>(hi.data(), hi.size());
  // Degenerate measured bands can invert by rounding; widen minimally.
  for (Eigen::Index i = 0; i < spec.freq_grid_hz.size(); ++i)
    if (spec.lower_db[i] > spec.upper_db[i]) std::swap(spec.lower_db[i], spec.upper_db[i]);
  validate_spec(spec);
  return spec;
}

Eigen::ArrayXd sample_psi_random(const RandomResponseSpec& spec) {
  validate_spec(spec);
  SplitMix64 rng(spec.seed);
  return realize_response(spec, rng);
}

std::pair<AudioBuffer, DegradationReport> apply_psi_random(const AudioBuffer& buf,
                                                           const RandomResponseSpec& spec) {
  if (buf.sample_rate_hz != 16000)
    throw Error(ErrorCode::kInvalidParams, "pipeline expects 16 kHz input");
  validate_spec(spec);
  SplitMix64 rng(spec.seed);
  const Eigen::ArrayXd taps = realize_response(spec, rng);

  AudioBuffer filtered;
  filtered.sample_rate_hz = buf.sample_rate_hz;
  filtered.samples = dsp::fir_filter_zero_delay(buf.samples, taps);
  const double p = mean_power(filtered.samples);
  if (p == 0.0) throw Error(ErrorCode::kAllZeroSignal, "filtered signal is silent");

  // Noise drawn from the same stream, directly after the envelope draws.
  const double sigma = std::sqrt(p * std::pow(10.0, kInEarNoiseRelDb / 10.0));
  AudioBuffer noisy;
  noisy.sample_rate_hz = buf.sample_rate_hz;
  noisy.samples.resize(filtered.size());
  for (Eigen::Index i = 0; i < filtered.size(); ++i)
    noisy.samples[i] = filtered.samples[i] + sigma * rng.next_gaussian();

  DegradationReport report;
  report.pipeline = "random";
  report.seed = spec.seed;
  report.clip_count = count_clipped(noisy.samples);
  report.measured_noise_rel_db =
      dsp::db_from_power(mean_power(noisy.samples - filtered.samples) / p);
  return {std::move(noisy), report};
}

BatchReport batch_degrade(const std::filesystem::path& in_dir,
                          const std::filesystem::path& out_dir,
                          DegradePipeline pipeline, std::uint64_t master_seed,
                          const RandomResponseSpec* bounds) {
  namespace fs = std::filesystem;
  BatchReport report;
  report.pipeline = pipeline == DegradePipeline::kFixed ? "fixed" : "random";
  report.master_seed = master_seed;
  if (!fs::is_directory(in_dir))
    throw Error(ErrorCode::kIoFailure, in_dir.string() + " is not a directory");
  fs::create_directories(out_dir);

  std::vector<fs::path> inputs;
  for (const auto& entry : fs::directory_iterator(in_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".wav")
      inputs.push_back(entry.path());
  std::sort(inputs.begin(), inputs.end());

  const RandomResponseSpec base_spec =
      bounds != nullptr ? *bounds : default_response_spec(16000.0);

  for (const fs::path& path : inputs) {
    BatchFileReport fr;
    fr.path = path.filename().string();
    fr.seed = derive_seed(master_seed, fr.path);
    try {
      const AudioBuffer in = read_wav(path);
      if (in.sample_rate_hz != 16000)
        throw Error(ErrorCode::kInvalidParams,
                    "expected 16 kHz, got " + std::to_string(in.sample_rate_hz));
      std::pair<AudioBuffer, DegradationReport> result =
          pipeline == DegradePipeline::kFixed
              ? apply_psi_fixed(in, fr.seed)
              : apply_psi_random(in, [&] {
                  RandomResponseSpec s = base_spec;
                  s.seed = fr.seed;
                  return s;
                }());
      fr.rel_db = result.second.measured_noise_rel_db;
      fr.clip_count = result.second.clip_count;
      write_wav(out_dir / fr.path, result.first, WavEncoding::kFloat32);
    } catch (const Error& e) {
      fr.error = e.what();
    }
    report.files.push_back(std::move(fr));
  }
  return report;
}

}  // namespace eben
