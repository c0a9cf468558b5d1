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

#include "eben/sysid.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "eben/dsp.hpp"
#include "eben/error.hpp"

namespace eben {
namespace {

constexpr int kSmoothingBins = 5;
constexpr double kMagnitudeFloor = 1e-30;

void check_config(const WelchConfig& cfg) {
  if (cfg.fft_size <= 0 || (cfg.fft_size & (cfg.fft_size - 1)) != 0)
    throw Error(ErrorCode::kInvalidParams, "fft_size must be a power of two");
  if (cfg.segment_overlap < 0.0 || cfg.segment_overlap >= 1.0)
    throw Error(ErrorCode::kInvalidParams, "overlap must be in [0, 1)");
  if (cfg.horizon_samples < 2 * cfg.fft_size)
    throw Error(ErrorCode::kInvalidParams, "horizon must cover at least two frames");
}

// Accumulates Hann-windowed cross/auto spectra for frames starting at
// `begin`, `begin + hop`, ... while the frame fits before `end`.
struct SpectrumAccumulator {
  explicit SpectrumAccumulator(const WelchConfig& cfg)
      : window(dsp::hann_window_periodic(cfg.fft_size)),
        p_yx(Eigen::ArrayXcd::Zero(cfg.bins())),
        p_yy(Eigen::ArrayXd::Zero(cfg.bins())),
        p_xx(Eigen::ArrayXd::Zero(cfg.bins())),
        scale(1.0 / window.square().sum()) {}

  void add_range(const Eigen::ArrayXd& y, const Eigen::ArrayXd& x, const WelchConfig& cfg,
                 Eigen::Index begin, Eigen::Index end) {
    Eigen::FFT<double> fft;
    const int n = cfg.fft_size;
    const int bins = cfg.bins();
    std::vector<double> frame(n);
    std::vector<std::complex<double>> spec_y(n), spec_x(n);
    for (Eigen::Index start = begin; start + n <= end; start += cfg.frame_hop()) {
      for (int i = 0; i < n; ++i) frame[i] = y[start + i] * window[i];
      fft.fwd(spec_y, frame);
      for (int i = 0; i < n; ++i) frame[i] = x[start + i] * window[i];
      fft.fwd(spec_x, frame);
      for (int b = 0; b < bins; ++b) {
        p_yx[b] += spec_x[b] * std::conj(spec_y[b]) * scale;
        p_yy[b] += std::norm(spec_y[b]) * scale;
        p_xx[b] += std::norm(spec_x[b]) * scale;
      }
      ++frames;
    }
  }

  void finish() {
    if (frames == 0) return;
    p_yx /= frames;
    p_yy /= frames;
    p_xx /= frames;
  }

  Eigen::ArrayXd window;
  Eigen::ArrayXcd p_yx;
  Eigen::ArrayXd p_yy, p_xx;
  double scale;
  int frames = 0;
};

Eigen::ArrayXd bin_frequencies(const WelchConfig& cfg, int sample_rate) {
  Eigen::ArrayXd f(cfg.bins());
  for (int b = 0; b < cfg.bins(); ++b)
    f[b] = static_cast<double>(b) * sample_rate / cfg.fft_size;
  return f;
}

}  // namespace

long VadMask::active_frames() const {
  return std::count(active.begin(), active.end(), std::uint8_t{1});
}

VadMask vad_mask(const AudioBuffer& ref, double threshold_db_below_peak,
                 int frame_samples) {
  if (frame_samples <= 0) throw Error(ErrorCode::kInvalidParams, "frame must be positive");
  if (ref.size() == 0) throw Error(ErrorCode::kEmptyBuffer, "empty reference");

  const Eigen::Index frames = (ref.size() + frame_samples - 1) / frame_samples;
  Eigen::ArrayXd rms_db(frames);
  double peak_db = -std::numeric_limits<double>::infinity();
  for (Eigen::Index f = 0; f < frames; ++f) {
    const Eigen::Index start = f * frame_samples;
    const Eigen::Index len = std::min<Eigen::Index>(frame_samples, ref.size() - start);
    const double ms = ref.samples.segment(start, len).square().mean();
    rms_db[f] = ms > 0.0 ? 10.0 * std::log10(ms) : -std::numeric_limits<double>::infinity();
    peak_db = std::max(peak_db, rms_db[f]);
  }

  VadMask mask;
  mask.frame_samples = frame_samples;
  mask.active.resize(frames);
  for (Eigen::Index f = 0; f < frames; ++f)
    mask.active[f] =
        (std::isinf(threshold_db_below_peak) || rms_db[f] >= peak_db - threshold_db_below_peak)
            ? 1
            : 0;
  return mask;
}

long horizon_count(Eigen::Index samples, const WelchConfig& cfg) {
  if (samples < cfg.horizon_samples) return 0;
  return (samples - cfg.horizon_samples) / cfg.horizon_hop() + 1;
}

SpectralDensities welch_densities(const AudioBuffer& y, const AudioBuffer& x,
                                  const WelchConfig& cfg, long segment_index) {
  check_config(cfg);
  if (y.size() != x.size())
    throw Error(ErrorCode::kLengthMismatch, "reference and measurement differ in length");
  const long n_horizons = horizon_count(y.size(), cfg);
  if (segment_index < 0 || segment_index >= n_horizons)
    throw Error(ErrorCode::kSegmentOutOfRange,
                "segment " + std::to_string(segment_index) + " of " +
                    std::to_string(n_horizons));

  const Eigen::Index begin = segment_index * cfg.horizon_hop();
  SpectrumAccumulator acc(cfg);
  acc.add_range(y.samples, x.samples, cfg, begin, begin + cfg.horizon_samples);
  acc.finish();

  SpectralDensities out;
  out.freq_hz = bin_frequencies(cfg, y.sample_rate_hz);
  out.p_yx = std::move(acc.p_yx);
  out.p_yy = std::move(acc.p_yy);
  out.p_xx = std::move(acc.p_xx);
  out.frames_averaged = acc.frames;
  return out;
}

TransferFunctionEstimate estimate_transfer(const AudioBuffer& y, const AudioBuffer& x,
                                           const WelchConfig& cfg, const VadMask& vad) {
  check_config(cfg);
  if (y.size() != x.size())
    throw Error(ErrorCode::kLengthMismatch, "reference and measurement differ in length");
  const long n_horizons = horizon_count(y.size(), cfg);

  // Horizon is active when at least half of the VAD frames it spans are.
  std::vector<long> active_ids;
  for (long h = 0; h < n_horizons; ++h) {
    const Eigen::Index begin = h * cfg.horizon_hop();
    const Eigen::Index end = begin + cfg.horizon_samples;
    const long f0 = begin / vad.frame_samples;
    const long f1 = std::min<long>((end - 1) / vad.frame_samples,
                                   static_cast<long>(vad.active.size()) - 1);
    long total = 0, act = 0;
    for (long f = f0; f <= f1; ++f) {
      ++total;
      act += vad.active[f];
    }
    if (total > 0 && 2 * act >= total) active_ids.push_back(h);
  }
  if (active_ids.size() < 3)
    throw Error(ErrorCode::kTooFewSegments,
                "only " + std::to_string(active_ids.size()) + " active horizons");

  const int bins = cfg.bins();
  Eigen::MatrixXd ratios_db(static_cast<Eigen::Index>(active_ids.size()), bins);
  for (std::size_t i = 0; i < active_ids.size(); ++i) {
    const SpectralDensities d = welch_densities(y, x, cfg, active_ids[i]);
    for (int b = 0; b < bins; ++b) {
      const double mag = std::abs(d.p_yx[b]) / std::max(d.p_yy[b], kMagnitudeFloor);
      ratios_db(static_cast<Eigen::Index>(i), b) =
          dsp::db_from_amplitude(std::max(mag, kMagnitudeFloor));
    }
  }

  TransferFunctionEstimate est;
  est.freq_grid_hz = bin_frequencies(cfg, y.sample_rate_hz);
  est.n_segments = static_cast<int>(active_ids.size());
  est.median_db.resize(bins);
  est.p10_db.resize(bins);
  est.p90_db.resize(bins);
  Eigen::ArrayXd column(ratios_db.rows());
  for (int b = 0; b < bins; ++b) {
    column = ratios_db.col(b);
    std::sort(column.data(), column.data() + column.size());
    est.median_db[b] = dsp::percentile_sorted(column, 0.5);
    est.p10_db[b] = dsp::percentile_sorted(column, 0.1);
    est.p90_db[b] = dsp::percentile_sorted(column, 0.9);
  }

  est.smoothed_db.resize(bins);
  const int half = kSmoothingBins / 2;
  for (int b = 0; b < bins; ++b) {
    const int lo = std::max(0, b - half);
    const int hi = std::min(bins - 1, b + half);
    est.smoothed_db[b] = est.median_db.segment(lo, hi - lo + 1).mean();
  }
  return est;
}

CoherenceCurve coherence(const AudioBuffer& y, const AudioBuffer& x,
                         const WelchConfig& cfg) {
  check_config(cfg);
  if (y.size() != x.size())
    throw Error(ErrorCode::kLengthMismatch, "reference and measurement differ in length");
  const Eigen::Index hop = cfg.frame_hop();
  const long n_frames =
      y.size() >= cfg.fft_size ? (y.size() - cfg.fft_size) / hop + 1 : 0;
  if (n_frames < 8)
    throw Error(ErrorCode::kBufferTooShort,
                "coherence needs >= 8 frames, have " + std::to_string(n_frames));

  SpectrumAccumulator acc(cfg);
  acc.add_range(y.samples, x.samples, cfg, 0, y.size());
  acc.finish();

  CoherenceCurve out;
  out.freq_grid_hz = bin_frequencies(cfg, y.sample_rate_hz);
  out.frames_averaged = acc.frames;
  out.coherence.resize(cfg.bins());
  for (int b = 0; b < cfg.bins(); ++b) {
    const double denom = acc.p_xx[b] * acc.p_yy[b];
    const double c = denom > 0.0 ? std::norm(acc.p_yx[b]) / denom : 0.0;
    out.coherence[b] = std::clamp(c, 0.0, 1.0);
  }
  return out;
}

void write_sysid_csv(std::ostream& os, const TransferFunctionEstimate& tf,
                     const CoherenceCurve* coh) {
  os << "freq_hz,median_db,smoothed_db,p10_db,p90_db,coherence\n";
  os.precision(10);
  for (Eigen::Index b = 0; b < tf.freq_grid_hz.size(); ++b) {
    os << tf.freq_grid_hz[b] << ',' << tf.median_db[b] << ',' << tf.smoothed_db[b] << ','
       << tf.p10_db[b] << ',' << tf.p90_db[b] << ',';
    if (coh != nullptr && b < coh->coherence.size())
      os << coh->coherence[b];
    else
      os << "";
    os << '\n';
  }
}

}  // namespace eben
