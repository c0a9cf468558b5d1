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

#include "eben/pqmf.hpp"

#include <cmath>
#include <complex>
#include <ostream>

#include "eben/dsp.hpp"
#include "eben/error.hpp"

namespace eben {
namespace {

constexpr int kMaxBisectionIters = 200;
constexpr double kCriterionTol = 1e-9;
constexpr int kGainGridPoints = 1025;
constexpr int kGainGridMargin = 16;  // the +-pi/4 phase pattern is irregular at the edges

// Kaiser-windowed ideal lowpass. Only the left half is computed; the right
// half is mirrored so h[n] == h[N-1-n] holds bit-exactly.
Eigen::ArrayXd windowed_sinc(int n_taps, double beta, double omega_c) {
  Eigen::ArrayXd h(n_taps);
  const double center = 0.5 * (n_taps - 1);
  const double i0_beta = dsp::bessel_i0(beta);
  const double half = center;
  for (int n = 0; n < (n_taps + 1) / 2; ++n) {
    const double m = n - center;
    const double ideal = (m == 0.0) ? omega_c / M_PI : std::sin(omega_c * m) / (M_PI * m);
    const double r = m / half;
    const double w =
        dsp::bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    h[n] = ideal * w;
    h[n_taps - 1 - n] = h[n];
  }
  return h;
}

// Mean magnitude of the distortion transfer sum_i H_i(w) G_i(w) over an
// interior frequency grid. The bank's raw cascade gain is this value / M.
double distortion_mean_gain(const Eigen::MatrixXd& analysis,
                            const Eigen::MatrixXd& synthesis) {
  const int m = static_cast<int>(analysis.rows());
  const int n = static_cast<int>(analysis.cols());
  double acc = 0.0;
  int counted = 0;
  for (int p = kGainGridMargin; p < kGainGridPoints - kGainGridMargin; ++p) {
    const double w = M_PI * p / (kGainGridPoints - 1);
    std::complex<double> t(0.0, 0.0);
    for (int i = 0; i < m; ++i) {
      std::complex<double> hi(0.0, 0.0), gi(0.0, 0.0);
      for (int k = 0; k < n; ++k) {
        const std::complex<double> e(std::cos(w * k), -std::sin(w * k));
        hi += analysis(i, k) * e;
        gi += synthesis(i, k) * e;
      }
      t += hi * gi;
    }
    acc += std::abs(t);
    ++counted;
  }
  return acc / counted;
}

}  // namespace

PrototypeFilter design_prototype(int bands, int taps_per_band, double atten_db) {
  if (bands < 2 || taps_per_band < 4 || atten_db < 40.0)
    throw Error(ErrorCode::kInvalidParams,
                "need bands >= 2, taps_per_band >= 4, atten_db >= 40");
  const int n_taps = bands * taps_per_band;
  const double beta = dsp::kaiser_beta(atten_db);
  const double target = M_PI / (2.0 * bands);

  // |H(pi/2M)|^2 grows monotonically with the cutoff, so plain bisection
  // over (0, pi/M) converges.
  double lo = 1e-9, hi = M_PI / bands - 1e-9;
  double mid = 0.0, residual = 1.0;
  bool converged = false;
  for (int it = 0; it < kMaxBisectionIters; ++it) {
    mid = 0.5 * (lo + hi);
    const Eigen::ArrayXd h = windowed_sinc(n_taps, beta, mid);
    const double mag2 = std::norm(dsp::dtft_point(h, target));
    residual = std::abs(mag2 - 0.5);
    if (residual <= kCriterionTol) {
      converged = true;
      break;
    }
    if (mag2 < 0.5)
      lo = mid;
    else
      hi = mid;
  }
  if (!converged)
    throw Error(ErrorCode::kNoConvergence, "cutoff bisection did not meet tolerance");

  PrototypeFilter proto;
  proto.taps = windowed_sinc(n_taps, beta, mid);
  proto.bands = bands;
  proto.cutoff_normalized = mid / M_PI;
  proto.atten_db = atten_db;
  proto.criterion_residual = residual;
  return proto;
}

PqmfBank modulate_bank(const PrototypeFilter& proto) {
  const int m = proto.bands;
  const int n = proto.length();
  if (m < 2 || n < 4 * m || n % m != 0)
    throw Error(ErrorCode::kInvalidParams, "malformed prototype");

  PqmfBank bank;
  bank.bands = m;
  bank.analysis_kernels.resize(m, n);
  bank.synthesis_kernels.resize(m, n);
  const double center = 0.5 * (n - 1);
  for (int i = 0; i < m; ++i) {
    const double phase = (i % 2 == 0) ? M_PI / 4.0 : -M_PI / 4.0;
    const double freq = (2.0 * i + 1.0) * M_PI / (2.0 * m);
    for (int k = 0; k < n; ++k) {
      const double arg = freq * (k - center);
      bank.analysis_kernels(i, k) = 2.0 * proto.taps[k] * std::cos(arg + phase);
      bank.synthesis_kernels(i, k) = 2.0 * proto.taps[k] * std::cos(arg - phase);
    }
  }
  bank.synthesis_gain =
      m / distortion_mean_gain(bank.analysis_kernels, bank.synthesis_kernels);
  return bank;
}

SubbandTensor analyze(const PqmfBank& bank, const AudioBuffer& buf) {
  const int m = bank.bands;
  const int n = bank.length();
  if (m < 2 || bank.analysis_kernels.rows() != m)
    throw Error(ErrorCode::kBankMismatch, "bank has no kernels");
  const Eigen::Index t = buf.size();
  if (t <= 0) throw Error(ErrorCode::kEmptyBuffer, "cannot analyze empty buffer");

  const Eigen::Index frames = (t + m - 1) / m;
  SubbandTensor sub;
  sub.source_rate_hz = buf.sample_rate_hz;
  sub.source_length = t;
  sub.data.setZero(m, frames);

  // band[i][f] = sum_k h_i[k] x[f*M - k]; out-of-range input samples are 0.
  const Eigen::ArrayXd& x = buf.samples;
  for (int i = 0; i < m; ++i) {
    for (Eigen::Index f = 0; f < frames; ++f) {
      const Eigen::Index pos = f * m;
      const Eigen::Index k_lo = std::max<Eigen::Index>(0, pos - (t - 1));
      const Eigen::Index k_hi = std::min<Eigen::Index>(n - 1, pos);
      double acc = 0.0;
      for (Eigen::Index k = k_lo; k <= k_hi; ++k)
        acc += bank.analysis_kernels(i, k) * x[pos - k];
      sub.data(i, f) = acc;
    }
  }
  return sub;
}

AudioBuffer synthesize(const PqmfBank& bank, const SubbandTensor& sub) {
  const int m = bank.bands;
  const int n = bank.length();
  if (sub.bands() != m)
    throw Error(ErrorCode::kBankMismatch,
                "tensor has " + std::to_string(sub.bands()) + " bands, bank has " +
                    std::to_string(m));
  const Eigen::Index frames = sub.frames();
  const Eigen::Index t_padded = frames * m;

  Eigen::ArrayXd y = Eigen::ArrayXd::Zero(t_padded);
  for (int i = 0; i < m; ++i) {
    for (Eigen::Index f = 0; f < frames; ++f) {
      const double v = sub.data(i, f);
      if (v == 0.0) continue;
      const Eigen::Index base = f * m;
      const Eigen::Index len = std::min<Eigen::Index>(n, t_padded - base);
      for (Eigen::Index k = 0; k < len; ++k)
        y[base + k] += v * bank.synthesis_kernels(i, k);
    }
  }
  y *= bank.synthesis_gain;

  AudioBuffer out;
  out.sample_rate_hz = sub.source_rate_hz;
  const Eigen::Index keep =
      (sub.source_length > 0 && sub.source_length <= t_padded) ? sub.source_length
                                                               : t_padded;
  out.samples = y.head(keep);
  return out;
}

SubbandTensor select_bands(const SubbandTensor& sub, BandSelect mode, int count) {
  const Eigen::Index m = sub.bands();
  if (count < 1 || count > m)
    throw Error(ErrorCode::kCountOutOfRange,
                "count " + std::to_string(count) + " with " + std::to_string(m) + " bands");
  SubbandTensor out;
  out.source_rate_hz = sub.source_rate_hz;
  out.source_length = sub.source_length;
  const Eigen::Index start = (mode == BandSelect::kLowest) ? 0 : m - count;
  out.data = sub.data.middleRows(start, count);
  return out;
}

void write_design_report(std::ostream& os, const PrototypeFilter& proto,
                         const PqmfBank& bank) {
  os.precision(17);
  os << "pqmf prototype design\n";
  os << "bands " << proto.bands << "\n";
  os << "taps " << proto.length() << "\n";
  os << "requested_atten_db " << proto.atten_db << "\n";
  os << "cutoff_normalized " << proto.cutoff_normalized << "\n";
  os << "criterion_residual " << proto.criterion_residual << "\n";

  // Achieved attenuation: worst sidelobe past the transition region.
  double worst = 0.0;
  const double stop_start = 1.2 * M_PI / proto.bands;
  for (int p = 0; p < 4096; ++p) {
    const double w = stop_start + (M_PI - stop_start) * p / 4095.0;
    worst = std::max(worst, dsp::magnitude_at(proto.taps, w));
  }
  os << "achieved_atten_db " << -dsp::db_from_amplitude(worst) << "\n";
  os << "synthesis_gain " << bank.synthesis_gain << "\n";
  os << "cascade_delay_samples " << bank.delay() << "\n";
  os << "prototype_taps\n";
  for (int k = 0; k < proto.length(); ++k) os << proto.taps[k] << "\n";
}

}  // namespace eben
