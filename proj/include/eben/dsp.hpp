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
#include <cmath>
#include <complex>

namespace eben::dsp {

// Modified Bessel function of the first kind, order zero (power series).
inline double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double q = 0.25 * x * x;
  for (int k = 1; k < 512; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-21 * sum) break;
  }
  return sum;
}

// Kaiser shape parameter for a requested stopband attenuation in dB.
inline double kaiser_beta(double atten_db) {
  if (atten_db > 50.0) return 0.1102 * (atten_db - 8.7);
  if (atten_db >= 21.0)
    return 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);
  return 0.0;
}

// Kaiser window of length n. Mirrored halves are assigned from one
// computation so the symmetry is exact in floating point.
inline Eigen::ArrayXd kaiser_window(int n, double beta) {
  Eigen::ArrayXd w(n);
  const double denom = bessel_i0(beta);
  const double half = 0.5 * (n - 1);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    const double r = (i - half) / half;
    const double v = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / denom;
    w[i] = v;
    w[n - 1 - i] = v;
  }
  return w;
}

// Periodic Hann window (the usual choice for overlapped spectral averaging).
inline Eigen::ArrayXd hann_window_periodic(int n) {
  Eigen::ArrayXd w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / n);
  return w;
}

// H(e^{j omega}) of an FIR evaluated directly from the taps.
template <typename Derived>
std::complex<double> dtft_point(const Eigen::ArrayBase<Derived>& taps, double omega) {
  std::complex<double> acc(0.0, 0.0);
  for (Eigen::Index n = 0; n < taps.size(); ++n)
    acc += static_cast<double>(taps[n]) *
           std::complex<double>(std::cos(omega * n), -std::sin(omega * n));
  return acc;
}

template <typename Derived>
double magnitude_at(const Eigen::ArrayBase<Derived>& taps, double omega) {
  return std::abs(dtft_point(taps, omega));
}

// Causal FIR convolution truncated to the input length (zero initial state).
inline Eigen::ArrayXd causal_conv(const Eigen::ArrayXd& x, const Eigen::ArrayXd& h) {
  const Eigen::Index t = x.size(), n = h.size();
  Eigen::ArrayXd y = Eigen::ArrayXd::Zero(t);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double c = h[k];
    if (c == 0.0) continue;
    y.tail(t - std::min<Eigen::Index>(k, t)) += c * x.head(t - std::min<Eigen::Index>(k, t));
  }
  return y;
}

// Linear-phase FIR applied with its group delay removed, so the output is
// aligned with the input ("same" length).
Eigen::ArrayXd fir_filter_zero_delay(const Eigen::ArrayXd& x, const Eigen::ArrayXd& taps);

inline double db_from_power(double ratio) { return 10.0 * std::log10(ratio); }
inline double db_from_amplitude(double ratio) { return 20.0 * std::log10(ratio); }

// Percentile with linear interpolation between order statistics. v is sorted
// in place by the caller or here; q in [0, 1].
double percentile_sorted(const Eigen::ArrayXd& sorted, double q);

}  // namespace eben::dsp
