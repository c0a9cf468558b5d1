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

#include "eben/dsp.hpp"

#include <algorithm>

namespace eben::dsp {

Eigen::ArrayXd fir_filter_zero_delay(const Eigen::ArrayXd& x, const Eigen::ArrayXd& taps) {
  const Eigen::Index t = x.size();
  const Eigen::Index n = taps.size();
  const Eigen::Index delay = (n - 1) / 2;
  // Full convolution, then the slice starting at the group delay.
  Eigen::ArrayXd full = Eigen::ArrayXd::Zero(t + n - 1);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double c = taps[k];
    if (c == 0.0) continue;
    full.segment(k, t) += c * x;
  }
  return full.segment(delay, t);
}

double percentile_sorted(const Eigen::ArrayXd& sorted, double q) {
  const Eigen::Index n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = q * static_cast<double>(n - 1);
  const Eigen::Index lo = static_cast<Eigen::Index>(pos);
  const Eigen::Index hi = std::min<Eigen::Index>(lo + 1, n - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace eben::dsp
