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

#include <vector>

#include "eben/audio.hpp"
#include "eben/neural.hpp"

namespace eben {

inline constexpr double kFeatureMatchWeight = 100.0;

struct LossBreakdown {
  double l_d = 0;
  double l_g_adv = 0;
  double l_g_rec = 0;
  double l_g_total = 0;  // l_g_adv + 100 * l_g_rec, exactly
};

// Hinge losses over the K discriminator scales, each scale averaged over its
// logit time axis. Batched overloads take the arithmetic mean over samples;
// batch size 1 is the degenerate case.
double hinge_d_loss(const std::vector<ScoreAndFeatures>& real,
                    const std::vector<ScoreAndFeatures>& fake);
double hinge_d_loss(const std::vector<std::vector<ScoreAndFeatures>>& real_batch,
                    const std::vector<std::vector<ScoreAndFeatures>>& fake_batch);

double hinge_g_adv(const std::vector<ScoreAndFeatures>& fake);
double hinge_g_adv(const std::vector<std::vector<ScoreAndFeatures>>& fake_batch);

// L1 distance between intermediate discriminator activations, normalized per
// map by time x features, summed over layers and averaged over scales.
double feature_match_loss(const std::vector<ScoreAndFeatures>& real,
                          const std::vector<ScoreAndFeatures>& fake);
double feature_match_loss(const std::vector<std::vector<ScoreAndFeatures>>& real_batch,
                          const std::vector<std::vector<ScoreAndFeatures>>& fake_batch);

double total_g_loss(double adv, double rec);

LossBreakdown gan_losses(const std::vector<ScoreAndFeatures>& real,
                         const std::vector<ScoreAndFeatures>& fake);

// Scale-invariant signal-to-distortion ratio in dB. Returns +infinity when
// the projection residual is below 1e-12 of the projected signal energy.
double si_sdr_db(const AudioBuffer& est, const AudioBuffer& ref);

// Signal-to-error ratio with the estimate advanced by `delay` samples
// (a reconstruction pipeline's known latency).
double ser_db(const AudioBuffer& est, const AudioBuffer& ref, long delay);

}  // namespace eben
