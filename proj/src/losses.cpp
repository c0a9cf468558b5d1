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

#include "eben/losses.hpp"

#include <cmath>
#include <limits>

#include "eben/error.hpp"

namespace eben {
namespace {

constexpr double kResidualFloor = 1e-12;

// Real and fake terms are separate expectations, so only the scale count has
// to agree; each scale normalizes by its own time length.
void check_scales(const std::vector<ScoreAndFeatures>& a,
                  const std::vector<ScoreAndFeatures>& b) {
  if (a.empty() || a.size() != b.size())
    throw Error(ErrorCode::kShapeMismatch, "scale counts differ");
}

double mean_hinge(const Eigen::ArrayXd& scores, double sign) {
  // mean_t max(0, 1 - sign * score)
  if (scores.size() == 0) throw Error(ErrorCode::kShapeMismatch, "empty logit sequence");
  double acc = 0.0;
  for (Eigen::Index t = 0; t < scores.size(); ++t)
    acc += std::max(0.0, 1.0 - sign * scores[t]);
  return acc / static_cast<double>(scores.size());
}

template <typename F>
double batch_mean(std::size_t n, F&& per_sample) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += per_sample(i);
  return acc / static_cast<double>(n);
}

}  // namespace

double hinge_d_loss(const std::vector<ScoreAndFeatures>& real,
                    const std::vector<ScoreAndFeatures>& fake) {
  check_scales(real, fake);
  const double k = static_cast<double>(real.size());
  double real_term = 0.0, fake_term = 0.0;
  for (std::size_t s = 0; s < real.size(); ++s) {
    real_term += mean_hinge(real[s].logits, +1.0);
    fake_term += mean_hinge(fake[s].logits, -1.0);
  }
  return real_term / k + fake_term / k;
}

double hinge_d_loss(const std::vector<std::vector<ScoreAndFeatures>>& real_batch,
                    const std::vector<std::vector<ScoreAndFeatures>>& fake_batch) {
  if (real_batch.empty() || real_batch.size() != fake_batch.size())
    throw Error(ErrorCode::kShapeMismatch, "batch sizes differ");
  return batch_mean(real_batch.size(),
                    [&](std::size_t i) { return hinge_d_loss(real_batch[i], fake_batch[i]); });
}

double hinge_g_adv(const std::vector<ScoreAndFeatures>& fake) {
  if (fake.empty()) throw Error(ErrorCode::kShapeMismatch, "no scales");
  double acc = 0.0;
  for (const ScoreAndFeatures& s : fake) acc += mean_hinge(s.logits, +1.0);
  return acc / static_cast<double>(fake.size());
}

double hinge_g_adv(const std::vector<std::vector<ScoreAndFeatures>>& fake_batch) {
  if (fake_batch.empty()) throw Error(ErrorCode::kShapeMismatch, "empty batch");
  return batch_mean(fake_batch.size(),
                    [&](std::size_t i) { return hinge_g_adv(fake_batch[i]); });
}

double feature_match_loss(const std::vector<ScoreAndFeatures>& real,
                          const std::vector<ScoreAndFeatures>& fake) {
  check_scales(real, fake);
  const double k = static_cast<double>(real.size());
  double acc = 0.0;
  for (std::size_t s = 0; s < real.size(); ++s) {
    if (real[s].features.size() != fake[s].features.size())
      throw Error(ErrorCode::kShapeMismatch,
                  "feature counts differ at scale " + std::to_string(s));
    for (std::size_t l = 0; l < real[s].features.size(); ++l) {
      const Eigen::MatrixXf& r = real[s].features[l];
      const Eigen::MatrixXf& f = fake[s].features[l];
      if (r.rows() != f.rows() || r.cols() != f.cols())
        throw Error(ErrorCode::kShapeMismatch,
                    "feature map shapes differ at scale " + std::to_string(s));
      // L1 over the map, normalized by time x features.
      acc += (r - f).cwiseAbs().cast<double>().sum() /
             (static_cast<double>(r.rows()) * static_cast<double>(r.cols()));
    }
  }
  return acc / k;
}

double feature_match_loss(const std::vector<std::vector<ScoreAndFeatures>>& real_batch,
                          const std::vector<std::vector<ScoreAndFeatures>>& fake_batch) {
  if (real_batch.empty() || real_batch.size() != fake_batch.size())
    throw Error(ErrorCode::kShapeMismatch, "batch sizes differ");
  return batch_mean(real_batch.size(), [&](std::size_t i) {
    return feature_match_loss(real_batch[i], fake_batch[i]);
  });
}

double total_g_loss(double adv, double rec) { return adv + kFeatureMatchWeight * rec; }

LossBreakdown gan_losses(const std::vector<ScoreAndFeatures>& real,
                         const std::vector<ScoreAndFeatures>& fake) {
  LossBreakdown out;
  out.l_d = hinge_d_loss(real, fake);
  out.l_g_adv = hinge_g_adv(fake);
  out.l_g_rec = feature_match_loss(real, fake);
  out.l_g_total = total_g_loss(out.l_g_adv, out.l_g_rec);
  return out;
}

double si_sdr_db(const AudioBuffer& est, const AudioBuffer& ref) {
  if (est.size() != ref.size())
    throw Error(ErrorCode::kLengthMismatch, "estimate and reference differ in length");
  const double ref_energy = ref.samples.square().sum();
  if (ref_energy == 0.0) throw Error(ErrorCode::kZeroReference, "reference is silent");

  const double alpha = (est.samples * ref.samples).sum() / ref_energy;
  const Eigen::ArrayXd projected = alpha * ref.samples;
  const double signal = projected.square().sum();
  const double residual = (est.samples - projected).square().sum();
  if (residual < kResidualFloor * signal) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / residual);
}

double ser_db(const AudioBuffer& est, const AudioBuffer& ref, long delay) {
  if (est.size() != ref.size())
    throw Error(ErrorCode::kLengthMismatch, "estimate and reference differ in length");
  if (delay < 0 || delay >= est.size())
    throw Error(ErrorCode::kLengthMismatch, "delay exceeds signal length");
  const Eigen::Index n = est.size() - delay;
  const Eigen::ArrayXd r = ref.samples.head(n);
  const Eigen::ArrayXd e = est.samples.tail(n);
  const double ref_energy = r.square().sum();
  const double err_energy = (r - e).square().sum();
  if (err_energy < kResidualFloor * ref_energy)
    return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(ref_energy / err_energy);
}

}  // namespace eben
