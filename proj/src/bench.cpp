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

#include "eben/bench.hpp"

#include <algorithm>
#include <chrono>

#include "eben/dsp.hpp"
#include "eben/error.hpp"
#include "eben/rng.hpp"

namespace eben {

BenchReport bench_forward(const NetworkConfig& cfg, double seconds, int reps, int warmup,
                          std::uint64_t seed) {
  if (reps < 10 || warmup < 1 || seconds <= 0.0)
    throw Error(ErrorCode::kInvalidParams, "need reps >= 10, warmup >= 1, seconds > 0");

  const int rate = 16000;
  const Eigen::Index samples = static_cast<Eigen::Index>(seconds * rate);
  SplitMix64 rng(seed);
  AudioBuffer input;
  input.sample_rate_hz = rate;
  input.samples.resize(samples);
  for (Eigen::Index i = 0; i < samples; ++i)
    input.samples[i] = rng.next_uniform(-0.5, 0.5);

  // Graph compilation and weight generation stay outside the timed region.
  const WeightStore weights = init_weights(cfg, seed);
  const Generator generator(cfg, weights);

  volatile double sink = 0.0;  // keep the forward pass observable
  for (int i = 0; i < warmup; ++i) sink = sink + generator.forward(input).samples[0];

  Eigen::ArrayXd times_ms(reps);
  for (int i = 0; i < reps; ++i) {
    const auto start = std::chrono::steady_clock::now();
    const AudioBuffer out = generator.forward(input);
    const auto stop = std::chrono::steady_clock::now();
    sink = sink + out.samples[out.size() - 1];
    times_ms[i] =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(stop - start)
            .count();
  }
  (void)sink;

  Eigen::ArrayXd sorted = times_ms;
  std::sort(sorted.data(), sorted.data() + sorted.size());

  BenchReport report;
  report.latency_ms_mean = times_ms.mean();
  report.latency_ms_median = dsp::percentile_sorted(sorted, 0.5);
  report.latency_ms_p95 = dsp::percentile_sorted(sorted, 0.95);
  report.realtime_factor = report.latency_ms_median / (seconds * 1000.0);
  std::tie(report.generator_params, report.discriminator_params) = count_params(cfg);
  report.weights_bytes = (report.generator_params + report.discriminator_params) * 4;
  report.repetitions = reps;
  report.warmup_reps = warmup;
  report.seconds = seconds;
  return report;
}

}  // namespace eben
