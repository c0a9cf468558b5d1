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

#include <cstdint>

#include "eben/neural.hpp"

namespace eben {

struct BenchReport {
  double latency_ms_mean = 0;
  double latency_ms_median = 0;
  double latency_ms_p95 = 0;
  double realtime_factor = 0;  // median latency / audio duration
  long generator_params = 0;
  long discriminator_params = 0;
  long weights_bytes = 0;  // float32 payload of both networks
  int repetitions = 0;
  int warmup_reps = 0;
  double seconds = 0;
};

// Times the generator forward pass on a seeded random buffer, single
// threaded, excluding graph compilation and the warmup repetitions.
BenchReport bench_forward(const NetworkConfig& cfg, double seconds, int reps,
                          int warmup, std::uint64_t seed);

}  // namespace eben
