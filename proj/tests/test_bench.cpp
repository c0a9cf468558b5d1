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

#include <doctest.h>

#include "eben/bench.hpp"
#include "eben/error.hpp"
#include "eben/sysid.hpp"

using namespace eben;

TEST_CASE("bench report is internally consistent") {
  const NetworkConfig cfg;
  const BenchReport r = bench_forward(cfg, 0.5, 10, 1, 3);
  CHECK(r.repetitions == 10);
  CHECK(r.warmup_reps == 1);
  CHECK(r.latency_ms_median > 0.0);
  CHECK(r.latency_ms_p95 >= r.latency_ms_median);
  CHECK(r.realtime_factor == r.latency_ms_median / (r.seconds * 1000.0));
  auto [gen, disc] = count_params(cfg);
  CHECK(r.generator_params == gen);
  CHECK(r.discriminator_params == disc);
  CHECK(r.weights_bytes == (gen + disc) * 4);
}

TEST_CASE("latency grows roughly linearly with duration") {
  const NetworkConfig cfg;
  const BenchReport half = bench_forward(cfg, 0.5, 10, 1, 3);
  const BenchReport full = bench_forward(cfg, 1.0, 10, 1, 3);
  const double factor = full.latency_ms_median / half.latency_ms_median;
  CHECK(factor > 1.6);
  CHECK(factor < 2.4);
}

TEST_CASE("bench rejects bad parameters") {
  const NetworkConfig cfg;
  CHECK_THROWS_AS(bench_forward(cfg, 1.0, 9, 1, 3), Error);
  CHECK_THROWS_AS(bench_forward(cfg, 1.0, 10, 0, 3), Error);
  CHECK_THROWS_AS(bench_forward(cfg, 0.0, 10, 1, 3), Error);
}

TEST_CASE("horizon budget for a 24-second recording") {
  // 1.024 s horizons advancing at 50% recovery over 24 s of signal.
  const WelchConfig cfg;
  CHECK(horizon_count(384000, cfg) == 45);
  CHECK(horizon_count(16384, cfg) == 1);
  CHECK(horizon_count(16383, cfg) == 0);
}
