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
//
// Acceptance suite: one pass/fail line per criterion, covering the round
// trip, separation, calibration, identification, losses, the config gate,
// forward-pass contracts, frugality, the metric properties, and the full
// measure -> simulate -> enhance -> evaluate loop.

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "eben/bench.hpp"
#include "eben/degrade.hpp"
#include "eben/error.hpp"
#include "eben/losses.hpp"
#include "eben/neural.hpp"
#include "eben/pqmf.hpp"
#include "eben/sysid.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace eben;

namespace {

struct Criterion {
  int id;
  std::string name;
  std::function<bool(std::string&)> run;
  double budget_seconds;  // 0 = unbounded
};

AudioBuffer wrap(const Eigen::ArrayXd& samples) {
  AudioBuffer b;
  b.samples = samples;
  return b;
}

// Group-delay-compensated filtering: paired measurement recordings are
// synchronized before estimation, so the fixtures are too.
AudioBuffer fir_apply(const Eigen::ArrayXd& x, const Eigen::ArrayXd& h) {
  const Eigen::ArrayXd full = oracle::conv_full(x, h);
  return wrap(full.segment((h.size() - 1) / 2, x.size()));
}

int run_cli(const std::string& args, const fs::path& dir, std::string* out = nullptr) {
  const fs::path out_file = dir / "cli_stdout.txt";
  const std::string cmd = std::string(EBEN_CLI_PATH) + " " + args + " > " +
                          out_file.string() + " 2> " + (dir / "cli_stderr.txt").string();
  const int rc = std::system(cmd.c_str());
  if (out != nullptr) {
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    *out = ss.str();
  }
  return WEXITSTATUS(rc);
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 1. Round trip SER >= 55 dB for M in {2,4,8,16}, taps_per_band = 8.
bool criterion_roundtrip(std::string& detail) {
  bool ok = true;
  std::ostringstream d;
  for (int m : {2, 4, 8, 16}) {
    const PqmfBank bank = modulate_bank(design_prototype(m, 8));
    const AudioBuffer x = wrap(oracle::white_noise(1000 + m, 32000));
    const AudioBuffer y = synthesize(bank, analyze(bank, x));
    const double ser = ser_db(y, x, bank.delay());
    d << "M=" << m << ": " << ser << " dB  ";
    ok = ok && ser >= 55.0;
  }
  detail = d.str();
  return ok;
}

// 2. Band separation at taps_per_band = 128.
bool criterion_separation(std::string& detail) {
  const double atten = 100.0;
  const int m = 4;
  const PqmfBank bank = modulate_bank(design_prototype(m, 128, atten));
  const int n = bank.length();
  bool ok = true;
  double worst = -1e9;
  for (int i = 0; i < m; ++i) {
    const double f = (2.0 * i + 1.0) * 16000.0 / (4.0 * m);
    const SubbandTensor sub = analyze(bank, wrap(oracle::sine(f, 16000.0, 32000)));
    // Steady state: drop the filter transient at both ends.
    const Eigen::Index skip = n / m + 8;
    Eigen::ArrayXd energy(m);
    for (int j = 0; j < m; ++j)
      energy[j] =
          sub.data.row(j).segment(skip, sub.frames() - 2 * skip).array().square().mean();
    for (int j = 0; j < m; ++j) {
      if (std::abs(j - i) != 1) continue;
      const double leak_db = 10.0 * std::log10(energy[j] / energy[i]);
      worst = std::max(worst, leak_db);
      ok = ok && leak_db <= -(atten - 10.0);
    }
  }
  detail = "worst adjacent leak " + std::to_string(worst) + " dB (bar " +
           std::to_string(-(atten - 10.0)) + ")";
  return ok;
}

// 3. Degradation calibration on a ten-file corpus plus the 1200 Hz value.
bool criterion_degradation(std::string& detail) {
  const fs::path root = fs::temp_directory_path() / "eben_acc_degr";
  fs::remove_all(root);
  fs::create_directories(root / "in");
  for (int i = 0; i < 10; ++i)
    write_wav(root / "in" / ("s" + std::to_string(i) + ".wav"),
              wrap(oracle::speech_like(500 + i, 32000)), WavEncoding::kFloat32);

  const BatchReport report =
      batch_degrade(root / "in", root / "out", DegradePipeline::kFixed, 4242);
  bool ok = report.files.size() == 10;
  double worst = 0.0;
  for (const BatchFileReport& f : report.files) {
    ok = ok && f.error.empty();
    worst = std::max(worst, std::abs(f.rel_db + 23.0));
    ok = ok && std::abs(f.rel_db + 23.0) <= 0.5;
  }

  // Zero-phase cascade magnitude at 1200 Hz against the derived value.
  const BiquadCoeffs c = design_biquad_lowpass(600.0, 1.0, 16000.0);
  const Eigen::ArrayXd tone = oracle::sine(1200.0, 16000.0, 16000);
  const AudioBuffer filtered = filtfilt(c, wrap(tone));
  const double gain_db = 20.0 * std::log10(oracle::interior_rms(filtered.samples, 800) /
                                           oracle::interior_rms(tone, 800));
  ok = ok && std::abs(gain_db + 22.3) <= 1.0;
  detail = "worst |rel_db + 23| = " + std::to_string(worst) +
           ", cascade(1200 Hz) = " + std::to_string(gain_db) + " dB";
  return ok;
}

// 4. Transfer estimate against a known FIR plus coherence in the clean case.
bool criterion_sysid(std::string& detail) {
  const WelchConfig cfg;
  const Eigen::ArrayXd h = oracle::lowpass_fir(512, 3000.0, 16000.0);
  const AudioBuffer y = wrap(oracle::white_noise(77, 320000));
  const AudioBuffer clean = fir_apply(y.samples, h);

  AudioBuffer noisy = clean;
  const Eigen::ArrayXd wide = oracle::white_noise(78, clean.size());
  noisy.samples +=
      0.02 * (wide - fir_apply(wide, oracle::lowpass_fir(256, 3000.0, 16000.0)).samples);

  const VadMask vad =
      vad_mask(y, std::numeric_limits<double>::infinity(), cfg.fft_size);
  const TransferFunctionEstimate est = estimate_transfer(y, noisy, cfg, vad);

  bool ok = est.n_segments >= 3;
  double worst_err = 0.0;
  for (int b = 1; b < cfg.bins(); ++b) {
    const double f = est.freq_grid_hz[b];
    if (f >= 2000.0) break;
    const double truth = 20.0 * std::log10(oracle::dtft_mag(h, 2.0 * M_PI * f / 16000.0));
    if (truth <= -40.0) continue;
    const double err = std::abs(est.median_db[b] - truth);
    worst_err = std::max(worst_err, err);
    ok = ok && err <= 1.0;
  }

  const CoherenceCurve coh = coherence(y, clean, cfg);
  double worst_coh = 1.0;
  for (int b = 0; b < cfg.bins(); ++b) {
    if (coh.freq_grid_hz[b] >= 2000.0) break;
    worst_coh = std::min(worst_coh, coh.coherence[b]);
  }
  ok = ok && worst_coh >= 0.99;
  detail = "worst estimate error " + std::to_string(worst_err) +
           " dB, min clean coherence below 2 kHz " + std::to_string(worst_coh);
  return ok;
}

// 5. Loss hand arithmetic, exactly.
bool criterion_losses(std::string& detail) {
  auto scores = [](std::initializer_list<double> vals) {
    ScoreAndFeatures s;
    s.logits.resize(static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (double v : vals) s.logits[i++] = v;
    return s;
  };

  bool ok = true;
  ok = ok && hinge_d_loss({scores({2.0})}, {scores({-2.0})}) == 0.0;
  ok = ok && hinge_d_loss({scores({0.0})}, {scores({0.0})}) == 2.0;
  ok = ok && hinge_d_loss({scores({0.5}), scores({2.0})},
                          {scores({-0.3}), scores({-2.0})}) == 0.6;
  ok = ok && hinge_g_adv({scores({1.0})}) == 0.0;
  ok = ok && hinge_g_adv({scores({-1.0})}) == 2.0;
  ok = ok && hinge_g_adv({scores({0.0}), scores({2.0})}) == 0.5;

  ScoreAndFeatures real = scores({0.0}), fake = scores({0.0});
  Eigen::MatrixXf r(2, 1), f(2, 1);
  r << 1, 3;
  f << 0, 1;
  real.features = {r};
  fake.features = {f};
  ok = ok && feature_match_loss({real}, {fake}) == 1.5;
  real.features = {r};
  fake.features = {r};
  ok = ok && feature_match_loss({real}, {fake}) == 0.0;

  ok = ok && total_g_loss(0.0, 0.0) == 0.0;
  ok = ok && total_g_loss(0.5, 0.01) == 1.5;
  ok = ok && total_g_loss(2.0, 1.0) == 102.0;

  // Bit-exact total identity on arbitrary values.
  real.features = {Eigen::MatrixXf::Random(13, 4)};
  fake.features = {Eigen::MatrixXf::Random(13, 4)};
  const LossBreakdown l = gan_losses({real}, {fake});
  ok = ok && l.l_g_total == l.l_g_adv + 100.0 * l.l_g_rec;
  detail = "hand arithmetic and the total identity";
  return ok;
}

// 6. Config gate.
bool criterion_config_gate(std::string& detail) {
  bool ok = true;
  NetworkConfig cfg;
  try {
    validate_config(cfg);
  } catch (...) {
    ok = false;
  }

  cfg.q_bands = 4;
  try {
    validate_config(cfg);
    ok = false;
  } catch (const Error& e) {
    ok = ok && e.code() == ErrorCode::kInvalidQ;
  }
  cfg.q_bands = 3;

  for (std::vector<int> kernels : {std::vector<int>{7, 8, 8}, std::vector<int>{4, 9, 8},
                                   std::vector<int>{4, 8, 10}}) {
    cfg.decoder_kernels = kernels;
    try {
      validate_config(cfg);
      ok = false;
    } catch (const Error& e) {
      ok = ok && e.code() == ErrorCode::kKernelStrideMismatch;
    }
  }
  detail = "reference accepted, InvalidQ and KernelStrideMismatch rejected";
  return ok;
}

// 7. Forward-pass contracts.
bool criterion_forward(std::string& detail) {
  const NetworkConfig cfg;
  const WeightStore store = init_weights(cfg, 90210);
  const Generator gen(cfg, store);

  bool ok = true;
  for (Eigen::Index len : {4000L, 16000L, 16384L, 24001L, 777L}) {
    const AudioBuffer out = gen.forward(wrap(oracle::white_noise(2000 + len, len)));
    ok = ok && out.size() == len && out.samples.isFinite().all();
  }

  const auto [degraded, rep] = apply_psi_fixed(wrap(oracle::speech_like(55, 32000)), 3);
  const AudioBuffer a = gen.forward(degraded);
  const AudioBuffer b = gen.forward(degraded);
  const AudioBuffer c = gen.forward(degraded);
  ok = ok && (a.samples == b.samples).all() && (b.samples == c.samples).all();
  ok = ok && a.samples.isFinite().all() && a.samples.abs().maxCoeff() <= 4.0;
  detail = "5 lengths preserved, 3 runs bit-identical, untrained output bounded (max |y| = " +
           std::to_string(a.samples.abs().maxCoeff()) + ")";
  return ok;
}

// 8. Real-time factor below 1 on one core plus internally consistent report.
bool criterion_frugality(std::string& detail) {
  const NetworkConfig cfg;
  const BenchReport r = bench_forward(cfg, 1.0, 10, 2, 7);
  bool ok = r.realtime_factor < 1.0;
  ok = ok && r.realtime_factor == r.latency_ms_median / (r.seconds * 1000.0);
  ok = ok && r.latency_ms_p95 >= r.latency_ms_median && r.latency_ms_median > 0.0;
  auto [gp, dp] = count_params(cfg);
  ok = ok && r.generator_params == gp && r.discriminator_params == dp;
  ok = ok && r.weights_bytes == (gp + dp) * 4;
  detail = "median " + std::to_string(r.latency_ms_median) + " ms for 1 s audio, rtf " +
           std::to_string(r.realtime_factor) + ", params " + std::to_string(gp) + "/" +
           std::to_string(dp);
  return ok;
}

// 9. SI-SDR properties.
bool criterion_si_sdr(std::string& detail) {
  const AudioBuffer ref = wrap(oracle::sine(313.0, 16000.0, 32000));
  Eigen::ArrayXd noise = oracle::white_noise(91, ref.size());
  noise -= ((noise * ref.samples).sum() / ref.samples.square().sum()) * ref.samples;
  noise *= std::sqrt(0.1 * ref.samples.square().sum() / noise.square().sum());
  const AudioBuffer est = wrap(ref.samples + noise);

  const double fixture = si_sdr_db(est, ref);
  bool ok = std::abs(fixture - 10.0) <= 0.1;

  AudioBuffer doubled = est;
  doubled.samples *= 2.0;
  ok = ok && si_sdr_db(doubled, ref) == fixture;
  AudioBuffer tripled = est;
  tripled.samples *= 3.0;
  ok = ok && std::abs(si_sdr_db(tripled, ref) - fixture) < 1e-9;
  detail = "orthogonal fixture " + std::to_string(fixture) + " dB, scaling invariant";
  return ok;
}

// 10. Full loop: measure a synthetic device, export bounds, degrade with
// them, enhance with seeded weights, compute metrics; everything exits 0 and
// reruns are byte-identical.
bool criterion_end_to_end(std::string& detail) {
  const fs::path root = fs::temp_directory_path() / "eben_acc_loop";
  fs::remove_all(root);
  fs::create_directories(root / "corpus");

  // A synthetic "device": lowpass plus additive hiss, measured from 20 s of
  // paired recordings.
  const Eigen::ArrayXd device_fir = oracle::lowpass_fir(384, 900.0, 16000.0);
  const AudioBuffer ref = wrap(oracle::white_noise(505, 320000));
  AudioBuffer captured = fir_apply(ref.samples, device_fir);
  captured.samples += 0.002 * oracle::white_noise(506, captured.size());
  write_wav(root / "device_ref.wav", ref, WavEncoding::kFloat32);
  write_wav(root / "device_meas.wav", captured, WavEncoding::kFloat32);

  for (int i = 0; i < 4; ++i)
    write_wav(root / "corpus" / ("u" + std::to_string(i) + ".wav"),
              wrap(oracle::speech_like(600 + i, 32000)), WavEncoding::kFloat32);

  bool ok = true;
  std::string out;

  ok = ok && run_cli("sysid estimate --ref " + (root / "device_ref.wav").string() +
                         " --meas " + (root / "device_meas.wav").string() + " --out " +
                         (root / "device.csv").string(),
                     root, &out) == 0;

  const std::string degrade_cmd =
      "degrade batch --pipeline random --seed 31337 --bounds " +
      (root / "device.csv").string() + " --in-dir " + (root / "corpus").string();
  ok = ok && run_cli(degrade_cmd + " --out-dir " + (root / "deg1").string(), root, &out) == 0;
  ok = ok && run_cli(degrade_cmd + " --out-dir " + (root / "deg2").string(), root, &out) == 0;
  for (int i = 0; i < 4; ++i) {
    const std::string name = "u" + std::to_string(i) + ".wav";
    ok = ok && file_bytes(root / "deg1" / name) == file_bytes(root / "deg2" / name);
  }

  ok = ok && run_cli("weights init --seed 99 --out " + (root / "w.ebw").string(), root,
                     &out) == 0;

  for (int pass = 0; pass < 2; ++pass)
    ok = ok && run_cli("enhance --in " + (root / "deg1" / "u0.wav").string() +
                           " --weights " + (root / "w.ebw").string() + " --out " +
                           (root / ("enh" + std::to_string(pass) + ".wav")).string(),
                       root, &out) == 0;
  ok = ok && file_bytes(root / "enh0.wav") == file_bytes(root / "enh1.wav");

  ok = ok && run_cli("metrics --est " + (root / "enh0.wav").string() + " --ref " +
                         (root / "corpus" / "u0.wav").string(),
                     root, &out) == 0;
  const json j = json::parse(out, nullptr, false);
  ok = ok && !j.is_discarded() && j.contains("si_sdr_db") && j.contains("ser_db");

  detail = "measure -> bounds -> degrade (deterministic) -> enhance (deterministic) -> metrics";
  return ok;
}

}  // namespace

int main() {
  setenv("EBEN_NO_COLOR", "1", 1);
  std::vector<Criterion> criteria{
      {1, "pqmf round trip >= 55 dB for M in {2,4,8,16}", criterion_roundtrip, 5.0},
      {2, "pqmf separation at taps_per_band=128", criterion_separation, 10.0},
      {3, "degradation calibration (-23 dB, 1200 Hz value)", criterion_degradation, 10.0},
      {4, "system identification against a known FIR", criterion_sysid, 10.0},
      {5, "loss identities, exact", criterion_losses, 0.0},
      {6, "config gate", criterion_config_gate, 0.0},
      {7, "forward-pass contracts", criterion_forward, 0.0},
      {8, "frugality: real-time factor < 1 on one core", criterion_frugality, 0.0},
      {9, "si-sdr scale invariance and orthogonal fixture", criterion_si_sdr, 0.0},
      {10, "end-to-end loop, deterministic artifacts", criterion_end_to_end, 60.0},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0.0 && elapsed > c.budget_seconds) {
      ok = false;
      detail += " [over budget " + std::to_string(c.budget_seconds) + " s]";
    }
    std::printf("%s criterion %2d: %s — %s (%.2f s)\n", ok ? "PASS" : "FAIL", c.id,
                c.name.c_str(), detail.c_str(), elapsed);
    if (!ok) ++failures;
  }
  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
