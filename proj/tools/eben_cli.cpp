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

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "eben/bench.hpp"
#include "eben/degrade.hpp"
#include "eben/dsp.hpp"
#include "eben/error.hpp"
#include "eben/losses.hpp"
#include "eben/neural.hpp"
#include "eben/pqmf.hpp"
#include "eben/rng.hpp"
#include "eben/sysid.hpp"

namespace {

using json = nlohmann::json;

bool color_enabled() {
  return std::getenv("EBEN_NO_COLOR") == nullptr;
}

void diag(const std::string& msg) {
  if (color_enabled())
    std::cerr << "\033[2m" << msg << "\033[0m\n";
  else
    std::cerr << msg << "\n";
}

void fail(const std::string& msg) {
  if (color_enabled())
    std::cerr << "\033[31merror:\033[0m " << msg << "\n";
  else
    std::cerr << "error: " << msg << "\n";
}

// JSON cannot carry infinities; the sentinel prints as a string.
json json_db(double v) {
  if (std::isinf(v)) return json(v > 0 ? "inf" : "-inf");
  return json(v);
}

eben::AudioBuffer read_input_16k(const std::string& path) {
  eben::AudioBuffer buf = eben::read_wav(path);
  if (buf.sample_rate_hz != 16000)
    throw eben::Error(eben::ErrorCode::kInvalidParams,
                      path + " is " + std::to_string(buf.sample_rate_hz) +
                          " Hz; inputs must already be 16 kHz");
  return buf;
}

eben::NetworkConfig config_from_flag(const std::string& path) {
  if (path.empty()) return eben::NetworkConfig{};  // reference configuration
  return eben::load_config_json(path);
}

json batch_report_json(const eben::BatchReport& report) {
  json files = json::array();
  for (const eben::BatchFileReport& f : report.files) {
    json row{{"path", f.path}, {"seed", f.seed}, {"rel_db", json_db(f.rel_db)},
             {"clip_count", f.clip_count}};
    if (!f.error.empty()) row["error"] = f.error;
    files.push_back(row);
  }
  return json{{"files", files}, {"pipeline", report.pipeline},
              {"master_seed", report.master_seed}};
}

json degradation_report_json(const eben::DegradationReport& r, const std::string& out) {
  return json{{"out", out},
              {"pipeline", r.pipeline},
              {"seed", r.seed},
              {"rel_db", json_db(r.measured_noise_rel_db)},
              {"clip_count", r.clip_count}};
}

int dispatch(int argc, char** argv) {
  CLI::App app{"multiband speech enhancement toolkit"};
  app.require_subcommand(1);

  std::string in_path, out_path, ref_path, meas_path, est_path;
  std::string config_path, weights_path, bounds_path, report_path;
  std::uint64_t seed = 0;
  int bands = 4, taps_per_band = eben::kDefaultTapsPerBand;
  double atten = eben::kDefaultAttenDb;

  // ---- pqmf ----
  CLI::App* pqmf = app.add_subcommand("pqmf", "filter bank design and round trip");
  pqmf->require_subcommand(1);
  CLI::App* pqmf_design = pqmf->add_subcommand("design", "design a prototype and report it");
  pqmf_design->add_option("--bands", bands)->check(CLI::Range(2, 64));
  pqmf_design->add_option("--taps-per-band", taps_per_band)->check(CLI::Range(4, 4096));
  pqmf_design->add_option("--atten", atten);
  pqmf_design->add_option("--out", out_path, "write the design report here");
  pqmf_design->callback([&] {
    const eben::PrototypeFilter proto = eben::design_prototype(bands, taps_per_band, atten);
    const eben::PqmfBank bank = eben::modulate_bank(proto);
    if (out_path.empty()) {
      eben::write_design_report(std::cout, proto, bank);
    } else {
      std::ofstream os(out_path, std::ios::trunc);
      if (!os) throw eben::Error(eben::ErrorCode::kIoFailure, "cannot write " + out_path);
      eben::write_design_report(os, proto, bank);
      diag("design report written to " + out_path);
    }
  });

  CLI::App* pqmf_rt = pqmf->add_subcommand("roundtrip", "analysis+synthesis error on a file");
  pqmf_rt->add_option("--bands", bands)->check(CLI::Range(2, 64));
  pqmf_rt->add_option("--taps-per-band", taps_per_band)->check(CLI::Range(4, 4096));
  pqmf_rt->add_option("--atten", atten);
  pqmf_rt->add_option("--in", in_path)->required();
  pqmf_rt->callback([&] {
    const eben::AudioBuffer x = read_input_16k(in_path);
    const eben::PqmfBank bank =
        eben::modulate_bank(eben::design_prototype(bands, taps_per_band, atten));
    const eben::AudioBuffer y = eben::synthesize(bank, eben::analyze(bank, x));
    const double ser = eben::ser_db(y, x, bank.delay());
    std::cout << json{{"ser_db", json_db(ser)},
                      {"bands", bands},
                      {"taps_per_band", taps_per_band},
                      {"delay_samples", bank.delay()}}
                     .dump()
              << "\n";
  });

  // ---- degrade ----
  CLI::App* degrade = app.add_subcommand("degrade", "synthetic capture degradation");
  degrade->require_subcommand(1);
  CLI::App* deg_fixed = degrade->add_subcommand("fixed", "fixed lowpass pipeline");
  deg_fixed->add_option("--in", in_path)->required();
  deg_fixed->add_option("--out", out_path)->required();
  deg_fixed->add_option("--seed", seed)->required();
  deg_fixed->callback([&] {
    const eben::AudioBuffer x = read_input_16k(in_path);
    auto [y, report] = eben::apply_psi_fixed(x, seed);
    eben::write_wav(out_path, y, eben::WavEncoding::kFloat32);
    std::cout << degradation_report_json(report, out_path).dump() << "\n";
  });

  CLI::App* deg_random = degrade->add_subcommand("random", "randomized response pipeline");
  deg_random->add_option("--in", in_path)->required();
  deg_random->add_option("--out", out_path)->required();
  deg_random->add_option("--seed", seed)->required();
  deg_random->add_option("--bounds", bounds_path, "bounds CSV (default: built-in envelope)");
  deg_random->callback([&] {
    const eben::AudioBuffer x = read_input_16k(in_path);
    eben::RandomResponseSpec spec = bounds_path.empty()
                                        ? eben::default_response_spec(16000.0)
                                        : eben::load_bounds_csv(bounds_path);
    spec.seed = seed;
    auto [y, report] = eben::apply_psi_random(x, spec);
    eben::write_wav(out_path, y, eben::WavEncoding::kFloat32);
    std::cout << degradation_report_json(report, out_path).dump() << "\n";
  });

  CLI::App* deg_batch = degrade->add_subcommand("batch", "degrade a directory of WAVs");
  std::string pipeline = "fixed";
  deg_batch->add_option("--in-dir", in_path)->required();
  deg_batch->add_option("--out-dir", out_path)->required();
  deg_batch->add_option("--pipeline", pipeline)->check(CLI::IsMember({"fixed", "random"}));
  deg_batch->add_option("--seed", seed)->required();
  deg_batch->add_option("--bounds", bounds_path);
  deg_batch->add_option("--report", report_path, "also write the JSON report to a file");
  deg_batch->callback([&] {
    eben::RandomResponseSpec spec = bounds_path.empty()
                                        ? eben::default_response_spec(16000.0)
                                        : eben::load_bounds_csv(bounds_path);
    const eben::BatchReport report = eben::batch_degrade(
        in_path, out_path,
        pipeline == "fixed" ? eben::DegradePipeline::kFixed : eben::DegradePipeline::kRandom,
        seed, &spec);
    const json j = batch_report_json(report);
    if (!report_path.empty()) {
      std::ofstream os(report_path, std::ios::trunc);
      os << j.dump(2) << "\n";
    }
    std::cout << j.dump() << "\n";
  });

  // ---- sysid ----
  CLI::App* sysid = app.add_subcommand("sysid", "transfer function and coherence estimation");
  sysid->require_subcommand(1);
  double vad_threshold = 30.0;
  CLI::App* sysid_est = sysid->add_subcommand("estimate", "robust transfer estimate");
  sysid_est->add_option("--ref", ref_path, "reference (emitted) signal")->required();
  sysid_est->add_option("--meas", meas_path, "captured (degraded) signal")->required();
  sysid_est->add_option("--vad-threshold", vad_threshold, "dB below peak frame RMS");
  sysid_est->add_option("--out", out_path, "CSV path (stdout if omitted)");
  sysid_est->callback([&] {
    eben::AudioBuffer y = eben::peak_normalize(read_input_16k(ref_path), 1.0);
    eben::AudioBuffer x = eben::peak_normalize(read_input_16k(meas_path), 1.0);
    const eben::WelchConfig cfg;
    const eben::VadMask vad = eben::vad_mask(y, vad_threshold, cfg.fft_size);
    const eben::TransferFunctionEstimate tf = eben::estimate_transfer(y, x, cfg, vad);
    const eben::CoherenceCurve coh = eben::coherence(y, x, cfg);
    diag("active horizons: " + std::to_string(tf.n_segments));
    if (out_path.empty()) {
      eben::write_sysid_csv(std::cout, tf, &coh);
    } else {
      std::ofstream os(out_path, std::ios::trunc);
      if (!os) throw eben::Error(eben::ErrorCode::kIoFailure, "cannot write " + out_path);
      eben::write_sysid_csv(os, tf, &coh);
      std::cout << json{{"out", out_path}, {"n_segments", tf.n_segments}}.dump() << "\n";
    }
  });

  CLI::App* sysid_coh = sysid->add_subcommand("coherence", "coherence curve only");
  sysid_coh->add_option("--ref", ref_path)->required();
  sysid_coh->add_option("--meas", meas_path)->required();
  sysid_coh->add_option("--out", out_path, "CSV path (stdout if omitted)");
  sysid_coh->callback([&] {
    const eben::AudioBuffer y = read_input_16k(ref_path);
    const eben::AudioBuffer x = read_input_16k(meas_path);
    const eben::CoherenceCurve coh = eben::coherence(y, x, eben::WelchConfig{});
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
      file.open(out_path, std::ios::trunc);
      if (!file) throw eben::Error(eben::ErrorCode::kIoFailure, "cannot write " + out_path);
      os = &file;
    }
    *os << "freq_hz,coherence\n";
    for (Eigen::Index b = 0; b < coh.freq_grid_hz.size(); ++b)
      *os << coh.freq_grid_hz[b] << ',' << coh.coherence[b] << '\n';
  });

  // ---- weights ----
  CLI::App* weights = app.add_subcommand("weights", "weight store tools");
  weights->require_subcommand(1);
  CLI::App* weights_init = weights->add_subcommand("init", "seeded initialization");
  weights_init->add_option("--config", config_path, "network config JSON");
  weights_init->add_option("--seed", seed)->required();
  weights_init->add_option("--out", out_path)->required();
  weights_init->callback([&] {
    const eben::NetworkConfig cfg = config_from_flag(config_path);
    for (const std::string& w : eben::validate_config(cfg)) diag("warning: " + w);
    const eben::WeightStore store = eben::init_weights(cfg, seed);
    eben::save_weights(store, out_path);
    auto [gen, disc] = eben::count_params(cfg);
    std::cout << json{{"out", out_path},
                      {"seed", seed},
                      {"generator_params", gen},
                      {"discriminator_params", disc},
                      {"tensors", store.tensors().size()}}
                     .dump()
              << "\n";
  });

  CLI::App* weights_inspect = weights->add_subcommand("inspect", "dump the header");
  weights_inspect->add_option("--weights", weights_path)->required();
  weights_inspect->callback([&] {
    const eben::WeightStore store = eben::load_weights(weights_path);
    json tensors = json::array();
    for (const eben::NamedTensor& t : store.tensors())
      tensors.push_back({{"name", t.name}, {"shape", t.shape}});
    std::cout << json{{"tensors", tensors},
                      {"total_params", store.total_params()},
                      {"payload_bytes", store.total_params() * 4}}
                     .dump()
              << "\n";
  });

  // ---- enhance / disc-forward ----
  CLI::App* enhance = app.add_subcommand("enhance", "generator forward pass on a file");
  enhance->add_option("--in", in_path)->required();
  enhance->add_option("--config", config_path);
  enhance->add_option("--weights", weights_path)->required();
  enhance->add_option("--out", out_path)->required();
  std::string out_encoding = "float32";
  enhance->add_option("--encoding", out_encoding)->check(CLI::IsMember({"pcm16", "float32"}));
  enhance->callback([&] {
    const eben::NetworkConfig cfg = config_from_flag(config_path);
    const eben::AudioBuffer x = read_input_16k(in_path);
    const eben::Generator gen(cfg, eben::load_weights(weights_path));
    const eben::AudioBuffer y = gen.forward(x);
    const eben::WavWriteStats stats = eben::write_wav(
        out_path, y,
        out_encoding == "pcm16" ? eben::WavEncoding::kPcm16 : eben::WavEncoding::kFloat32);
    std::cout << json{{"out", out_path},
                      {"samples", static_cast<long>(y.size())},
                      {"clipped", stats.clipped}}
                     .dump()
              << "\n";
  });

  CLI::App* disc_fwd = app.add_subcommand("disc-forward", "discriminator ensemble forward");
  disc_fwd->add_option("--in", in_path)->required();
  disc_fwd->add_option("--config", config_path);
  disc_fwd->add_option("--weights", weights_path)->required();
  disc_fwd->callback([&] {
    const eben::NetworkConfig cfg = config_from_flag(config_path);
    const eben::AudioBuffer x = read_input_16k(in_path);
    const eben::Discriminator disc(cfg, eben::load_weights(weights_path));
    const std::vector<eben::ScoreAndFeatures> scores = disc.forward(x);
    json scales = json::array();
    for (const eben::ScoreAndFeatures& s : scores) {
      json feats = json::array();
      for (const Eigen::MatrixXf& f : s.features)
        feats.push_back({{"time", f.rows()}, {"channels", f.cols()}});
      scales.push_back({{"logit_len", s.logits.size()},
                        {"logit_mean", s.logits.mean()},
                        {"features", feats}});
    }
    std::cout << json{{"scales", scales}}.dump() << "\n";
  });

  // ---- loss ----
  CLI::App* loss = app.add_subcommand("loss", "loss functions over discriminator outputs");
  loss->require_subcommand(1);
  CLI::App* loss_eval = loss->add_subcommand("eval", "evaluate on a real/fake pair");
  std::string fake_path;
  loss_eval->add_option("--real", ref_path)->required();
  loss_eval->add_option("--fake", fake_path)->required();
  loss_eval->add_option("--config", config_path);
  loss_eval->add_option("--weights", weights_path)->required();
  loss_eval->callback([&] {
    const eben::NetworkConfig cfg = config_from_flag(config_path);
    const eben::Discriminator disc(cfg, eben::load_weights(weights_path));
    const auto real = disc.forward(read_input_16k(ref_path));
    const auto fake = disc.forward(read_input_16k(fake_path));
    const eben::LossBreakdown l = eben::gan_losses(real, fake);
    std::cout << json{{"l_d", l.l_d},
                      {"l_g_adv", l.l_g_adv},
                      {"l_g_rec", l.l_g_rec},
                      {"l_g_total", l.l_g_total}}
                     .dump()
              << "\n";
  });

  // ---- metrics ----
  CLI::App* metrics = app.add_subcommand("metrics", "objective signal metrics");
  long delay = 0;
  metrics->add_option("--est", est_path)->required();
  metrics->add_option("--ref", ref_path)->required();
  metrics->add_option("--delay", delay, "advance the estimate by this many samples");
  metrics->callback([&] {
    const eben::AudioBuffer est = read_input_16k(est_path);
    const eben::AudioBuffer ref = read_input_16k(ref_path);
    std::cout << json{{"si_sdr_db", json_db(eben::si_sdr_db(est, ref))},
                      {"ser_db", json_db(eben::ser_db(est, ref, delay))},
                      {"length", static_cast<long>(ref.size())},
                      {"delay", delay}}
                     .dump()
              << "\n";
  });

  // ---- bench ----
  CLI::App* bench = app.add_subcommand("bench", "generator latency and size accounting");
  double seconds = 1.0;
  int reps = 50, warmup = 3;
  bench->add_option("--config", config_path);
  bench->add_option("--seconds", seconds);
  bench->add_option("--reps", reps);
  bench->add_option("--warmup", warmup);
  bench->add_option("--seed", seed)->required();
  bench->callback([&] {
    const eben::NetworkConfig cfg = config_from_flag(config_path);
    const eben::BenchReport r = eben::bench_forward(cfg, seconds, reps, warmup, seed);
    std::cout << json{{"latency_ms", {{"mean", r.latency_ms_mean},
                                      {"median", r.latency_ms_median},
                                      {"p95", r.latency_ms_p95}}},
                      {"realtime_factor", r.realtime_factor},
                      {"generator_params", r.generator_params},
                      {"discriminator_params", r.discriminator_params},
                      {"weights_bytes", r.weights_bytes},
                      {"repetitions", r.repetitions},
                      {"warmup_reps", r.warmup_reps},
                      {"seconds", r.seconds}}
                     .dump()
              << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;  // --help
    std::stringstream ss;
    ss << e.what();
    fail(ss.str());
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const eben::Error& e) {
    fail(e.what());
    return 2;
  } catch (const std::exception& e) {
    fail(e.what());
    return 2;
  }
}
