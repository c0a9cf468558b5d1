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
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "eben/audio.hpp"
#include "eben/pqmf.hpp"

namespace eben {

// Declarative (M, P, Q) topology. M: multiband split width, P: informative
// low bands fed to the generator, Q: upper bands refined by the band
// discriminators. Q is constrained by the grouped-convolution divisibility
// of the band discriminator width (30 admits {1,2,3,5,6,10,15}).
struct NetworkConfig {
  int m_bands = 4;
  int p_bands = 1;
  int q_bands = 3;
  std::vector<int> encoder_strides{2, 4, 4};
  std::vector<int> encoder_channels{64, 128, 256};
  std::vector<int> residual_dilations{1, 3, 9};
  std::vector<int> decoder_kernels;  // empty -> 2 * stride at every level
  int stem_channels = 32;
  int disc_base_channels = 30;
  int disc_scales = 4;  // k in {0 .. 3}: waveform scale plus three band scales
  double leaky_slope_gen = 0.01;
  double leaky_slope_disc = 0.2;
  int taps_per_band = 8;
  double pqmf_atten_db = kDefaultAttenDb;

  int decoder_kernel(int level) const {
    return decoder_kernels.empty() ? 2 * encoder_strides[level] : decoder_kernels[level];
  }
  int stride_product() const;
};

NetworkConfig load_config_json(const std::filesystem::path& path);
void save_config_json(const std::filesystem::path& path, const NetworkConfig& cfg);

// Enforces every structural invariant (named error per violation). When a
// degradation cutoff is declared, returns a warning if P/M sits below the
// reduced cutoff 2*Fc/Fs, i.e. the selected bands would lose signal content.
std::vector<std::string> validate_config(const NetworkConfig& cfg,
                                         double declared_cutoff_hz = 0.0,
                                         double sample_rate_hz = 16000.0);

// One weight-normalized convolution: direction tensor v [out, in/groups, k],
// per-output magnitude g, and bias. Effective weight is g * v / |v|.
struct ConvSpec {
  std::string name;
  int in_ch = 0, out_ch = 0, kernel = 1, stride = 1, dilation = 1, groups = 1;
  bool transposed = false;

  long v_count() const { return static_cast<long>(out_ch) * (in_ch / groups) * kernel; }
  long param_count() const { return v_count() + 2L * out_ch; }
};

std::vector<ConvSpec> generator_graph(const NetworkConfig& cfg);
std::vector<ConvSpec> discriminator_graph(const NetworkConfig& cfg);

struct NamedTensor {
  std::string name;
  std::vector<int> shape;
  Eigen::ArrayXf data;  // row-major flattening of the shape
};

class WeightStore {
 public:
  void add(NamedTensor tensor);
  bool has(const std::string& name) const;
  const NamedTensor& at(const std::string& name) const;
  const std::vector<NamedTensor>& tensors() const { return tensors_; }
  long total_params() const;

 private:
  std::vector<NamedTensor> tensors_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Uniform(-k, k) with k = fan_in^{-1/2} for v and bias, g set to |v| per
// output unit so the effective initial weight equals v. One SplitMix64
// stream in graph order makes the store a pure function of (cfg, seed).
WeightStore init_weights(const NetworkConfig& cfg, std::uint64_t seed);

std::pair<long, long> count_params(const NetworkConfig& cfg);

// "EBENW001" magic, 4-byte little-endian JSON header length, a header array
// of {name, shape, offset} with byte offsets into the raw little-endian
// float32 payload that follows.
void save_weights(const WeightStore& store, const std::filesystem::path& path);
WeightStore load_weights(const std::filesystem::path& path);

// Per discriminator scale: the logit sequence plus every intermediate
// activation map (final logit layer excluded from the features). Logits are
// widened to double at the boundary so loss arithmetic runs at full
// precision.
struct ScoreAndFeatures {
  Eigen::ArrayXd logits;
  std::vector<Eigen::MatrixXf> features;  // time x channels maps
};

// Compiled forward-pass executors: immutable after construction, pure and
// bit-deterministic (fixed single-threaded accumulation order).
class Generator {
 public:
  Generator(const NetworkConfig& cfg, const WeightStore& weights);
  Generator(Generator&&) noexcept;
  ~Generator();
  AudioBuffer forward(const AudioBuffer& buf) const;
  const PqmfBank& bank() const { return bank_; }

 private:
  struct Layer;
  NetworkConfig cfg_;
  PqmfBank bank_;
  std::vector<Layer> layers_;
};

class Discriminator {
 public:
  Discriminator(const NetworkConfig& cfg, const WeightStore& weights);
  Discriminator(Discriminator&&) noexcept;
  ~Discriminator();
  std::vector<ScoreAndFeatures> forward(const AudioBuffer& buf) const;

 private:
  struct Layer;
  NetworkConfig cfg_;
  PqmfBank bank_;
  std::vector<std::vector<Layer>> scales_;
};

AudioBuffer generator_forward(const NetworkConfig& cfg, const WeightStore& weights,
                              const AudioBuffer& buf);
std::vector<ScoreAndFeatures> discriminator_forward(const NetworkConfig& cfg,
                                                    const WeightStore& weights,
                                                    const AudioBuffer& buf);

}  // namespace eben
