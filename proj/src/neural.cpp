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

#include "eben/neural.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstring>
#include <fstream>

#include "eben/error.hpp"
#include "eben/rng.hpp"

namespace eben {
namespace {

using json = nlohmann::json;

constexpr char kWeightsMagic[8] = {'E', 'B', 'E', 'N', 'W', '0', '0', '1'};
constexpr Eigen::Index kMaxForwardSamples = 1LL << 31;

// Waveform discriminator stack: fixed widths, stride-4 grouped downsampling.
constexpr int kWaveChannels[4] = {16, 64, 256, 1024};

void leaky_relu_inplace(Eigen::MatrixXf& x, float slope) {
  float* p = x.data();
  const Eigen::Index n = x.size();
  for (Eigen::Index i = 0; i < n; ++i)
    if (p[i] < 0.0f) p[i] *= slope;
}

}  // namespace

int NetworkConfig::stride_product() const {
  int s = 1;
  for (int v : encoder_strides) s *= v;
  return s;
}

std::vector<std::string> validate_config(const NetworkConfig& cfg,
                                         double declared_cutoff_hz,
                                         double sample_rate_hz) {
  if (cfg.m_bands < 2) throw Error(ErrorCode::kInvalidParams, "m_bands must be >= 2");
  if (cfg.taps_per_band < 4)
    throw Error(ErrorCode::kInvalidParams, "taps_per_band must be >= 4");
  if (cfg.p_bands < 1 || cfg.p_bands > cfg.m_bands)
    throw Error(ErrorCode::kBandCountOrder, "need 1 <= P <= M");
  if (cfg.q_bands < 1 || cfg.q_bands > cfg.m_bands)
    throw Error(ErrorCode::kBandCountOrder, "need 1 <= Q <= M");
  if (cfg.disc_base_channels < 2)
    throw Error(ErrorCode::kInvalidParams, "disc_base_channels too small");
  // Grouped convolutions need the band-stack width divisible by Q.
  if (cfg.disc_base_channels % cfg.q_bands != 0 || cfg.q_bands >= cfg.disc_base_channels)
    throw Error(ErrorCode::kInvalidQ,
                "Q=" + std::to_string(cfg.q_bands) + " does not divide width " +
                    std::to_string(cfg.disc_base_channels));
  if (cfg.disc_scales != 4)
    throw Error(ErrorCode::kInvalidParams, "discriminator ensemble is fixed at 4 scales");
  if (cfg.encoder_strides.empty() ||
      cfg.encoder_strides.size() != cfg.encoder_channels.size())
    throw Error(ErrorCode::kInvalidParams, "encoder strides/channels must pair up");
  if (!cfg.decoder_kernels.empty() &&
      cfg.decoder_kernels.size() != cfg.encoder_strides.size())
    throw Error(ErrorCode::kInvalidParams, "decoder kernels must match encoder depth");
  for (std::size_t i = 0; i < cfg.encoder_strides.size(); ++i) {
    if (cfg.encoder_strides[i] < 1 || cfg.encoder_channels[i] < 1)
      throw Error(ErrorCode::kInvalidParams, "bad encoder stride or width");
    const int k = cfg.decoder_kernel(static_cast<int>(i));
    const int s = cfg.encoder_strides[i];
    // Transposed-convolution kernels must tile the stride exactly, otherwise
    // the upsampled grid gets unevenly covered.
    if (k < s || k % s != 0)
      throw Error(ErrorCode::kKernelStrideMismatch,
                  "decoder kernel " + std::to_string(k) + " vs stride " + std::to_string(s));
  }
  if (cfg.residual_dilations.empty())
    throw Error(ErrorCode::kInvalidParams, "need at least one residual dilation");
  for (int d : cfg.residual_dilations)
    if (d < 1) throw Error(ErrorCode::kInvalidParams, "dilations must be >= 1");
  if (cfg.stem_channels < 1 || cfg.stem_channels < cfg.p_bands)
    throw Error(ErrorCode::kInvalidParams, "stem width must cover the selected bands");
  if (cfg.leaky_slope_gen <= 0 || cfg.leaky_slope_gen >= 1 || cfg.leaky_slope_disc <= 0 ||
      cfg.leaky_slope_disc >= 1)
    throw Error(ErrorCode::kInvalidParams, "leaky slopes must be in (0, 1)");

  std::vector<std::string> warnings;
  if (declared_cutoff_hz > 0.0 && sample_rate_hz > 0.0) {
    const double needed = 2.0 * declared_cutoff_hz / sample_rate_hz;
    const double have = static_cast<double>(cfg.p_bands) / cfg.m_bands;
    if (have < needed)
      warnings.push_back("P/M = " + std::to_string(have) +
                         " sits below the reduced cutoff 2*Fc/Fs = " +
                         std::to_string(needed) + "; selected bands lose signal content");
  }
  return warnings;
}

NetworkConfig load_config_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidParams, "config parse: " + std::string(e.what()));
  }
  NetworkConfig cfg;
  cfg.m_bands = j.value("m_bands", cfg.m_bands);
  cfg.p_bands = j.value("p_bands", cfg.p_bands);
  cfg.q_bands = j.value("q_bands", cfg.q_bands);
  cfg.encoder_strides = j.value("encoder_strides", cfg.encoder_strides);
  cfg.encoder_channels = j.value("encoder_channels", cfg.encoder_channels);
  cfg.residual_dilations = j.value("residual_dilations", cfg.residual_dilations);
  cfg.decoder_kernels = j.value("decoder_kernels", cfg.decoder_kernels);
  cfg.stem_channels = j.value("stem_channels", cfg.stem_channels);
  cfg.disc_base_channels = j.value("disc_base_channels", cfg.disc_base_channels);
  cfg.disc_scales = j.value("disc_scales", cfg.disc_scales);
  cfg.leaky_slope_gen = j.value("leaky_slope_gen", cfg.leaky_slope_gen);
  cfg.leaky_slope_disc = j.value("leaky_slope_disc", cfg.leaky_slope_disc);
  cfg.taps_per_band = j.value("taps_per_band", cfg.taps_per_band);
  cfg.pqmf_atten_db = j.value("pqmf_atten_db", cfg.pqmf_atten_db);
  return cfg;
}

void save_config_json(const std::filesystem::path& path, const NetworkConfig& cfg) {
  json j{{"m_bands", cfg.m_bands},
         {"p_bands", cfg.p_bands},
         {"q_bands", cfg.q_bands},
         {"encoder_strides", cfg.encoder_strides},
         {"encoder_channels", cfg.encoder_channels},
         {"residual_dilations", cfg.residual_dilations},
         {"stem_channels", cfg.stem_channels},
         {"disc_base_channels", cfg.disc_base_channels},
         {"disc_scales", cfg.disc_scales},
         {"leaky_slope_gen", cfg.leaky_slope_gen},
         {"leaky_slope_disc", cfg.leaky_slope_disc},
         {"taps_per_band", cfg.taps_per_band},
         {"pqmf_atten_db", cfg.pqmf_atten_db}};
  if (!cfg.decoder_kernels.empty()) j["decoder_kernels"] = cfg.decoder_kernels;
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
  os << j.dump(2) << "\n";
}

std::vector<ConvSpec> generator_graph(const NetworkConfig& cfg) {
  validate_config(cfg);
  std::vector<ConvSpec> graph;
  const int depth = static_cast<int>(cfg.encoder_strides.size());
  const int n_res = static_cast<int>(cfg.residual_dilations.size());

  graph.push_back({"gen.stem", cfg.p_bands, cfg.stem_channels, 3});

  int ch = cfg.stem_channels;
  for (int b = 0; b < depth; ++b) {
    for (int r = 0; r < n_res; ++r) {
      const std::string base = "gen.enc" + std::to_string(b) + ".res" + std::to_string(r);
      graph.push_back({base + ".conv1", ch, ch, 3, 1, cfg.residual_dilations[r]});
      graph.push_back({base + ".conv2", ch, ch, 1});
    }
    const int s = cfg.encoder_strides[b];
    graph.push_back(
        {"gen.enc" + std::to_string(b) + ".down", ch, cfg.encoder_channels[b], 2 * s, s});
    ch = cfg.encoder_channels[b];
  }

  for (int b = depth - 1; b >= 0; --b) {
    const int s = cfg.encoder_strides[b];
    const int ch_out = b == 0 ? cfg.stem_channels : cfg.encoder_channels[b - 1];
    ConvSpec up{"gen.dec" + std::to_string(b) + ".up",
                cfg.encoder_channels[b],
                ch_out,
                cfg.decoder_kernel(b),
                s};
    up.transposed = true;
    graph.push_back(up);
    for (int r = 0; r < n_res; ++r) {
      const std::string base = "gen.dec" + std::to_string(b) + ".res" + std::to_string(r);
      graph.push_back({base + ".conv1", ch_out, ch_out, 3, 1, cfg.residual_dilations[r]});
      graph.push_back({base + ".conv2", ch_out, ch_out, 1});
    }
  }

  graph.push_back({"gen.head", cfg.stem_channels, cfg.m_bands, 3});
  return graph;
}

std::vector<ConvSpec> discriminator_graph(const NetworkConfig& cfg) {
  validate_config(cfg);
  std::vector<ConvSpec> graph;

  graph.push_back({"disc0.layer0", 1, kWaveChannels[0], 15});
  for (int l = 1; l < 4; ++l)
    graph.push_back({"disc0.layer" + std::to_string(l), kWaveChannels[l - 1],
                     kWaveChannels[l], 16, 4, 1, 4});
  graph.push_back({"disc0.layer4", kWaveChannels[3], kWaveChannels[3], 5});
  graph.push_back({"disc0.logit", kWaveChannels[3], 1, 3});

  const int w = cfg.disc_base_channels;
  for (int k = 1; k < cfg.disc_scales; ++k) {
    const std::string p = "disc" + std::to_string(k) + ".";
    graph.push_back({p + "layer0", cfg.q_bands, w, 8, 2, 1, cfg.q_bands});
    graph.push_back({p + "layer1", w, 2 * w, 8, 2, 1, 2});
    graph.push_back({p + "layer2", 2 * w, 4 * w, 8, 2, 1, 2});
    graph.push_back({p + "layer3", 4 * w, 8 * w, 8, 2, 1, 2});
    graph.push_back({p + "logit", 8 * w, 1, 3});
  }
  return graph;
}

void WeightStore::add(NamedTensor tensor) {
  index_[tensor.name] = tensors_.size();
  tensors_.push_back(std::move(tensor));
}

bool WeightStore::has(const std::string& name) const { return index_.count(name) != 0; }

const NamedTensor& WeightStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    throw Error(ErrorCode::kWeightShapeMismatch, "missing tensor " + name);
  return tensors_[it->second];
}

long WeightStore::total_params() const {
  long n = 0;
  for (const NamedTensor& t : tensors_) n += static_cast<long>(t.data.size());
  return n;
}

WeightStore init_weights(const NetworkConfig& cfg, std::uint64_t seed) {
  SplitMix64 rng(seed);
  WeightStore store;

  auto add_layer = [&](const ConvSpec& spec) {
    const int in_g = spec.in_ch / spec.groups;
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_g) * spec.kernel);

    NamedTensor v{spec.name + ".v", {spec.out_ch, in_g, spec.kernel},
                  Eigen::ArrayXf(spec.v_count())};
    for (Eigen::Index i = 0; i < v.data.size(); ++i)
      v.data[i] = static_cast<float>(rng.next_uniform(-bound, bound));

    NamedTensor b{spec.name + ".b", {spec.out_ch}, Eigen::ArrayXf(spec.out_ch)};
    for (int o = 0; o < spec.out_ch; ++o)
      b.data[o] = static_cast<float>(rng.next_uniform(-bound, bound));

    NamedTensor g{spec.name + ".g", {spec.out_ch}, Eigen::ArrayXf(spec.out_ch)};
    const Eigen::Index per_out = static_cast<Eigen::Index>(in_g) * spec.kernel;
    for (int o = 0; o < spec.out_ch; ++o) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < per_out; ++i) {
        const double val = v.data[o * per_out + i];
        acc += val * val;
      }
      g.data[o] = static_cast<float>(std::sqrt(acc));
    }

    store.add(std::move(v));
    store.add(std::move(g));
    store.add(std::move(b));
  };

  for (const ConvSpec& spec : generator_graph(cfg)) add_layer(spec);
  for (const ConvSpec& spec : discriminator_graph(cfg)) add_layer(spec);
  return store;
}

std::pair<long, long> count_params(const NetworkConfig& cfg) {
  long gen = 0, disc = 0;
  for (const ConvSpec& s : generator_graph(cfg)) gen += s.param_count();
  for (const ConvSpec& s : discriminator_graph(cfg)) disc += s.param_count();
  return {gen, disc};
}

void save_weights(const WeightStore& store, const std::filesystem::path& path) {
  json header = json::array();
  std::uint64_t offset = 0;
  for (const NamedTensor& t : store.tensors()) {
    header.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}});
    offset += static_cast<std::uint64_t>(t.data.size()) * 4;
  }
  const std::string header_str = header.dump();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
  os.write(kWeightsMagic, 8);
  const std::uint32_t len = static_cast<std::uint32_t>(header_str.size());
  char len_le[4] = {static_cast<char>(len & 0xFF), static_cast<char>((len >> 8) & 0xFF),
                    static_cast<char>((len >> 16) & 0xFF),
                    static_cast<char>((len >> 24) & 0xFF)};
  os.write(len_le, 4);
  os.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
  for (const NamedTensor& t : store.tensors())
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size()) * 4);
  if (!os) throw Error(ErrorCode::kIoFailure, "short write to " + path.string());
}

WeightStore load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kWeightsMagic, 8) != 0)
    throw Error(ErrorCode::kBadMagic, "not a weights file: " + path.string());

  const unsigned char* lb = reinterpret_cast<const unsigned char*>(bytes.data() + 8);
  const std::uint32_t header_len = static_cast<std::uint32_t>(lb[0]) |
                                   (static_cast<std::uint32_t>(lb[1]) << 8) |
                                   (static_cast<std::uint32_t>(lb[2]) << 16) |
                                   (static_cast<std::uint32_t>(lb[3]) << 24);
  if (bytes.size() < 12 + static_cast<std::size_t>(header_len))
    throw Error(ErrorCode::kTruncatedPayload, "header extends past end of file");

  json header;
  try {
    header = json::parse(bytes.begin() + 12, bytes.begin() + 12 + header_len);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadMagic, "header parse: " + std::string(e.what()));
  }

  const std::size_t payload_size = bytes.size() - 12 - header_len;
  const char* payload = bytes.data() + 12 + header_len;

  WeightStore store;
  std::uint64_t expected_offset = 0;
  for (const json& entry : header) {
    NamedTensor t;
    t.name = entry.at("name").get<std::string>();
    t.shape = entry.at("shape").get<std::vector<int>>();
    const std::uint64_t offset = entry.at("offset").get<std::uint64_t>();
    if (offset != expected_offset)
      throw Error(ErrorCode::kShapeMismatchOnLoad,
                  "tensor " + t.name + " offset disagrees with accumulated shapes");
    std::uint64_t numel = 1;
    for (int d : t.shape) {
      if (d <= 0)
        throw Error(ErrorCode::kShapeMismatchOnLoad, "tensor " + t.name + " has bad shape");
      numel *= static_cast<std::uint64_t>(d);
    }
    if (offset + numel * 4 > payload_size)
      throw Error(ErrorCode::kTruncatedPayload,
                  "payload ends inside tensor " + t.name);
    t.data.resize(static_cast<Eigen::Index>(numel));
    std::memcpy(t.data.data(), payload + offset, numel * 4);
    for (Eigen::Index i = 0; i < t.data.size(); ++i)
      if (!std::isfinite(t.data[i]))
        throw Error(ErrorCode::kShapeMismatchOnLoad,
                    "non-finite value in tensor " + t.name);
    expected_offset = offset + numel * 4;
    store.add(std::move(t));
  }
  return store;
}

// ---------------------------------------------------------------------------
// Forward execution. Feature maps are (time x channels), column major, so one
// channel is contiguous. All loops run in a fixed order, single threaded.

namespace {

struct CompiledConv {
  ConvSpec spec;
  Eigen::MatrixXf weights;  // (in_per_group * kernel) x out_ch, column o = w[o]
  Eigen::VectorXf bias;
};

CompiledConv compile_conv(const ConvSpec& spec, const WeightStore& store) {
  const NamedTensor& v = store.at(spec.name + ".v");
  const NamedTensor& g = store.at(spec.name + ".g");
  const NamedTensor& b = store.at(spec.name + ".b");
  const int in_g = spec.in_ch / spec.groups;
  const std::vector<int> want_v{spec.out_ch, in_g, spec.kernel};
  if (v.shape != want_v || g.shape != std::vector<int>{spec.out_ch} ||
      b.shape != std::vector<int>{spec.out_ch})
    throw Error(ErrorCode::kWeightShapeMismatch, "layer " + spec.name);

  CompiledConv out;
  out.spec = spec;
  const Eigen::Index per_out = static_cast<Eigen::Index>(in_g) * spec.kernel;
  out.weights.resize(per_out, spec.out_ch);
  for (int o = 0; o < spec.out_ch; ++o) {
    double norm_sq = 0.0;
    for (Eigen::Index i = 0; i < per_out; ++i) {
      const double val = v.data[o * per_out + i];
      norm_sq += val * val;
    }
    const double norm = std::sqrt(norm_sq);
    const double scale = norm > 0.0 ? static_cast<double>(g.data[o]) / norm : 0.0;
    for (Eigen::Index i = 0; i < per_out; ++i)
      out.weights(i, o) = static_cast<float>(scale * v.data[o * per_out + i]);
  }
  out.bias = b.data.matrix();
  return out;
}

using StridedVec = Eigen::Map<const Eigen::VectorXf, 0, Eigen::InnerStride<>>;
using StridedVecMut = Eigen::Map<Eigen::VectorXf, 0, Eigen::InnerStride<>>;

Eigen::MatrixXf conv_forward(const CompiledConv& c, const Eigen::MatrixXf& in) {
  const ConvSpec& s = c.spec;
  const Eigen::Index t_in = in.rows();
  const int eff_k = s.dilation * (s.kernel - 1) + 1;
  const int pad_total = std::max(0, eff_k - s.stride);
  const int pad_left = pad_total / 2;
  const Eigen::Index t_out = (t_in + pad_total - eff_k) / s.stride + 1;

  Eigen::MatrixXf padded = Eigen::MatrixXf::Zero(t_in + pad_total, in.cols());
  padded.middleRows(pad_left, t_in) = in;

  Eigen::MatrixXf out(t_out, s.out_ch);
  const int in_g = s.in_ch / s.groups;
  const int out_g = s.out_ch / s.groups;
  for (int o = 0; o < s.out_ch; ++o) {
    out.col(o).setConstant(c.bias[o]);
    const int group = o / out_g;
    for (int il = 0; il < in_g; ++il) {
      const float* base = padded.col(group * in_g + il).data();
      for (int k = 0; k < s.kernel; ++k) {
        const float w = c.weights(static_cast<Eigen::Index>(il) * s.kernel + k, o);
        if (w == 0.0f) continue;
        StridedVec slice(base + static_cast<Eigen::Index>(k) * s.dilation, t_out,
                         Eigen::InnerStride<>(s.stride));
        out.col(o) += w * slice;
      }
    }
  }
  return out;
}

Eigen::MatrixXf conv_transposed_forward(const CompiledConv& c, const Eigen::MatrixXf& in) {
  const ConvSpec& s = c.spec;
  const Eigen::Index t_in = in.rows();
  const Eigen::Index full = (t_in - 1) * s.stride + s.kernel;
  const Eigen::Index t_out = t_in * s.stride;
  const int trim_left = (s.kernel - s.stride) / 2;

  Eigen::MatrixXf scatter = Eigen::MatrixXf::Zero(full, s.out_ch);
  const int in_g = s.in_ch / s.groups;
  const int out_g = s.out_ch / s.groups;
  for (int o = 0; o < s.out_ch; ++o) {
    const int group = o / out_g;
    float* base = scatter.col(o).data();
    for (int il = 0; il < in_g; ++il) {
      const auto& src = in.col(group * in_g + il);
      for (int k = 0; k < s.kernel; ++k) {
        const float w = c.weights(static_cast<Eigen::Index>(il) * s.kernel + k, o);
        if (w == 0.0f) continue;
        StridedVecMut slice(base + k, t_in, Eigen::InnerStride<>(s.stride));
        slice += w * src;
      }
    }
  }

  Eigen::MatrixXf out = scatter.middleRows(trim_left, t_out);
  for (int o = 0; o < s.out_ch; ++o) out.col(o).array() += c.bias[o];
  return out;
}

Eigen::MatrixXf avg_pool(const Eigen::MatrixXf& in, int factor) {
  if (factor <= 1) return in;
  const Eigen::Index t_out = (in.rows() + factor - 1) / factor;
  Eigen::MatrixXf out(t_out, in.cols());
  for (Eigen::Index t = 0; t < t_out; ++t) {
    const Eigen::Index start = t * factor;
    const Eigen::Index len = std::min<Eigen::Index>(factor, in.rows() - start);
    out.row(t) = in.middleRows(start, len).colwise().mean();
  }
  return out;
}

// Band rows cast into a (time x bands) float map.
Eigen::MatrixXf bands_to_map(const SubbandTensor& sub, Eigen::Index first,
                             Eigen::Index count) {
  return sub.data.middleRows(first, count).transpose().cast<float>();
}

AudioBuffer pad_to_multiple(const AudioBuffer& buf, Eigen::Index multiple) {
  const Eigen::Index t = buf.size();
  const Eigen::Index padded = ((t + multiple - 1) / multiple) * multiple;
  if (padded == t) return buf;
  AudioBuffer out;
  out.sample_rate_hz = buf.sample_rate_hz;
  out.samples = Eigen::ArrayXd::Zero(padded);
  out.samples.head(t) = buf.samples;
  return out;
}

}  // namespace

struct Generator::Layer : CompiledConv {};
struct Discriminator::Layer : CompiledConv {};

Generator::Generator(Generator&&) noexcept = default;
Generator::~Generator() = default;
Discriminator::Discriminator(Discriminator&&) noexcept = default;
Discriminator::~Discriminator() = default;

Generator::Generator(const NetworkConfig& cfg, const WeightStore& weights) : cfg_(cfg) {
  validate_config(cfg_);
  bank_ = modulate_bank(design_prototype(cfg_.m_bands, cfg_.taps_per_band, cfg_.pqmf_atten_db));
  for (const ConvSpec& spec : generator_graph(cfg_))
    layers_.push_back(Layer{compile_conv(spec, weights)});
}

AudioBuffer Generator::forward(const AudioBuffer& buf) const {
  if (buf.size() == 0) throw Error(ErrorCode::kEmptyBuffer, "empty input");
  if (buf.size() >= kMaxForwardSamples)
    throw Error(ErrorCode::kLengthOverflow, "input too long");
  const float slope = static_cast<float>(cfg_.leaky_slope_gen);
  const int depth = static_cast<int>(cfg_.encoder_strides.size());
  const int n_res = static_cast<int>(cfg_.residual_dilations.size());

  const Eigen::Index block = static_cast<Eigen::Index>(cfg_.m_bands) * cfg_.stride_product();
  const AudioBuffer padded = pad_to_multiple(buf, block);
  const SubbandTensor sub = analyze(bank_, padded);
  const Eigen::MatrixXf band_input = bands_to_map(sub, 0, cfg_.p_bands);

  std::size_t li = 0;
  auto next = [&]() -> const Layer& { return layers_[li++]; };

  Eigen::MatrixXf h = conv_forward(next(), band_input);  // stem

  std::vector<Eigen::MatrixXf> skips(depth);
  for (int b = 0; b < depth; ++b) {
    for (int r = 0; r < n_res; ++r) {
      Eigen::MatrixXf t = conv_forward(next(), h);
      leaky_relu_inplace(t, slope);
      t = conv_forward(next(), t);
      h += t;
    }
    skips[b] = h;
    leaky_relu_inplace(h, slope);
    h = conv_forward(next(), h);  // strided downsample
  }

  for (int b = depth - 1; b >= 0; --b) {
    leaky_relu_inplace(h, slope);
    h = conv_transposed_forward(next(), h);  // strided upsample
    h += skips[b];
    for (int r = 0; r < n_res; ++r) {
      Eigen::MatrixXf t = conv_forward(next(), h);
      leaky_relu_inplace(t, slope);
      t = conv_forward(next(), t);
      h += t;
    }
  }

  // The outermost skip feeds the selected input bands straight into the last
  // convolution's input.
  h.leftCols(cfg_.p_bands) += band_input;
  Eigen::MatrixXf y = conv_forward(next(), h);  // head to M bands
  y = y.array().tanh().matrix();

  SubbandTensor out_bands;
  out_bands.source_rate_hz = buf.sample_rate_hz;
  out_bands.source_length = buf.size();
  out_bands.data = y.transpose().cast<double>();
  return synthesize(bank_, out_bands);
}

Discriminator::Discriminator(const NetworkConfig& cfg, const WeightStore& weights)
    : cfg_(cfg) {
  validate_config(cfg_);
  bank_ = modulate_bank(design_prototype(cfg_.m_bands, cfg_.taps_per_band, cfg_.pqmf_atten_db));
  const std::vector<ConvSpec> graph = discriminator_graph(cfg_);
  scales_.resize(cfg_.disc_scales);
  for (const ConvSpec& spec : graph) {
    const int scale = spec.name[4] - '0';  // "disc<k>."
    scales_[scale].push_back(Layer{compile_conv(spec, weights)});
  }
}

std::vector<ScoreAndFeatures> Discriminator::forward(const AudioBuffer& buf) const {
  if (buf.size() == 0) throw Error(ErrorCode::kEmptyBuffer, "empty input");
  if (buf.size() >= kMaxForwardSamples)
    throw Error(ErrorCode::kLengthOverflow, "input too long");
  const float slope = static_cast<float>(cfg_.leaky_slope_disc);

  const AudioBuffer padded = pad_to_multiple(buf, cfg_.m_bands);
  const SubbandTensor sub = analyze(bank_, padded);
  const Eigen::MatrixXf upper =
      bands_to_map(sub, cfg_.m_bands - cfg_.q_bands, cfg_.q_bands);

  std::vector<ScoreAndFeatures> result;
  for (int k = 0; k < cfg_.disc_scales; ++k) {
    Eigen::MatrixXf h;
    if (k == 0) {
      h = buf.samples.cast<float>().matrix();
      h.resize(buf.size(), 1);
    } else {
      h = avg_pool(upper, 1 << (k - 1));
    }
    ScoreAndFeatures sf;
    const std::vector<Layer>& stack = scales_[k];
    for (std::size_t l = 0; l + 1 < stack.size(); ++l) {
      h = conv_forward(stack[l], h);
      leaky_relu_inplace(h, slope);
      sf.features.push_back(h);
    }
    const Eigen::MatrixXf logits = conv_forward(stack.back(), h);
    sf.logits = logits.col(0).array().cast<double>();
    result.push_back(std::move(sf));
  }
  return result;
}

AudioBuffer generator_forward(const NetworkConfig& cfg, const WeightStore& weights,
                              const AudioBuffer& buf) {
  return Generator(cfg, weights).forward(buf);
}

std::vector<ScoreAndFeatures> discriminator_forward(const NetworkConfig& cfg,
                                                    const WeightStore& weights,
                                                    const AudioBuffer& buf) {
  return Discriminator(cfg, weights).forward(buf);
}

}  // namespace eben
