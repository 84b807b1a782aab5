#include "rgan/gan/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "rgan/core/error.hpp"

namespace rgan::gan {

namespace {

constexpr char kMagic[8] = {'R', 'G', 'A', 'N', 'C', 'K', 'P', 'T'};

template <typename U>
void put(std::ostream& out, U v) {
  std::array<char, sizeof(U)> b;
  for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), b.size());
}

template <typename U>
U get(std::istream& in) {
  std::array<unsigned char, sizeof(U)> b;
  in.read(reinterpret_cast<char*>(b.data()), b.size());
  if (!in) throw SchemaError("checkpoint truncated");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& out, double v) { put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get<std::uint64_t>(in)); }

std::array<const MlpParams*, 5> networks(const RganModel& m) {
  static const MlpParams empty;
  return {&m.generator, &m.critic_trunk, &m.critic_head, &m.regressor_head,
          m.shared ? &empty : &m.regressor_trunk_own};
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const RganModel& model,
                     const std::string& metadata) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.feature_dim));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.noise_dim));
  put<std::uint32_t>(out, model.shared ? 1u : 0u);
  put<std::uint64_t>(out, metadata.size());
  out.write(metadata.data(), static_cast<std::streamsize>(metadata.size()));
  const auto nets = networks(model);
  for (const MlpParams* p : nets) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->layers.size()));
    for (const auto& l : p->layers) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(l.weight.rows()));
      put<std::uint32_t>(out, static_cast<std::uint32_t>(l.weight.cols()));
    }
  }
  for (const MlpParams* p : nets)
    for (const auto& l : p->layers) {
      for (double v : l.weight.values()) put_f64(out, v);
      for (double v : l.bias.values()) put_f64(out, v);
    }
  if (!out) throw SchemaError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::optional<std::size_t> expected_feature_dim,
                           std::optional<std::size_t> expected_noise_dim, double slope) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open checkpoint " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw SchemaError(path.string() + " is not an RGAN checkpoint");
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion)
    throw SchemaError("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kCheckpointVersion) + ")");

  Checkpoint ck;
  RganModel& m = ck.model;
  m.feature_dim = get<std::uint32_t>(in);
  m.noise_dim = get<std::uint32_t>(in);
  m.shared = get<std::uint32_t>(in) != 0;
  if (expected_feature_dim && *expected_feature_dim != m.feature_dim)
    throw ShapeError("checkpoint feature dimension " + std::to_string(m.feature_dim) + " does not match expected " +
                     std::to_string(*expected_feature_dim));
  if (expected_noise_dim && *expected_noise_dim != m.noise_dim)
    throw ShapeError("checkpoint noise dimension " + std::to_string(m.noise_dim) + " does not match expected " +
                     std::to_string(*expected_noise_dim));
  const auto meta_len = get<std::uint64_t>(in);
  if (meta_len > (1u << 26)) throw SchemaError("checkpoint metadata too large");
  ck.metadata.resize(meta_len);
  in.read(ck.metadata.data(), static_cast<std::streamsize>(meta_len));

  using core::OutputActivation;
  std::array<MlpParams*, 5> nets = {&m.generator, &m.critic_trunk, &m.critic_head, &m.regressor_head,
                                    &m.regressor_trunk_own};
  const std::array<OutputActivation, 5> acts = {OutputActivation::sigmoid, OutputActivation::leaky_relu,
                                                OutputActivation::identity, OutputActivation::identity,
                                                OutputActivation::leaky_relu};
  for (std::size_t k = 0; k < nets.size(); ++k) {
    const auto layers = get<std::uint32_t>(in);
    if (layers > 64) throw SchemaError("checkpoint layer count is implausible");
    nets[k]->slope = slope;
    nets[k]->output = acts[k];
    for (std::uint32_t i = 0; i < layers; ++i) {
      const auto r = get<std::uint32_t>(in);
      const auto c = get<std::uint32_t>(in);
      nets[k]->layers.push_back({Matrix(r, c), Matrix(1, c)});
    }
    nets[k]->validate();
  }
  for (MlpParams* p : nets)
    for (auto& l : p->layers) {
      for (double& v : l.weight.values()) v = get_f64(in);
      for (double& v : l.bias.values()) v = get_f64(in);
    }

  const std::size_t d = m.feature_dim;
  if (m.generator.in_dim() != m.noise_dim || m.generator.out_dim() != d + 1 || m.critic_trunk.in_dim() != d ||
      m.critic_head.out_dim() != 1 || m.regressor_head.out_dim() != 1 ||
      (!m.shared && m.regressor_trunk_own.in_dim() != d))
    throw ShapeError("checkpoint network dimensions are inconsistent with its header");
  return ck;
}

}  // namespace rgan::gan
