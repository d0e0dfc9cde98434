#include "remsched/nn.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace remsched {

namespace {
constexpr std::uint32_t kMagic = 0x504c4d52;  // "RMLP"
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_mlp(const Mlp& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  auto put32 = [&out](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  put32(kMagic);
  put32(kVersion);
  put32(net.output == Mlp::Output::tanh ? 1u : 0u);
  put32(static_cast<std::uint32_t>(net.layers.size()));
  for (const auto& l : net.layers) {
    put32(static_cast<std::uint32_t>(l.w.cols()));
    put32(static_cast<std::uint32_t>(l.w.rows()));
  }
  for (const auto& l : net.layers) {
    for (Eigen::Index r = 0; r < l.w.rows(); ++r)
      for (Eigen::Index c = 0; c < l.w.cols(); ++c) {
        const float v = l.w(r, c);
        out.write(reinterpret_cast<const char*>(&v), 4);
      }
    for (Eigen::Index r = 0; r < l.b.size(); ++r) {
      const float v = l.b(r);
      out.write(reinterpret_cast<const char*>(&v), 4);
    }
  }
}

Mlp load_mlp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  auto get32 = [&in]() {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
  };
  if (get32() != kMagic) throw ValidationError("not a network checkpoint: " + path);
  if (get32() != kVersion) throw ValidationError("unsupported checkpoint version");
  Mlp net;
  net.output = get32() == 1u ? Mlp::Output::tanh : Mlp::Output::linear;
  const std::uint32_t n_layers = get32();
  std::vector<std::pair<std::uint32_t, std::uint32_t>> dims(n_layers);
  for (auto& [in_dim, out_dim] : dims) {
    in_dim = get32();
    out_dim = get32();
  }
  for (const auto& [in_dim, out_dim] : dims) {
    Mlp::Layer l;
    l.w.resize(out_dim, in_dim);
    l.b.resize(out_dim);
    for (std::uint32_t r = 0; r < out_dim; ++r)
      for (std::uint32_t c = 0; c < in_dim; ++c) {
        float v;
        in.read(reinterpret_cast<char*>(&v), 4);
        l.w(r, c) = v;
      }
    for (std::uint32_t r = 0; r < out_dim; ++r) {
      float v;
      in.read(reinterpret_cast<char*>(&v), 4);
      l.b(r) = v;
    }
    net.layers.push_back(std::move(l));
  }
  if (!in) throw ValidationError("truncated checkpoint: " + path);
  return net;
}

}  // namespace remsched
