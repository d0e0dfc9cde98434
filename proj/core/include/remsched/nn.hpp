#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "remsched/errors.hpp"

namespace remsched {

/// Fully-connected network with rectifier hidden layers. The output is either
/// linear (value heads) or tanh (bounded policy heads). Batches are stored
/// column-wise: inputs are (in x B), outputs (out x B).
template <typename T>
struct MlpT {
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

  enum class Output { linear, tanh };

  struct Layer {
    Matrix w;  // out x in
    Vector b;
  };

  std::vector<Layer> layers;
  Output output = Output::linear;

  /// Weights uniform in +-1/sqrt(fan_in), biases zero. Draw order is fixed
  /// (layers in order, weights row-major, then nothing for biases), so a
  /// seeded generator reproduces the network exactly.
  static MlpT random(const std::vector<int>& dims, Output out, std::mt19937_64& rng) {
    if (dims.size() < 2) throw ValidationError("network needs at least input and output dims");
    MlpT net;
    net.output = out;
    std::uniform_real_distribution<T> unit(T(-1), T(1));
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
      Layer layer;
      layer.w.resize(dims[l + 1], dims[l]);
      const T bound = T(1) / std::sqrt(T(dims[l]));
      for (Eigen::Index r = 0; r < layer.w.rows(); ++r)
        for (Eigen::Index c = 0; c < layer.w.cols(); ++c) layer.w(r, c) = bound * unit(rng);
      layer.b = Vector::Zero(dims[l + 1]);
      net.layers.push_back(std::move(layer));
    }
    return net;
  }

  int input_dim() const { return static_cast<int>(layers.front().w.cols()); }
  int output_dim() const { return static_cast<int>(layers.back().w.rows()); }

  long parameter_count() const {
    long n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
  }

  struct Cache {
    Matrix input;
    std::vector<Matrix> post;  // post-activation output of every layer
  };

  Matrix forward(const Matrix& x, Cache* cache = nullptr) const {
    if (x.rows() != layers.front().w.cols())
      throw ValidationError("forward: input dimension mismatch");
    if (cache) {
      cache->input = x;
      cache->post.resize(layers.size());
    }
    Matrix h = x;
    for (size_t l = 0; l < layers.size(); ++l) {
      Matrix z = (layers[l].w * h).colwise() + layers[l].b;
      if (l + 1 < layers.size()) {
        z = z.cwiseMax(T(0));
      } else if (output == Output::tanh) {
        z = z.array().tanh().matrix();
      }
      if (cache) cache->post[l] = z;
      h = std::move(z);
    }
    return h;
  }

  struct Gradients {
    std::vector<Layer> g;
    static Gradients zeros_like(const MlpT& net) {
      Gradients out;
      out.g.reserve(net.layers.size());
      for (const auto& l : net.layers)
        out.g.push_back(Layer{Matrix::Zero(l.w.rows(), l.w.cols()), Vector::Zero(l.b.size())});
      return out;
    }
  };

  /// Backpropagates dL/dy (same shape as the output batch) through the cached
  /// forward pass. Gradients are summed over the batch; fold any 1/B into
  /// dLdY. Optionally also returns dL/dx for critic-to-actor chaining.
  Gradients backward(const Cache& cache, const Matrix& dLdY, Matrix* dLdX = nullptr) const {
    if (dLdY.rows() != output_dim() || dLdY.cols() != cache.input.cols())
      throw ValidationError("backward: upstream gradient shape mismatch");
    Gradients grads = Gradients::zeros_like(*this);
    Matrix delta = dLdY;
    if (output == Output::tanh) {
      const Matrix& y = cache.post.back();
      delta = delta.cwiseProduct((Matrix::Ones(y.rows(), y.cols()) - y.cwiseProduct(y)));
    }
    for (int l = static_cast<int>(layers.size()) - 1; l >= 0; --l) {
      const Matrix& below = (l == 0) ? cache.input : cache.post[l - 1];
      grads.g[l].w.noalias() = delta * below.transpose();
      grads.g[l].b = delta.rowwise().sum();
      if (l > 0) {
        Matrix up = layers[l].w.transpose() * delta;
        // rectifier mask: post-activation is positive iff pre-activation was
        delta = up.cwiseProduct((cache.post[l - 1].array() > T(0)).template cast<T>().matrix());
      } else if (dLdX) {
        dLdX->noalias() = layers[l].w.transpose() * delta;
      }
    }
    return grads;
  }
};

using Mlp = MlpT<float>;

/// Standard bias-corrected Adam, one state per network.
template <typename T>
struct AdamT {
  T beta1 = T(0.9), beta2 = T(0.999), eps = T(1e-8);
  long t = 0;
  std::vector<typename MlpT<T>::Layer> m, v;

  explicit AdamT(const MlpT<T>& net) {
    for (const auto& l : net.layers) {
      m.push_back({MlpT<T>::Matrix::Zero(l.w.rows(), l.w.cols()),
                   MlpT<T>::Vector::Zero(l.b.size())});
      v.push_back({MlpT<T>::Matrix::Zero(l.w.rows(), l.w.cols()),
                   MlpT<T>::Vector::Zero(l.b.size())});
    }
  }

  void step(MlpT<T>& net, const typename MlpT<T>::Gradients& grads, T lr) {
    ++t;
    const T c1 = T(1) - std::pow(beta1, T(t));
    const T c2 = T(1) - std::pow(beta2, T(t));
    for (size_t l = 0; l < net.layers.size(); ++l) {
      auto update = [&](auto& param, auto& mm, auto& vv, const auto& g) {
        mm = beta1 * mm + (T(1) - beta1) * g;
        vv = beta2 * vv + (T(1) - beta2) * g.cwiseProduct(g);
        param.array() -= lr * (mm.array() / c1) / ((vv.array() / c2).sqrt() + eps);
      };
      update(net.layers[l].w, m[l].w, v[l].w, grads.g[l].w);
      update(net.layers[l].b, m[l].b, v[l].b, grads.g[l].b);
    }
  }
};

using Adam = AdamT<float>;

enum class SyncMode { hard, soft };

/// Hard mode copies the online parameters; soft mode blends
/// target <- delta * online + (1 - delta) * target.
template <typename T>
void sync_target(MlpT<T>& target, const MlpT<T>& online, SyncMode mode, T delta = T(1)) {
  if (target.layers.size() != online.layers.size())
    throw ValidationError("sync_target: architecture mismatch");
  for (size_t l = 0; l < target.layers.size(); ++l) {
    if (target.layers[l].w.rows() != online.layers[l].w.rows() ||
        target.layers[l].w.cols() != online.layers[l].w.cols())
      throw ValidationError("sync_target: architecture mismatch");
    if (mode == SyncMode::hard) {
      target.layers[l].w = online.layers[l].w;
      target.layers[l].b = online.layers[l].b;
    } else {
      target.layers[l].w = delta * online.layers[l].w + (T(1) - delta) * target.layers[l].w;
      target.layers[l].b = delta * online.layers[l].b + (T(1) - delta) * target.layers[l].b;
    }
  }
}

/// Flat binary weight dump: header, per-layer dims, then float32 weights
/// (row-major) and biases, layers in order. See README for the exact layout.
void save_mlp(const Mlp& net, const std::string& path);
Mlp load_mlp(const std::string& path);

/// Fixed-capacity ring buffer of transitions with uniform without-replacement
/// batch sampling.
template <typename Transition>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ValidationError("replay capacity must be positive");
  }

  void push(Transition t) {
    if (data_.size() < capacity_) {
      data_.push_back(std::move(t));
    } else {
      data_[head_] = std::move(t);  // overwrite the oldest entry
      head_ = (head_ + 1) % capacity_;
    }
  }

  size_t size() const { return data_.size(); }
  size_t capacity() const { return capacity_; }
  const Transition& operator[](size_t i) const { return data_[i]; }

  /// B distinct indices, uniform over the current contents (Floyd's method).
  std::vector<size_t> sample_indices(size_t batch, std::mt19937_64& rng) const {
    if (batch > data_.size())
      throw ValidationError("cannot sample a batch larger than the buffer contents");
    std::vector<size_t> picked;
    picked.reserve(batch);
    std::unordered_set<size_t> seen;
    for (size_t i = data_.size() - batch; i < data_.size(); ++i) {
      std::uniform_int_distribution<size_t> d(0, i);
      const size_t j = d(rng);
      if (seen.insert(j).second) {
        picked.push_back(j);
      } else {
        seen.insert(i);
        picked.push_back(i);
      }
    }
    return picked;
  }

 private:
  size_t capacity_;
  size_t head_ = 0;
  std::vector<Transition> data_;
};

}  // namespace remsched
