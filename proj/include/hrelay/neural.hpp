#pragma once

// Feed-forward networks with hand-written backprop, batched column-wise
// (one sample per column).

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "hrelay/errors.hpp"

namespace hrelay {

enum class Activation : std::uint32_t { identity = 0, relu = 1, tanh = 2, sigmoid = 3 };

namespace detail {
inline std::uint64_t next_version() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}
}  // namespace detail

template <typename Scalar>
class Mlp {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  struct Layer {
    Matrix W;
    Vector b;
    Activation act = Activation::identity;
  };

  struct Cache {
    std::vector<Matrix> inputs;  // input to each layer
    std::vector<Matrix> pre;     // pre-activation of each layer
    Matrix output;
    std::uint64_t version = 0;
  };

  struct Gradients {
    std::vector<Matrix> dW;
    std::vector<Vector> db;
    Matrix dx;  // gradient w.r.t. the network input
  };

  Mlp() = default;

  /// sizes = {in, h1, ..., out}; one activation per layer.
  Mlp(const std::vector<int>& sizes, const std::vector<Activation>& acts, std::uint64_t seed) {
    if (sizes.size() < 2 || acts.size() != sizes.size() - 1)
      throw StructuralError("Mlp: need one activation per layer");
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      if (sizes[l] < 1 || sizes[l + 1] < 1) throw StructuralError("Mlp: layer sizes must be >= 1");
      const double bound = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
      std::uniform_real_distribution<double> u(-bound, bound);
      Layer layer;
      layer.W.resize(sizes[l + 1], sizes[l]);
      layer.b.resize(sizes[l + 1]);
      // Column-major fill order keeps initialization stable across Eigen versions.
      for (Eigen::Index j = 0; j < layer.W.cols(); ++j)
        for (Eigen::Index i = 0; i < layer.W.rows(); ++i) layer.W(i, j) = static_cast<Scalar>(u(rng));
      for (Eigen::Index i = 0; i < layer.b.size(); ++i) layer.b(i) = static_cast<Scalar>(u(rng));
      layer.act = acts[l];
      layers_.push_back(std::move(layer));
    }
    touch();
  }

  explicit Mlp(std::vector<Layer> layers) : layers_(std::move(layers)) {
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      if (layers_[l].b.size() != layers_[l].W.rows()) throw StructuralError("Mlp: bias size");
      if (l > 0 && layers_[l].W.cols() != layers_[l - 1].W.rows())
        throw StructuralError("Mlp: layer dimensions do not chain");
    }
    touch();
  }

  int input_size() const { return layers_.empty() ? 0 : static_cast<int>(layers_.front().W.cols()); }
  int output_size() const { return layers_.empty() ? 0 : static_cast<int>(layers_.back().W.rows()); }
  const std::vector<Layer>& layers() const { return layers_; }
  std::uint64_t version() const { return version_; }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for (const auto& l : layers_) n += l.W.size() + l.b.size();
    return n;
  }

  Matrix forward(const Matrix& x, Cache* cache = nullptr) const {
    if (x.rows() != input_size()) throw StructuralError("Mlp::forward: input dimension mismatch");
    if (cache != nullptr) {
      cache->inputs.clear();
      cache->pre.clear();
      cache->version = version_;
    }
    Matrix a = x;
    for (const auto& l : layers_) {
      Matrix z = l.W * a;
      z.colwise() += l.b;
      if (cache != nullptr) {
        cache->inputs.push_back(std::move(a));
        cache->pre.push_back(z);
      }
      a = activate(z, l.act);
    }
    if (cache != nullptr) cache->output = a;
    return a;
  }

  Vector forward_one(const Vector& x) const { return forward(Matrix(x)).col(0); }

  /// Gradients of sum(dout .* output) w.r.t. parameters and input.
  Gradients backward(const Cache& cache, const Matrix& dout) const {
    if (cache.version != version_ || cache.inputs.size() != layers_.size())
      throw StructuralError("Mlp::backward: cache is stale or from another network");
    if (dout.rows() != cache.output.rows() || dout.cols() != cache.output.cols())
      throw StructuralError("Mlp::backward: output gradient shape mismatch");
    Gradients g;
    g.dW.resize(layers_.size());
    g.db.resize(layers_.size());
    Matrix delta = dout;
    for (std::size_t i = layers_.size(); i-- > 0;) {
      const Layer& l = layers_[i];
      const Matrix& z = cache.pre[i];
      const Matrix a = (i + 1 < layers_.size()) ? cache.inputs[i + 1] : cache.output;
      switch (l.act) {
        case Activation::identity:
          break;
        case Activation::relu:
          delta = delta.cwiseProduct((z.array() > Scalar(0)).template cast<Scalar>().matrix());
          break;
        case Activation::tanh:
          delta = delta.cwiseProduct((Scalar(1) - a.array().square()).matrix());
          break;
        case Activation::sigmoid:
          delta = delta.cwiseProduct((a.array() * (Scalar(1) - a.array())).matrix());
          break;
      }
      g.dW[i] = delta * cache.inputs[i].transpose();
      g.db[i] = delta.rowwise().sum();
      delta = l.W.transpose() * delta;
    }
    g.dx = std::move(delta);
    return g;
  }

  Vector parameters() const {
    Vector p(parameter_count());
    Eigen::Index o = 0;
    for (const auto& l : layers_) {
      p.segment(o, l.W.size()) = l.W.reshaped();
      o += l.W.size();
      p.segment(o, l.b.size()) = l.b;
      o += l.b.size();
    }
    return p;
  }

  void set_parameters(const Vector& p) {
    if (p.size() != parameter_count()) throw StructuralError("Mlp::set_parameters: size mismatch");
    Eigen::Index o = 0;
    for (auto& l : layers_) {
      l.W.reshaped() = p.segment(o, l.W.size());
      o += l.W.size();
      l.b = p.segment(o, l.b.size());
      o += l.b.size();
    }
    touch();
  }

  /// Flattens gradients in the same order as parameters().
  Vector flatten(const Gradients& g) const {
    Vector p(parameter_count());
    Eigen::Index o = 0;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      p.segment(o, g.dW[i].size()) = g.dW[i].reshaped();
      o += g.dW[i].size();
      p.segment(o, g.db[i].size()) = g.db[i];
      o += g.db[i].size();
    }
    return p;
  }

  bool same_shape(const Mlp& other) const {
    if (layers_.size() != other.layers_.size()) return false;
    for (std::size_t i = 0; i < layers_.size(); ++i)
      if (layers_[i].W.rows() != other.layers_[i].W.rows() ||
          layers_[i].W.cols() != other.layers_[i].W.cols() || layers_[i].act != other.layers_[i].act)
        return false;
    return true;
  }

 private:
  static Matrix activate(const Matrix& z, Activation act) {
    switch (act) {
      case Activation::relu:
        return z.cwiseMax(Scalar(0));
      case Activation::tanh:
        return z.array().tanh().matrix();
      case Activation::sigmoid:
        return (Scalar(1) / (Scalar(1) + (-z.array()).exp())).matrix();
      case Activation::identity:
        break;
    }
    return z;
  }

  void touch() { version_ = detail::next_version(); }

  std::vector<Layer> layers_;
  std::uint64_t version_ = 0;
};

template <typename Scalar>
struct AdamState {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vector m;
  Vector v;
  std::uint64_t step = 0;
  Scalar lr = Scalar(1e-3);
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar eps = Scalar(1e-8);

  AdamState() = default;
  AdamState(Eigen::Index n, Scalar rate) : m(Vector::Zero(n)), v(Vector::Zero(n)), lr(rate) {}
};

/// One bias-corrected Adam update of `params` (descent on `grads`).
template <typename Scalar>
void adam_step(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& params,
               const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& grads, AdamState<Scalar>& st) {
  if (params.size() != grads.size() || st.m.size() != params.size() || st.v.size() != params.size())
    throw StructuralError("adam_step: shape mismatch");
  ++st.step;
  st.m = st.beta1 * st.m + (Scalar(1) - st.beta1) * grads;
  st.v = st.beta2 * st.v + (Scalar(1) - st.beta2) * grads.cwiseProduct(grads);
  const Scalar c1 = Scalar(1) - std::pow(st.beta1, static_cast<Scalar>(st.step));
  const Scalar c2 = Scalar(1) - std::pow(st.beta2, static_cast<Scalar>(st.step));
  params.array() -= st.lr * (st.m.array() / c1) / ((st.v.array() / c2).sqrt() + st.eps);
}

template <typename Scalar>
void adam_step(Mlp<Scalar>& net, const typename Mlp<Scalar>::Gradients& g, AdamState<Scalar>& st) {
  auto p = net.parameters();
  adam_step<Scalar>(p, net.flatten(g), st);
  net.set_parameters(p);
}

/// tau * online + (1 - tau) * target, elementwise.
template <typename Scalar>
Mlp<Scalar> blend(const Mlp<Scalar>& target, const Mlp<Scalar>& online, Scalar tau) {
  if (!target.same_shape(online)) throw StructuralError("blend: architecture mismatch");
  if (tau == Scalar(1)) return online;
  Mlp<Scalar> out = target;
  if (tau == Scalar(0)) return out;
  out.set_parameters(tau * online.parameters() + (Scalar(1) - tau) * target.parameters());
  return out;
}

}  // namespace hrelay
