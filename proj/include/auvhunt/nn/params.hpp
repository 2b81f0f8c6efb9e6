#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "auvhunt/nn/ops.hpp"
#include "auvhunt/rng.hpp"

namespace auvhunt::nn {

/// Named, ordered parameter tensors. Insertion order is the checkpoint order.
template <typename T>
class BasicParameterSet {
 public:
  struct Entry {
    std::string name;
    BasicTensor<T> value;
  };

  std::size_t add(std::string name, BasicTensor<T> init) {
    if (index_.count(name)) throw ValidationError("duplicate parameter '" + name + "'");
    index_.emplace(name, entries_.size());
    entries_.push_back(Entry{std::move(name), std::move(init)});
    return entries_.size() - 1;
  }

  std::size_t index(const std::string& name) const {
    const auto it = index_.find(name);
    if (it == index_.end()) throw ValidationError("unknown parameter '" + name + "'");
    return it->second;
  }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t size() const { return entries_.size(); }
  Entry& operator[](std::size_t i) { return entries_[i]; }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<Entry>& entries() const { return entries_; }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.value.size();
    return n;
  }

  friend bool operator==(const BasicParameterSet& a, const BasicParameterSet& b) {
    if (a.entries_.size() != b.entries_.size()) return false;
    for (std::size_t i = 0; i < a.entries_.size(); ++i) {
      if (a.entries_[i].name != b.entries_[i].name) return false;
      if (!(a.entries_[i].value == b.entries_[i].value)) return false;
    }
    return true;
  }

 private:
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> index_;
};

/// Places every parameter on a tape as a leaf. Variables take gradients only
/// on a recording tape.
template <typename T>
class BasicBinding {
 public:
  BasicBinding(BasicTape<T>& tape, const BasicParameterSet<T>& params) : tape_(&tape) {
    vars_.reserve(params.size());
    for (const auto& e : params.entries()) vars_.push_back(tape.variable(e.value));
  }

  BasicTape<T>& tape() const { return *tape_; }
  BasicVar<T> operator()(std::size_t index) const { return vars_.at(index); }

  std::vector<BasicTensor<T>> gradients() const {
    std::vector<BasicTensor<T>> out;
    out.reserve(vars_.size());
    for (auto v : vars_) out.push_back(tape_->grad(v));
    return out;
  }

 private:
  BasicTape<T>* tape_;
  std::vector<BasicVar<T>> vars_;
};

/// Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
template <typename T>
BasicTensor<T> glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-a, a);
  BasicTensor<T> w({fan_in, fan_out});
  for (auto& x : w.data()) x = static_cast<T>(dist(rng));
  return w;
}

template <typename T>
struct BasicDense {
  std::size_t weight = 0;
  std::size_t bias = 0;
  std::size_t in = 0;
  std::size_t out = 0;

  static BasicDense create(BasicParameterSet<T>& params, const std::string& name, std::size_t in,
                           std::size_t out, Rng& rng) {
    BasicDense d;
    d.in = in;
    d.out = out;
    d.weight = params.add(name + ".weight", glorot_uniform<T>(in, out, rng));
    d.bias = params.add(name + ".bias", BasicTensor<T>({1, out}));
    return d;
  }

  BasicVar<T> operator()(const BasicBinding<T>& bind, BasicVar<T> x) const {
    return add_bias(matmul(x, bind(weight)), bind(bias));
  }
};

template <typename T>
struct BasicLayerNorm {
  std::size_t gamma = 0;
  std::size_t beta = 0;

  static BasicLayerNorm create(BasicParameterSet<T>& params, const std::string& name,
                               std::size_t width) {
    BasicLayerNorm ln;
    ln.gamma = params.add(name + ".gamma", BasicTensor<T>({1, width}, T{1}));
    ln.beta = params.add(name + ".beta", BasicTensor<T>({1, width}));
    return ln;
  }

  BasicVar<T> operator()(const BasicBinding<T>& bind, BasicVar<T> x) const {
    return layer_norm(x, bind(gamma), bind(beta));
  }
};

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const {
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ValidationError("adam.lr must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ValidationError("adam.beta1 must lie in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ValidationError("adam.beta2 must lie in [0, 1)");
    if (!(eps > 0.0)) throw ValidationError("adam.eps must be positive");
  }
};

/// Bias-corrected Adam. Moments are kept in the parameter precision; the
/// update itself is computed in double.
template <typename T>
class BasicAdam {
 public:
  BasicAdam() = default;
  BasicAdam(AdamConfig cfg, const BasicParameterSet<T>& params) : cfg_(cfg) {
    cfg_.validate();
    for (const auto& e : params.entries()) {
      m_.emplace_back(e.value.shape());
      v_.emplace_back(e.value.shape());
    }
  }

  const AdamConfig& config() const { return cfg_; }
  std::uint64_t step_count() const { return t_; }
  const std::vector<BasicTensor<T>>& first_moments() const { return m_; }
  const std::vector<BasicTensor<T>>& second_moments() const { return v_; }

  void restore(std::uint64_t t, std::vector<BasicTensor<T>> m, std::vector<BasicTensor<T>> v) {
    if (m.size() != m_.size() || v.size() != v_.size()) {
      throw ValidationError("adam restore: moment count mismatch");
    }
    for (std::size_t i = 0; i < m_.size(); ++i) {
      if (m[i].shape() != m_[i].shape()) throw ShapeError("adam restore", m[i].shape(), m_[i].shape());
      if (v[i].shape() != v_[i].shape()) throw ShapeError("adam restore", v[i].shape(), v_[i].shape());
    }
    t_ = t;
    m_ = std::move(m);
    v_ = std::move(v);
  }

  void step(BasicParameterSet<T>& params, const std::vector<BasicTensor<T>>& grads) {
    if (grads.size() != params.size() || m_.size() != params.size()) {
      throw ValidationError("adam step: gradient count does not match parameters");
    }
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t p = 0; p < params.size(); ++p) {
      auto& w = params[p].value;
      const auto& g = grads[p];
      if (g.shape() != w.shape()) throw ShapeError("adam step", w.shape(), g.shape());
      auto& m = m_[p];
      auto& v = v_[p];
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double gi = g[i];
        const double mi = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gi;
        const double vi = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gi * gi;
        m[i] = static_cast<T>(mi);
        v[i] = static_cast<T>(vi);
        const double update = cfg_.lr * (mi / c1) / (std::sqrt(vi / c2) + cfg_.eps);
        w[i] = static_cast<T>(w[i] - update);
      }
    }
  }

 private:
  AdamConfig cfg_;
  std::uint64_t t_ = 0;
  std::vector<BasicTensor<T>> m_;
  std::vector<BasicTensor<T>> v_;
};

using ParameterSet = BasicParameterSet<float>;
using Binding = BasicBinding<float>;
using Dense = BasicDense<float>;
using LayerNorm = BasicLayerNorm<float>;
using Adam = BasicAdam<float>;

}  // namespace auvhunt::nn
