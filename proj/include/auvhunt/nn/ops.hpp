#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "auvhunt/nn/tape.hpp"

namespace auvhunt::nn {

namespace detail {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapC = Eigen::Map<const RowMatrix<T>>;
template <typename T>
using Map = Eigen::Map<RowMatrix<T>>;

/// C(n x m) += A(n x k) * B(k x m)
template <typename T>
void gemm_nn(const T* a, const T* b, T* c, std::size_t n, std::size_t k, std::size_t m) {
  const auto N = static_cast<Eigen::Index>(n), K = static_cast<Eigen::Index>(k),
             M = static_cast<Eigen::Index>(m);
  Map<T>(c, N, M).noalias() += MapC<T>(a, N, K) * MapC<T>(b, K, M);
}

/// C(n x m) += A(k x n)^T * B(k x m)
template <typename T>
void gemm_tn(const T* a, const T* b, T* c, std::size_t n, std::size_t k, std::size_t m) {
  const auto N = static_cast<Eigen::Index>(n), K = static_cast<Eigen::Index>(k),
             M = static_cast<Eigen::Index>(m);
  Map<T>(c, N, M).noalias() += MapC<T>(a, K, N).transpose() * MapC<T>(b, K, M);
}

/// C(n x k) += A(n x m) * B(k x m)^T
template <typename T>
void gemm_nt(const T* a, const T* b, T* c, std::size_t n, std::size_t k, std::size_t m) {
  const auto N = static_cast<Eigen::Index>(n), K = static_cast<Eigen::Index>(k),
             M = static_cast<Eigen::Index>(m);
  Map<T>(c, N, K).noalias() += MapC<T>(a, N, M) * MapC<T>(b, K, M).transpose();
}

template <typename T>
void require_same(const char* op, const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError(op, a.shape(), b.shape());
}

template <typename T>
Shape matrix_shape(std::size_t r, std::size_t c) {
  return {r, c};
}

}  // namespace detail

template <typename T>
BasicVar<T> matmul(BasicVar<T> a, BasicVar<T> b) {
  const auto& av = a.value();
  const auto& bv = b.value();
  const std::size_t n = av.rows(), k = av.cols(), m = bv.cols();
  if (bv.rows() != k) throw ShapeError("matmul", av.shape(), bv.shape());
  BasicTensor<T> out({n, m});
  detail::gemm_nn(av.data().data(), bv.data().data(), out.data().data(), n, k, m);
  return a.tape->record(std::move(out), {a, b}, [a, b, n, k, m](auto& tape, const auto& g) {
    if (auto* ga = tape.accumulator(a)) {
      detail::gemm_nt(g.data().data(), tape.value(b).data().data(), ga->data().data(), n, k, m);
    }
    if (auto* gb = tape.accumulator(b)) {
      detail::gemm_tn(tape.value(a).data().data(), g.data().data(), gb->data().data(), k, n, m);
    }
  });
}

template <typename T>
BasicVar<T> add(BasicVar<T> a, BasicVar<T> b) {
  detail::require_same("add", a.value(), b.value());
  BasicTensor<T> out = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return a.tape->record(std::move(out), {a, b}, [a, b](auto& tape, const auto& g) {
    for (auto v : {a, b}) {
      if (auto* acc = tape.accumulator(v)) {
        for (std::size_t i = 0; i < g.size(); ++i) (*acc)[i] += g[i];
      }
    }
  });
}

template <typename T>
BasicVar<T> sub(BasicVar<T> a, BasicVar<T> b) {
  detail::require_same("sub", a.value(), b.value());
  BasicTensor<T> out = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return a.tape->record(std::move(out), {a, b}, [a, b](auto& tape, const auto& g) {
    if (auto* ga = tape.accumulator(a)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
    }
    if (auto* gb = tape.accumulator(b)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] -= g[i];
    }
  });
}

/// Elementwise product.
template <typename T>
BasicVar<T> mul(BasicVar<T> a, BasicVar<T> b) {
  detail::require_same("mul", a.value(), b.value());
  BasicTensor<T> out = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return a.tape->record(std::move(out), {a, b}, [a, b](auto& tape, const auto& g) {
    if (auto* ga = tape.accumulator(a)) {
      const auto& bv = tape.value(b);
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * bv[i];
    }
    if (auto* gb = tape.accumulator(b)) {
      const auto& av = tape.value(a);
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * av[i];
    }
  });
}

template <typename T>
BasicVar<T> scale(BasicVar<T> a, T s) {
  BasicTensor<T> out = a.value();
  for (auto& x : out.data()) x *= s;
  return a.tape->record(std::move(out), {a}, [a, s](auto& tape, const auto& g) {
    if (auto* ga = tape.accumulator(a)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += s * g[i];
    }
  });
}

/// x (n x m) + bias (1 x m) on every row. The only broadcasting op.
template <typename T>
BasicVar<T> add_bias(BasicVar<T> x, BasicVar<T> bias) {
  const auto& xv = x.value();
  const auto& bv = bias.value();
  if (bv.size() != xv.cols()) throw ShapeError("add_bias", xv.shape(), bv.shape());
  BasicTensor<T> out = xv;
  const std::size_t m = xv.cols();
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    for (std::size_t c = 0; c < m; ++c) out[r * m + c] += bv[c];
  }
  return x.tape->record(std::move(out), {x, bias}, [x, bias, m](auto& tape, const auto& g) {
    if (auto* gx = tape.accumulator(x)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i];
    }
    if (auto* gb = tape.accumulator(bias)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i % m] += g[i];
    }
  });
}

/// Repeats every row `times` times consecutively: (n x m) -> (n*times x m).
template <typename T>
BasicVar<T> repeat_rows(BasicVar<T> x, std::size_t times) {
  const auto& xv = x.value();
  const std::size_t n = xv.rows(), m = xv.cols();
  BasicTensor<T> out({n * times, m});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t t = 0; t < times; ++t) {
      std::copy_n(xv.data().data() + r * m, m, out.data().data() + (r * times + t) * m);
    }
  }
  return x.tape->record(std::move(out), {x}, [x, n, m, times](auto& tape, const auto& g) {
    if (auto* gx = tape.accumulator(x)) {
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t t = 0; t < times; ++t) {
          for (std::size_t c = 0; c < m; ++c) (*gx)[r * m + c] += g[(r * times + t) * m + c];
        }
      }
    }
  });
}

template <typename T>
BasicVar<T> relu(BasicVar<T> x) {
  BasicTensor<T> out = x.value();
  for (auto& v : out.data()) v = v > T{0} ? v : T{0};
  return x.tape->record(std::move(out), {x}, [x](auto& tape, const auto& g) {
    if (auto* gx = tape.accumulator(x)) {
      const auto& xv = tape.value(x);
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (xv[i] > T{0}) (*gx)[i] += g[i];
      }
    }
  });
}

template <typename T>
BasicVar<T> tanh(BasicVar<T> x) {
  BasicTensor<T> out = x.value();
  for (auto& v : out.data()) v = std::tanh(v);
  auto y = out;
  return x.tape->record(std::move(out), {x}, [x, y](auto& tape, const auto& g) {
    if (auto* gx = tape.accumulator(x)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i] * (T{1} - y[i] * y[i]);
    }
  });
}

/// Row-wise layer normalization with affine gamma/beta (each 1 x m). Row
/// statistics accumulate in double.
template <typename T>
BasicVar<T> layer_norm(BasicVar<T> x, BasicVar<T> gamma, BasicVar<T> beta, T eps = T(1e-5)) {
  const auto& xv = x.value();
  const std::size_t n = xv.rows(), m = xv.cols();
  if (gamma.value().size() != m) throw ShapeError("layer_norm", xv.shape(), gamma.shape());
  if (beta.value().size() != m) throw ShapeError("layer_norm", xv.shape(), beta.shape());
  BasicTensor<T> out({n, m});
  BasicTensor<T> xhat({n, m});
  std::vector<T> inv_std(n);
  const auto& gv = gamma.value();
  const auto& bv = beta.value();
  for (std::size_t r = 0; r < n; ++r) {
    double mean = 0.0;
    for (std::size_t c = 0; c < m; ++c) mean += xv[r * m + c];
    mean /= m;
    double var = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      const double d = xv[r * m + c] - mean;
      var += d * d;
    }
    var /= m;
    inv_std[r] = static_cast<T>(1.0 / std::sqrt(var + eps));
    for (std::size_t c = 0; c < m; ++c) {
      const T h = static_cast<T>((xv[r * m + c] - mean)) * inv_std[r];
      xhat[r * m + c] = h;
      out[r * m + c] = gv[c] * h + bv[c];
    }
  }
  return x.tape->record(
      std::move(out), {x, gamma, beta},
      [x, gamma, beta, xhat = std::move(xhat), inv_std = std::move(inv_std), n, m](
          auto& tape, const auto& g) {
        const auto& gv = tape.value(gamma);
        if (auto* gx = tape.accumulator(x)) {
          for (std::size_t r = 0; r < n; ++r) {
            double mean_d = 0.0, mean_dx = 0.0;
            for (std::size_t c = 0; c < m; ++c) {
              const double d = static_cast<double>(g[r * m + c]) * gv[c];
              mean_d += d;
              mean_dx += d * xhat[r * m + c];
            }
            mean_d /= m;
            mean_dx /= m;
            for (std::size_t c = 0; c < m; ++c) {
              const double d = static_cast<double>(g[r * m + c]) * gv[c];
              (*gx)[r * m + c] +=
                  static_cast<T>(inv_std[r] * (d - mean_d - xhat[r * m + c] * mean_dx));
            }
          }
        }
        if (auto* gg = tape.accumulator(gamma)) {
          for (std::size_t i = 0; i < g.size(); ++i) (*gg)[i % m] += g[i] * xhat[i];
        }
        if (auto* gb = tape.accumulator(beta)) {
          for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i % m] += g[i];
        }
      });
}

/// Row-wise softmax with max subtraction; denominators in double.
template <typename T>
BasicVar<T> softmax(BasicVar<T> x) {
  const auto& xv = x.value();
  const std::size_t n = xv.rows(), m = xv.cols();
  BasicTensor<T> out({n, m});
  for (std::size_t r = 0; r < n; ++r) {
    const T* row = xv.data().data() + r * m;
    const T peak = *std::max_element(row, row + m);
    double denom = 0.0;
    for (std::size_t c = 0; c < m; ++c) denom += std::exp(static_cast<double>(row[c] - peak));
    for (std::size_t c = 0; c < m; ++c) {
      out[r * m + c] = static_cast<T>(std::exp(static_cast<double>(row[c] - peak)) / denom);
    }
  }
  auto y = out;
  return x.tape->record(std::move(out), {x}, [x, y = std::move(y), n, m](auto& tape, const auto& g) {
    if (auto* gx = tape.accumulator(x)) {
      for (std::size_t r = 0; r < n; ++r) {
        double dot = 0.0;
        for (std::size_t c = 0; c < m; ++c) dot += static_cast<double>(g[r * m + c]) * y[r * m + c];
        for (std::size_t c = 0; c < m; ++c) {
          (*gx)[r * m + c] += static_cast<T>(y[r * m + c] * (g[r * m + c] - dot));
        }
      }
    }
  });
}

template <typename T>
BasicVar<T> transpose(BasicVar<T> x) {
  const auto& xv = x.value();
  const std::size_t n = xv.rows(), m = xv.cols();
  BasicTensor<T> out({m, n});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) out[c * n + r] = xv[r * m + c];
  }
  return x.tape->record(std::move(out), {x}, [x, n, m](auto& tape, const auto& g) {
    if (auto* gx = tape.accumulator(x)) {
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < m; ++c) (*gx)[r * m + c] += g[c * n + r];
      }
    }
  });
}

/// Same data, new (rows x cols) view; element count must match.
template <typename T>
BasicVar<T> reshape(BasicVar<T> x, std::size_t rows, std::size_t cols) {
  const auto& xv = x.value();
  if (rows * cols != xv.size()) throw ShapeError("reshape", xv.shape(), Shape{rows, cols});
  BasicTensor<T> out({rows, cols}, xv.storage());
  return x.tape->record(std::move(out), {x}, [x](auto& tape, const auto& g) {
    if (auto* gx = tape.accumulator(x)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i];
    }
  });
}

/// Concatenates along the feature (column) axis.
template <typename T>
BasicVar<T> concat_cols(const std::vector<BasicVar<T>>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t n = parts.front().value().rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.value().rows() != n) {
      throw ShapeError("concat_cols", parts.front().shape(), p.shape());
    }
    widths.push_back(p.value().cols());
    total += widths.back();
  }
  BasicTensor<T> out({n, total});
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& v = parts[k].value();
    for (std::size_t r = 0; r < n; ++r) {
      std::copy_n(v.data().data() + r * widths[k], widths[k], out.data().data() + r * total + offset);
    }
    offset += widths[k];
  }
  return parts.front().tape->record(
      std::move(out), parts, [parts, widths, n, total](auto& tape, const auto& g) {
        std::size_t offset = 0;
        for (std::size_t k = 0; k < parts.size(); ++k) {
          if (auto* acc = tape.accumulator(parts[k])) {
            for (std::size_t r = 0; r < n; ++r) {
              for (std::size_t c = 0; c < widths[k]; ++c) {
                (*acc)[r * widths[k] + c] += g[r * total + offset + c];
              }
            }
          }
          offset += widths[k];
        }
      });
}

template <typename T>
BasicVar<T> slice_cols(BasicVar<T> x, std::size_t start, std::size_t count) {
  const auto& xv = x.value();
  const std::size_t n = xv.rows(), m = xv.cols();
  if (start + count > m) throw ShapeError("slice_cols", xv.shape(), Shape{n, start + count});
  BasicTensor<T> out({n, count});
  for (std::size_t r = 0; r < n; ++r) {
    std::copy_n(xv.data().data() + r * m + start, count, out.data().data() + r * count);
  }
  return x.tape->record(std::move(out), {x}, [x, n, m, start, count](auto& tape, const auto& g) {
    if (auto* gx = tape.accumulator(x)) {
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < count; ++c) (*gx)[r * m + start + c] += g[r * count + c];
      }
    }
  });
}

template <typename T>
BasicVar<T> concat_rows(const std::vector<BasicVar<T>>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const std::size_t m = parts.front().value().cols();
  std::vector<std::size_t> sizes;
  std::vector<T> data;
  std::size_t rows = 0;
  for (const auto& p : parts) {
    if (p.value().cols() != m) throw ShapeError("concat_rows", parts.front().shape(), p.shape());
    rows += p.value().rows();
    sizes.push_back(p.value().size());
    data.insert(data.end(), p.value().data().begin(), p.value().data().end());
  }
  BasicTensor<T> out({rows, m}, std::move(data));
  return parts.front().tape->record(std::move(out), parts, [parts, sizes](auto& tape, const auto& g) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      if (auto* acc = tape.accumulator(parts[k])) {
        for (std::size_t i = 0; i < sizes[k]; ++i) (*acc)[i] += g[offset + i];
      }
      offset += sizes[k];
    }
  });
}

template <typename T>
BasicVar<T> slice_rows(BasicVar<T> x, std::size_t start, std::size_t count) {
  const auto& xv = x.value();
  const std::size_t m = xv.cols();
  if (start + count > xv.rows()) throw ShapeError("slice_rows", xv.shape(), Shape{start + count, m});
  std::vector<T> data(xv.data().begin() + start * m, xv.data().begin() + (start + count) * m);
  BasicTensor<T> out({count, m}, std::move(data));
  return x.tape->record(std::move(out), {x}, [x, start, m](auto& tape, const auto& g) {
    if (auto* gx = tape.accumulator(x)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gx)[start * m + i] += g[i];
    }
  });
}

/// Sum of all elements (double accumulation), shape (1, 1).
template <typename T>
BasicVar<T> sum(BasicVar<T> x) {
  double acc = 0.0;
  for (T v : x.value().data()) acc += v;
  BasicTensor<T> out({1, 1}, std::vector<T>{static_cast<T>(acc)});
  return x.tape->record(std::move(out), {x}, [x](auto& tape, const auto& g) {
    if (auto* gx = tape.accumulator(x)) {
      for (auto& v : gx->data()) v += g[0];
    }
  });
}

template <typename T>
BasicVar<T> mean(BasicVar<T> x) {
  return scale(sum(x), static_cast<T>(1.0 / static_cast<double>(x.value().size())));
}

/// sum(mask * (a - b)^2) / max(sum(mask), 1). The mask is a constant.
template <typename T>
BasicVar<T> masked_mse(BasicVar<T> pred, BasicVar<T> target, const BasicTensor<T>& mask) {
  auto* tape = pred.tape;
  double weight = 0.0;
  for (T v : mask.data()) weight += v;
  const auto diff = sub(pred, target);
  const auto sq = mul(diff, diff);
  const auto kept = mul(sq, tape->constant(mask));
  return scale(sum(kept), static_cast<T>(1.0 / std::max(weight, 1.0)));
}

/// Attention weights softmax(Q K^T / sqrt(d_k)) for one query block.
template <typename T>
BasicVar<T> attention_weights(BasicVar<T> query, BasicVar<T> keys) {
  const std::size_t dk = keys.value().cols();
  if (query.value().cols() != dk) throw ShapeError("attention", query.shape(), keys.shape());
  const auto scores = scale(matmul(query, transpose(keys)),
                            static_cast<T>(1.0 / std::sqrt(static_cast<double>(dk))));
  return softmax(scores);
}

/// Adaptive attention: every agent brings its own query block Q_i against
/// shared keys K and values V; att_i = softmax(Q_i K^T / sqrt(d_k)) V and the
/// per-agent results are concatenated along the feature axis.
template <typename T>
BasicVar<T> adaptive_attention(const std::vector<BasicVar<T>>& queries, BasicVar<T> keys,
                               BasicVar<T> values) {
  if (queries.empty()) throw ShapeError("adaptive_attention: no queries");
  if (keys.value().rows() != values.value().rows()) {
    throw ShapeError("adaptive_attention", keys.shape(), values.shape());
  }
  std::vector<BasicVar<T>> heads;
  heads.reserve(queries.size());
  for (const auto& q : queries) heads.push_back(matmul(attention_weights(q, keys), values));
  return concat_cols(heads);
}

}  // namespace auvhunt::nn
