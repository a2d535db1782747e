// Copyright (c) 2026 The lau authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense 2-D row-major tensors plus the small kernel set the rest of the
// library is written against: matrix products (including the transposed
// variants backward passes want), elementwise maps, row softmax, Gaussian
// initialization and a central-difference gradient probe.
//
// Conventions used throughout the library:
//   * a Tensor is batch-major: rows index batch elements, cols index features;
//   * weights multiply on the right (y = x * W, W is in_dim x out_dim);
//   * every producing operation validates that its output is finite and
//     throws std::runtime_error otherwise - NaN/Inf never propagate silently.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace lau {

inline void check(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

template <class T = double>
class Tensor {
  static_assert(std::is_floating_point_v<T>, "Tensor requires a floating-point scalar");

 public:
  Tensor() = default;
  Tensor(int rows, int cols, T fill = T(0)) : rows_(rows), cols_(cols) {
    check(rows > 0 && cols > 0, "Tensor: dimensions must be positive");
    data_.assign(static_cast<std::size_t>(rows) * cols, fill);
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  T operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

template <class T>
inline void ensure_finite(const Tensor<T>& t, const char* what) {
  const T* p = t.data();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(p[i]))
      throw std::runtime_error(std::string(what) + ": non-finite value produced");
  }
}

// ---------------------------------------------------------------------------
// products

template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  check(a.cols() == b.rows(), "matmul: inner dimensions differ");
  Tensor<T> out(a.rows(), b.cols());
  const int m = a.rows(), k = a.cols(), n = b.cols();
  const T* ap = a.data();
  const T* bp = b.data();
  T* op = out.data();
  for (int i = 0; i < m; ++i) {
    const T* arow = ap + static_cast<std::size_t>(i) * k;
    T* orow = op + static_cast<std::size_t>(i) * n;
    for (int kk = 0; kk < k; ++kk) {
      const T aik = arow[kk];
      const T* brow = bp + static_cast<std::size_t>(kk) * n;
      for (int j = 0; j < n; ++j) orow[j] += aik * brow[j];
    }
  }
  ensure_finite(out, "matmul");
  return out;
}

// a^T * b without materializing the transpose; a is m x r, b is m x c.
template <class T>
Tensor<T> matmul_tn(const Tensor<T>& a, const Tensor<T>& b) {
  check(a.rows() == b.rows(), "matmul_tn: row counts differ");
  Tensor<T> out(a.cols(), b.cols());
  const int m = a.rows(), r = a.cols(), c = b.cols();
  const T* ap = a.data();
  const T* bp = b.data();
  T* op = out.data();
  for (int i = 0; i < m; ++i) {
    const T* arow = ap + static_cast<std::size_t>(i) * r;
    const T* brow = bp + static_cast<std::size_t>(i) * c;
    for (int kk = 0; kk < r; ++kk) {
      const T av = arow[kk];
      T* orow = op + static_cast<std::size_t>(kk) * c;
      for (int j = 0; j < c; ++j) orow[j] += av * brow[j];
    }
  }
  ensure_finite(out, "matmul_tn");
  return out;
}

// a * b^T; a is m x k, b is n x k.
template <class T>
Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b) {
  check(a.cols() == b.cols(), "matmul_nt: column counts differ");
  Tensor<T> out(a.rows(), b.rows());
  const int m = a.rows(), k = a.cols(), n = b.rows();
  const T* ap = a.data();
  const T* bp = b.data();
  for (int i = 0; i < m; ++i) {
    const T* arow = ap + static_cast<std::size_t>(i) * k;
    for (int j = 0; j < n; ++j) {
      const T* brow = bp + static_cast<std::size_t>(j) * k;
      T acc = T(0);
      for (int kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
      out(i, j) = acc;
    }
  }
  ensure_finite(out, "matmul_nt");
  return out;
}

// ---------------------------------------------------------------------------
// elementwise

namespace detail {
template <class T, class F>
Tensor<T> zip(const Tensor<T>& a, const Tensor<T>& b, F f, const char* what) {
  check(a.same_shape(b), std::string(what) + ": shape mismatch");
  Tensor<T> out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = f(a.data()[i], b.data()[i]);
  ensure_finite(out, what);
  return out;
}
template <class T, class F>
Tensor<T> map(const Tensor<T>& a, F f, const char* what) {
  Tensor<T> out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = f(a.data()[i]);
  ensure_finite(out, what);
  return out;
}
}  // namespace detail

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  return detail::zip(a, b, [](T x, T y) { return x + y; }, "add");
}

template <class T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  return detail::zip(a, b, [](T x, T y) { return x - y; }, "sub");
}

template <class T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  return detail::zip(a, b, [](T x, T y) { return x * y; }, "mul");
}

template <class T>
void add_inplace(Tensor<T>& dst, const Tensor<T>& src) {
  check(dst.same_shape(src), "add_inplace: shape mismatch");
  for (std::size_t i = 0; i < dst.size(); ++i) dst.data()[i] += src.data()[i];
}

template <class T>
Tensor<T> scale(const Tensor<T>& a, T s) {
  return detail::map(a, [s](T x) { return x * s; }, "scale");
}

template <class T>
void scale_inplace(Tensor<T>& a, T s) {
  for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] *= s;
}

template <class T>
Tensor<T> one_minus(const Tensor<T>& a) {
  return detail::map(a, [](T x) { return T(1) - x; }, "one_minus");
}

template <class T>
Tensor<T> sigmoid(const Tensor<T>& a) {
  return detail::map(a, [](T x) {
    // split on sign so exp never overflows
    if (x >= T(0)) {
      const T e = std::exp(-x);
      return T(1) / (T(1) + e);
    }
    const T e = std::exp(x);
    return e / (T(1) + e);
  }, "sigmoid");
}

template <class T>
Tensor<T> tanh(const Tensor<T>& a) {
  return detail::map(a, [](T x) { return std::tanh(x); }, "tanh");
}

// broadcast-add a 1 x cols bias row to every row
template <class T>
Tensor<T> add_row(const Tensor<T>& a, const Tensor<T>& bias) {
  check(bias.rows() == 1 && bias.cols() == a.cols(), "add_row: bias shape mismatch");
  Tensor<T> out(a.rows(), a.cols());
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c) out(r, c) = a(r, c) + bias(0, c);
  ensure_finite(out, "add_row");
  return out;
}

template <class T>
Tensor<T> col_sums(const Tensor<T>& a) {
  Tensor<T> out(1, a.cols());
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c) out(0, c) += a(r, c);
  ensure_finite(out, "col_sums");
  return out;
}

template <class T>
T sum(const Tensor<T>& a) {
  T acc = T(0);
  for (std::size_t i = 0; i < a.size(); ++i) acc += a.data()[i];
  return acc;
}

template <class T>
double sq_norm(const Tensor<T>& a) {
  double acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double v = a.data()[i];
    acc += v * v;
  }
  return acc;
}

template <class T>
double l2_norm(const Tensor<T>& a) {
  return std::sqrt(sq_norm(a));
}

template <class T>
Tensor<T> concat_cols(const Tensor<T>& a, const Tensor<T>& b) {
  check(a.rows() == b.rows(), "concat_cols: row counts differ");
  Tensor<T> out(a.rows(), a.cols() + b.cols());
  for (int r = 0; r < a.rows(); ++r) {
    for (int c = 0; c < a.cols(); ++c) out(r, c) = a(r, c);
    for (int c = 0; c < b.cols(); ++c) out(r, a.cols() + c) = b(r, c);
  }
  return out;
}

template <class T>
Tensor<T> slice_cols(const Tensor<T>& a, int c0, int c1) {
  check(0 <= c0 && c0 < c1 && c1 <= a.cols(), "slice_cols: bad range");
  Tensor<T> out(a.rows(), c1 - c0);
  for (int r = 0; r < a.rows(); ++r)
    for (int c = c0; c < c1; ++c) out(r, c - c0) = a(r, c);
  return out;
}

// ---------------------------------------------------------------------------
// softmax

// Numerically stable row softmax (max is subtracted before exponentiation).
template <class T>
Tensor<T> softmax_row(const Tensor<T>& a) {
  check(a.cols() >= 1, "softmax_row: need at least one column");
  ensure_finite(a, "softmax_row input");
  Tensor<T> out(a.rows(), a.cols());
  for (int r = 0; r < a.rows(); ++r) {
    T mx = a(r, 0);
    for (int c = 1; c < a.cols(); ++c) mx = std::max(mx, a(r, c));
    T denom = T(0);
    for (int c = 0; c < a.cols(); ++c) {
      const T e = std::exp(a(r, c) - mx);
      out(r, c) = e;
      denom += e;
    }
    for (int c = 0; c < a.cols(); ++c) out(r, c) /= denom;
  }
  ensure_finite(out, "softmax_row");
  return out;
}

// log softmax_row(a), computed without going through probabilities
template <class T>
Tensor<T> log_softmax_row(const Tensor<T>& a) {
  check(a.cols() >= 1, "log_softmax_row: need at least one column");
  ensure_finite(a, "log_softmax_row input");
  Tensor<T> out(a.rows(), a.cols());
  for (int r = 0; r < a.rows(); ++r) {
    T mx = a(r, 0);
    for (int c = 1; c < a.cols(); ++c) mx = std::max(mx, a(r, c));
    T denom = T(0);
    for (int c = 0; c < a.cols(); ++c) denom += std::exp(a(r, c) - mx);
    const T lse = mx + std::log(denom);
    for (int c = 0; c < a.cols(); ++c) out(r, c) = a(r, c) - lse;
  }
  ensure_finite(out, "log_softmax_row");
  return out;
}

// ---------------------------------------------------------------------------
// embedding access

template <class T>
Tensor<T> lookup_rows(const Tensor<T>& table, const std::vector<int32_t>& ids) {
  check(!ids.empty(), "lookup_rows: empty id list");
  Tensor<T> out(static_cast<int>(ids.size()), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    check(ids[i] >= 0 && ids[i] < table.rows(), "lookup_rows: id out of range");
    for (int c = 0; c < table.cols(); ++c) out(static_cast<int>(i), c) = table(ids[i], c);
  }
  return out;
}

template <class T>
void scatter_add_rows(Tensor<T>& table_grad, const std::vector<int32_t>& ids, const Tensor<T>& d) {
  check(static_cast<int>(ids.size()) == d.rows(), "scatter_add_rows: id/row count mismatch");
  check(table_grad.cols() == d.cols(), "scatter_add_rows: column mismatch");
  for (std::size_t i = 0; i < ids.size(); ++i) {
    check(ids[i] >= 0 && ids[i] < table_grad.rows(), "scatter_add_rows: id out of range");
    for (int c = 0; c < d.cols(); ++c) table_grad(ids[i], c) += d(static_cast<int>(i), c);
  }
}

// ---------------------------------------------------------------------------
// randomness

// Deterministic random source. The engine is std::mt19937_64 (bit-exact by
// the standard); uniforms take the top 53 bits, gaussians use Box-Muller
// with a cached spare. The stream is a pure function of the seed.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // uniform integer in [0, n); modulo bias is negligible for desk-scale n
  uint64_t below(uint64_t n) { return eng_() % n; }

  template <class V>
  void shuffle(std::vector<V>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// splitmix64 step; used to derive independent stream seeds from (base, tag)
inline uint64_t mix_seed(uint64_t base, uint64_t tag) {
  uint64_t z = base + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

template <class T = double>
Tensor<T> gaussian_init(int rows, int cols, Rng& rng, double stddev = 0.04) {
  Tensor<T> out(rows, cols);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data()[i] = static_cast<T>(rng.gaussian() * stddev);
  return out;
}

// ---------------------------------------------------------------------------
// finite differences

// Central-difference gradient of a scalar function, (f(x+h*e_i) - f(x-h*e_i)) / 2h.
// This is the reference every hand-derived backward pass in the library is
// checked against; it only ever calls f, never any backward code.
inline Tensor<double> finite_diff_grad(const std::function<double(const Tensor<double>&)>& f,
                                       const Tensor<double>& x, double step = 1e-5) {
  Tensor<double> grad(x.rows(), x.cols());
  Tensor<double> probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = probe.data()[i];
    probe.data()[i] = saved + step;
    const double up = f(probe);
    probe.data()[i] = saved - step;
    const double down = f(probe);
    probe.data()[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down))
      throw std::runtime_error("finite_diff_grad: non-finite function value");
    grad.data()[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

// max_i |a_i - b_i| / max(|a_i| + |b_i|, floor); the floor keeps coordinates
// whose true gradient is ~0 from amplifying finite-difference noise.
inline double max_rel_error(const Tensor<double>& a, const Tensor<double>& b,
                            double floor = 1e-3) {
  check(a.same_shape(b), "max_rel_error: shape mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max(std::abs(a.data()[i]) + std::abs(b.data()[i]), floor);
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]) / denom);
  }
  return worst;
}

}  // namespace lau
