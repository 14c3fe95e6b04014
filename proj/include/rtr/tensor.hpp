// Dense N-way tensors and the multilinear primitives built on them:
// unfolding (matricization), folding, mode-n products, inner products and
// the Tucker composition.
//
// Conventions, used consistently everywhere in this library:
//
//  * Storage is column-major ("first index fastest"): the element at
//    multi-index (i_1, ..., i_N), all indices 0-based, lives at flat offset
//        i_1 + I_1*i_2 + I_1*I_2*i_3 + ...
//
//  * Modes are 1-based, matching the usual tensor-algebra notation: mode 1
//    fibers of a matrix are its columns.
//
//  * unfold(t, n) places the mode-n fibers as matrix columns. With
//    L = I_1*...*I_{n-1} and R = I_{n+1}*...*I_N, the fiber with remaining
//    indices (l, r), l in [0,L), r in [0,R) flattened column-major, becomes
//    column j = l + L*r. This is the standard Kolda-Bader column order, and
//    fold(m, n, shape) inverts it exactly. For mode 1 the unfolding is a
//    plain reshape of the flat data.
//
// Tensors are plain value types. Treat instances shared across threads as
// read-only; all free functions here are pure.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rtr {

using Index = std::int64_t;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace detail {

inline Index checked_num_elements(std::span<const Index> shape) {
  if (shape.empty()) throw std::invalid_argument("tensor shape must have at least one dimension");
  Index n = 1;
  for (Index d : shape) {
    if (d < 1) throw std::invalid_argument("tensor dimensions must be positive");
    n *= d;
  }
  return n;
}

}  // namespace detail

class DenseTensor {
 public:
  DenseTensor() = default;

  // Zero tensor of the given shape.
  explicit DenseTensor(std::vector<Index> shape)
      : shape_(std::move(shape)), data_(detail::checked_num_elements(shape_), 0.0) {}

  // Takes ownership of `data` (column-major). Rejects size mismatches and
  // non-finite entries; NaN would otherwise poison downstream SVDs silently.
  DenseTensor(std::vector<Index> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (static_cast<Index>(data_.size()) != detail::checked_num_elements(shape_))
      throw std::invalid_argument("tensor data length does not match shape");
    for (double v : data_)
      if (!std::isfinite(v)) throw std::invalid_argument("tensor entries must be finite");
  }

  bool empty() const { return shape_.empty(); }
  int order() const { return static_cast<int>(shape_.size()); }
  Index size() const { return static_cast<Index>(data_.size()); }
  const std::vector<Index>& shape() const { return shape_; }

  // Extent of the given 1-based mode.
  Index dim(int mode) const {
    check_mode(mode);
    return shape_[static_cast<std::size_t>(mode - 1)];
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](Index flat) { return data_[static_cast<std::size_t>(flat)]; }
  double operator[](Index flat) const { return data_[static_cast<std::size_t>(flat)]; }

  double& at(std::span<const Index> idx) { return data_[static_cast<std::size_t>(offset(idx))]; }
  double at(std::span<const Index> idx) const { return data_[static_cast<std::size_t>(offset(idx))]; }
  double& at(std::initializer_list<Index> idx) { return at(std::span<const Index>(idx.begin(), idx.size())); }
  double at(std::initializer_list<Index> idx) const {
    return data_[static_cast<std::size_t>(offset(std::span<const Index>(idx.begin(), idx.size())))];
  }

  // Flat offset of a 0-based multi-index.
  Index offset(std::span<const Index> idx) const {
    if (static_cast<int>(idx.size()) != order()) throw std::invalid_argument("index arity mismatch");
    Index off = 0, stride = 1;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (idx[k] < 0 || idx[k] >= shape_[k]) throw std::out_of_range("tensor index out of range");
      off += idx[k] * stride;
      stride *= shape_[k];
    }
    return off;
  }

  Eigen::Map<Vector> vec() { return {data_.data(), static_cast<Eigen::Index>(data_.size())}; }
  Eigen::Map<const Vector> vec() const { return {data_.data(), static_cast<Eigen::Index>(data_.size())}; }

  void check_mode(int mode) const {
    if (mode < 1 || mode > order())
      throw std::invalid_argument("mode " + std::to_string(mode) + " out of range for order " +
                                  std::to_string(order()) + " tensor");
  }

  bool same_shape(const DenseTensor& other) const { return shape_ == other.shape_; }

 private:
  std::vector<Index> shape_;
  std::vector<double> data_;
};

// Boolean tensor marking the observed entries (the set Omega).
class ObservationMask {
 public:
  ObservationMask() = default;

  // All-false mask of the given shape.
  explicit ObservationMask(std::vector<Index> shape)
      : shape_(std::move(shape)), observed_(detail::checked_num_elements(shape_), 0) {}

  ObservationMask(std::vector<Index> shape, std::vector<std::uint8_t> observed)
      : shape_(std::move(shape)), observed_(std::move(observed)) {
    if (static_cast<Index>(observed_.size()) != detail::checked_num_elements(shape_))
      throw std::invalid_argument("mask data length does not match shape");
  }

  static ObservationMask full(std::vector<Index> shape) {
    ObservationMask m(std::move(shape));
    std::fill(m.observed_.begin(), m.observed_.end(), std::uint8_t{1});
    return m;
  }

  const std::vector<Index>& shape() const { return shape_; }
  Index size() const { return static_cast<Index>(observed_.size()); }

  bool observed(Index flat) const { return observed_[static_cast<std::size_t>(flat)] != 0; }
  void set(Index flat, bool v) { observed_[static_cast<std::size_t>(flat)] = v ? 1 : 0; }

  Index observed_count() const {
    return std::count(observed_.begin(), observed_.end(), std::uint8_t{1});
  }

  bool all_observed() const {
    return std::find(observed_.begin(), observed_.end(), std::uint8_t{0}) == observed_.end();
  }

  const std::vector<std::uint8_t>& raw() const { return observed_; }

  // Zeroes the unobserved entries of t.
  DenseTensor apply(const DenseTensor& t) const {
    if (t.shape() != shape_) throw std::invalid_argument("mask/tensor shape mismatch");
    DenseTensor out = t;
    for (Index i = 0; i < t.size(); ++i)
      if (!observed(i)) out[i] = 0.0;
    return out;
  }

 private:
  std::vector<Index> shape_;
  std::vector<std::uint8_t> observed_;
};

inline void check_same_shape(const DenseTensor& a, const DenseTensor& b, const char* what) {
  if (!a.same_shape(b)) throw std::invalid_argument(std::string(what) + ": tensor shape mismatch");
}

// --- elementwise arithmetic -------------------------------------------------

inline DenseTensor operator+(const DenseTensor& a, const DenseTensor& b) {
  check_same_shape(a, b, "operator+");
  DenseTensor out = a;
  out.vec() += b.vec();
  return out;
}

inline DenseTensor operator-(const DenseTensor& a, const DenseTensor& b) {
  check_same_shape(a, b, "operator-");
  DenseTensor out = a;
  out.vec() -= b.vec();
  return out;
}

inline DenseTensor operator*(double s, const DenseTensor& t) {
  DenseTensor out = t;
  out.vec() *= s;
  return out;
}

inline DenseTensor& operator+=(DenseTensor& a, const DenseTensor& b) {
  check_same_shape(a, b, "operator+=");
  a.vec() += b.vec();
  return a;
}

inline DenseTensor& operator-=(DenseTensor& a, const DenseTensor& b) {
  check_same_shape(a, b, "operator-=");
  a.vec() -= b.vec();
  return a;
}

// --- unfolding / folding -----------------------------------------------------

namespace detail {

struct ModeSplit {
  Index left;    // product of extents before the mode
  Index extent;  // I_mode
  Index right;   // product of extents after the mode
};

inline ModeSplit mode_split(std::span<const Index> shape, int mode) {
  ModeSplit s{1, shape[static_cast<std::size_t>(mode - 1)], 1};
  for (int k = 0; k < mode - 1; ++k) s.left *= shape[static_cast<std::size_t>(k)];
  for (int k = mode; k < static_cast<int>(shape.size()); ++k) s.right *= shape[static_cast<std::size_t>(k)];
  return s;
}

}  // namespace detail

// Mode-n unfolding: an I_n x (prod of other extents) matrix whose columns are
// the mode-n fibers, ordered as documented at the top of this header.
inline Matrix unfold(const DenseTensor& t, int mode) {
  t.check_mode(mode);
  const auto s = detail::mode_split(t.shape(), mode);
  Matrix out(s.extent, s.left * s.right);
  const double* src = t.data();
  for (Index r = 0; r < s.right; ++r) {
    for (Index i = 0; i < s.extent; ++i) {
      const double* block = src + s.left * (i + s.extent * r);
      for (Index l = 0; l < s.left; ++l) out(i, l + s.left * r) = block[l];
    }
  }
  return out;
}

// Inverse of unfold: fold(unfold(t, n), n, t.shape()) == t exactly.
inline DenseTensor fold(const Matrix& m, int mode, std::span<const Index> shape) {
  detail::checked_num_elements(shape);
  if (mode < 1 || mode > static_cast<int>(shape.size()))
    throw std::invalid_argument("fold: mode out of range");
  const auto s = detail::mode_split(shape, mode);
  if (m.rows() != s.extent || m.cols() != s.left * s.right)
    throw std::invalid_argument("fold: matrix dimensions inconsistent with shape and mode");
  DenseTensor out(std::vector<Index>(shape.begin(), shape.end()));
  double* dst = out.data();
  for (Index r = 0; r < s.right; ++r) {
    for (Index i = 0; i < s.extent; ++i) {
      double* block = dst + s.left * (i + s.extent * r);
      for (Index l = 0; l < s.left; ++l) block[l] = m(i, l + s.left * r);
    }
  }
  return out;
}

// Mode-n product t x_n a: multiplies every mode-n fiber by `a`, replacing
// extent I_n with a.rows(). Satisfies unfold(result, n) == a * unfold(t, n).
inline DenseTensor mode_n_product(const DenseTensor& t, const Matrix& a, int mode) {
  t.check_mode(mode);
  if (a.cols() != t.dim(mode))
    throw std::invalid_argument("mode_n_product: matrix columns must match mode extent");
  std::vector<Index> out_shape = t.shape();
  out_shape[static_cast<std::size_t>(mode - 1)] = a.rows();
  Matrix prod = a * unfold(t, mode);
  return fold(prod, mode, out_shape);
}

inline double inner(const DenseTensor& a, const DenseTensor& b) {
  check_same_shape(a, b, "inner");
  return a.vec().dot(b.vec());
}

inline double frob_norm(const DenseTensor& t) { return t.vec().norm(); }

// --- Tucker ------------------------------------------------------------------

// Core tensor plus one orthonormal factor per mode. A (c_1,...,c_N) core with
// I_n x c_n factors composes to an I_1 x ... x I_N tensor of mode-n rank <= c_n.
struct TuckerFactors {
  DenseTensor core;
  std::vector<Matrix> factors;

  TuckerFactors(DenseTensor core_, std::vector<Matrix> factors_)
      : core(std::move(core_)), factors(std::move(factors_)) {
    if (static_cast<int>(factors.size()) != core.order())
      throw std::invalid_argument("TuckerFactors: need one factor per core mode");
    for (int n = 1; n <= core.order(); ++n) {
      const Matrix& u = factors[static_cast<std::size_t>(n - 1)];
      if (u.cols() != core.dim(n))
        throw std::invalid_argument("TuckerFactors: factor columns must match core extent");
      const double dev = (u.transpose() * u - Matrix::Identity(u.cols(), u.cols())).norm();
      if (dev > 1e-10)
        throw std::invalid_argument("TuckerFactors: factor columns not orthonormal (deviation " +
                                    std::to_string(dev) + ")");
    }
  }

  std::vector<Index> shape() const {
    std::vector<Index> s(factors.size());
    for (std::size_t k = 0; k < factors.size(); ++k) s[k] = factors[k].rows();
    return s;
  }
};

// X = G x_1 U1 x_2 U2 ... x_N UN.
inline DenseTensor tucker_compose(const TuckerFactors& f) {
  DenseTensor x = f.core;
  for (int n = 1; n <= f.core.order(); ++n)
    x = mode_n_product(x, f.factors[static_cast<std::size_t>(n - 1)], n);
  return x;
}

}  // namespace rtr
