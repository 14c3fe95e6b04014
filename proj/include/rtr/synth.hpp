// Synthetic ground-truth generation: random Tucker-low-rank tensors,
// fiber-wise corruption, and uniform observation masks.
//
// Everything is deterministic given SynthSpec::seed. Each ingredient draws
// from its own named sub-stream (see rng.hpp), so e.g. changing gamma does
// not change the observation mask drawn for the same seed.
//
// Counts are rounded half-up: |support| = round(gamma * p) mode-1 fibers,
// |observed| = round(rho * total) entries.

#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "rtr/rng.hpp"
#include "rtr/tensor.hpp"

namespace rtr {

struct SynthSpec {
  std::vector<Index> shape;
  std::vector<Index> tucker_rank;
  double gamma = 0.0;  // fraction of mode-1 fibers corrupted
  double rho = 1.0;    // fraction of entries observed
  std::uint64_t seed = 0;
};

struct GroundTruth {
  DenseTensor x0;  // true low-rank tensor, already zeroed on the corrupted fibers
  DenseTensor e0;  // corruption, nonzero exactly on the support
  DenseTensor b;   // (x0 + e0) with unobserved entries zeroed
  ObservationMask mask;
  std::vector<Index> outlier_support;  // 0-based mode-1 unfolding columns, ascending
};

namespace detail {

inline Index round_half_up(double x) { return static_cast<Index>(std::floor(x + 0.5)); }

// First k entries of a Fisher-Yates shuffle of [0, n).
inline std::vector<Index> sample_without_replacement(Index n, Index k, Rng& rng) {
  std::vector<Index> pool(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  for (Index i = 0; i < k; ++i) {
    const Index j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  std::vector<Index> out(pool.begin(), pool.begin() + k);
  std::sort(out.begin(), out.end());
  return out;
}

// Gram-Schmidt orthonormalization of Gaussian columns, one re-orthogonalization
// pass; redraws a column whose projection collapses (near-dependent draw).
inline Matrix gaussian_orthonormal(Index rows, Index cols, Rng& rng) {
  Matrix u(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (int attempt = 0;; ++attempt) {
      Vector v(rows);
      for (Index i = 0; i < rows; ++i) v[i] = rng.normal();
      const double orig = v.norm();
      for (int pass = 0; pass < 2; ++pass)
        for (Index k = 0; k < j; ++k) v -= u.col(k).dot(v) * u.col(k);
      const double norm = v.norm();
      if (norm > 1e-6 * orig) {
        u.col(j) = v / norm;
        break;
      }
      if (attempt > 64) throw std::runtime_error("gaussian_orthonormal: repeated degenerate draws");
    }
  }
  return u;
}

}  // namespace detail

// Random Tucker tensor: standard-Gaussian core, orthonormalized Gaussian
// factors. Mode-n numerical rank equals rank[n-1] with probability one.
inline std::pair<DenseTensor, TuckerFactors> gen_low_rank(std::span<const Index> shape,
                                                          std::span<const Index> rank,
                                                          std::uint64_t seed) {
  if (shape.size() != rank.size())
    throw std::invalid_argument("gen_low_rank: shape/rank arity mismatch");
  for (std::size_t k = 0; k < shape.size(); ++k)
    if (rank[k] < 1 || rank[k] > shape[k])
      throw std::invalid_argument("gen_low_rank: rank must be in [1, dim] per mode");

  Rng core_rng = stream_rng(seed, Stream::Core);
  DenseTensor core(std::vector<Index>(rank.begin(), rank.end()));
  for (Index i = 0; i < core.size(); ++i) core[i] = core_rng.normal();

  Rng factor_rng = stream_rng(seed, Stream::Factors);
  std::vector<Matrix> factors;
  factors.reserve(shape.size());
  for (std::size_t k = 0; k < shape.size(); ++k)
    factors.push_back(detail::gaussian_orthonormal(shape[k], rank[k], factor_rng));

  TuckerFactors tf(std::move(core), std::move(factors));
  return {tucker_compose(tf), std::move(tf)};
}

struct FiberCorruption {
  DenseTensor e0;
  std::vector<Index> outlier_support;
  DenseTensor x0_zeroed;
};

// Corrupts round(gamma * p) of the p mode-1 fibers with i.i.d. U(0,1) values
// and zeroes the matching fibers of x0.
inline FiberCorruption corrupt_fibers(const DenseTensor& x0, double gamma, std::uint64_t seed) {
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("corrupt_fibers: gamma in [0,1]");
  const Index i1 = x0.dim(1);
  const Index p = x0.size() / i1;
  const Index k = detail::round_half_up(gamma * static_cast<double>(p));

  Rng support_rng = stream_rng(seed, Stream::Support);
  std::vector<Index> support = detail::sample_without_replacement(p, k, support_rng);

  Rng value_rng = stream_rng(seed, Stream::Values);
  FiberCorruption out{DenseTensor(x0.shape()), std::move(support), x0};
  for (Index j : out.outlier_support) {
    for (Index i = 0; i < i1; ++i) {
      out.e0[i + i1 * j] = value_rng.uniform01();
      out.x0_zeroed[i + i1 * j] = 0.0;
    }
  }
  return out;
}

// Uniform observation mask with round(rho * total) observed entries.
inline ObservationMask sample_mask(std::span<const Index> shape, double rho, std::uint64_t seed) {
  if (rho <= 0.0 || rho > 1.0) throw std::invalid_argument("sample_mask: rho in (0,1]");
  ObservationMask mask(std::vector<Index>(shape.begin(), shape.end()));
  const Index total = mask.size();
  const Index k = detail::round_half_up(rho * static_cast<double>(total));
  Rng mask_rng = stream_rng(seed, Stream::Mask);
  for (Index flat : detail::sample_without_replacement(total, k, mask_rng)) mask.set(flat, true);
  return mask;
}

inline GroundTruth make_ground_truth(const SynthSpec& spec) {
  auto [x0, tf] = gen_low_rank(spec.shape, spec.tucker_rank, spec.seed);
  FiberCorruption corr = corrupt_fibers(x0, spec.gamma, spec.seed);
  ObservationMask mask = sample_mask(spec.shape, spec.rho, spec.seed);
  DenseTensor b = mask.apply(corr.x0_zeroed + corr.e0);
  return GroundTruth{std::move(corr.x0_zeroed), std::move(corr.e0), std::move(b),
                     std::move(mask), std::move(corr.outlier_support)};
}

}  // namespace rtr
