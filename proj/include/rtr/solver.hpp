// ADMM solvers for low-rank tensor recovery under fiber-sparse corruption.
//
// Model: an observed tensor B decomposes as B = X + E (full observation) or
// B_Omega = (X + E)_Omega (partial observation), with X low Tucker rank and
// E nonzero on few mode-m fibers. Both solvers minimize
//
//     sum_i ||X_(i)||_*  +  lambda * ||E_(m)||_{2,1}
//
// by splitting X into one auxiliary tensor per mode and alternating
// closed-form updates:
//
//   E   <- fold_m( col_shrink( C_(m), lambda/(mu*N) ) ),
//          C = (1/N) sum_i ( Y_i/mu + B - X_i [- O] )
//   X_i <- fold_i( svt( (B + Y_i/mu - E [- O])_(i), 1/mu ) )
//   O   <- (1/N) sum_i ( Y_i/mu + B - X_i - E ) off Omega, 0 on Omega
//          (partial observation only; O compensates the unobserved entries)
//   Y_i <- Y_i + mu * ( B - X_i - E [- O] )
//
// converging when ||B - E - mean(X_i) [- O]||_F / ||B||_F <= epsilon.
//
// The outlier term is updated before the low-rank terms by default; updating
// in the opposite order is available through SolverConfig::update_order and
// converges to the same solution.

#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <vector>

#include "rtr/prox.hpp"
#include "rtr/tensor.hpp"

namespace rtr {

enum class Regularizer { L21, L1 };

enum class UpdateOrder {
  OutlierFirst,  // E, then X_i (default; converges faster)
  LowRankFirst,  // X_i, then E
};

struct SolverState;

struct SolverConfig {
  // Weight of the sparsity term. Defaults to 1/(0.03 * max_n I_n) for L21
  // and 1/sqrt(max_n I_n) for the L1 baseline.
  std::optional<double> lambda;
  // Initial augmented Lagrangian penalty. Defaults to
  // (prod_n I_n) / (4 * sum |b|), the usual robust-PCA heuristic.
  std::optional<double> mu;
  // Penalty growth per iteration, mu_{k+1} = min(mu_growth * mu_k, mu_cap).
  // A constant penalty (mu_growth = 1) makes the feasibility residual decay
  // only sublinearly; the geometric schedule reaches tight tolerances in a
  // few dozen iterations.
  double mu_growth = 1.6;
  double mu_cap_factor = 1e7;  // mu_cap = mu_cap_factor * initial mu
  double epsilon = 1e-7;
  int max_iters = 500;
  // Absolute cutoff on ||E_(m) column||_2 for flagging outlier fibers.
  // Defaults to a relative cutoff: 1e-6 of the largest column norm for L21
  // (whose prox zeroes columns exactly), 5e-2 for L1 (which does not).
  std::optional<double> outlier_threshold;
  Regularizer regularizer = Regularizer::L21;
  // 1-based mode along which fibers are corrupted.
  int outlier_mode = 1;
  UpdateOrder update_order = UpdateOrder::OutlierFirst;
  // Called once per iteration with (iteration, residual).
  std::function<void(int, double)> progress;
  // Called once per iteration with the full iterate; for diagnostics/tests.
  std::function<void(const SolverState&)> state_hook;
};

struct SolverState {
  std::vector<DenseTensor> x;  // auxiliary low-rank iterates X_i
  DenseTensor e;
  DenseTensor o;               // compensation tensor; empty for full observation
  std::vector<DenseTensor> y;  // multipliers Y_i
  int iteration = 0;
  std::vector<double> residuals;
};

struct SolverResult {
  DenseTensor x_hat;  // mean of the X_i with detected outlier fibers zeroed
  DenseTensor e_hat;
  std::vector<Index> outlier_fibers;  // 0-based columns of E_(m), ascending
  int iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
  std::vector<double> residual_history;
  double lambda_used = 0.0;
  double mu_used = 0.0;
  double threshold_used = 0.0;
};

// Empirical lambda = 1/(0.03 * I_m), I_m the largest extent.
inline double default_lambda(std::span<const Index> shape) {
  const Index im = *std::max_element(shape.begin(), shape.end());
  return 1.0 / (0.03 * static_cast<double>(im));
}

// L1-baseline default, the principal-component-pursuit convention.
inline double default_lambda_l1(std::span<const Index> shape) {
  const Index im = *std::max_element(shape.begin(), shape.end());
  return 1.0 / std::sqrt(static_cast<double>(im));
}

// Flags column j of unfold(e_hat, mode) iff its l2 norm exceeds `threshold`
// strictly. Returns ascending 0-based column indices.
inline std::vector<Index> detect_outliers(const DenseTensor& e_hat, int mode, double threshold) {
  if (threshold < 0) throw std::invalid_argument("detect_outliers: threshold must be >= 0");
  const Matrix em = unfold(e_hat, mode);
  std::vector<Index> out;
  for (Eigen::Index j = 0; j < em.cols(); ++j)
    if (em.col(j).norm() > threshold) out.push_back(static_cast<Index>(j));
  return out;
}

namespace detail {

// Zeroes the mode-`mode` fibers listed in `fibers` (0-based unfolding columns).
inline void zero_fibers(DenseTensor& t, int mode, std::span<const Index> fibers) {
  const auto s = mode_split(t.shape(), mode);
  double* data = t.data();
  for (Index j : fibers) {
    const Index l = j % s.left;
    const Index r = j / s.left;
    for (Index i = 0; i < s.extent; ++i) data[l + s.left * (i + s.extent * r)] = 0.0;
  }
}

inline double resolve_lambda(const SolverConfig& cfg, std::span<const Index> shape) {
  if (cfg.lambda) {
    if (*cfg.lambda <= 0) throw std::invalid_argument("lambda must be positive");
    return *cfg.lambda;
  }
  return cfg.regularizer == Regularizer::L21 ? default_lambda(shape) : default_lambda_l1(shape);
}

inline double resolve_mu(const SolverConfig& cfg, const DenseTensor& b) {
  if (cfg.mu) {
    if (*cfg.mu <= 0) throw std::invalid_argument("mu must be positive");
    return *cfg.mu;
  }
  const double l1 = b.vec().cwiseAbs().sum();
  return static_cast<double>(b.size()) / (4.0 * l1);
}

// E-update: prox of the sparsity term at C.
inline DenseTensor sparse_prox(const DenseTensor& c, const SolverConfig& cfg, double kappa) {
  if (cfg.regularizer == Regularizer::L21)
    return fold(col_shrink(unfold(c, cfg.outlier_mode), kappa), cfg.outlier_mode, c.shape());
  DenseTensor e = c;
  double* v = e.data();
  for (Index i = 0; i < e.size(); ++i) {
    const double a = std::abs(v[i]) - kappa;
    v[i] = a > 0 ? (v[i] > 0 ? a : -a) : 0.0;
  }
  return e;
}

// Detection threshold, detection, and fiber zeroing shared by both solvers.
inline void finalize_result(SolverResult& res, const SolverConfig& cfg) {
  double threshold;
  if (cfg.outlier_threshold) {
    threshold = *cfg.outlier_threshold;
  } else {
    const Matrix em = unfold(res.e_hat, cfg.outlier_mode);
    double max_norm = 0;
    for (Eigen::Index j = 0; j < em.cols(); ++j) max_norm = std::max(max_norm, em.col(j).norm());
    const double rel = cfg.regularizer == Regularizer::L21 ? 1e-6 : 5e-2;
    threshold = rel * max_norm;
  }
  res.threshold_used = threshold;
  res.outlier_fibers = detect_outliers(res.e_hat, cfg.outlier_mode, threshold);
  zero_fibers(res.x_hat, cfg.outlier_mode, res.outlier_fibers);
}

inline void validate(const DenseTensor& b, const SolverConfig& cfg) {
  if (b.empty()) throw std::invalid_argument("solver: empty input tensor");
  b.check_mode(cfg.outlier_mode);
  if (cfg.epsilon <= 0) throw std::invalid_argument("epsilon must be positive");
  if (cfg.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (cfg.mu_growth < 1.0) throw std::invalid_argument("mu_growth must be >= 1");
  if (cfg.mu_cap_factor < 1.0) throw std::invalid_argument("mu_cap_factor must be >= 1");
  if (cfg.outlier_threshold && *cfg.outlier_threshold < 0)
    throw std::invalid_argument("outlier_threshold must be >= 0");
}

inline DenseTensor mean_of(const std::vector<DenseTensor>& xs) {
  DenseTensor m = xs.front();
  for (std::size_t i = 1; i < xs.size(); ++i) m += xs[i];
  m.vec() *= 1.0 / static_cast<double>(xs.size());
  return m;
}

}  // namespace detail

// Algorithm for the fully observed problem. Returns converged=false (with
// the final iterate) when the residual is still above epsilon after
// max_iters sweeps; numerical SVD failures throw SvdError.
inline SolverResult horpca_fiber(const DenseTensor& b, const SolverConfig& cfg = {}) {
  detail::validate(b, cfg);
  const int order = b.order();
  const double n = static_cast<double>(order);
  const double bnorm = frob_norm(b);

  SolverResult res;
  res.lambda_used = detail::resolve_lambda(cfg, b.shape());

  if (bnorm == 0.0) {  // trivial decomposition of the zero tensor
    res.x_hat = DenseTensor(b.shape());
    res.e_hat = DenseTensor(b.shape());
    res.mu_used = cfg.mu.value_or(1.0);
    res.converged = true;
    detail::finalize_result(res, cfg);
    return res;
  }

  const double mu0 = detail::resolve_mu(cfg, b);
  res.mu_used = mu0;
  const double mu_cap = cfg.mu_cap_factor * mu0;
  double mu = mu0;

  SolverState st;
  st.x.assign(order, DenseTensor(b.shape()));
  st.y.assign(order, DenseTensor(b.shape()));
  st.e = DenseTensor(b.shape());

  DenseTensor xbar(b.shape());
  const auto update_e = [&] {
    DenseTensor c = b;
    for (int i = 0; i < order; ++i) {
      c.vec() += st.y[i].vec() / mu - st.x[i].vec();
    }
    c.vec() *= 1.0 / n;
    st.e = detail::sparse_prox(c, cfg, res.lambda_used / (mu * n));
  };
  const auto update_x = [&] {
    for (int i = 0; i < order; ++i) {
      DenseTensor t = b;
      t.vec() += st.y[i].vec() / mu - st.e.vec();
      st.x[i] = fold(svt(unfold(t, i + 1), 1.0 / mu), i + 1, b.shape());
    }
  };

  for (int k = 0; k < cfg.max_iters; ++k) {
    if (cfg.update_order == UpdateOrder::OutlierFirst) {
      update_e();
      update_x();
    } else {
      update_x();
      update_e();
    }
    for (int i = 0; i < order; ++i) {
      st.y[i].vec() += mu * (b.vec() - st.x[i].vec() - st.e.vec());
    }

    xbar = detail::mean_of(st.x);
    const double residual = (b.vec() - st.e.vec() - xbar.vec()).norm() / bnorm;
    st.iteration = k + 1;
    st.residuals.push_back(residual);
    if (cfg.progress) cfg.progress(k + 1, residual);
    if (cfg.state_hook) cfg.state_hook(st);
    if (residual <= cfg.epsilon) break;
    mu = std::min(mu * cfg.mu_growth, mu_cap);
  }

  res.iterations = st.iteration;
  res.residual_history = st.residuals;
  res.final_residual = st.residuals.back();
  res.converged = res.final_residual <= cfg.epsilon;
  res.x_hat = std::move(xbar);
  res.e_hat = std::move(st.e);
  detail::finalize_result(res, cfg);
  return res;
}

// Algorithm for the partially observed problem. Unobserved entries of b are
// forcibly zeroed on entry; the compensation tensor O carries whatever value
// the unobserved entries need and stays exactly zero on the observed set.
inline SolverResult robust_completion(const DenseTensor& b_in, const ObservationMask& mask,
                                      const SolverConfig& cfg = {}) {
  detail::validate(b_in, cfg);
  if (mask.shape() != b_in.shape())
    throw std::invalid_argument("robust_completion: mask shape must match tensor shape");
  if (mask.observed_count() == 0)
    throw std::invalid_argument("robust_completion: mask has no observed entries");

  const DenseTensor b = mask.apply(b_in);
  const int order = b.order();
  const double n = static_cast<double>(order);
  const double bnorm = frob_norm(b);

  SolverResult res;
  res.lambda_used = detail::resolve_lambda(cfg, b.shape());

  if (bnorm == 0.0) {
    res.x_hat = DenseTensor(b.shape());
    res.e_hat = DenseTensor(b.shape());
    res.mu_used = cfg.mu.value_or(1.0);
    res.converged = true;
    detail::finalize_result(res, cfg);
    return res;
  }

  const double mu0 = detail::resolve_mu(cfg, b);
  res.mu_used = mu0;
  const double mu_cap = cfg.mu_cap_factor * mu0;
  double mu = mu0;

  SolverState st;
  st.x.assign(order, DenseTensor(b.shape()));
  st.y.assign(order, DenseTensor(b.shape()));
  st.e = DenseTensor(b.shape());
  st.o = DenseTensor(b.shape());

  DenseTensor xbar(b.shape());
  const auto update_e = [&] {
    DenseTensor c = b;
    for (int i = 0; i < order; ++i) {
      c.vec() += st.y[i].vec() / mu - st.x[i].vec();
    }
    c.vec() *= 1.0 / n;
    c.vec() -= st.o.vec();
    st.e = detail::sparse_prox(c, cfg, res.lambda_used / (mu * n));
  };
  const auto update_x = [&] {
    for (int i = 0; i < order; ++i) {
      DenseTensor t = b;
      t.vec() += st.y[i].vec() / mu - st.e.vec() - st.o.vec();
      st.x[i] = fold(svt(unfold(t, i + 1), 1.0 / mu), i + 1, b.shape());
    }
  };
  const auto update_o = [&] {
    DenseTensor acc = b;
    for (int i = 0; i < order; ++i) {
      acc.vec() += st.y[i].vec() / mu - st.x[i].vec();
    }
    acc.vec() *= 1.0 / n;
    acc.vec() -= st.e.vec();
    for (Index j = 0; j < acc.size(); ++j)
      if (mask.observed(j)) acc[j] = 0.0;
    st.o = std::move(acc);
  };

  for (int k = 0; k < cfg.max_iters; ++k) {
    if (cfg.update_order == UpdateOrder::OutlierFirst) {
      update_e();
      update_x();
    } else {
      update_x();
      update_e();
    }
    update_o();
    for (int i = 0; i < order; ++i) {
      st.y[i].vec() += mu * (b.vec() - st.x[i].vec() - st.e.vec() - st.o.vec());
    }

    xbar = detail::mean_of(st.x);
    const double residual =
        (b.vec() - st.e.vec() - xbar.vec() - st.o.vec()).norm() / bnorm;
    st.iteration = k + 1;
    st.residuals.push_back(residual);
    if (cfg.progress) cfg.progress(k + 1, residual);
    if (cfg.state_hook) cfg.state_hook(st);
    if (residual <= cfg.epsilon) break;
    mu = std::min(mu * cfg.mu_growth, mu_cap);
  }

  res.iterations = st.iteration;
  res.residual_history = st.residuals;
  res.final_residual = st.residuals.back();
  res.converged = res.final_residual <= cfg.epsilon;
  res.x_hat = std::move(xbar);
  res.e_hat = std::move(st.e);
  detail::finalize_result(res, cfg);
  return res;
}

}  // namespace rtr
