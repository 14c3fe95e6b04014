// Scoring recoveries against ground truth: relative error with corrupted
// fibers masked out, precision/recall of the detected outlier set, and the
// success criterion used for phase-transition grids.

#pragma once

#include <algorithm>
#include <ostream>
#include <set>
#include <vector>

#include "rtr/solver.hpp"
#include "rtr/synth.hpp"
#include "rtr/tensor.hpp"

namespace rtr {

struct Score {
  double re = 0.0;
  double precision = 1.0;
  double recall = 1.0;
  long tp = 0, fp = 0, fn = 0;
  int iterations = 0;
  double wall_time_seconds = 0.0;
};

// RE = ||x0 - x_hat||_F / ||x0||_F after zeroing x_hat on the detected
// fibers; x0 is expected to be zeroed on the true support already.
inline double relative_error(const DenseTensor& x_hat, const DenseTensor& x0,
                             std::span<const Index> detected, int mode = 1) {
  check_same_shape(x_hat, x0, "relative_error");
  const double denom = frob_norm(x0);
  if (denom == 0.0) throw std::invalid_argument("relative_error: x0 has zero norm");
  DenseTensor xh = x_hat;
  detail::zero_fibers(xh, mode, detected);
  return (x0.vec() - xh.vec()).norm() / denom;
}

struct Prf {
  double precision = 1.0;
  double recall = 1.0;
  long tp = 0, fp = 0, fn = 0;
};

// Set arithmetic on index sets. Empty detection with empty truth scores
// perfect; no detections and no false alarms is not a failure.
inline Prf prf(std::span<const Index> detected, std::span<const Index> truth) {
  std::set<Index> det(detected.begin(), detected.end());
  std::set<Index> tru(truth.begin(), truth.end());
  Prf out;
  for (Index j : det)
    if (tru.count(j))
      ++out.tp;
    else
      ++out.fp;
  out.fn = static_cast<long>(tru.size()) - out.tp;
  out.precision = (out.tp + out.fp) > 0 ? static_cast<double>(out.tp) / static_cast<double>(out.tp + out.fp) : 1.0;
  out.recall = (out.tp + out.fn) > 0 ? static_cast<double>(out.tp) / static_cast<double>(out.tp + out.fn) : 1.0;
  return out;
}

// A trial succeeds when precision and recall both exceed the threshold
// strictly (0.99 exactly does not pass the default).
inline bool success(const Score& s, double threshold = 0.99) {
  return s.precision > threshold && s.recall > threshold;
}

inline Score score_solve(const SolverResult& result, const GroundTruth& truth, int mode = 1) {
  Score s;
  s.re = relative_error(result.x_hat, truth.x0, result.outlier_fibers, mode);
  const Prf p = prf(result.outlier_fibers, truth.outlier_support);
  s.precision = p.precision;
  s.recall = p.recall;
  s.tp = p.tp;
  s.fp = p.fp;
  s.fn = p.fn;
  s.iterations = result.iterations;
  return s;
}

// Stable column block for experiment logs; wall time deliberately last so
// deterministic comparisons can strip it.
inline const char* score_csv_header() {
  return "re,precision,recall,tp,fp,fn,iterations,wall_time_seconds";
}

inline void append_score_csv(std::ostream& os, const Score& s) {
  os << s.re << ',' << s.precision << ',' << s.recall << ',' << s.tp << ',' << s.fp << ','
     << s.fn << ',' << s.iterations << ',' << s.wall_time_seconds;
}

}  // namespace rtr
