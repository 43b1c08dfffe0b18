#pragma once

// Dense Levenberg-Marquardt least squares in the classic MINPACK style:
// Householder QR with column pivoting, a scaled trust region, and the
// Hebden/More iteration for the damping parameter. Problems here are tiny
// (dozens of residuals, a handful of parameters), so storage is plain
// std::vector and everything runs in deterministic double arithmetic.

#include <cstdint>
#include <functional>
#include <vector>

namespace gsc {

// Fills residuals f (size m) and, when jac is non-null, the column-major
// m x n Jacobian jac[i + j*m] = d f_i / d x_j, both evaluated at x.
using LevMarFn =
    std::function<void(const std::vector<double>& x, std::vector<double>& f,
                       std::vector<double>* jac)>;

struct LevMarOptions {
  double ftol = 1e-15;        // relative reduction threshold
  double xtol = 1e-15;        // relative step threshold
  double gtol = 1e-10;        // scaled gradient (cosine) threshold
  std::uint64_t max_fev = 10000;  // residual evaluation budget
  double step_factor = 100.0;     // initial trust region scale
  // Empty: scale the trust region by the Jacobian column norms (classic
  // adaptive mode). Non-empty: fixed per-parameter scales (size n, all
  // positive); the trust region then bounds ||diag * step|| directly.
  std::vector<double> diag;
};

struct LevMarResult {
  std::vector<double> x;
  double cost = 0.0;      // 0.5 * ||f(x)||^2
  std::uint64_t iters = 0;     // accepted steps
  std::uint64_t num_fev = 0;   // residual evaluations
  bool converged = false;      // a tolerance test fired (vs budget exhausted)
};

LevMarResult levmar_minimize(const LevMarFn& fn, std::vector<double> x0,
                             std::size_t num_residuals, const LevMarOptions& options = {});

}  // namespace gsc
