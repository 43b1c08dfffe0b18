#pragma once

// Saturating power-law loss models L(N, D) = E + A/N^alpha + B/D^beta:
// evaluation, robust multi-start fitting, synthetic run generation, and the
// compute-optimal allocation frontier.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gsc {

// One training run: model size N, data tokens D, observed final loss.
struct RunRecord {
  std::string dataset_id;
  double params_n = 0.0;
  double tokens_d = 0.0;
  double final_loss = 0.0;
};

struct ScalingLaw {
  double e = 0.0;
  double a = 0.0;
  double b = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

// a, b, alpha, beta strictly positive and finite; e finite (any sign).
void validate_law(const ScalingLaw& law);

// E + A*N^-alpha + B*D^-beta; requires n > 0 and d > 0.
double evaluate_loss(const ScalingLaw& law, double n, double d);

enum class ResidualSpace {
  Linear,  // residual = prediction - loss
  Log,     // residual = log(prediction) - log(loss); losses must be positive
};

const char* to_string(ResidualSpace space);
ResidualSpace residual_space_from_string(std::string_view name);

inline constexpr double kDefaultHuberDeltaLinear = 1e-2;
inline constexpr double kDefaultHuberDeltaLog = 1e-3;

struct FitConfig {
  ResidualSpace residual_space = ResidualSpace::Linear;
  // Huber threshold; 0 selects the per-space default above.
  double huber_delta = 0.0;
  // Starting points; empty selects default_init_grid().
  std::vector<ScalingLaw> init_grid;
  std::uint64_t max_iters = 10000;
  double tolerance = 1e-8;  // scaled gradient threshold
};

// 108 starts: e in {-1, 0, 1}, log a and log b in {0, 2}, alpha and beta in
// {0.25, 0.75, 1.25}, enumerated with e outermost and beta innermost.
std::vector<ScalingLaw> default_init_grid();

struct FitResult {
  ScalingLaw law;
  double objective = 0.0;        // mean Huber loss over residuals at `law`
  std::uint32_t chosen_init = 0;  // index into the init grid
  bool converged = false;
  std::uint64_t num_runs_used = 0;
};

// Mean Huber objective of `law` against `runs` under `config`; the quantity
// fit_law minimizes, exposed for independent re-checks.
double fit_objective(const ScalingLaw& law, std::span<const RunRecord> runs,
                     const FitConfig& config = {});

// Robust multi-start fit. Optimizes (E, log A, log B, log alpha, log beta),
// so positivity constraints hold by construction. Runs are canonically
// ordered internally; permuting the input cannot change the result. Ties on
// the objective keep the lowest init index. Requires >= 6 runs spanning
// >= 2 distinct N and >= 2 distinct D.
FitResult fit_law(std::span<const RunRecord> runs, const FitConfig& config = {});

// Cartesian grid of noiseless or lognormally perturbed synthetic runs:
// loss = L(n, d) * exp(noise_sigma * z), z standard normal, one generator
// seeded with `seed` in row-major (n outer, d inner) order.
std::vector<RunRecord> synth_runs(const ScalingLaw& law, std::span<const double> n_grid,
                                  std::span<const double> d_grid, double noise_sigma,
                                  std::uint64_t seed);

// Compute model: C = coeff * N * D (FLOPs per token times tokens).
struct FlopsModel {
  double coeff = 6.0;
};

// Compute-optimal allocation under C = coeff * N * D:
//   N_opt = ((alpha A / (beta B)) * (C/coeff)^beta)^(1/(alpha+beta)),
//   D_opt = C / (coeff * N_opt).
// Evaluated in log space to avoid overflow at astronomical budgets.
double n_opt(const ScalingLaw& law, double compute_budget, const FlopsModel& flops = {});
double d_opt(const ScalingLaw& law, double compute_budget, const FlopsModel& flops = {});

}  // namespace gsc
