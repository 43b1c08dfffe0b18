#include "gsc/lawfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

#include "gsc/errors.hpp"
#include "gsc/levmar.hpp"
#include "gsc/rng.hpp"

namespace gsc {

namespace {

struct FitProblem {
  std::vector<double> ln_n, ln_d, loss, ln_loss;
  ResidualSpace space = ResidualSpace::Linear;
  double delta = 0.0;
  double inv_sqrt_m = 0.0;

  std::size_t size() const { return loss.size(); }

  // Residuals are Huber-transformed and scaled by 1/sqrt(m), so
  // 0.5*||f||^2 equals the mean Huber objective.
  void operator()(const std::vector<double>& theta, std::vector<double>& f,
                  std::vector<double>* jac) const {
    const std::size_t m = size();
    const double e = theta[0];
    const double alpha = std::exp(theta[3]);
    const double beta = std::exp(theta[4]);
    for (std::size_t i = 0; i < m; ++i) {
      const double ta = std::exp(theta[1] - alpha * ln_n[i]);
      const double tb = std::exp(theta[2] - beta * ln_d[i]);
      const double pred = e + ta + tb;

      double r;
      double dr[5] = {1.0, ta, tb, -alpha * ln_n[i] * ta, -beta * ln_d[i] * tb};
      if (space == ResidualSpace::Linear) {
        r = pred - loss[i];
      } else {
        if (!(pred > 0.0) || !std::isfinite(pred)) {
          f[i] = std::numeric_limits<double>::infinity();
          if (jac)
            for (int k = 0; k < 5; ++k) (*jac)[i + k * m] = 0.0;
          continue;
        }
        r = std::log(pred) - ln_loss[i];
        for (double& d : dr) d /= pred;
      }

      double s, slope;
      const double ar = std::fabs(r);
      if (ar <= delta) {
        s = r;
        slope = 1.0;
      } else {
        s = std::copysign(std::sqrt(delta * (2.0 * ar - delta)), r);
        slope = delta / std::fabs(s);
      }
      f[i] = s * inv_sqrt_m;
      if (jac)
        for (int k = 0; k < 5; ++k) (*jac)[i + k * m] = slope * dr[k] * inv_sqrt_m;
    }
  }
};

double resolve_delta(const FitConfig& config) {
  if (config.huber_delta < 0.0) throw ValidationError("huber_delta must be >= 0");
  if (config.huber_delta > 0.0) return config.huber_delta;
  return config.residual_space == ResidualSpace::Linear ? kDefaultHuberDeltaLinear
                                                        : kDefaultHuberDeltaLog;
}

void validate_runs(std::span<const RunRecord> runs, ResidualSpace space) {
  if (runs.size() < 6)
    throw DegeneracyError("fit requires at least 6 runs, got " + std::to_string(runs.size()));
  std::set<double> ns, ds;
  for (const RunRecord& r : runs) {
    if (!(r.params_n > 0.0) || !std::isfinite(r.params_n))
      throw ValidationError("run '" + r.dataset_id + "': params_n must be positive and finite");
    if (!(r.tokens_d > 0.0) || !std::isfinite(r.tokens_d))
      throw ValidationError("run '" + r.dataset_id + "': tokens_d must be positive and finite");
    if (!std::isfinite(r.final_loss))
      throw ValidationError("run '" + r.dataset_id + "': final_loss must be finite");
    if (space == ResidualSpace::Log && !(r.final_loss > 0.0))
      throw ValidationError("run '" + r.dataset_id +
                            "': final_loss must be positive in log residual space");
    ns.insert(r.params_n);
    ds.insert(r.tokens_d);
  }
  if (ns.size() < 2) throw DegeneracyError("fit requires at least 2 distinct params_n values");
  if (ds.size() < 2) throw DegeneracyError("fit requires at least 2 distinct tokens_d values");
}

FitProblem make_problem(std::span<const RunRecord> runs, const FitConfig& config) {
  // Canonical ordering makes the objective and every optimizer trajectory
  // invariant under permutations of the input.
  std::vector<const RunRecord*> order;
  order.reserve(runs.size());
  for (const RunRecord& r : runs) order.push_back(&r);
  std::sort(order.begin(), order.end(), [](const RunRecord* a, const RunRecord* b) {
    return std::tie(a->params_n, a->tokens_d, a->final_loss, a->dataset_id) <
           std::tie(b->params_n, b->tokens_d, b->final_loss, b->dataset_id);
  });

  FitProblem problem;
  problem.space = config.residual_space;
  problem.delta = resolve_delta(config);
  problem.inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(runs.size()));
  for (const RunRecord* r : order) {
    problem.ln_n.push_back(std::log(r->params_n));
    problem.ln_d.push_back(std::log(r->tokens_d));
    problem.loss.push_back(r->final_loss);
    problem.ln_loss.push_back(config.residual_space == ResidualSpace::Log
                                  ? std::log(r->final_loss)
                                  : 0.0);
  }
  return problem;
}

}  // namespace

void validate_law(const ScalingLaw& law) {
  if (!std::isfinite(law.e)) throw ValidationError("law parameter E must be finite");
  const struct {
    const char* name;
    double value;
  } positives[] = {{"A", law.a}, {"B", law.b}, {"alpha", law.alpha}, {"beta", law.beta}};
  for (const auto& p : positives) {
    if (!(p.value > 0.0) || !std::isfinite(p.value))
      throw ValidationError(std::string("law parameter ") + p.name +
                            " must be positive and finite");
  }
}

double evaluate_loss(const ScalingLaw& law, double n, double d) {
  validate_law(law);
  if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("n must be positive and finite");
  if (!(d > 0.0) || !std::isfinite(d)) throw ValidationError("d must be positive and finite");
  return law.e + law.a * std::pow(n, -law.alpha) + law.b * std::pow(d, -law.beta);
}

const char* to_string(ResidualSpace space) {
  switch (space) {
    case ResidualSpace::Linear: return "linear";
    case ResidualSpace::Log: return "log";
  }
  throw ValidationError("unknown residual space");
}

ResidualSpace residual_space_from_string(std::string_view name) {
  if (name == "linear") return ResidualSpace::Linear;
  if (name == "log") return ResidualSpace::Log;
  throw ValidationError("unknown residual space '" + std::string(name) + "'");
}

std::vector<ScalingLaw> default_init_grid() {
  std::vector<ScalingLaw> grid;
  grid.reserve(108);
  for (double e : {-1.0, 0.0, 1.0})
    for (double log_a : {0.0, 2.0})
      for (double log_b : {0.0, 2.0})
        for (double alpha : {0.25, 0.75, 1.25})
          for (double beta : {0.25, 0.75, 1.25})
            grid.push_back({e, std::exp(log_a), std::exp(log_b), alpha, beta});
  return grid;
}

double fit_objective(const ScalingLaw& law, std::span<const RunRecord> runs,
                     const FitConfig& config) {
  validate_law(law);
  validate_runs(runs, config.residual_space);
  const FitProblem problem = make_problem(runs, config);
  std::vector<double> theta = {law.e, std::log(law.a), std::log(law.b), std::log(law.alpha),
                               std::log(law.beta)};
  std::vector<double> f(problem.size());
  problem(theta, f, nullptr);
  double sum = 0.0;
  for (double v : f) sum += v * v;
  return 0.5 * sum;
}

FitResult fit_law(std::span<const RunRecord> runs, const FitConfig& config) {
  if (config.max_iters == 0) throw ValidationError("max_iters must be >= 1");
  if (!(config.tolerance >= 0.0)) throw ValidationError("tolerance must be >= 0");
  validate_runs(runs, config.residual_space);

  const std::vector<ScalingLaw> grid =
      config.init_grid.empty() ? default_init_grid() : config.init_grid;
  for (const ScalingLaw& init : grid) validate_law(init);

  const FitProblem problem = make_problem(runs, config);
  LevMarOptions options;
  options.gtol = config.tolerance;
  options.max_fev = config.max_iters;
  // Fixed unit scaling: when an exponent drifts high its exp() terms underflow
  // and the matching Jacobian columns go numerically dead, so column-norm
  // scaling would let the trust region admit huge raw steps along them and
  // overflow the model. Bounding the raw step keeps every trial evaluable.
  options.diag.assign(5, 1.0);

  bool have_best = false;
  FitResult best;
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    const ScalingLaw& init = grid[idx];
    std::vector<double> theta0 = {init.e, std::log(init.a), std::log(init.b),
                                  std::log(init.alpha), std::log(init.beta)};
    const LevMarResult res = levmar_minimize(
        [&problem](const std::vector<double>& x, std::vector<double>& f,
                   std::vector<double>* jac) { problem(x, f, jac); },
        theta0, problem.size(), options);
    if (!std::isfinite(res.cost)) continue;
    const ScalingLaw law = {res.x[0], std::exp(res.x[1]), std::exp(res.x[2]),
                            std::exp(res.x[3]), std::exp(res.x[4])};
    if (!std::isfinite(law.a) || !std::isfinite(law.b) || !std::isfinite(law.alpha) ||
        !std::isfinite(law.beta) || !std::isfinite(law.e))
      continue;
    // Strict improvement keeps the lowest init index on exact ties.
    if (!have_best || res.cost < best.objective) {
      have_best = true;
      best.law = law;
      best.objective = res.cost;
      best.chosen_init = static_cast<std::uint32_t>(idx);
      best.converged = res.converged;
    }
  }
  if (!have_best)
    throw NumericalError("no admissible fit from any start in the init grid");
  best.num_runs_used = runs.size();
  return best;
}

std::vector<RunRecord> synth_runs(const ScalingLaw& law, std::span<const double> n_grid,
                                  std::span<const double> d_grid, double noise_sigma,
                                  std::uint64_t seed) {
  validate_law(law);
  if (n_grid.empty() || d_grid.empty())
    throw ValidationError("synth_runs requires non-empty n and d grids");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw ValidationError("noise_sigma must be >= 0 and finite");

  Xoshiro256StarStar rng(seed);
  std::vector<RunRecord> runs;
  runs.reserve(n_grid.size() * d_grid.size());
  for (double n : n_grid) {
    for (double d : d_grid) {
      double loss = evaluate_loss(law, n, d);
      if (noise_sigma > 0.0) loss *= std::exp(noise_sigma * rng.normal());
      runs.push_back({"synth", n, d, loss});
    }
  }
  return runs;
}

double n_opt(const ScalingLaw& law, double compute_budget, const FlopsModel& flops) {
  validate_law(law);
  if (!(compute_budget > 0.0) || !std::isfinite(compute_budget))
    throw ValidationError("compute budget must be positive and finite");
  if (!(flops.coeff > 0.0) || !std::isfinite(flops.coeff))
    throw ValidationError("flops coefficient must be positive and finite");
  const double ln_ratio = std::log(law.alpha * law.a / (law.beta * law.b));
  const double ln_tokens_budget = std::log(compute_budget) - std::log(flops.coeff);
  return std::exp((ln_ratio + law.beta * ln_tokens_budget) / (law.alpha + law.beta));
}

double d_opt(const ScalingLaw& law, double compute_budget, const FlopsModel& flops) {
  return compute_budget / (flops.coeff * n_opt(law, compute_budget, flops));
}

}  // namespace gsc
