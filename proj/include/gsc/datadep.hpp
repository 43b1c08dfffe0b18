#pragma once

// Linear models of scaling-law parameters as functions of corpus
// compressibility h, with significance tests, blending against fixed
// reference constants, and frontier exponents.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gsc/lawfit.hpp"

namespace gsc {

enum class LawParam { E, A, B, Alpha, Beta };

inline constexpr LawParam kAllLawParams[] = {LawParam::E, LawParam::A, LawParam::B,
                                             LawParam::Alpha, LawParam::Beta};

const char* to_string(LawParam param);
LawParam law_param_from_string(std::string_view name);
double law_value(const ScalingLaw& law, LawParam param);

// One fitted law observed at compressibility h.
struct HLawPoint {
  double h = 0.0;
  ScalingLaw law;
};

// Point indices (into the regression input) dropped per parameter, e.g. to
// keep one wild intercept estimate from dominating a slope.
struct ExclusionPolicy {
  std::map<LawParam, std::vector<std::uint64_t>> excluded;
};

struct LinearFit {
  double slope = 0.0;      // value(h) = slope * h + intercept
  double intercept = 0.0;
  double p_value = 1.0;    // two-sided t-test of slope != 0, df = points_used - 2
  double r2 = 1.0;
  std::uint64_t points_used = 0;
  std::vector<std::uint64_t> excluded;  // sorted input indices left out
};

struct ParamRegressions {
  LinearFit e, a, b, alpha, beta;

  const LinearFit& fit(LawParam param) const;
  LinearFit& fit(LawParam param);
};

// Ordinary least squares of each law parameter against h. Requires at least
// 3 distinct h values per parameter after exclusions.
ParamRegressions regress_params(std::span<const HLawPoint> points,
                                const ExclusionPolicy& policy = {});

// Law predicted by the regression lines at compressibility h. Throws
// DomainError naming the first of A, B, alpha, beta whose line is
// non-positive at h, with the h where that line crosses zero.
ScalingLaw law_at(double h, const ParamRegressions& regressions);

// Fixed reference constants for the blend; defaults are the widely used
// web-text values and can be overridden from configuration.
struct ChinchillaConstants {
  double e = 1.69;
  double a = 406.4;
  double b = 410.7;
  double alpha = 0.34;
  double beta = 0.28;
};

struct BlendConfig {
  double epsilon = 1.0;  // 0 = reference constants only, 1 = regression only
};

// Componentwise (1 - epsilon) * reference + epsilon * (slope * h + intercept),
// with the same positivity checks as law_at. epsilon must lie in [0, 1];
// epsilon 0 and 1 reproduce the endpoints exactly.
ScalingLaw blended_law(double h, const BlendConfig& blend, const ChinchillaConstants& reference,
                       const ParamRegressions& regressions);

// h where the regression lines of two parameters intersect; nullopt when the
// slopes are exactly equal.
std::optional<double> crossover_h(const ParamRegressions& regressions, LawParam x, LawParam y);

// Frontier growth exponents: N_opt ~ C^bn, D_opt ~ C^bd with
// bn = beta/(alpha+beta); bd is computed as 1 - bn so the pair sums to 1
// exactly.
struct FrontierExponents {
  double bn = 0.0;
  double bd = 0.0;
};

FrontierExponents frontier_exponent(const ScalingLaw& law);

}  // namespace gsc
