#include "gsc/datadep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>

#include "gsc/errors.hpp"
#include "gsc/stats.hpp"

namespace gsc {

namespace {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

LinearFit ols_line(const std::vector<double>& h, const std::vector<double>& y) {
  const std::size_t n = h.size();
  const double mh = stats::mean(h);
  const double my = stats::mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (h[i] - mh) * (h[i] - mh);
    sxy += (h[i] - mh) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mh;
  fit.points_used = n;

  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double resid = y[i] - (fit.slope * h[i] + fit.intercept);
    sse += resid * resid;
    sst += (y[i] - my) * (y[i] - my);
  }
  fit.r2 = sst == 0.0 ? 1.0 : 1.0 - sse / sst;

  const double df = static_cast<double>(n - 2);
  const double se = std::sqrt((sse / df) / sxx);
  if (se == 0.0) {
    fit.p_value = fit.slope == 0.0 ? 1.0 : 0.0;  // exact fit
  } else {
    fit.p_value = stats::student_t_two_sided_p(fit.slope / se, df);
  }
  return fit;
}

// Value of the blended line for `param` at h; pure_regression drops the
// reference contribution entirely (law_at).
struct BlendSpec {
  double epsilon;
  const ChinchillaConstants* reference;  // null for pure regression
};

double reference_value(const ChinchillaConstants& c, LawParam param) {
  switch (param) {
    case LawParam::E: return c.e;
    case LawParam::A: return c.a;
    case LawParam::B: return c.b;
    case LawParam::Alpha: return c.alpha;
    case LawParam::Beta: return c.beta;
  }
  throw ValidationError("unknown law parameter");
}

ScalingLaw evaluate_lines(double h, const BlendSpec& blend, const ParamRegressions& regressions) {
  ScalingLaw law;
  for (LawParam param : kAllLawParams) {
    const LinearFit& fit = regressions.fit(param);
    const double line = fit.slope * h + fit.intercept;
    double value, ref_part, line_weight;
    if (blend.reference == nullptr) {
      value = line;
      ref_part = 0.0;
      line_weight = 1.0;
    } else {
      ref_part = (1.0 - blend.epsilon) * reference_value(*blend.reference, param);
      line_weight = blend.epsilon;
      value = ref_part + line_weight * line;
    }
    if (param != LawParam::E && !(value > 0.0)) {
      // Solve ref_part + line_weight * (slope*h0 + intercept) = 0 for h0.
      const double denom = line_weight * fit.slope;
      const double crossing =
          denom != 0.0 ? -(ref_part + line_weight * fit.intercept) / denom : std::nan("");
      throw DomainError(to_string(param), crossing,
                        std::string("parameter ") + to_string(param) + " is non-positive at h=" +
                            fmt_double(h) + " (crosses zero at h=" + fmt_double(crossing) + ")");
    }
    switch (param) {
      case LawParam::E: law.e = value; break;
      case LawParam::A: law.a = value; break;
      case LawParam::B: law.b = value; break;
      case LawParam::Alpha: law.alpha = value; break;
      case LawParam::Beta: law.beta = value; break;
    }
  }
  return law;
}

}  // namespace

const char* to_string(LawParam param) {
  switch (param) {
    case LawParam::E: return "e";
    case LawParam::A: return "a";
    case LawParam::B: return "b";
    case LawParam::Alpha: return "alpha";
    case LawParam::Beta: return "beta";
  }
  throw ValidationError("unknown law parameter");
}

LawParam law_param_from_string(std::string_view name) {
  if (name == "e") return LawParam::E;
  if (name == "a") return LawParam::A;
  if (name == "b") return LawParam::B;
  if (name == "alpha") return LawParam::Alpha;
  if (name == "beta") return LawParam::Beta;
  throw ValidationError("unknown law parameter '" + std::string(name) + "'");
}

double law_value(const ScalingLaw& law, LawParam param) {
  switch (param) {
    case LawParam::E: return law.e;
    case LawParam::A: return law.a;
    case LawParam::B: return law.b;
    case LawParam::Alpha: return law.alpha;
    case LawParam::Beta: return law.beta;
  }
  throw ValidationError("unknown law parameter");
}

const LinearFit& ParamRegressions::fit(LawParam param) const {
  switch (param) {
    case LawParam::E: return e;
    case LawParam::A: return a;
    case LawParam::B: return b;
    case LawParam::Alpha: return alpha;
    case LawParam::Beta: return beta;
  }
  throw ValidationError("unknown law parameter");
}

LinearFit& ParamRegressions::fit(LawParam param) {
  return const_cast<LinearFit&>(std::as_const(*this).fit(param));
}

ParamRegressions regress_params(std::span<const HLawPoint> points,
                                const ExclusionPolicy& policy) {
  for (const HLawPoint& p : points) {
    if (!std::isfinite(p.h)) throw ValidationError("compressibility h must be finite");
    validate_law(p.law);
  }
  for (const auto& [param, indices] : policy.excluded) {
    for (std::uint64_t idx : indices)
      if (idx >= points.size())
        throw ValidationError("exclusion index " + std::to_string(idx) + " for parameter " +
                              to_string(param) + " is out of range");
  }

  ParamRegressions out;
  for (LawParam param : kAllLawParams) {
    std::vector<std::uint64_t> excluded;
    if (auto it = policy.excluded.find(param); it != policy.excluded.end()) {
      excluded = it->second;
      std::sort(excluded.begin(), excluded.end());
      excluded.erase(std::unique(excluded.begin(), excluded.end()), excluded.end());
    }
    std::vector<double> hs, ys;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (std::binary_search(excluded.begin(), excluded.end(), i)) continue;
      hs.push_back(points[i].h);
      ys.push_back(law_value(points[i].law, param));
    }
    const std::set<double> distinct(hs.begin(), hs.end());
    if (distinct.size() < 3)
      throw DegeneracyError(std::string("regression for parameter ") + to_string(param) +
                            " needs at least 3 distinct h values, got " +
                            std::to_string(distinct.size()));
    LinearFit fit = ols_line(hs, ys);
    fit.excluded = std::move(excluded);
    out.fit(param) = std::move(fit);
  }
  return out;
}

ScalingLaw law_at(double h, const ParamRegressions& regressions) {
  if (!std::isfinite(h)) throw ValidationError("h must be finite");
  return evaluate_lines(h, {1.0, nullptr}, regressions);
}

ScalingLaw blended_law(double h, const BlendConfig& blend, const ChinchillaConstants& reference,
                       const ParamRegressions& regressions) {
  if (!std::isfinite(h)) throw ValidationError("h must be finite");
  if (!(blend.epsilon >= 0.0 && blend.epsilon <= 1.0))
    throw ValidationError("epsilon must lie in [0, 1]");
  return evaluate_lines(h, {blend.epsilon, &reference}, regressions);
}

std::optional<double> crossover_h(const ParamRegressions& regressions, LawParam x, LawParam y) {
  const LinearFit& fx = regressions.fit(x);
  const LinearFit& fy = regressions.fit(y);
  if (fx.slope == fy.slope) return std::nullopt;
  return (fy.intercept - fx.intercept) / (fx.slope - fy.slope);
}

FrontierExponents frontier_exponent(const ScalingLaw& law) {
  validate_law(law);
  FrontierExponents exponents;
  exponents.bn = law.beta / (law.alpha + law.beta);
  exponents.bd = 1.0 - exponents.bn;
  return exponents;
}

}  // namespace gsc
