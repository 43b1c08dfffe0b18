#include "gsc/levmar.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>

#include "gsc/errors.hpp"

namespace gsc {

namespace {

constexpr double kEpsMach = DBL_EPSILON;
constexpr double kDwarf = DBL_MIN;

// Scaled two-pass Euclidean norm; +inf propagates, never overflows silently.
double enorm(std::size_t n, const double* x) {
  double amax = 0.0;
  for (std::size_t i = 0; i < n; ++i) amax = std::max(amax, std::fabs(x[i]));
  if (amax == 0.0) return 0.0;
  if (!std::isfinite(amax)) return std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = x[i] / amax;
    sum += t * t;
  }
  return amax * std::sqrt(sum);
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

// Householder QR with column pivoting of the m x n column-major matrix a.
// On exit the upper triangle holds R without its diagonal (which lands in
// rdiag), the lower trapezoid holds the Householder vectors, ipvt records
// the permutation, and acnorm the original column norms.
void qrfac(std::size_t m, std::size_t n, double* a, int* ipvt, double* rdiag, double* acnorm) {
  std::vector<double> wa(n);
  for (std::size_t j = 0; j < n; ++j) {
    acnorm[j] = enorm(m, a + j * m);
    rdiag[j] = acnorm[j];
    wa[j] = rdiag[j];
    ipvt[j] = static_cast<int>(j);
  }
  const std::size_t minmn = std::min(m, n);
  for (std::size_t j = 0; j < minmn; ++j) {
    std::size_t kmax = j;
    for (std::size_t k = j; k < n; ++k)
      if (rdiag[k] > rdiag[kmax]) kmax = k;
    if (kmax != j) {
      for (std::size_t i = 0; i < m; ++i) std::swap(a[i + j * m], a[i + kmax * m]);
      rdiag[kmax] = rdiag[j];
      wa[kmax] = wa[j];
      std::swap(ipvt[j], ipvt[kmax]);
    }
    double ajnorm = enorm(m - j, a + j + j * m);
    if (ajnorm != 0.0) {
      if (a[j + j * m] < 0.0) ajnorm = -ajnorm;
      for (std::size_t i = j; i < m; ++i) a[i + j * m] /= ajnorm;
      a[j + j * m] += 1.0;
      for (std::size_t k = j + 1; k < n; ++k) {
        double sum = 0.0;
        for (std::size_t i = j; i < m; ++i) sum += a[i + j * m] * a[i + k * m];
        const double temp = sum / a[j + j * m];
        for (std::size_t i = j; i < m; ++i) a[i + k * m] -= temp * a[i + j * m];
        if (rdiag[k] != 0.0) {
          const double t = a[j + k * m] / rdiag[k];
          rdiag[k] *= std::sqrt(std::max(0.0, 1.0 - t * t));
          if (0.05 * (rdiag[k] / wa[k]) * (rdiag[k] / wa[k]) <= kEpsMach) {
            rdiag[k] = enorm(m - j - 1, a + (j + 1) + k * m);
            wa[k] = rdiag[k];
          }
        }
      }
    }
    rdiag[j] = -ajnorm;
  }
}

// Given the QR factorization of J and a diagonal d, solves the augmented
// system [R; sqrt(par) d P]^T [R; ...] z = R^T qtb via Givens rotations.
// r is n x n with leading dimension ld; its strict lower triangle is used as
// scratch for the S factor, the upper triangle and diagonal are restored.
void qrsolv(std::size_t n, double* r, std::size_t ld, const int* ipvt, const double* diag,
            const double* qtb, double* x, double* sdiag) {
  std::vector<double> wa(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = j; i < n; ++i) r[i + j * ld] = r[j + i * ld];
    x[j] = r[j + j * ld];
    wa[j] = qtb[j];
  }
  for (std::size_t j = 0; j < n; ++j) {
    const int l = ipvt[j];
    if (diag[l] != 0.0) {
      for (std::size_t k = j; k < n; ++k) sdiag[k] = 0.0;
      sdiag[j] = diag[l];
      double qtbpj = 0.0;
      for (std::size_t k = j; k < n; ++k) {
        if (sdiag[k] == 0.0) continue;
        double cos_, sin_;
        if (std::fabs(r[k + k * ld]) < std::fabs(sdiag[k])) {
          const double cotan = r[k + k * ld] / sdiag[k];
          sin_ = 0.5 / std::sqrt(0.25 + 0.25 * cotan * cotan);
          cos_ = sin_ * cotan;
        } else {
          const double tan_ = sdiag[k] / r[k + k * ld];
          cos_ = 0.5 / std::sqrt(0.25 + 0.25 * tan_ * tan_);
          sin_ = cos_ * tan_;
        }
        r[k + k * ld] = cos_ * r[k + k * ld] + sin_ * sdiag[k];
        const double temp = cos_ * wa[k] + sin_ * qtbpj;
        qtbpj = -sin_ * wa[k] + cos_ * qtbpj;
        wa[k] = temp;
        for (std::size_t i = k + 1; i < n; ++i) {
          const double t = cos_ * r[i + k * ld] + sin_ * sdiag[i];
          sdiag[i] = -sin_ * r[i + k * ld] + cos_ * sdiag[i];
          r[i + k * ld] = t;
        }
      }
    }
    sdiag[j] = r[j + j * ld];
    r[j + j * ld] = x[j];
  }
  std::size_t nsing = n;
  for (std::size_t j = 0; j < n; ++j) {
    if (sdiag[j] == 0.0 && nsing == n) nsing = j;
    if (nsing < n) wa[j] = 0.0;
  }
  for (std::size_t k = nsing; k-- > 0;) {
    double sum = 0.0;
    for (std::size_t i = k + 1; i < nsing; ++i) sum += r[i + k * ld] * wa[i];
    wa[k] = (wa[k] - sum) / sdiag[k];
  }
  for (std::size_t j = 0; j < n; ++j) x[ipvt[j]] = wa[j];
}

// More's iteration for the LM parameter: finds par such that the scaled step
// norm matches the trust radius delta within 10%. x receives the step
// (positive solution of (J^T J + par D^2) x = J^T f).
double lmpar(std::size_t n, double* r, std::size_t ld, const int* ipvt, const double* diag,
             const double* qtb, double delta, double par, double* x, double* sdiag) {
  std::vector<double> wa1(n), wa2(n);

  std::size_t nsing = n;
  for (std::size_t j = 0; j < n; ++j) {
    wa1[j] = qtb[j];
    if (r[j + j * ld] == 0.0 && nsing == n) nsing = j;
    if (nsing < n) wa1[j] = 0.0;
  }
  for (std::size_t k = nsing; k-- > 0;) {
    wa1[k] /= r[k + k * ld];
    const double temp = wa1[k];
    for (std::size_t i = 0; i < k; ++i) wa1[i] -= r[i + k * ld] * temp;
  }
  for (std::size_t j = 0; j < n; ++j) x[ipvt[j]] = wa1[j];

  for (std::size_t j = 0; j < n; ++j) wa2[j] = diag[j] * x[j];
  double dxnorm = enorm(n, wa2.data());
  double fp = dxnorm - delta;
  if (fp <= 0.1 * delta) return 0.0;  // Gauss-Newton step fits the region

  double parl = 0.0;
  if (nsing >= n) {
    for (std::size_t j = 0; j < n; ++j) {
      const int l = ipvt[j];
      wa1[j] = diag[l] * (wa2[l] / dxnorm);
    }
    for (std::size_t j = 0; j < n; ++j) {
      double sum = 0.0;
      for (std::size_t i = 0; i < j; ++i) sum += r[i + j * ld] * wa1[i];
      wa1[j] = (wa1[j] - sum) / r[j + j * ld];
    }
    const double temp = enorm(n, wa1.data());
    parl = ((fp / delta) / temp) / temp;
  }
  for (std::size_t j = 0; j < n; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i <= j; ++i) sum += r[i + j * ld] * qtb[i];
    wa1[j] = sum / diag[ipvt[j]];
  }
  const double gnorm = enorm(n, wa1.data());
  double paru = gnorm / delta;
  if (paru == 0.0) paru = kDwarf / std::min(delta, 0.1);

  par = std::min(std::max(par, parl), paru);
  if (par == 0.0) par = gnorm / dxnorm;

  for (int iter = 1;; ++iter) {
    if (par == 0.0) par = std::max(kDwarf, 0.001 * paru);
    const double sp = std::sqrt(par);
    for (std::size_t j = 0; j < n; ++j) wa1[j] = sp * diag[j];
    qrsolv(n, r, ld, ipvt, wa1.data(), qtb, x, sdiag);
    for (std::size_t j = 0; j < n; ++j) wa2[j] = diag[j] * x[j];
    dxnorm = enorm(n, wa2.data());
    const double prev_fp = fp;
    fp = dxnorm - delta;
    if (std::fabs(fp) <= 0.1 * delta ||
        (parl == 0.0 && fp <= prev_fp && prev_fp < 0.0) || iter == 10)
      return par;
    for (std::size_t j = 0; j < n; ++j) {
      const int l = ipvt[j];
      wa1[j] = diag[l] * (wa2[l] / dxnorm);
    }
    for (std::size_t j = 0; j < n; ++j) {
      wa1[j] /= sdiag[j];
      const double temp = wa1[j];
      for (std::size_t i = j + 1; i < n; ++i) wa1[i] -= r[i + j * ld] * temp;
    }
    const double temp = enorm(n, wa1.data());
    const double parc = ((fp / delta) / temp) / temp;
    if (fp > 0.0) parl = std::max(parl, par);
    if (fp < 0.0) paru = std::min(paru, par);
    par = std::max(parl, par + parc);
  }
}

}  // namespace

LevMarResult levmar_minimize(const LevMarFn& fn, std::vector<double> x0,
                             std::size_t num_residuals, const LevMarOptions& options) {
  const std::size_t n = x0.size();
  const std::size_t m = num_residuals;
  if (n == 0) throw ValidationError("levmar: empty parameter vector");
  if (m < n) throw ValidationError("levmar: fewer residuals than parameters");
  if (!(options.ftol >= 0.0) || !(options.xtol >= 0.0) || !(options.gtol >= 0.0))
    throw ValidationError("levmar: tolerances must be non-negative");
  if (options.max_fev == 0) throw ValidationError("levmar: max_fev must be >= 1");
  const bool fixed_scale = !options.diag.empty();
  if (fixed_scale) {
    if (options.diag.size() != n)
      throw ValidationError("levmar: diag size must match parameter count");
    for (double d : options.diag)
      if (!(d > 0.0) || !std::isfinite(d))
        throw ValidationError("levmar: diag entries must be positive and finite");
  }

  LevMarResult result;
  result.x = std::move(x0);
  std::vector<double>& x = result.x;

  std::vector<double> f(m), ftrial(m), jac(m * n);
  std::vector<double> diag(n), qtf(n), acnorm(n), rdiag(n), sdiag(n);
  std::vector<double> step(n), xtrial(n), wa3(n);
  std::vector<int> ipvt(n);

  fn(x, f, &jac);
  result.num_fev = 1;
  double fnorm = all_finite(f) ? enorm(m, f.data())
                               : std::numeric_limits<double>::infinity();
  if (!std::isfinite(fnorm)) {
    result.cost = std::numeric_limits<double>::infinity();
    return result;  // inadmissible start
  }

  double par = 0.0;
  double delta = 0.0;
  double xnorm = 0.0;
  std::uint64_t outer = 1;

  for (;;) {
    if (!all_finite(jac)) break;  // stop at the last admissible point

    qrfac(m, n, jac.data(), ipvt.data(), rdiag.data(), acnorm.data());
    if (outer == 1) {
      if (fixed_scale)
        diag = options.diag;
      else
        for (std::size_t j = 0; j < n; ++j) diag[j] = acnorm[j] == 0.0 ? 1.0 : acnorm[j];
      for (std::size_t j = 0; j < n; ++j) wa3[j] = diag[j] * x[j];
      xnorm = enorm(n, wa3.data());
      delta = options.step_factor * xnorm;
      if (delta == 0.0) delta = options.step_factor;
    }

    // Q^T f via the stored Householder vectors; R's diagonal moves into jac.
    ftrial = f;
    for (std::size_t j = 0; j < n; ++j) {
      if (jac[j + j * m] != 0.0) {
        double sum = 0.0;
        for (std::size_t i = j; i < m; ++i) sum += jac[i + j * m] * ftrial[i];
        const double temp = -sum / jac[j + j * m];
        for (std::size_t i = j; i < m; ++i) ftrial[i] += jac[i + j * m] * temp;
      }
      jac[j + j * m] = rdiag[j];
      qtf[j] = ftrial[j];
    }

    double gnorm = 0.0;
    if (fnorm != 0.0) {
      for (std::size_t j = 0; j < n; ++j) {
        const int l = ipvt[j];
        if (acnorm[l] == 0.0) continue;
        double sum = 0.0;
        for (std::size_t i = 0; i <= j; ++i) sum += jac[i + j * m] * (qtf[i] / fnorm);
        gnorm = std::max(gnorm, std::fabs(sum / acnorm[l]));
      }
    }
    if (gnorm <= options.gtol) {
      result.converged = true;
      break;
    }
    if (!fixed_scale)
      for (std::size_t j = 0; j < n; ++j) diag[j] = std::max(diag[j], acnorm[j]);

    double ratio = 0.0;
    do {
      par = lmpar(n, jac.data(), m, ipvt.data(), diag.data(), qtf.data(), delta, par,
                  step.data(), sdiag.data());
      double pnorm;
      {
        for (std::size_t j = 0; j < n; ++j) {
          step[j] = -step[j];
          xtrial[j] = x[j] + step[j];
          wa3[j] = diag[j] * step[j];
        }
        pnorm = enorm(n, wa3.data());
      }
      if (outer == 1) delta = std::min(delta, pnorm);

      fn(xtrial, ftrial, nullptr);
      ++result.num_fev;
      const double fnorm1 = all_finite(ftrial) ? enorm(m, ftrial.data())
                                               : std::numeric_limits<double>::infinity();

      double actred = -1.0;
      if (std::isfinite(fnorm1) && 0.1 * fnorm1 < fnorm) {
        const double t = fnorm1 / fnorm;
        actred = 1.0 - t * t;
      }

      for (std::size_t j = 0; j < n; ++j) wa3[j] = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double temp = step[ipvt[j]];
        for (std::size_t i = 0; i <= j; ++i) wa3[i] += jac[i + j * m] * temp;
      }
      const double temp1 = enorm(n, wa3.data()) / fnorm;
      const double temp2 = std::sqrt(par) * pnorm / fnorm;
      const double prered = temp1 * temp1 + 2.0 * temp2 * temp2;
      const double dirder = -(temp1 * temp1 + temp2 * temp2);
      ratio = prered != 0.0 ? actred / prered : 0.0;

      if (ratio <= 0.25) {
        double temp = actred >= 0.0 ? 0.5 : 0.5 * dirder / (dirder + 0.5 * actred);
        if (!std::isfinite(fnorm1) || 0.1 * fnorm1 >= fnorm || temp < 0.1) temp = 0.1;
        delta = temp * std::min(delta, pnorm / 0.1);
        par /= temp;
      } else if (par == 0.0 || ratio >= 0.75) {
        delta = 2.0 * pnorm;
        par *= 0.5;
      }

      if (ratio >= 1e-4) {
        x = xtrial;
        f = ftrial;
        for (std::size_t j = 0; j < n; ++j) wa3[j] = diag[j] * x[j];
        xnorm = enorm(n, wa3.data());
        fnorm = fnorm1;
        ++outer;
        ++result.iters;
      }

      const bool ftol_ok =
          std::fabs(actred) <= options.ftol && prered <= options.ftol && 0.5 * ratio <= 1.0;
      const bool xtol_ok = delta <= options.xtol * xnorm;
      if (ftol_ok || xtol_ok) {
        result.converged = true;
        result.cost = 0.5 * fnorm * fnorm;
        return result;
      }
      if (result.num_fev >= options.max_fev) {
        result.cost = 0.5 * fnorm * fnorm;
        return result;  // budget exhausted, not converged
      }
      const bool ftol_eps =
          std::fabs(actred) <= kEpsMach && prered <= kEpsMach && 0.5 * ratio <= 1.0;
      if (ftol_eps || delta <= kEpsMach * xnorm || gnorm <= kEpsMach) {
        result.converged = true;
        result.cost = 0.5 * fnorm * fnorm;
        return result;
      }
    } while (ratio < 1e-4);

    fn(x, f, &jac);
    ++result.num_fev;
  }

  result.cost = 0.5 * fnorm * fnorm;
  return result;
}

}  // namespace gsc
