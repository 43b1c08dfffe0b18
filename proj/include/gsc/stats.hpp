#pragma once

// Small statistics toolkit: special functions accurate to ~1e-12, the exact
// Student-t two-sided p-value used by the slope test, and rank correlation.

#include <cstdint>
#include <span>

namespace gsc::stats {

// Regularized incomplete beta function I_x(a, b); a, b > 0, x in [0, 1].
double regularized_beta(double a, double b, double x);

// Regularized lower/upper incomplete gamma P(a, x) and Q(a, x); a > 0, x >= 0.
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

// Two-sided p-value of Student's t with `df` degrees of freedom:
// P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2).
double student_t_two_sided_p(double t, double df);

// Survival function of the chi-square distribution, Q(df/2, x/2).
double chi_square_sf(double x, double df);

double mean(std::span<const double> xs);
// Sample standard deviation (n-1 denominator); 0 for fewer than 2 values.
double sample_stddev(std::span<const double> xs);
// Median of a copy; even length averages the two middle order statistics.
double median(std::span<const double> xs);

double pearson_r(std::span<const double> x, std::span<const double> y);
// Spearman rank correlation; ties receive average ranks.
double spearman_rho(std::span<const double> x, std::span<const double> y);

}  // namespace gsc::stats
