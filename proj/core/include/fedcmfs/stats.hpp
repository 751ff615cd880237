#pragma once

namespace fedcmfs::stats {

// Regularized lower incomplete gamma P(a, x).
double lower_regularized_gamma(double a, double x);

// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double upper_regularized_gamma(double a, double x);

// Survival function of the chi-square distribution with df degrees of freedom.
double chi_square_sf(double x, double df);

// P(N(0,1) > z).
double normal_sf(double z);

// Two-sided normal p-value: 2 * (1 - Phi(|z|)).
double two_sided_normal_p(double z);

} // namespace fedcmfs::stats
