#pragma once

#include <vector>

namespace ivdag::stats {

// Regularized incomplete gamma P(a, x) and its complement Q(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Regularized incomplete beta I_x(a, b).
double beta_inc(double a, double b, double x);

double chi2_cdf(double x, double dof);
double chi2_sf(double x, double dof);  // upper tail

double f_cdf(double x, double d1, double d2);
double f_sf(double x, double d1, double d2);

double normal_cdf(double x);
double normal_sf(double x);

// One-sample Kolmogorov-Smirnov statistic of `sample` against the values
// `cdf_at_sample[i]` = F(sample_(i)) evaluated at the sorted sample.
double ks_statistic(std::vector<double> cdf_at_sorted_sample);

// Asymptotic KS p-value with the Stephens small-sample correction.
double ks_pvalue(double d, int n);

}  // namespace ivdag::stats
