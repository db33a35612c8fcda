#pragma once

#include <Eigen/Dense>

namespace chpt {

double sample_std(const Eigen::Ref<const Eigen::VectorXd>& v);  // n-1 denominator

// Linear interpolation between order statistics (the common "type 7" rule):
// h = p * (n - 1), q = x_(floor h) + frac(h) * (x_(floor h + 1) - x_(floor h)).
double quantile_sorted(const Eigen::Ref<const Eigen::VectorXd>& sorted, double p);
double quantile(const Eigen::Ref<const Eigen::VectorXd>& v, double p);  // copies + sorts

double normal_cdf(double x);

// Inverse standard-normal CDF: Acklam's rational approximation polished with
// one Halley step, accurate to ~1e-15 over (0, 1).
double normal_quantile(double p);

}  // namespace chpt
