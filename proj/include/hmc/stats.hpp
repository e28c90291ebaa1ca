#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hmc/rng.hpp"

namespace hmc {

/// Monte Carlo estimate of an expectation.
struct MomentEstimate {
    double mean = 0.0;
    double std_error = 0.0;  // sample standard deviation / sqrt(samples)
    std::size_t samples = 0;
    double q = 0.0;          // moment exponent, when the estimand is E|.|^{2q}
    Seed seed{};
};

// Pairwise (cascade) summation; result depends only on the order of `xs`.
double pairwise_sum(std::span<const double> xs);

/// Mean and standard error of `values`; requires at least two values.
MomentEstimate summarize(std::span<const double> values, const Seed& seed, double q = 0.0);

/// |a - b| <= sigmas * sqrt(se_a^2 + se_b^2)
bool agree_within(double a, double se_a, double b, double se_b, double sigmas);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Asymptotic two-sample KS critical value c(alpha) * sqrt((n+m)/(n m)).
double ks_critical_value(std::size_t n, std::size_t m, double alpha);

/// Sample Pearson correlation of paired draws.
double correlation(std::span<const double> x, std::span<const double> y);

/// Standard normal CDF.
double normal_cdf(double x);

/// Least-squares slope of y against x.
double ols_slope(std::span<const double> x, std::span<const double> y);

}  // namespace hmc
