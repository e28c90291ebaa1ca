#include "hmc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hmc/errors.hpp"

namespace hmc {

double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 16) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

MomentEstimate summarize(std::span<const double> values, const Seed& seed, double q) {
    require(values.size() >= 2, "summarize: at least two samples are required");
    const double n = static_cast<double>(values.size());
    const double mean = pairwise_sum(values) / n;
    std::vector<double> sq(values.size());
    std::transform(values.begin(), values.end(), sq.begin(),
                   [mean](double v) { return (v - mean) * (v - mean); });
    const double var = pairwise_sum(sq) / (n - 1.0);
    return MomentEstimate{mean, std::sqrt(var / n), values.size(), q, seed};
}

bool agree_within(double a, double se_a, double b, double se_b, double sigmas) {
    return std::abs(a - b) <= sigmas * std::hypot(se_a, se_b);
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    require(!a.empty() && !b.empty(), "ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_critical_value(std::size_t n, std::size_t m, double alpha) {
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    const double dn = static_cast<double>(n), dm = static_cast<double>(m);
    return c * std::sqrt((dn + dm) / (dn * dm));
}

double correlation(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size() && x.size() >= 2, "correlation: need paired samples");
    const double n = static_cast<double>(x.size());
    const double mx = pairwise_sum(x) / n, my = pairwise_sum(y) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double ols_slope(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size() && x.size() >= 2, "ols_slope: need at least two points");
    const double n = static_cast<double>(x.size());
    const double mx = pairwise_sum(x) / n, my = pairwise_sum(y) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace hmc
