#include "hmc/chaos.hpp"

#include <algorithm>
#include <cmath>

#include "hmc/errors.hpp"
#include "hmc/parallel.hpp"

namespace hmc {

namespace {

std::size_t floor_count(double K) { return K < 1.0 ? 0 : static_cast<std::size_t>(std::floor(K)); }

}  // namespace

std::vector<cplx> draw_gaussians(GaussianStream& stream, std::size_t count) {
    std::vector<cplx> x(count);
    for (auto& v : x) v = stream.next_complex_gaussian();
    return x;
}

ComplexSeries chaos_coefficients(std::span<const cplx> x, std::size_t N, double K, ExpEngine engine) {
    ComplexSeries s(N);
    const std::size_t kmax = std::min({N, floor_count(K), x.size()});
    for (std::size_t k = 1; k <= kmax; ++k) s[k] = x[k - 1] / std::sqrt(static_cast<double>(k));
    return exp_series(s, N, engine);
}

ChaosSample sample_A(std::size_t N, double K, GaussianStream& stream, ExpEngine engine) {
    require(K >= 1.0, "sample_A: K >= 1");
    const Seed seed = stream.seed();
    const auto x = draw_gaussians(stream, std::min(N, floor_count(K)));
    return ChaosSample{N, K, chaos_coefficients(x, N, K, engine), seed};
}

MomentEstimate estimate_moment(std::size_t N, double q, std::size_t samples, const Seed& seed,
                               unsigned workers) {
    require(q >= 0.0 && q <= 1.0, "estimate_moment: 0 <= q <= 1");
    require(samples >= 2, "estimate_moment: samples >= 2");
    const auto values = parallel_map<double>(samples, workers, [&](std::size_t i) {
        GaussianStream stream(split(seed, i));
        const auto a = sample_A(N, static_cast<double>(std::max<std::size_t>(N, 1)), stream);
        return std::pow(std::norm(a.coeffs[N]), q);
    });
    return summarize(values, seed, q);
}

double circle_mean_closed_form(double K, double r) {
    require(r > 0.0, "circle_mean_closed_form: r > 0");
    const double r2 = r * r;
    double sum = 0.0, rk = 1.0;
    for (std::size_t k = 1; k <= floor_count(K); ++k) {
        rk *= r2;
        sum += rk / static_cast<double>(k);
    }
    return std::exp(sum);
}

std::size_t circle_truncation_degree(double r, double tol) {
    require(r > 0.0 && r < 1.0, "circle_truncation_degree: 0 < r < 1");
    const double d = std::log(tol * (1.0 - r * r)) / (2.0 * std::log(r));
    // strict inequality r^{2D}/(1-r^2) < tol
    return static_cast<std::size_t>(std::max(0.0, std::floor(d) + 1.0));
}

CircleAverage circle_average_sample(double K, double r, GaussianStream& stream,
                                    std::optional<std::size_t> degree) {
    require(r > 0.0 && r <= 1.0, "circle_average_sample: 0 < r <= 1");
    std::size_t D = 0;
    bool truncated = false;
    if (r == 1.0) {
        require(degree.has_value(), "circle_average_sample: r = 1 needs an explicit truncation degree");
        D = *degree;
        truncated = true;
    } else {
        const std::size_t needed = circle_truncation_degree(r);
        if (degree) require(*degree >= needed, "circle_average_sample: degree below the 1e-9 tail bound");
        D = degree.value_or(needed);
    }
    const auto x = draw_gaussians(stream, std::min(D, floor_count(K)));
    const auto f = chaos_coefficients(x, D, K);
    return CircleAverage{parseval_power_sum(f, r), D, truncated};
}

double moment_shape(std::size_t N, double q) {
    const double logn = std::log(static_cast<double>(N));
    return std::pow((1.0 - q) * std::sqrt(logn) + 1.0, q);
}

DecayTable fit_decay_band(std::span<const std::size_t> N_grid, std::span<const std::size_t> samples_per_N,
                          const Seed& seed, unsigned workers, std::size_t band_min_N) {
    require(!N_grid.empty() && N_grid.size() == samples_per_N.size(),
            "fit_decay_band: one sample count per grid point");
    for (std::size_t i = 0; i < N_grid.size(); ++i) {
        require(N_grid[i] >= 2, "fit_decay_band: each N >= 2");
        if (i > 0) require(N_grid[i] > N_grid[i - 1], "fit_decay_band: grid must be increasing");
    }
    DecayTable table;
    table.band_min_N = band_min_N;
    std::vector<double> lx, ly;
    double lo = INFINITY, hi = 0.0;
    for (std::size_t i = 0; i < N_grid.size(); ++i) {
        const std::size_t N = N_grid[i];
        // Each grid point gets its own child seed so rows are reproducible in isolation.
        const Seed point_seed = split(seed, N);
        auto est = estimate_moment(N, 0.5, samples_per_N[i], point_seed, workers);
        const double logn = std::log(static_cast<double>(N));
        const double comp = est.mean * std::pow(logn, 0.25);
        table.rows.push_back(DecayRow{N, est, comp});
        lx.push_back(std::log(logn));
        ly.push_back(std::log(est.mean));
        if (N >= band_min_N) {
            lo = std::min(lo, comp);
            hi = std::max(hi, comp);
        }
    }
    table.band_ratio = hi > 0.0 ? hi / lo : 0.0;
    if (lx.size() >= 2) table.loglog_slope = ols_slope(lx, ly);
    return table;
}

double holder_lower_bound(double first_moment, double second_moment, double q) {
    require(q >= 0.0 && q <= 1.0, "holder_lower_bound: 0 <= q <= 1");
    require(second_moment > 0.0, "holder_lower_bound: positive second moment");
    return std::pow(first_moment, 2.0 - q) / std::pow(second_moment, 1.0 - q);
}

}  // namespace hmc
