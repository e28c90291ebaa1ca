#include "hmc/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hmc/chaos.hpp"
#include "hmc/errors.hpp"
#include "hmc/parallel.hpp"

namespace hmc {

namespace {

// Neumaier compensated sum.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

std::size_t floor_count(double K) { return K < 1.0 ? 0 : static_cast<std::size_t>(std::floor(K)); }

int floor_log(double x) { return static_cast<int>(std::floor(std::log(x))); }

// Re(X(k) r^k e^{ik theta}) / sqrt k - r^{2k} / k, summed over k < e^n and
// compared with level(n) at every checkpoint n = 1..n_max.
template <class Level>
bool tilted_walk_below(std::span<const cplx> x, double r, double theta, int n_max, Level&& level) {
    CompensatedSum walk;
    std::int64_t k = 1;
    for (int n = 1; n <= n_max; ++n) {
        const std::int64_t last = last_index_below_exp(n);
        for (; k <= last; ++k) {
            const double dk = static_cast<double>(k);
            const double rk = std::pow(r, dk);
            const cplx rot = std::polar(rk, dk * theta);
            walk.add((x[static_cast<std::size_t>(k) - 1] * rot).real() / std::sqrt(dk));
            walk.add(-rk * rk / dk);
        }
        if (walk.value() > level(n)) return false;
    }
    return true;
}

void check_G_range(double r, double K, double A, bool cap_A) {
    require(K >= 3.0, "event G: K >= 3");
    require(r >= 1.0 && r <= std::exp(1.0 / K), "event G: 1 <= r <= e^{1/K}");
    require(A >= 1.0, "event G: A >= 1");
    if (cap_A) require(A <= std::sqrt(std::log(K)), "event G: A <= sqrt(log K)");
}

void check_size(std::span<const cplx> x, std::int64_t needed, const char* what) {
    require(x.size() >= static_cast<std::size_t>(needed), what);
}

}  // namespace

// ---------------------------------------------------------------------------

void BarrierSpec::validate() const {
    require(A >= 1.0, "BarrierSpec: A >= 1");
    require(n_max >= 1, "BarrierSpec: n_max >= 1");
    require(static_cast<bool>(offset), "BarrierSpec: offset function required");
    for (int j = 1; j <= n_max; ++j)
        require(std::abs(offset(j)) <= 10.0 * std::log(static_cast<double>(j)) + 1e-12,
                "BarrierSpec: |offset(j)| <= 10 log j");
}

BarrierSpec BarrierSpec::flat(double A, int n_max) { return BarrierSpec{A, [](int) { return 0.0; }, n_max}; }

BarrierSpec BarrierSpec::upper(double A, int n_max) {
    return BarrierSpec{A, [](int j) { return 10.0 * std::log(static_cast<double>(j)); }, n_max};
}

BarrierSpec BarrierSpec::lower(double A, int n_max) {
    return BarrierSpec{A, [](int j) { return -5.0 * std::log(static_cast<double>(j)); }, n_max};
}

MomentEstimate ballot_probability_mc(const BarrierSpec& spec, std::span<const double> variances,
                                     std::size_t samples, const Seed& seed, unsigned workers) {
    spec.validate();
    require(samples >= 100, "ballot_probability_mc: samples >= 100");
    require(variances.size() == 1 || variances.size() == static_cast<std::size_t>(spec.n_max),
            "ballot_probability_mc: one variance, or one per step");
    for (double v : variances)
        require(v >= 1.0 / 20.0 && v <= 20.0, "ballot_probability_mc: block variances must lie in [1/20, 20]");

    std::vector<double> sd(static_cast<std::size_t>(spec.n_max));
    std::vector<double> level(sd.size());
    for (std::size_t j = 0; j < sd.size(); ++j) {
        sd[j] = std::sqrt(variances.size() == 1 ? variances[0] : variances[j]);
        level[j] = spec.level(static_cast<int>(j) + 1);
    }
    const auto hits = parallel_map<double>(samples, workers, [&](std::size_t i) {
        GaussianStream stream(split(seed, i));
        double walk = 0.0;
        for (std::size_t j = 0; j < sd.size(); ++j) {
            walk += sd[j] * stream.next_normal();
            if (walk > level[j]) return 0.0;
        }
        return 1.0;
    });
    return summarize(hits, seed);
}

// ---------------------------------------------------------------------------

std::int64_t last_index_below_exp(int n) {
    if (n <= 0) return 0;
    return static_cast<std::int64_t>(std::ceil(std::exp(static_cast<double>(n)))) - 1;
}

int log_K_r(double r, double K) {
    require(r > 0.0 && r < 1.0, "log_K_r: 0 < r < 1");
    const double bound = std::min(-1.0 / (4.0 * std::log(r)), K);
    require(bound >= 1.0, "log_K_r: min(-1/(4 log r), K) >= 1");
    int L = floor_log(bound);
    while (std::exp(static_cast<double>(L + 1)) <= bound) ++L;
    while (L > 0 && std::exp(static_cast<double>(L)) > bound) --L;
    return L;
}

BlockMoments block_moments(double r, double theta, int m) {
    require(m >= 1, "block_moments: m >= 1");
    BlockMoments b;
    b.m = m;
    b.k_first = last_index_below_exp(m - 1) + 1;
    b.k_last = last_index_below_exp(m);
    CompensatedSum var, cov;
    for (std::int64_t k = b.k_first; k <= b.k_last; ++k) {
        const double dk = static_cast<double>(k);
        const double w = std::pow(r, 2.0 * dk) / (2.0 * dk);
        var.add(w);
        cov.add(w * std::cos(dk * theta));
    }
    b.sigma2 = var.value();
    b.covariance = cov.value();
    b.rho = b.covariance / b.sigma2;
    return b;
}

WalkBlocks block_stats(double r, double theta, double K) {
    require(r > 0.0 && r < 1.0, "block_stats: 0 < r < 1");
    require(std::abs(theta) <= std::numbers::pi, "block_stats: |theta| <= pi");
    WalkBlocks wb;
    wb.r = r;
    wb.theta = theta;
    wb.K = K;
    wb.log_Kr = log_K_r(r, K);
    require(wb.log_Kr >= 2, "block_stats: log K_r >= 2");
    wb.K_r = std::exp(static_cast<double>(wb.log_Kr));
    // log of min(10^3/|theta|, K_r/e); the K_r/e branch is an exact integer
    double log_target = static_cast<double>(wb.log_Kr - 1);
    if (theta != 0.0) log_target = std::min(log_target, std::log(1e3 / std::abs(theta)));
    wb.M = static_cast<int>(std::ceil(log_target));
    for (int m = 1; m <= wb.log_Kr; ++m) wb.blocks.push_back(block_moments(r, theta, m));
    return wb;
}

WalkIncrements walk_increments(const WalkBlocks& wb, std::span<const cplx> x) {
    check_size(x, last_index_below_exp(wb.log_Kr), "walk_increments: X(k) needed for k < K_r");
    WalkIncrements out;
    CompensatedSum h0, ht;
    for (std::int64_t k = 1; k <= last_index_below_exp(wb.M); ++k) {
        const double dk = static_cast<double>(k);
        const double rk = std::pow(wb.r, dk);
        const cplx xk = x[static_cast<std::size_t>(k) - 1];
        h0.add(xk.real() * rk / std::sqrt(dk) - rk * rk / dk);
        ht.add((xk * std::polar(rk, dk * wb.theta)).real() / std::sqrt(dk) - rk * rk / dk);
    }
    out.head_0 = h0.value();
    out.head_theta = ht.value();
    for (int m = wb.M + 1; m <= wb.log_Kr; ++m) {
        CompensatedSum z0, zt;
        const auto& b = wb.blocks[static_cast<std::size_t>(m) - 1];
        for (std::int64_t k = b.k_first; k <= b.k_last; ++k) {
            const double dk = static_cast<double>(k);
            const double rk = std::pow(wb.r, dk);
            const cplx xk = x[static_cast<std::size_t>(k) - 1];
            z0.add(xk.real() * rk / std::sqrt(dk));
            zt.add((xk * std::polar(rk, dk * wb.theta)).real() / std::sqrt(dk));
        }
        out.z_0.push_back(z0.value());
        out.z_theta.push_back(zt.value());
    }
    return out;
}

// ---------------------------------------------------------------------------

bool event_G_holds(std::span<const cplx> x, double r, double theta, double K, double A) {
    check_G_range(r, K, A, true);
    const int n_max = floor_log(K);
    check_size(x, last_index_below_exp(n_max), "event G: X(k) needed for k < e^{floor(log K)}");
    return tilted_walk_below(x, r, theta, n_max,
                             [A](int n) { return A + 10.0 * std::log(static_cast<double>(n)); });
}

bool event_G_grid_holds(std::span<const cplx> x, double r, double K, double A) {
    check_G_range(r, K, A, true);
    const int n_max = floor_log(K);
    check_size(x, last_index_below_exp(n_max), "event G: X(k) needed for k < e^{floor(log K)}");
    for (int n = 1; n <= n_max; ++n) {
        const auto angles = static_cast<std::int64_t>(std::ceil(n * std::exp(static_cast<double>(n))));
        const double level = A + 10.0 * std::log(static_cast<double>(n));
        for (std::int64_t j = 0; j < angles; ++j) {
            const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(angles);
            // Only checkpoint n is tested at this grid; earlier checkpoints have their own grids.
            CompensatedSum walk;
            for (std::int64_t k = 1; k <= last_index_below_exp(n); ++k) {
                const double dk = static_cast<double>(k);
                const double rk = std::pow(r, dk);
                walk.add((x[static_cast<std::size_t>(k) - 1] * std::polar(rk, dk * theta)).real() / std::sqrt(dk));
                walk.add(-rk * rk / dk);
            }
            if (walk.value() > level) return false;
        }
    }
    return true;
}

bool event_L_holds(std::span<const cplx> x, double r, double theta, double K, double A) {
    require(K >= 10.0, "event L: K >= 10");
    require(r >= std::exp(-1.0 / 40.0) && r < 1.0, "event L: e^{-1/40} <= r < 1");
    const int L = log_K_r(r, K);
    require(A >= 1.0 && A <= std::sqrt(static_cast<double>(L)), "event L: 1 <= A <= sqrt(log K_r)");
    check_size(x, last_index_below_exp(L), "event L: X(k) needed for k < K_r");
    return tilted_walk_below(x, r, theta, L,
                             [A](int n) { return A - 5.0 * std::log(static_cast<double>(n)); });
}

std::pair<MomentEstimate, MomentEstimate> change_of_measure_check(double K, double r, double A,
                                                                  std::size_t samples_left,
                                                                  std::size_t samples_right, const Seed& seed,
                                                                  unsigned workers) {
    // The identity is exact for every A >= 1, so the sqrt(log K) cap of the event is not imposed.
    check_G_range(r, K, A, false);
    require(samples_left >= 2 && samples_right >= 2, "change_of_measure_check: samples >= 2");
    const int n_max = floor_log(K);
    const std::size_t kmax = floor_count(K);
    const auto level = [A](int n) { return A + 10.0 * std::log(static_cast<double>(n)); };

    const Seed left_seed = split(seed, 0);
    const auto left_values = parallel_map<double>(samples_left, workers, [&](std::size_t i) {
        GaussianStream stream(split(left_seed, i));
        const auto x = draw_gaussians(stream, kmax);
        if (!tilted_walk_below(x, r, 0.0, n_max, level)) return 0.0;
        CompensatedSum log_f;
        for (std::size_t k = 1; k <= kmax; ++k) {
            const double dk = static_cast<double>(k);
            log_f.add(x[k - 1].real() * std::pow(r, dk) / std::sqrt(dk));
        }
        return std::exp(2.0 * log_f.value());
    });

    const Seed right_seed = split(seed, 1);
    const std::int64_t ylast = last_index_below_exp(n_max);
    const auto right_hits = parallel_map<double>(samples_right, workers, [&](std::size_t i) {
        GaussianStream stream(split(right_seed, i));
        CompensatedSum walk;
        std::int64_t k = 1;
        for (int n = 1; n <= n_max; ++n) {
            for (; k <= last_index_below_exp(n) && k <= ylast; ++k) {
                const double dk = static_cast<double>(k);
                const double y = stream.next_complex_gaussian().real();  // N(0, 1/2)
                walk.add(y * std::pow(r, dk) / std::sqrt(dk));
            }
            if (walk.value() > level(n)) return 0.0;
        }
        return 1.0;
    });

    auto left = summarize(left_values, left_seed);
    auto right = summarize(right_hits, right_seed);
    const double closed = circle_mean_closed_form(K, r);
    right.mean *= closed;
    right.std_error *= closed;
    return {left, right};
}

// ---------------------------------------------------------------------------

namespace {

void check_bivariate(const BivariateParams& p) {
    require(p.var1 > 0.0 && p.var2 > 0.0, "bivariate: positive variances");
    require(std::abs(p.rho) < 1.0, "bivariate: |rho| < 1 (degenerate case excluded)");
}

}  // namespace

double bivariate_density(const BivariateParams& p, double x1, double x2) {
    check_bivariate(p);
    const double s1 = std::sqrt(p.var1), s2 = std::sqrt(p.var2);
    const double u = (x1 - p.mu1) / s1, v = (x2 - p.mu2) / s2;
    const double one_m = 1.0 - p.rho * p.rho;
    const double quad = (u * u - 2.0 * p.rho * u * v + v * v) / (2.0 * one_m);
    return std::exp(-quad) / (2.0 * std::numbers::pi * s1 * s2 * std::sqrt(one_m));
}

double dominating_density(const BivariateParams& p, double x1, double x2) {
    check_bivariate(p);
    const double s1 = std::sqrt(p.var1), s2 = std::sqrt(p.var2);
    const double u = (x1 - p.mu1) / s1, v = (x2 - p.mu2) / s2;
    const double a = std::abs(p.rho);
    const double prefactor = std::sqrt((1.0 + a) / (1.0 - a));
    return prefactor * std::exp(-(u * u + v * v) / (2.0 * (1.0 + a))) /
           (2.0 * std::numbers::pi * s1 * s2 * (1.0 + a));
}

std::pair<double, double> sample_bivariate(const BivariateParams& p, GaussianStream& stream) {
    check_bivariate(p);
    const cplx g = stream.next_complex_gaussian() * std::numbers::sqrt2;  // two independent N(0,1)
    const double z1 = g.real();
    const double z2 = p.rho * g.real() + std::sqrt(1.0 - p.rho * p.rho) * g.imag();
    return {p.mu1 + std::sqrt(p.var1) * z1, p.mu2 + std::sqrt(p.var2) * z2};
}

// ---------------------------------------------------------------------------

MomentEstimate two_walk_tilted_expectation(double r, double theta, double K, double B, std::size_t samples,
                                           const Seed& seed, unsigned workers) {
    require(samples >= 2, "two_walk_tilted_expectation: samples >= 2");
    const WalkBlocks wb = block_stats(r, theta, K);
    const std::int64_t k_first = last_index_below_exp(wb.M) + 1;  // e^M <= k
    const auto values = parallel_map<double>(samples, workers, [&](std::size_t i) {
        GaussianStream stream(split(seed, i));
        CompensatedSum tilt_0, tilt_t, z0, zt;
        bool inside = true;
        std::int64_t k = k_first;
        for (int m = wb.M + 1; m <= wb.log_Kr; ++m) {
            for (; k <= last_index_below_exp(m); ++k) {
                const double dk = static_cast<double>(k);
                const double rk = std::pow(r, dk);
                const cplx xk = stream.next_complex_gaussian();
                const double a0 = xk.real() * rk / std::sqrt(dk);
                const double at = (xk * std::polar(rk, dk * theta)).real() / std::sqrt(dk);
                z0.add(a0);
                zt.add(at);
                tilt_0.add(a0 - rk * rk / dk);
                tilt_t.add(at - rk * rk / dk);
            }
            if (tilt_0.value() > B || tilt_t.value() > B) inside = false;
        }
        return inside ? std::exp(2.0 * z0.value() + 2.0 * zt.value()) : 0.0;
    });
    return summarize(values, seed);
}

double two_walk_unconstrained(const WalkBlocks& wb) {
    double log_value = 0.0;
    for (int m = wb.M + 1; m <= wb.log_Kr; ++m) {
        const auto& b = wb.blocks[static_cast<std::size_t>(m) - 1];
        log_value += 4.0 * (b.sigma2 + b.covariance);
    }
    return std::exp(log_value);
}

double two_walk_shape(const WalkBlocks& wb, double B) {
    const double gap = static_cast<double>(wb.log_Kr - wb.M);  // log(K_r / e^M)
    const double ratio = (1.0 + std::max(0.0, B)) / std::sqrt(1.0 + gap);
    return std::exp(2.0 * gap) * ratio * ratio;
}

// ---------------------------------------------------------------------------

RestrictedCircleMoments restricted_circle_moments(double r, double K, double A, double q, std::size_t grid,
                                                  std::size_t samples, const Seed& seed, unsigned workers) {
    require(q >= 0.0 && q <= 1.0, "restricted_circle_moments: 0 <= q <= 1");
    require(grid >= 1 && samples >= 2, "restricted_circle_moments: grid >= 1, samples >= 2");
    const std::size_t kmax = floor_count(K);
    // Validates the parameter ranges once, on a zero sample.
    std::vector<cplx> zeros(std::max<std::size_t>(kmax, 1));
    (void)event_L_holds(zeros, r, 0.0, K, A);

    std::vector<double> thetas(grid);
    for (std::size_t j = 0; j < grid; ++j)
        thetas[j] = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(grid);

    const auto ys = parallel_map<double>(samples, workers, [&](std::size_t i) {
        GaussianStream stream(split(seed, i));
        const auto x = draw_gaussians(stream, kmax);
        std::vector<double> terms(grid, 0.0);
        for (std::size_t j = 0; j < grid; ++j) {
            if (!event_L_holds(x, r, thetas[j], K, A)) continue;
            CompensatedSum log_f;
            for (std::size_t k = 1; k <= kmax; ++k) {
                const double dk = static_cast<double>(k);
                log_f.add((x[k - 1] * std::polar(std::pow(r, dk), dk * thetas[j])).real() / std::sqrt(dk));
            }
            terms[j] = std::exp(2.0 * log_f.value());
        }
        return pairwise_sum(terms) / static_cast<double>(grid);
    });
    std::vector<double> sq(samples), pw(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        sq[i] = ys[i] * ys[i];
        pw[i] = std::pow(ys[i], q);
    }
    RestrictedCircleMoments out{summarize(ys, seed), summarize(sq, seed), summarize(pw, seed, q), 0.0};
    out.holder_bound = out.second.mean > 0.0 ? holder_lower_bound(out.first.mean, out.second.mean, q) : 0.0;
    return out;
}

}  // namespace hmc
