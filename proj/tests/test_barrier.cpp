#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "hmc/barrier.hpp"
#include "hmc/chaos.hpp"
#include "hmc/errors.hpp"
#include "hmc/stats.hpp"

using namespace hmc;

namespace {

const double kRLow = std::exp(-1.0 / 40.0);

std::vector<cplx> draws(const Seed& seed, std::size_t n) {
    GaussianStream s(seed);
    return draw_gaussians(s, n);
}

}  // namespace

TEST_CASE("barrier specs") {
    CHECK_NOTHROW(BarrierSpec::flat(1.0, 50).validate());
    CHECK_NOTHROW(BarrierSpec::upper(2.0, 50).validate());
    CHECK_NOTHROW(BarrierSpec::lower(2.0, 50).validate());
    CHECK(BarrierSpec::upper(2.0, 5).level(3) == doctest::Approx(2.0 + 10.0 * std::log(3.0)));
    CHECK(BarrierSpec::lower(2.0, 5).level(3) == doctest::Approx(2.0 - 5.0 * std::log(3.0)));
    CHECK_THROWS_AS(BarrierSpec::flat(0.5, 5).validate(), PreconditionError);
    BarrierSpec wild{1.0, [](int j) { return 11.0 * std::log(double(j)); }, 5};
    CHECK_THROWS_AS(wild.validate(), PreconditionError);
    // a lower barrier never exceeds an upper one
    const auto lo = BarrierSpec::lower(1.5, 100), hi = BarrierSpec::upper(1.5, 100);
    for (int j = 1; j <= 100; ++j) CHECK(lo.level(j) <= hi.level(j));
}

TEST_CASE("one-step ballot against the normal cdf") {
    const std::vector<double> half{0.5};
    const auto far = ballot_probability_mc(BarrierSpec::flat(10.0, 1), half, 1000, Seed{1, 0});
    CHECK(std::abs(far.mean - normal_cdf(10.0 / std::sqrt(0.5))) <= 4.0 * far.std_error + 1e-12);

    const auto near = ballot_probability_mc(BarrierSpec::flat(1.0, 1), half, 100000, Seed{2, 0});
    CHECK(normal_cdf(std::sqrt(2.0)) == doctest::Approx(0.9214).epsilon(1e-4));
    CHECK(std::abs(near.mean - normal_cdf(std::sqrt(2.0))) <= 4.0 * near.std_error);
}

TEST_CASE("ballot preconditions and per-step variances") {
    const std::vector<double> bad_low{0.01}, bad_high{25.0}, ok{1.0};
    CHECK_THROWS_AS(ballot_probability_mc(BarrierSpec::flat(1.0, 3), bad_low, 100, Seed{}), PreconditionError);
    CHECK_THROWS_AS(ballot_probability_mc(BarrierSpec::flat(1.0, 3), bad_high, 100, Seed{}), PreconditionError);
    CHECK_THROWS_AS(ballot_probability_mc(BarrierSpec::flat(1.0, 3), ok, 99, Seed{}), PreconditionError);
    const std::vector<double> wrong_len{1.0, 1.0};
    CHECK_THROWS_AS(ballot_probability_mc(BarrierSpec::flat(1.0, 3), wrong_len, 100, Seed{}), PreconditionError);

    // two steps of variance 1/2 then a far barrier: same as one step of variance 1 at step 2
    const std::vector<double> vars{20.0, 0.05};
    BarrierSpec spec{1.0, [](int j) { return j == 1 ? 0.0 : 0.0; }, 2};
    const auto est = ballot_probability_mc(spec, vars, 20000, Seed{3, 0});
    CHECK(est.mean > 0.0);
    CHECK(est.mean < normal_cdf(1.0 / std::sqrt(20.0)) + 4.0 * est.std_error);
}

TEST_CASE("ballot band on a small grid") {
    const std::vector<double> unit{1.0};
    for (int n : {16, 64}) {
        double prev = 0.0;
        for (double a : {1.0, 2.0, 4.0}) {
            const auto est = ballot_probability_mc(BarrierSpec::flat(a, n), unit, 20000, Seed{4, 0});
            const double ratio = est.mean / std::min(1.0, a / std::sqrt(double(n)));
            CHECK(ratio >= 0.2);
            CHECK(ratio <= 5.0);
            CHECK(est.mean >= prev);
            prev = est.mean;
        }
    }
}

TEST_CASE("block index helpers") {
    CHECK(last_index_below_exp(0) == 0);
    CHECK(last_index_below_exp(1) == 2);
    CHECK(last_index_below_exp(2) == 7);
    CHECK(last_index_below_exp(3) == 20);
    CHECK(last_index_below_exp(6) == 403);
    CHECK(log_K_r(kRLow, 1e4) == 2);
    CHECK(log_K_r(0.98, 1e9) == 2);
    CHECK(log_K_r(0.999, 1e9) == 5);
    CHECK(log_K_r(0.999, 10.0) == 2);
    CHECK_THROWS_AS(log_K_r(1.0, 10.0), PreconditionError);
}

TEST_CASE("block moments by direct summation") {
    const auto b = block_moments(0.99, 0.5, 3);
    CHECK(b.k_first == 8);
    CHECK(b.k_last == 20);
    double var = 0.0, cov = 0.0;
    for (int k = 8; k <= 20; ++k) {
        var += std::pow(0.99, 2.0 * k) / (2.0 * k);
        cov += std::pow(0.99, 2.0 * k) * std::cos(0.5 * k) / (2.0 * k);
    }
    CHECK(b.sigma2 == doctest::Approx(var).epsilon(1e-14));
    CHECK(b.covariance == doctest::Approx(cov).epsilon(1e-13));
    CHECK(b.rho == doctest::Approx(cov / var).epsilon(1e-13));
    CHECK(block_moments(0.99, 0.0, 3).rho == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("block statistics and the head index M") {
    const auto zero = block_stats(0.999, 0.0, 1e9);
    CHECK(zero.log_Kr == 5);
    CHECK(zero.M == 4);  // e^M >= K_r / e
    CHECK(zero.blocks.size() == 5);
    const auto narrow = block_stats(0.999, 0.5, 1e9);
    CHECK(narrow.M == 4);
    // 10^3/|theta| is the binding term for tiny theta only when it is below K_r/e
    const auto wide = block_stats(0.99999, 0.5, 1e12);
    CHECK(std::exp(double(wide.M)) >= std::min(2000.0, wide.K_r / std::numbers::e));
    CHECK(std::exp(double(wide.M - 1)) < std::min(2000.0, wide.K_r / std::numbers::e));
    CHECK(wide.M == 8);
    CHECK_THROWS_AS(block_stats(1.0, 0.5, 100.0), PreconditionError);
    CHECK_THROWS_AS(block_stats(0.9, 0.5, 100.0), PreconditionError);  // log K_r < 2
    CHECK_THROWS_AS(block_stats(0.999, 4.0, 1e9), PreconditionError);
}

TEST_CASE("covariance and variance bounds") {
    for (double r : {0.98, kRLow, 0.999, 0.9999}) {
        const int L = log_K_r(r, 1e12);
        for (double theta : {0.1, 0.5, std::numbers::pi / 2.0, std::numbers::pi}) {
            for (int m = 1; m <= 8; ++m) {
                const auto b = block_moments(r, theta, m);
                const double em1 = std::exp(double(m - 1));
                CHECK(std::abs(b.covariance) <= std::numbers::pi / (std::abs(theta) * em1) + 1e-12);
                if (m <= L && m >= 2) {
                    CHECK(b.sigma2 >= 0.25 - 1e-12);
                    CHECK(b.sigma2 <= 0.5 + 1.0 / (2.0 * em1) + 1e-12);
                }
            }
        }
    }
    for (int m = 1; m <= 8; ++m)
        CHECK(std::abs(block_moments(0.999, std::numbers::pi, m).covariance) <= std::exp(-(m - 1.0)) + 1e-12);
}

TEST_CASE("block covariance against MC") {
    const double r = 0.99, theta = 0.5;
    const auto b = block_moments(r, theta, 4);
    const std::size_t S = 1'000'000;
    std::vector<double> z0(S), zt(S);
    for (std::size_t i = 0; i < S; ++i) {
        GaussianStream s(split(Seed{5, 0}, i));
        double a = 0.0, c = 0.0;
        for (std::int64_t k = b.k_first; k <= b.k_last; ++k) {
            const double dk = double(k);
            const cplx x = s.next_complex_gaussian();
            a += x.real() * std::pow(r, dk) / std::sqrt(dk);
            c += (x * std::polar(std::pow(r, dk), dk * theta)).real() / std::sqrt(dk);
        }
        z0[i] = a;
        zt[i] = c;
    }
    const double m0 = pairwise_sum(z0) / S, mt = pairwise_sum(zt) / S;
    std::vector<double> prod(S);
    for (std::size_t i = 0; i < S; ++i) prod[i] = (z0[i] - m0) * (zt[i] - mt);
    const auto cov = summarize(prod, Seed{});
    CHECK(std::abs(cov.mean - b.covariance) <= 4.0 * cov.std_error);
}

TEST_CASE("walk increments") {
    const auto wb = block_stats(0.999, 1.0, 1e9);
    const auto x = draws(Seed{6, 0}, static_cast<std::size_t>(last_index_below_exp(wb.log_Kr)));
    const auto inc = walk_increments(wb, x);
    REQUIRE(inc.z_0.size() == static_cast<std::size_t>(wb.log_Kr - wb.M));
    double head = 0.0;
    for (std::int64_t k = 1; k <= last_index_below_exp(wb.M); ++k) {
        const double dk = double(k), rk = std::pow(0.999, dk);
        head += (x[k - 1] * std::polar(rk, dk)).real() / std::sqrt(dk) - rk * rk / dk;
    }
    CHECK(inc.head_theta == doctest::Approx(head).epsilon(1e-12));
    double z = 0.0;
    const auto& last = wb.blocks.back();
    for (std::int64_t k = last.k_first; k <= last.k_last; ++k)
        z += x[k - 1].real() * std::pow(0.999, double(k)) / std::sqrt(double(k));
    CHECK(inc.z_0.back() == doctest::Approx(z).epsilon(1e-12));
    CHECK_THROWS_AS(walk_increments(wb, std::span<const cplx>(x).first(10)), PreconditionError);
}

TEST_CASE("event G deterministic cases") {
    const std::vector<cplx> zeros(500);
    CHECK(event_G_holds(zeros, 1.0, 0.0, std::exp(6.0), 1.0));
    CHECK(event_G_holds(zeros, 1.0, 0.3, 100.0, 2.0));
    CHECK(event_G_grid_holds(zeros, 1.0, 100.0, 1.0));
    // a single block (k = 1, 2) at K = 3 and a forced large X(1)
    const double A = 1.0, r = 1.0;
    std::vector<cplx> big(2);
    big[0] = (A + 10.0) / r;
    CHECK_FALSE(event_G_holds(big, r, 0.0, 3.0, A));
    CHECK_FALSE(event_G_grid_holds(big, r, 3.0, A));

    CHECK_THROWS_AS(event_G_holds(zeros, 0.99, 0.0, 100.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(event_G_holds(zeros, 1.0, 0.0, 100.0, 3.0), PreconditionError);
    CHECK_THROWS_AS(event_G_holds(zeros, 1.0, 0.0, 2.5, 1.0), PreconditionError);
    CHECK_THROWS_AS(event_G_holds(zeros, 1.0, 0.0, 100.0, 0.5), PreconditionError);
    CHECK_THROWS_AS(event_G_holds(std::span<const cplx>(zeros).first(5), 1.0, 0.0, 100.0, 1.0), PreconditionError);
}

TEST_CASE("event indicators are monotone in A") {
    const double K = std::exp(6.0);
    const double cap = std::sqrt(6.0);
    for (std::uint64_t i = 0; i < 300; ++i) {
        const auto x = draws(split(Seed{7, 0}, i), 403);
        bool prev = false;
        for (double A : {1.0, 1.5, 2.0, cap}) {
            const bool now = event_G_holds(x, 1.0, 0.7, K, A);
            CHECK((!prev || now));
            prev = now;
        }
        const bool l1 = event_L_holds(x, kRLow, 0.7, 1e4, 1.0);
        const bool l2 = event_L_holds(x, kRLow, 0.7, 1e4, std::sqrt(2.0));
        CHECK((!l1 || l2));
        // the angle grid contains theta = 0
        if (event_G_grid_holds(x, 1.0, K, 2.0)) CHECK(event_G_holds(x, 1.0, 0.0, K, 2.0));
    }
}

TEST_CASE("event G failure probability decreases in A") {
    const double K = std::exp(6.0);
    const std::vector<double> As{1.0, 2.0, std::sqrt(6.0)};
    const std::size_t S = 100000;
    std::vector<std::size_t> failures(As.size(), 0);
    for (std::size_t i = 0; i < S; ++i) {
        const auto x = draws(split(Seed{8, 0}, i), 403);
        for (std::size_t j = 0; j < As.size(); ++j) failures[j] += event_G_holds(x, 1.0, 0.0, K, As[j]) ? 0 : 1;
    }
    CHECK(failures[0] >= failures[1]);
    CHECK(failures[1] >= failures[2]);
    CHECK(failures[0] > 0);
}

TEST_CASE("event L") {
    const std::vector<cplx> zeros(100);
    // the level A - 5 log n is already negative at n = 2
    CHECK_FALSE(event_L_holds(zeros, kRLow, 0.0, 1e4, 1.0));
    CHECK(event_L_holds(std::vector<cplx>(100, cplx{-50.0, 0.0}), kRLow, 0.0, 1e4, 1.0));
    CHECK_THROWS_AS(event_L_holds(zeros, 0.9, 0.0, 1e4, 1.0), PreconditionError);
    CHECK_THROWS_AS(event_L_holds(zeros, 1.0, 0.0, 1e4, 1.0), PreconditionError);
    CHECK_THROWS_AS(event_L_holds(zeros, kRLow, 0.0, 5.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(event_L_holds(zeros, kRLow, 0.0, 1e4, 1.5), PreconditionError);  // sqrt(log K_r) = sqrt 2

    const std::size_t S = 100000;
    std::vector<double> hits(S);
    const double A = std::sqrt(2.0);
    for (std::size_t i = 0; i < S; ++i) {
        const auto x = draws(split(Seed{9, 0}, i), 7);
        hits[i] = event_L_holds(x, kRLow, 0.0, 1e4, A) ? 1.0 : 0.0;
    }
    const auto est = summarize(hits, Seed{});
    const double ratio = est.mean / (A / std::sqrt(double(log_K_r(kRLow, 1e4))));
    CHECK(ratio >= 0.2);
    CHECK(ratio <= 5.0);
}

TEST_CASE("change of measure") {
    const auto [left, right] = change_of_measure_check(20.0, 1.0, 2.0, 20000, 200000, Seed{10, 0});
    CHECK(agree_within(left.mean, left.std_error, right.mean, right.std_error, 5.0));
    CHECK(left.samples == 20000);
    CHECK(right.samples == 200000);

    // barrier out of reach: both sides reduce to the closed form
    const auto [l2, r2] = change_of_measure_check(6.0, 1.0, 1e3, 50000, 1000, Seed{11, 0});
    const double closed = circle_mean_closed_form(6.0, 1.0);
    CHECK(std::abs(l2.mean - closed) <= 4.0 * l2.std_error);
    CHECK(r2.mean == doctest::Approx(closed).epsilon(1e-15));

    CHECK_THROWS_AS(change_of_measure_check(2.0, 1.0, 2.0, 10, 10, Seed{}), PreconditionError);
    CHECK_THROWS_AS(change_of_measure_check(20.0, 0.9, 2.0, 10, 10, Seed{}), PreconditionError);
}

TEST_CASE("bivariate density") {
    const BivariateParams p{0.5, -1.0, 2.0, 0.5, 0.3};
    CHECK(bivariate_density(p, 0.5, -1.0) ==
          doctest::Approx(1.0 / (2.0 * std::numbers::pi * std::sqrt(2.0 * 0.5) * std::sqrt(1.0 - 0.09))));
    const BivariateParams indep{0.5, -1.0, 2.0, 0.5, 0.0};
    for (double x1 : {-2.0, 0.0, 1.3})
        for (double x2 : {-3.0, -1.0, 0.4}) {
            const double f1 = std::exp(-(x1 - 0.5) * (x1 - 0.5) / 4.0) / std::sqrt(2.0 * std::numbers::pi * 2.0);
            const double f2 = std::exp(-(x2 + 1.0) * (x2 + 1.0) / 1.0) / std::sqrt(2.0 * std::numbers::pi * 0.5);
            CHECK(std::abs(bivariate_density(indep, x1, x2) - f1 * f2) <= 1e-14);
            CHECK(dominating_density(indep, x1, x2) == doctest::Approx(bivariate_density(indep, x1, x2)).epsilon(1e-14));
        }
    for (double rho : {-0.3, 0.05, 0.6}) {
        BivariateParams q{0.0, 0.0, 1.0, 1.5, rho};
        const int n = 400;
        const double h1 = 16.0 / n, h2 = 16.0 * std::sqrt(1.5) / n;
        std::vector<double> cells;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                cells.push_back(bivariate_density(q, -8.0 + (i + 0.5) * h1, -8.0 * std::sqrt(1.5) + (j + 0.5) * h2));
        CHECK(std::abs(pairwise_sum(cells) * h1 * h2 - 1.0) <= 1e-6);
    }
    CHECK_THROWS_AS(bivariate_density(BivariateParams{0, 0, 1, 1, 1.0}, 0, 0), PreconditionError);
    CHECK_THROWS_AS(dominating_density(BivariateParams{0, 0, 1, 1, -1.0}, 0, 0), PreconditionError);
    CHECK_THROWS_AS(bivariate_density(BivariateParams{0, 0, 0, 1, 0.1}, 0, 0), PreconditionError);
}

TEST_CASE("pointwise domination") {
    for (double rho : {-0.3, -0.05, 0.05, 0.3}) {
        const BivariateParams p{0.2, -0.4, 0.8, 1.7, rho};
        for (int i = 0; i < 100; ++i)
            for (int j = 0; j < 100; ++j) {
                const double x1 = 0.2 + std::sqrt(0.8) * (-6.0 + 12.0 * i / 99.0);
                const double x2 = -0.4 + std::sqrt(1.7) * (-6.0 + 12.0 * j / 99.0);
                CHECK(bivariate_density(p, x1, x2) <= dominating_density(p, x1, x2) + 1e-12);
            }
    }
}

TEST_CASE("bivariate sampler and the event bound") {
    const BivariateParams p{1.0, 2.0, 4.0, 0.25, 0.3};
    const std::size_t S = 100000;
    std::vector<double> a(S), b(S), quad(S);
    GaussianStream s(Seed{12, 0});
    for (std::size_t i = 0; i < S; ++i) {
        const auto [y1, y2] = sample_bivariate(p, s);
        a[i] = y1;
        b[i] = y2;
        quad[i] = (y1 > 1.0 && y2 > 2.0) ? 1.0 : 0.0;
    }
    CHECK(correlation(a, b) == doctest::Approx(0.3).epsilon(0.05));
    CHECK(pairwise_sum(a) / S == doctest::Approx(1.0).epsilon(0.02));
    const auto est = summarize(quad, Seed{});
    const double bound = std::sqrt(1.3 / 0.7) * 0.25;
    CHECK(est.mean <= bound + 4.0 * est.std_error);
    // exact orthant probability 1/4 + asin(rho)/(2 pi)
    CHECK(std::abs(est.mean - (0.25 + std::asin(0.3) / (2.0 * std::numbers::pi))) <= 4.0 * est.std_error);
}

TEST_CASE("two-walk expectation: single-block lognormal closed form") {
    for (double theta : {0.0, 1.0}) {
        const auto wb = block_stats(kRLow, theta, 1e4);
        REQUIRE(wb.log_Kr - wb.M == 1);
        const auto est = two_walk_tilted_expectation(kRLow, theta, 1e4, 1e9, 200000, Seed{13, 0});
        const double exact = two_walk_unconstrained(wb);
        const auto& b = wb.blocks.back();
        CHECK(exact == doctest::Approx(std::exp(4.0 * b.sigma2 * (1.0 + b.rho))));
        CHECK(std::abs(est.mean - exact) <= 5.0 * est.std_error);
    }
}

TEST_CASE("two-walk expectation: barrier monotonicity and shape") {
    const double r = 0.9995, theta = 1.0, K = 1e9;
    const auto wb = block_stats(r, theta, K);
    double prev = INFINITY;
    for (double B : {3.0, 1.0, 0.0}) {
        const auto est = two_walk_tilted_expectation(r, theta, K, B, 20000, Seed{14, 0});
        CHECK(est.mean <= prev);
        prev = est.mean;
        const double ratio = est.mean / two_walk_shape(wb, B);
        CHECK(ratio > 0.0);
        CHECK(ratio <= 10.0);
    }
    CHECK(two_walk_shape(wb, -1.0) == doctest::Approx(two_walk_shape(wb, 0.0)));
}

TEST_CASE("restricted circle moments satisfy the Hoelder bound") {
    const auto m = restricted_circle_moments(kRLow, 10.0, 1.0, 0.5, 16, 2000, Seed{15, 0});
    CHECK(m.first.mean > 0.0);
    CHECK(m.second.mean >= m.first.mean * m.first.mean);
    CHECK(m.power.mean >= m.holder_bound * (1.0 - 1e-12));
    CHECK(m.power.q == 0.5);
    CHECK_THROWS_AS(restricted_circle_moments(kRLow, 10.0, 1.0, 1.5, 16, 100, Seed{}), PreconditionError);
}
