#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "hmc/errors.hpp"
#include "hmc/stats.hpp"

using namespace hmc;

TEST_CASE("pairwise sum") {
    std::vector<double> xs(1000);
    std::iota(xs.begin(), xs.end(), 1.0);
    CHECK(pairwise_sum(xs) == 500500.0);
    CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
}

TEST_CASE("summarize") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const auto e = summarize(v, Seed{1, 2}, 0.5);
    CHECK(e.mean == doctest::Approx(2.5));
    // sample sd = sqrt(5/3)
    CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
    CHECK(e.samples == 4);
    CHECK(e.q == 0.5);
    CHECK(e.seed == Seed{1, 2});
    CHECK_THROWS_AS(summarize(std::vector<double>{1.0}, Seed{}), PreconditionError);
}

TEST_CASE("agreement and KS helpers") {
    CHECK(agree_within(1.0, 0.1, 1.5, 0.0, 5.0));
    CHECK_FALSE(agree_within(1.0, 0.1, 1.6, 0.0, 5.0));
    CHECK(ks_two_sample({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(ks_two_sample({1, 2, 3}, {4, 5, 6}) == 1.0);
    // c(0.01) = 1.6276
    CHECK(ks_critical_value(100, 100, 0.01) == doctest::Approx(1.6276 * std::sqrt(0.02)).epsilon(1e-4));
}

TEST_CASE("normal cdf, correlation, slope") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(normal_cdf(std::sqrt(2.0)) == doctest::Approx(0.9213503964748575));
    const std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 8}, z{8, 6, 4, 2};
    CHECK(correlation(x, y) == doctest::Approx(1.0));
    CHECK(correlation(x, z) == doctest::Approx(-1.0));
    CHECK(ols_slope(x, y) == doctest::Approx(2.0));
}
