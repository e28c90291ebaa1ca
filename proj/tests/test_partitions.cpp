#include <doctest.h>

#include <cmath>
#include <vector>

#include "hmc/chaos.hpp"
#include "hmc/errors.hpp"
#include "hmc/partitions.hpp"
#include "hmc/series.hpp"
#include "hmc/stats.hpp"

using namespace hmc;

namespace {

std::vector<cplx> draws(std::uint64_t root, std::size_t n) {
    GaussianStream s(Seed{root, 0});
    return draw_gaussians(s, n);
}

}  // namespace

TEST_CASE("partition views") {
    const Partition p({1, 3, 0, 1, 2});
    CHECK(std::vector<int>(p.parts().begin(), p.parts().end()) == std::vector<int>{3, 2, 1, 1});
    CHECK(p.total() == 7);
    CHECK(p.largest_part() == 3);
    int weighted = 0;
    for (const auto& [k, m] : p.multiplicities()) weighted += k * m;
    CHECK(weighted == p.total());
    CHECK(p.multiplicities().at(1) == 2);
    CHECK_THROWS_AS(Partition({2, -1}), PreconditionError);
}

TEST_CASE("enumeration") {
    const auto zero = enumerate_partitions(0);
    REQUIRE(zero.size() == 1);
    CHECK(zero[0].parts().empty());
    CHECK(enumerate_partitions(5).size() == 7);

    const auto capped = enumerate_partitions(4, 2);
    REQUIRE(capped.size() == 3);
    CHECK(capped[0] == Partition({1, 1, 1, 1}));
    CHECK(capped[1] == Partition({2, 1, 1}));
    CHECK(capped[2] == Partition({2, 2}));

    const auto four = enumerate_partitions(4);
    REQUIRE(four.size() == 5);
    CHECK(four[3] == Partition({3, 1}));
    CHECK(four[4] == Partition({4}));

    for (int N = 0; N <= 25; ++N) CHECK(enumerate_partitions(N).size() == partition_count(N));
    // classical values
    CHECK(partition_count(25) == 1958);
    CHECK(partition_count(40) == 37338);
    CHECK_THROWS_AS(enumerate_partitions(41), PreconditionError);
    CHECK_THROWS_AS(enumerate_partitions(-1), PreconditionError);
}

TEST_CASE("a(lambda)") {
    const std::vector<cplx> x{cplx(0.3, -1.1), cplx(2.0, 0.5), cplx(-0.7, 0.2)};
    CHECK(a_of_partition(Partition(), x) == cplx(1.0));
    CHECK(std::abs(a_of_partition(Partition({1, 1}), x) - x[0] * x[0] / 2.0) < 1e-15);
    CHECK(std::abs(a_of_partition(Partition({2}), x) - x[1] / std::sqrt(2.0)) < 1e-15);
    const cplx expected = x[2] / std::sqrt(3.0) * (x[0] * x[0] / 2.0);
    CHECK(std::abs(a_of_partition(Partition({3, 1, 1}), x) - expected) < 1e-15);
    CHECK_THROWS_AS(a_of_partition(Partition({4}), x), PreconditionError);
}

TEST_CASE("diagonal second moments") {
    CHECK(diagonal_second_moment(Partition({7})) == Rational(1, 7));
    CHECK(diagonal_second_moment(Partition({2, 1})) == Rational(1, 2));
    CHECK(diagonal_second_moment(Partition({1, 1, 1})) == Rational(1, 6));
    CHECK(diagonal_second_moment(Partition({2, 2, 1})) == Rational(1, 8));
}

TEST_CASE("exact total mass is one") {
    CHECK(exact_total_mass(0) == 1);
    CHECK(exact_total_mass(1) == 1);
    CHECK(exact_total_mass(3) == 1);
    for (int N = 0; N <= 25; ++N) CHECK(exact_total_mass(N) == 1);
}

TEST_CASE("partition sum equals the sampler") {
    for (int N = 0; N <= 10; ++N) {
        const auto x = draws(100 + static_cast<std::uint64_t>(N), 10);
        cplx sum{};
        for (const auto& p : enumerate_partitions(N)) sum += a_of_partition(p, x);
        const auto A = chaos_coefficients(x, static_cast<std::size_t>(N), 10.0, ExpEngine::Recurrence);
        CHECK(std::abs(sum - A[static_cast<std::size_t>(N)]) <= 1e-10);
    }
}

TEST_CASE("partition-sum second moment by MC") {
    const std::size_t S = 10000;
    for (int N : {3, 7, 10}) {
        const auto parts = enumerate_partitions(N);
        std::vector<double> v(S);
        for (std::size_t i = 0; i < S; ++i) {
            GaussianStream s(split(Seed{200, static_cast<std::uint64_t>(N)}, i));
            const auto x = draw_gaussians(s, static_cast<std::size_t>(N));
            cplx sum{};
            for (const auto& p : parts) sum += a_of_partition(p, x);
            v[i] = std::norm(sum);
        }
        const auto est = summarize(v, Seed{});
        CHECK(std::abs(est.mean - 1.0) <= 4.0 * est.std_error);
    }
}

TEST_CASE("largest-part regrouping") {
    const auto x1 = draws(300, 1);
    const auto one = reconstruct_A_by_largest_part(1, 1, x1);
    CHECK(std::abs(one.bands[0] - x1[0]) < 1e-15);
    CHECK(one.smooth == cplx(0.0));

    for (int N = 1; N <= 12; ++N) {
        const auto x = draws(400 + static_cast<std::uint64_t>(N), 12);
        const auto A = chaos_coefficients(x, static_cast<std::size_t>(N), 12.0, ExpEngine::Recurrence);
        for (int J = 1; J <= 3; ++J) {
            const auto split_A = reconstruct_A_by_largest_part(N, J, x);
            cplx sum = split_A.smooth;
            for (const auto& b : split_A.bands) sum += b;
            CHECK(std::abs(sum - A[static_cast<std::size_t>(N)]) <= 1e-10);
            CHECK(std::abs(split_A.total - A[static_cast<std::size_t>(N)]) <= 1e-10);
        }
    }
    // band membership by hand at N = 10, J = 2: bands (5, 10], (2.5, 5], smooth <= 2
    const auto x = draws(500, 10);
    const auto s = reconstruct_A_by_largest_part(10, 2, x);
    cplx b1{}, b2{}, sm{};
    for (const auto& p : enumerate_partitions(10)) {
        const int top = p.largest_part();
        const cplx a = a_of_partition(p, x);
        if (top > 5)
            b1 += a;
        else if (top > 2)
            b2 += a;
        else
            sm += a;
    }
    CHECK(std::abs(s.bands[0] - b1) < 1e-13);
    CHECK(std::abs(s.bands[1] - b2) < 1e-13);
    CHECK(std::abs(s.smooth - sm) < 1e-13);
    CHECK_THROWS_AS(reconstruct_A_by_largest_part(10, 0, x), PreconditionError);
    CHECK_THROWS_AS(reconstruct_A_by_largest_part(11, 1, x), PreconditionError);
}

TEST_CASE("smooth part second moment matches the smooth weight") {
    const int N = 12, J = 2;
    const std::size_t S = 10000;
    std::vector<double> v(S);
    for (std::size_t i = 0; i < S; ++i) {
        GaussianStream s(split(Seed{600, 0}, i));
        const auto x = draw_gaussians(s, N);
        v[i] = std::norm(reconstruct_A_by_largest_part(N, J, x).smooth);
    }
    const auto est = summarize(v, Seed{});
    CHECK(std::abs(est.mean - smooth_partition_weight(N, N >> J)) <= 4.0 * est.std_error);
}

TEST_CASE("orthogonality") {
    const auto a = orthogonality_check(Partition({2}), Partition({1, 1}), 100000, Seed{700, 0});
    CHECK(a.consistent_with_zero(4.0));
    const auto b = orthogonality_check(Partition({1}), Partition({2}), 100000, Seed{701, 0});
    CHECK(b.consistent_with_zero(4.0));
    const auto c = orthogonality_check(Partition({3, 1}), Partition({2, 2}), 100000, Seed{702, 0});
    CHECK(c.consistent_with_zero(4.0));
    CHECK(c.samples == 100000);
    CHECK_THROWS_AS(orthogonality_check(Partition({2, 1}), Partition({1, 2}), 100, Seed{}), PreconditionError);
}
