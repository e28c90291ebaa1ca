#include "hmc/partitions.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "hmc/errors.hpp"
#include "hmc/parallel.hpp"
#include "hmc/stats.hpp"

namespace hmc {

Partition::Partition(std::vector<int> parts) {
    for (int p : parts) require(p >= 0, "Partition: parts must be nonnegative");
    std::erase(parts, 0);
    std::sort(parts.begin(), parts.end(), std::greater<>());
    parts_ = std::move(parts);
    for (int p : parts_) total_ += p;
}

std::map<int, int> Partition::multiplicities() const {
    std::map<int, int> m;
    for (int p : parts_) ++m[p];
    return m;
}

namespace {

void enumerate_into(int remaining, int max_part, std::vector<int>& prefix, std::vector<Partition>& out) {
    if (remaining == 0) {
        out.emplace_back(prefix);
        return;
    }
    for (int p = 1; p <= std::min(remaining, max_part); ++p) {
        prefix.push_back(p);
        enumerate_into(remaining - p, p, prefix, out);
        prefix.pop_back();
    }
}

}  // namespace

std::vector<Partition> enumerate_partitions(int N, std::optional<int> max_part) {
    require(N >= 0, "enumerate_partitions: N >= 0");
    require(N <= kMaxEnumeratedN, "enumerate_partitions: N <= 40 (enumeration oracle cap)");
    const int cap = max_part.value_or(N);
    require(cap >= 0, "enumerate_partitions: max_part >= 0");
    std::vector<Partition> out;
    std::vector<int> prefix;
    enumerate_into(N, cap, prefix, out);
    return out;
}

std::uint64_t partition_count(int N) {
    require(N >= 0, "partition_count: N >= 0");
    std::vector<std::uint64_t> p(static_cast<std::size_t>(N) + 1, 0);
    p[0] = 1;
    for (int n = 1; n <= N; ++n) {
        // p(n) = sum_{k>=1} (-1)^{k+1} [p(n - k(3k-1)/2) + p(n - k(3k+1)/2)]
        std::int64_t acc = 0;
        for (int k = 1;; ++k) {
            const int g1 = k * (3 * k - 1) / 2;
            if (g1 > n) break;
            const int g2 = k * (3 * k + 1) / 2;
            const std::int64_t term = static_cast<std::int64_t>(p[static_cast<std::size_t>(n - g1)]) +
                                      (g2 <= n ? static_cast<std::int64_t>(p[static_cast<std::size_t>(n - g2)]) : 0);
            acc += (k % 2 == 1) ? term : -term;
        }
        p[static_cast<std::size_t>(n)] = static_cast<std::uint64_t>(acc);
    }
    return p[static_cast<std::size_t>(N)];
}

cplx a_of_partition(const Partition& lambda, std::span<const cplx> x) {
    cplx value = 1.0;
    for (const auto& [k, m] : lambda.multiplicities()) {
        require(static_cast<std::size_t>(k) <= x.size(), "a_of_partition: X(k) missing for a part of lambda");
        const cplx base = x[static_cast<std::size_t>(k) - 1] / std::sqrt(static_cast<double>(k));
        cplx term = 1.0;
        for (int i = 1; i <= m; ++i) term *= base / static_cast<double>(i);
        value *= term;
    }
    return value;
}

Rational diagonal_second_moment(const Partition& lambda) {
    boost::multiprecision::cpp_int denom = 1;
    for (const auto& [k, m] : lambda.multiplicities())
        for (int i = 1; i <= m; ++i) denom *= boost::multiprecision::cpp_int(i) * k;
    return Rational(1) / Rational(denom);
}

Rational exact_total_mass(int N) {
    Rational total = 0;
    for (const auto& lambda : enumerate_partitions(N)) total += diagonal_second_moment(lambda);
    return total;
}

LargestPartSplit reconstruct_A_by_largest_part(int N, int J, std::span<const cplx> x) {
    require(J >= 1, "reconstruct_A_by_largest_part: J >= 1");
    require(N >= 0 && static_cast<std::size_t>(N) <= x.size(),
            "reconstruct_A_by_largest_part: X(k) needed for k <= N");
    require(J < 62, "reconstruct_A_by_largest_part: J < 62");
    LargestPartSplit out;
    out.bands.assign(static_cast<std::size_t>(J), cplx{});
    const std::int64_t n = N;
    for (const auto& lambda : enumerate_partitions(N)) {
        const cplx a = a_of_partition(lambda, x);
        const std::int64_t top = lambda.largest_part();
        bool placed = false;
        for (int j = 1; j <= J && !placed; ++j) {
            // N/2^j < lambda_1 <= N/2^{j-1}, in integers
            if ((top << j) > n && (top << (j - 1)) <= n) {
                out.bands[static_cast<std::size_t>(j) - 1] += a;
                placed = true;
            }
        }
        if (!placed) out.smooth += a;
        out.total += a;
    }
    return out;
}

bool OrthogonalityEstimate::consistent_with_zero(double sigmas) const {
    return std::abs(mean.real()) <= sigmas * std_error_re && std::abs(mean.imag()) <= sigmas * std_error_im;
}

OrthogonalityEstimate orthogonality_check(const Partition& lambda, const Partition& other,
                                          std::size_t samples, const Seed& seed, unsigned workers) {
    require(!(lambda == other), "orthogonality_check: partitions must differ (use diagonal_second_moment)");
    require(samples >= 2, "orthogonality_check: samples >= 2");
    const auto need = static_cast<std::size_t>(std::max(lambda.largest_part(), other.largest_part()));
    const auto products = parallel_map<cplx>(samples, workers, [&](std::size_t i) {
        GaussianStream stream(split(seed, i));
        std::vector<cplx> x(need);
        for (auto& v : x) v = stream.next_complex_gaussian();
        return a_of_partition(lambda, x) * std::conj(a_of_partition(other, x));
    });
    std::vector<double> re(samples), im(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        re[i] = products[i].real();
        im[i] = products[i].imag();
    }
    const auto sr = summarize(re, seed), si = summarize(im, seed);
    return OrthogonalityEstimate{{sr.mean, si.mean}, sr.std_error, si.std_error, samples};
}

}  // namespace hmc
