#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "hmc/rng.hpp"

namespace hmc {

using Rational = boost::multiprecision::cpp_rational;

/// Integer partition lambda_1 >= lambda_2 >= ... > 0 with a multiplicity view.
class Partition {
public:
    Partition() = default;
    /// Parts in any order; zeros are dropped. Throws on negative parts.
    explicit Partition(std::vector<int> parts);

    std::span<const int> parts() const { return parts_; }
    int largest_part() const { return parts_.empty() ? 0 : parts_.front(); }
    int total() const { return total_; }

    /// k -> m_k, the number of parts equal to k.
    std::map<int, int> multiplicities() const;

    friend bool operator==(const Partition&, const Partition&) = default;

private:
    std::vector<int> parts_;
    int total_ = 0;
};

/// Largest N accepted by the enumeration oracle (p(40) = 37338).
inline constexpr int kMaxEnumeratedN = 40;

/// Every partition of N with parts <= max_part exactly once, ordered
/// lexicographically on the nonincreasing part list (colexicographic on the
/// ascending list): 1+1+1+1, 2+1+1, 2+2, 3+1, 4.
std::vector<Partition> enumerate_partitions(int N, std::optional<int> max_part = std::nullopt);

/// p(N) by Euler's pentagonal-number recurrence.
std::uint64_t partition_count(int N);

/// a(lambda) = prod_k (X(k)/sqrt k)^{m_k} / m_k!, with X[0] = X(1).
cplx a_of_partition(const Partition& lambda, std::span<const cplx> x);

/// E|a(lambda)|^2 = prod_k 1 / (m_k! k^{m_k}), exactly.
Rational diagonal_second_moment(const Partition& lambda);

/// sum over partitions of N of diagonal_second_moment; identically 1.
Rational exact_total_mass(int N);

struct LargestPartSplit {
    std::vector<cplx> bands;  // bands[j-1] = A_j(N): N/2^j < lambda_1 <= N/2^{j-1}
    cplx smooth;              // A~_J(N): lambda_1 <= N/2^J
    cplx total;
};

/// A(N) regrouped by the size of the largest part.
LargestPartSplit reconstruct_A_by_largest_part(int N, int J, std::span<const cplx> x);

struct OrthogonalityEstimate {
    cplx mean;
    double std_error_re = 0.0;
    double std_error_im = 0.0;
    std::size_t samples = 0;

    bool consistent_with_zero(double sigmas) const;
};

/// MC estimate of E[a(lambda) conj(a(lambda'))] for distinct partitions.
OrthogonalityEstimate orthogonality_check(const Partition& lambda, const Partition& other,
                                          std::size_t samples, const Seed& seed, unsigned workers = 0);

}  // namespace hmc
