#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hmc/rng.hpp"
#include "hmc/series.hpp"
#include "hmc/stats.hpp"

namespace hmc {

// ---------------------------------------------------------------------------
// Steinhaus random multiplicative functions on the integers
// ---------------------------------------------------------------------------

/// Smallest-prime-factor table for 1..limit.
class PrimeSieve {
public:
    explicit PrimeSieve(std::uint32_t limit);

    std::uint32_t limit() const { return static_cast<std::uint32_t>(spf_.size()) - 1; }
    std::uint32_t smallest_factor(std::uint32_t n) const { return spf_[n]; }
    const std::vector<std::uint32_t>& primes() const { return primes_; }
    // position of prime p in primes(), or -1
    std::int64_t prime_index(std::uint32_t p) const { return prime_index_[p]; }

private:
    std::vector<std::uint32_t> spf_;
    std::vector<std::uint32_t> primes_;
    std::vector<std::int64_t> prime_index_;
};

/// f(n) for n <= x, with f(p) uniform on the unit circle (drawn in prime order
/// from the seed's stream) and extended by complete multiplicativity.
class SteinhausModel {
public:
    SteinhausModel(double x, const Seed& seed);
    SteinhausModel(const PrimeSieve& sieve, const Seed& seed);

    cplx value(std::uint32_t n) const { return values_[n]; }
    cplx partial_sum() const;
    std::uint32_t cutoff() const { return static_cast<std::uint32_t>(values_.size()) - 1; }

private:
    void build(const PrimeSieve& sieve, const Seed& seed);
    std::vector<cplx> values_;
};

/// sum_{n<=x} f(n) for one seeded instantiation.
cplx steinhaus_partial_sum(double x, const Seed& seed);

struct SteinhausEstimate {
    double x = 0.0;
    MomentEstimate mean_square;  // E|sum|^2, exactly floor(x)
    MomentEstimate mean_abs;     // E|sum|
    double compensated = 0.0;    // mean_abs * (log log x)^{1/4} / sqrt(x)
};

SteinhausEstimate estimate_steinhaus(double x, std::size_t samples, const Seed& seed, unsigned workers = 0);

// ---------------------------------------------------------------------------
// Function field F_q[t]
// ---------------------------------------------------------------------------

bool is_prime(std::uint64_t n);
bool is_prime_power(std::uint64_t n);
int mobius(std::uint64_t n);

/// |P_n| = (1/n) sum_{d|n} mu(d) q^{n/d}. q must be a prime power.
std::uint64_t count_irreducibles(std::uint64_t q, int n);

/// Monic polynomial over F_p, coefficients low to high with the leading 1 stored.
using PrimeFieldPoly = std::vector<int>;

/// Irreducibility by trial division against monic irreducibles of degree <= deg/2.
bool is_irreducible(const PrimeFieldPoly& f, int p);

/// All monic irreducibles of degree n over F_p, by exhaustive trial division.
std::vector<PrimeFieldPoly> brute_force_irreducibles(int p, int n);

/// Budget on sum_{d<=N} q^d for the function-field tables.
inline constexpr std::uint64_t kFunctionFieldBudget = 10'000'000;

/// Steinhaus model on the monic polynomials of degree <= N over F_q, q prime.
///
/// Every monic F is tabulated with one irreducible factor and its cofactor
/// (sieve over multiples), then f(F) is built by complete multiplicativity
/// from unit-circle values f(P), drawn in (degree, index) order.
class FFModel {
public:
    FFModel(int q, int N, const Seed& seed);

    int q() const { return q_; }
    int N() const { return N_; }
    std::size_t irreducible_count(int degree) const;

    /// Redraws every f(P) from `seed`, keeping the factor tables.
    void resample(const Seed& seed);

    /// q^{-n/2} sum_{F in M_n} f(F), by direct enumeration.
    cplx A(int n) const;

    /// (sqrt k / q^{k/2}) sum_{deg P | k} f(P)^{k/deg P} / (k / deg P).
    cplx X(int k) const;

    /// Coefficients of prod_P (1 - f(P) (q^{-1/2} z)^{deg P})^{-1} to degree N.
    ComplexSeries euler_product() const;

    /// Coefficients of exp(sum_{k<=N} X(k) z^k / sqrt k) to degree N.
    ComplexSeries exp_identity() const;

private:
    std::size_t id_of(int degree, std::uint64_t index) const { return offsets_[static_cast<std::size_t>(degree)] + index; }

    int q_;
    int N_;
    std::vector<std::size_t> offsets_;     // first id of each degree; id 0 is F = 1
    std::vector<int> degree_of_;           // per id
    std::vector<std::int64_t> factor_;     // an irreducible factor id, -1 when irreducible (or F = 1)
    std::vector<std::int64_t> cofactor_;
    std::vector<std::size_t> irreducibles_;  // ids, degree ascending
    std::vector<cplx> phase_;              // f(P) for irreducibles_[i]
    std::vector<cplx> f_;                  // f(F) for every id
};

cplx ff_A(int q, int N, const Seed& seed);
cplx ff_X(int q, int k, const Seed& seed);

}  // namespace hmc
