#include "hmc/number_models.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "hmc/chaos.hpp"
#include "hmc/errors.hpp"
#include "hmc/parallel.hpp"

namespace hmc {

// ---------------------------------------------------------------------------
// Integers
// ---------------------------------------------------------------------------

PrimeSieve::PrimeSieve(std::uint32_t limit) : spf_(limit + 1, 0), prime_index_(limit + 1, -1) {
    // linear sieve
    for (std::uint32_t i = 2; i <= limit; ++i) {
        if (spf_[i] == 0) {
            spf_[i] = i;
            prime_index_[i] = static_cast<std::int64_t>(primes_.size());
            primes_.push_back(i);
        }
        for (std::uint32_t p : primes_) {
            const std::uint64_t ip = static_cast<std::uint64_t>(i) * p;
            if (p > spf_[i] || ip > limit) break;
            spf_[ip] = p;
        }
    }
    if (limit >= 1) spf_[1] = 1;
}

SteinhausModel::SteinhausModel(double x, const Seed& seed) {
    require(x >= 1.0 && x < 4.0e9, "SteinhausModel: 1 <= x < 4e9");
    build(PrimeSieve(static_cast<std::uint32_t>(std::floor(x))), seed);
}

SteinhausModel::SteinhausModel(const PrimeSieve& sieve, const Seed& seed) { build(sieve, seed); }

void SteinhausModel::build(const PrimeSieve& sieve, const Seed& seed) {
    GaussianStream stream(seed);
    std::vector<cplx> prime_values(sieve.primes().size());
    for (auto& v : prime_values) v = stream.next_unit_phase();
    const std::uint32_t x = sieve.limit();
    values_.assign(static_cast<std::size_t>(x) + 1, cplx{});
    if (x >= 1) values_[1] = 1.0;
    for (std::uint32_t n = 2; n <= x; ++n) {
        const std::uint32_t p = sieve.smallest_factor(n);
        values_[n] = prime_values[static_cast<std::size_t>(sieve.prime_index(p))] * values_[n / p];
    }
}

cplx SteinhausModel::partial_sum() const {
    cplx s{};
    for (std::size_t n = 1; n < values_.size(); ++n) s += values_[n];
    return s;
}

cplx steinhaus_partial_sum(double x, const Seed& seed) { return SteinhausModel(x, seed).partial_sum(); }

SteinhausEstimate estimate_steinhaus(double x, std::size_t samples, const Seed& seed, unsigned workers) {
    require(x >= 1.0 && x < 4.0e9, "estimate_steinhaus: 1 <= x < 4e9");
    require(samples >= 2, "estimate_steinhaus: samples >= 2");
    const PrimeSieve sieve(static_cast<std::uint32_t>(std::floor(x)));
    const auto sums = parallel_map<cplx>(samples, workers, [&](std::size_t i) {
        return SteinhausModel(sieve, split(seed, i)).partial_sum();
    });
    std::vector<double> sq(samples), ab(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        sq[i] = std::norm(sums[i]);
        ab[i] = std::abs(sums[i]);
    }
    SteinhausEstimate out{x, summarize(sq, seed, 1.0), summarize(ab, seed, 0.5), 0.0};
    const double loglog = std::log(std::log(x));
    out.compensated = loglog > 0.0 ? out.mean_abs.mean * std::pow(loglog, 0.25) / std::sqrt(x) : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Counting
// ---------------------------------------------------------------------------

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

bool is_prime_power(std::uint64_t n) {
    if (n < 2) return false;
    std::uint64_t p = 2;
    while (n % p != 0) {
        if (p * p > n) return true;  // n itself is prime
        ++p;
    }
    while (n % p == 0) n /= p;
    return n == 1;
}

int mobius(std::uint64_t n) {
    int sign = 1;
    for (std::uint64_t p = 2; p * p <= n; ++p) {
        if (n % p != 0) continue;
        n /= p;
        if (n % p == 0) return 0;
        sign = -sign;
    }
    if (n > 1) sign = -sign;
    return sign;
}

std::uint64_t count_irreducibles(std::uint64_t q, int n) {
    require(is_prime_power(q), "count_irreducibles: q must be a prime power");
    require(n >= 1, "count_irreducibles: n >= 1");
    using i128 = __int128;
    auto power = [q](int e) {
        i128 v = 1;
        for (int i = 0; i < e; ++i) {
            v *= static_cast<i128>(q);
            require(v < (static_cast<i128>(1) << 100), "count_irreducibles: q^n too large");
        }
        return v;
    };
    i128 total = 0;
    for (int d = 1; d <= n; ++d)
        if (n % d == 0) total += static_cast<i128>(mobius(static_cast<std::uint64_t>(d))) * power(n / d);
    const i128 count = total / n;
    require(count <= static_cast<i128>(std::numeric_limits<std::uint64_t>::max()),
            "count_irreducibles: result exceeds 64 bits");
    return static_cast<std::uint64_t>(count);
}

// ---------------------------------------------------------------------------
// F_p[t] arithmetic
// ---------------------------------------------------------------------------

namespace {

int degree(const PrimeFieldPoly& f) { return static_cast<int>(f.size()) - 1; }

// remainder of a modulo the monic polynomial b
PrimeFieldPoly poly_mod(PrimeFieldPoly a, const PrimeFieldPoly& b, int p) {
    const int db = degree(b);
    for (int i = degree(a); i >= db; --i) {
        const int c = a[static_cast<std::size_t>(i)];
        if (c == 0) continue;
        for (int j = 0; j <= db; ++j) {
            auto& t = a[static_cast<std::size_t>(i - db + j)];
            t = ((t - c * b[static_cast<std::size_t>(j)]) % p + p) % p;
        }
    }
    a.resize(static_cast<std::size_t>(std::max(db, 1)));
    return a;
}

bool is_zero(const PrimeFieldPoly& f) {
    for (int c : f)
        if (c != 0) return false;
    return true;
}

// Monic polynomial of degree d with coefficient digits of `index` in base p.
PrimeFieldPoly decode(std::uint64_t index, int d, int p) {
    PrimeFieldPoly f(static_cast<std::size_t>(d) + 1);
    for (int i = 0; i < d; ++i) {
        f[static_cast<std::size_t>(i)] = static_cast<int>(index % static_cast<std::uint64_t>(p));
        index /= static_cast<std::uint64_t>(p);
    }
    f.back() = 1;
    return f;
}

std::uint64_t encode(const PrimeFieldPoly& f, int p) {
    std::uint64_t index = 0;
    for (int i = degree(f) - 1; i >= 0; --i)
        index = index * static_cast<std::uint64_t>(p) + static_cast<std::uint64_t>(f[static_cast<std::size_t>(i)]);
    return index;
}

PrimeFieldPoly poly_mul(const PrimeFieldPoly& a, const PrimeFieldPoly& b, int p) {
    PrimeFieldPoly c(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) c[i + j] = (c[i + j] + a[i] * b[j]) % p;
    }
    return c;
}

std::uint64_t ipow(std::uint64_t base, int e) {
    std::uint64_t v = 1;
    for (int i = 0; i < e; ++i) v *= base;
    return v;
}

}  // namespace

bool is_irreducible(const PrimeFieldPoly& f, int p) {
    require(is_prime(static_cast<std::uint64_t>(p)), "is_irreducible: p must be prime");
    require(!f.empty() && f.back() == 1, "is_irreducible: monic polynomial required");
    const int d = degree(f);
    if (d < 1) return false;
    for (int e = 1; e <= d / 2; ++e) {
        for (const auto& g : brute_force_irreducibles(p, e))
            if (is_zero(poly_mod(f, g, p))) return false;
    }
    return true;
}

std::vector<PrimeFieldPoly> brute_force_irreducibles(int p, int n) {
    require(is_prime(static_cast<std::uint64_t>(p)), "brute_force_irreducibles: p must be prime");
    require(n >= 1, "brute_force_irreducibles: n >= 1");
    require(ipow(static_cast<std::uint64_t>(p), n) <= kFunctionFieldBudget, "brute_force_irreducibles: p^n <= 1e7");
    std::vector<std::vector<PrimeFieldPoly>> lower(static_cast<std::size_t>(n / 2) + 1);
    for (int e = 1; e <= n / 2; ++e) lower[static_cast<std::size_t>(e)] = brute_force_irreducibles(p, e);
    std::vector<PrimeFieldPoly> out;
    const std::uint64_t total = ipow(static_cast<std::uint64_t>(p), n);
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        const auto f = decode(idx, n, p);
        bool irreducible = true;
        for (int e = 1; e <= n / 2 && irreducible; ++e)
            for (const auto& g : lower[static_cast<std::size_t>(e)])
                if (is_zero(poly_mod(f, g, p))) {
                    irreducible = false;
                    break;
                }
        if (irreducible) out.push_back(f);
    }
    return out;
}

// ---------------------------------------------------------------------------
// FFModel
// ---------------------------------------------------------------------------

FFModel::FFModel(int q, int N, const Seed& seed) : q_(q), N_(N) {
    require(is_prime(static_cast<std::uint64_t>(q)), "FFModel: q must be prime (prime powers need an external field table)");
    require(N >= 0, "FFModel: N >= 0");
    std::uint64_t total = 0;
    for (int d = 0; d <= N; ++d) {
        offsets_.push_back(static_cast<std::size_t>(total));
        total += ipow(static_cast<std::uint64_t>(q), d);
        require(total <= kFunctionFieldBudget, "FFModel: enumeration budget sum_{d<=N} q^d <= 1e7 exceeded");
    }
    offsets_.push_back(static_cast<std::size_t>(total));
    const auto count = static_cast<std::size_t>(total);
    degree_of_.resize(count);
    for (int d = 0; d <= N; ++d)
        for (std::size_t id = offsets_[static_cast<std::size_t>(d)]; id < offsets_[static_cast<std::size_t>(d) + 1]; ++id)
            degree_of_[id] = d;
    factor_.assign(count, -1);
    cofactor_.assign(count, -1);

    // Sieve: an unmarked polynomial of degree d is irreducible; mark its
    // multiples by every monic cofactor of degree 1..N-d.
    for (int d = 1; d <= N; ++d) {
        const std::uint64_t per_degree = ipow(static_cast<std::uint64_t>(q), d);
        for (std::uint64_t idx = 0; idx < per_degree; ++idx) {
            const std::size_t id = id_of(d, idx);
            if (factor_[id] >= 0) continue;
            irreducibles_.push_back(id);
            const auto P = decode(idx, d, q);
            for (int j = 1; j <= N - d; ++j) {
                const std::uint64_t per_cof = ipow(static_cast<std::uint64_t>(q), j);
                for (std::uint64_t g = 0; g < per_cof; ++g) {
                    const std::size_t h = id_of(d + j, encode(poly_mul(P, decode(g, j, q), q), q));
                    if (factor_[h] < 0) {
                        factor_[h] = static_cast<std::int64_t>(id);
                        cofactor_[h] = static_cast<std::int64_t>(id_of(j, g));
                    }
                }
            }
        }
    }

    resample(seed);
}

void FFModel::resample(const Seed& seed) {
    GaussianStream stream(seed);
    phase_.resize(irreducibles_.size());
    for (auto& v : phase_) v = stream.next_unit_phase();
    f_.assign(degree_of_.size(), cplx{});
    f_[0] = 1.0;
    std::size_t next_irreducible = 0;
    for (std::size_t id = 1; id < f_.size(); ++id) {
        if (factor_[id] < 0) {
            f_[id] = phase_[next_irreducible++];
        } else {
            f_[id] = f_[static_cast<std::size_t>(factor_[id])] * f_[static_cast<std::size_t>(cofactor_[id])];
        }
    }
}

std::size_t FFModel::irreducible_count(int d) const {
    std::size_t c = 0;
    for (std::size_t id : irreducibles_) c += degree_of_[id] == d;
    return c;
}

cplx FFModel::A(int n) const {
    require(n >= 0 && n <= N_, "FFModel::A: 0 <= n <= N");
    cplx s{};
    for (std::size_t id = offsets_[static_cast<std::size_t>(n)]; id < offsets_[static_cast<std::size_t>(n) + 1]; ++id)
        s += f_[id];
    return s * std::pow(static_cast<double>(q_), -0.5 * n);
}

cplx FFModel::X(int k) const {
    require(k >= 1 && k <= N_, "FFModel::X: 1 <= k <= N");
    cplx s{};
    for (std::size_t i = 0; i < irreducibles_.size(); ++i) {
        const int d = degree_of_[irreducibles_[i]];
        if (k % d != 0) continue;
        const int r = k / d;
        s += std::pow(phase_[i], r) / static_cast<double>(r);
    }
    return s * std::sqrt(static_cast<double>(k)) * std::pow(static_cast<double>(q_), -0.5 * k);
}

ComplexSeries FFModel::euler_product() const {
    ComplexSeries c(static_cast<std::size_t>(N_));
    c[0] = 1.0;
    for (std::size_t i = 0; i < irreducibles_.size(); ++i) {
        const auto e = static_cast<std::size_t>(degree_of_[irreducibles_[i]]);
        const cplx a = phase_[i] * std::pow(static_cast<double>(q_), -0.5 * static_cast<double>(e));
        // multiply by 1 / (1 - a z^e)
        for (std::size_t n = e; n <= c.degree_bound(); ++n) c[n] += a * c[n - e];
    }
    return c;
}

ComplexSeries FFModel::exp_identity() const {
    std::vector<cplx> x(static_cast<std::size_t>(N_));
    for (int k = 1; k <= N_; ++k) x[static_cast<std::size_t>(k) - 1] = X(k);
    return chaos_coefficients(x, static_cast<std::size_t>(N_), static_cast<double>(N_));
}

cplx ff_A(int q, int N, const Seed& seed) { return FFModel(q, N, seed).A(N); }

cplx ff_X(int q, int k, const Seed& seed) {
    require(k >= 1, "ff_X: k >= 1");
    return FFModel(q, k, seed).X(k);
}

}  // namespace hmc
