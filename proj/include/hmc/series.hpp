#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hmc/rng.hpp"

namespace hmc {

/// Truncated complex power series c_0 + c_1 z + ... + c_D z^D.
///
/// All arithmetic is exact truncation: coefficients 0..D agree with the
/// untruncated formal operation.
class ComplexSeries {
public:
    ComplexSeries() : coeffs_(1) {}
    explicit ComplexSeries(std::size_t degree_bound) : coeffs_(degree_bound + 1) {}
    explicit ComplexSeries(std::vector<cplx> coeffs);

    std::size_t degree_bound() const { return coeffs_.size() - 1; }

    cplx operator[](std::size_t n) const { return n < coeffs_.size() ? coeffs_[n] : cplx{}; }
    cplx& operator[](std::size_t n) { return coeffs_[n]; }

    std::span<const cplx> coeffs() const { return coeffs_; }
    std::span<cplx> coeffs() { return coeffs_; }

    // Value of the truncated polynomial at z (Horner).
    cplx evaluate(cplx z) const;

    ComplexSeries truncated(std::size_t degree_bound) const;

    friend ComplexSeries operator+(const ComplexSeries& a, const ComplexSeries& b);

private:
    std::vector<cplx> coeffs_;
};

enum class ExpEngine {
    Recurrence,      // O(D^2) reference: n E_n = sum_k k s_k E_{n-k}
    DivideConquer,   // the same recurrence, solved online with FFT blocks
    Automatic,       // DivideConquer once D reaches kFftThreshold
};

/// Degree at which multiplication and exponentiation switch to FFT paths.
inline constexpr std::size_t kFftThreshold = 64;

/// Coefficients 0..D of a * b. Schoolbook below kFftThreshold, FFT above.
ComplexSeries multiply(const ComplexSeries& a, const ComplexSeries& b, std::size_t degree_bound);

/// exp(s) to degree D. Throws PreconditionError if s has a nonzero constant term.
ComplexSeries exp_series(const ComplexSeries& s, std::size_t degree_bound,
                         ExpEngine engine = ExpEngine::Automatic);

/// Sum_n |c_n|^2 r^{2n}: the mean of |f(r e^{i theta})|^2 over the circle.
double parseval_power_sum(const ComplexSeries& f, double r);

/// Coefficient of z^N in exp(sum_{k<=m} z^k / k), i.e. the proportion of
/// permutations of N letters whose cycles all have length <= m.
double smooth_partition_weight(std::size_t n, std::size_t max_part);

/// r^{-N} exp(sum_{k<=m} r^k / k); dominates smooth_partition_weight(N, m)
/// for every r > 0 because the generating function has nonnegative coefficients.
double rankin_bound(std::size_t n, std::size_t max_part, double r);

namespace detail {
// Cyclic convolution of equal power-of-two length buffers, in place into `a`.
void fft_cyclic_convolve(std::vector<cplx>& a, std::vector<cplx>& b);
}  // namespace detail

}  // namespace hmc
