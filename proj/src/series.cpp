#include "hmc/series.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "hmc/errors.hpp"

namespace hmc {

ComplexSeries::ComplexSeries(std::vector<cplx> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) coeffs_.resize(1);
}

cplx ComplexSeries::evaluate(cplx z) const {
    cplx acc{};
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
    return acc;
}

ComplexSeries ComplexSeries::truncated(std::size_t degree_bound) const {
    std::vector<cplx> c(degree_bound + 1);
    const std::size_t n = std::min(c.size(), coeffs_.size());
    std::copy_n(coeffs_.begin(), n, c.begin());
    return ComplexSeries(std::move(c));
}

ComplexSeries operator+(const ComplexSeries& a, const ComplexSeries& b) {
    ComplexSeries out(std::max(a.degree_bound(), b.degree_bound()));
    for (std::size_t n = 0; n <= out.degree_bound(); ++n) out[n] = a[n] + b[n];
    return out;
}

ComplexSeries multiply(const ComplexSeries& a, const ComplexSeries& b, std::size_t degree_bound) {
    const std::size_t da = std::min(a.degree_bound(), degree_bound);
    const std::size_t db = std::min(b.degree_bound(), degree_bound);
    ComplexSeries out(degree_bound);
    if (std::min(da, db) < kFftThreshold) {
        for (std::size_t i = 0; i <= da; ++i) {
            const cplx ai = a[i];
            if (ai == cplx{}) continue;
            const std::size_t jmax = std::min(db, degree_bound - i);
            for (std::size_t j = 0; j <= jmax; ++j) out[i + j] += ai * b[j];
        }
        return out;
    }
    const std::size_t len = std::bit_ceil(da + db + 1);
    std::vector<cplx> fa(len), fb(len);
    std::copy_n(a.coeffs().begin(), da + 1, fa.begin());
    std::copy_n(b.coeffs().begin(), db + 1, fb.begin());
    detail::fft_cyclic_convolve(fa, fb);
    const std::size_t n = std::min(degree_bound + 1, len);
    std::copy_n(fa.begin(), n, out.coeffs().begin());
    return out;
}

namespace {

constexpr std::size_t kLeafSize = 64;

ComplexSeries exp_recurrence(std::span<const cplx> ks, std::size_t degree_bound) {
    ComplexSeries e(degree_bound);
    e[0] = 1.0;
    for (std::size_t n = 1; n <= degree_bound; ++n) {
        cplx acc{};
        for (std::size_t k = 1; k <= n; ++k) acc += ks[k] * e[n - k];
        e[n] = acc / static_cast<double>(n);
    }
    return e;
}

// Online evaluation of n E_n = sum_{k=1}^n ks_k E_{n-k}: once E[l, m) is
// final its contribution to every n in [m, r) is added with one FFT product,
// then the right half is solved.
class DivideConquerExp {
public:
    DivideConquerExp(std::span<const cplx> ks, std::size_t degree_bound)
        : ks_(ks), last_(degree_bound), e_(std::bit_ceil(degree_bound + 1)), acc_(e_.size()) {}

    std::vector<cplx> run() {
        solve(0, e_.size());
        e_.resize(last_ + 1);
        return std::move(e_);
    }

private:
    cplx ks(std::size_t k) const { return k < ks_.size() ? ks_[k] : cplx{}; }

    void solve(std::size_t l, std::size_t r) {
        if (l > last_) return;
        if (r - l <= kLeafSize) {
            const std::size_t end = std::min(r, last_ + 1);
            for (std::size_t n = l; n < end; ++n) {
                if (n == 0) {
                    e_[0] = 1.0;
                    continue;
                }
                cplx acc = acc_[n];
                for (std::size_t j = l; j < n; ++j) acc += e_[j] * ks(n - j);
                e_[n] = acc / static_cast<double>(n);
            }
            return;
        }
        const std::size_t m = l + (r - l) / 2;
        solve(l, m);
        if (m > last_) return;
        const std::size_t len = r - l;
        std::vector<cplx> a(len), b(len);
        std::copy(e_.begin() + static_cast<std::ptrdiff_t>(l), e_.begin() + static_cast<std::ptrdiff_t>(m),
                  a.begin());
        for (std::size_t k = 1; k < len; ++k) b[k] = ks(k);
        // Cyclic wrap-around lands below index m - l, which is never read.
        detail::fft_cyclic_convolve(a, b);
        for (std::size_t n = m; n < r; ++n) acc_[n] += a[n - l];
        solve(m, r);
    }

    std::span<const cplx> ks_;
    std::size_t last_;
    std::vector<cplx> e_;
    std::vector<cplx> acc_;
};

}  // namespace

ComplexSeries exp_series(const ComplexSeries& s, std::size_t degree_bound, ExpEngine engine) {
    require(s[0] == cplx{}, "exp_series: input must have zero constant term");
    std::vector<cplx> ks(degree_bound + 1);
    for (std::size_t k = 1; k <= degree_bound; ++k) ks[k] = static_cast<double>(k) * s[k];

    if (engine == ExpEngine::Automatic)
        engine = degree_bound >= kFftThreshold ? ExpEngine::DivideConquer : ExpEngine::Recurrence;
    if (engine == ExpEngine::Recurrence) return exp_recurrence(ks, degree_bound);
    return ComplexSeries(DivideConquerExp(ks, degree_bound).run());
}

double parseval_power_sum(const ComplexSeries& f, double r) {
    // Horner in r^2 from the top keeps the sum monotone in r.
    const double r2 = r * r;
    double acc = 0.0;
    const auto c = f.coeffs();
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * r2 + std::norm(*it);
    return acc;
}

double smooth_partition_weight(std::size_t n, std::size_t max_part) {
    require(max_part >= 1, "smooth_partition_weight: max_part >= 1");
    ComplexSeries s(n);
    for (std::size_t k = 1; k <= std::min(n, max_part); ++k) s[k] = 1.0 / static_cast<double>(k);
    return exp_series(s, n, ExpEngine::Recurrence)[n].real();
}

double rankin_bound(std::size_t n, std::size_t max_part, double r) {
    require(n >= 1 && max_part >= 1, "rankin_bound: N >= 1 and m >= 1");
    require(r > 0.0, "rankin_bound: r > 0");
    double sum = 0.0;
    double rk = 1.0;
    for (std::size_t k = 1; k <= max_part; ++k) {
        rk *= r;
        sum += rk / static_cast<double>(k);
    }
    return std::exp(sum - static_cast<double>(n) * std::log(r));
}

}  // namespace hmc
