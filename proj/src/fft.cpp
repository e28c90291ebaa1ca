// FFT convolution backed by FFTW. Plans are created once per length and then
// executed on caller buffers through the new-array interface, which FFTW
// documents as thread-safe; only planning is serialized.

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

#include "hmc/errors.hpp"
#include "hmc/series.hpp"

namespace hmc::detail {

namespace {

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(int n, int sign) {
        std::lock_guard lock(mutex_);
        auto it = plans_.find({n, sign});
        if (it != plans_.end()) return it->second;
        // In-place, unaligned: valid for any std::vector<std::complex<double>> buffer.
        fftw_complex* scratch = fftw_alloc_complex(static_cast<std::size_t>(n));
        fftw_plan plan = fftw_plan_dft_1d(n, scratch, scratch, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(scratch);
        plans_.emplace(std::pair{n, sign}, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

void transform(std::vector<cplx>& buf, int sign) {
    auto* p = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_execute_dft(plan_cache().get(static_cast<int>(buf.size()), sign), p, p);
}

}  // namespace

void fft_cyclic_convolve(std::vector<cplx>& a, std::vector<cplx>& b) {
    require(a.size() == b.size() && !a.empty(), "fft_cyclic_convolve: equal nonempty lengths");
    transform(a, FFTW_FORWARD);
    transform(b, FFTW_FORWARD);
    const double scale = 1.0 / static_cast<double>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i] * scale;
    transform(a, FFTW_BACKWARD);
}

}  // namespace hmc::detail
