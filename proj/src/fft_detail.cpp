#include "fft_detail.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace qhd::detail {

namespace {

struct PlanKey {
    int n, howmany, stride, dist, sign;
    auto operator<=>(const PlanKey&) const = default;
};

std::mutex g_plan_mutex;
std::map<PlanKey, fftw_plan>& plan_cache() {
    static std::map<PlanKey, fftw_plan> cache;
    return cache;
}

fftw_plan get_plan(const PlanKey& key) {
    std::lock_guard lock(g_plan_mutex);
    auto& cache = plan_cache();
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    // Plan against a scratch buffer; FFTW_UNALIGNED lets the same plan run
    // on any caller array via the new-array execute interface.
    fftw_complex* scratch = fftw_alloc_complex(
        static_cast<std::size_t>(key.n) * static_cast<std::size_t>(key.howmany));
    int n[] = {key.n};
    fftw_plan p = fftw_plan_many_dft(1, n, key.howmany, scratch, nullptr, key.stride, key.dist,
                                     scratch, nullptr, key.stride, key.dist, key.sign,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    cache.emplace(key, p);
    return p;
}

}  // namespace

void fft_axis(std::complex<double>* data, int n_axis, int howmany, int stride, int dist,
              int sign) {
    fftw_plan p = get_plan(PlanKey{n_axis, howmany, stride, dist, sign});
    auto* raw = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(p, raw, raw);
}

}  // namespace qhd::detail
