#include "byhe/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

namespace byhe::fft {
namespace {

// FFTW's planner is not reentrant; execution on a private plan is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::vector<cplx> transform(std::span<const cplx> x, int sign) {
    const std::size_t n = x.size();
    std::vector<cplx> in(x.begin(), x.end());
    std::vector<cplx> out(n);
    if (n == 0) return out;

    auto* pin = reinterpret_cast<fftw_complex*>(in.data());
    auto* pout = reinterpret_cast<fftw_complex*>(out.data());
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(n), pin, pout, sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

}  // namespace

std::vector<cplx> forward(std::span<const cplx> x) { return transform(x, FFTW_FORWARD); }

std::vector<cplx> inverse(std::span<const cplx> x) {
    auto out = transform(x, FFTW_BACKWARD);
    const double scale = out.empty() ? 1.0 : 1.0 / static_cast<double>(out.size());
    for (auto& v : out) v *= scale;
    return out;
}

std::vector<cplx> forward_real(std::span<const double> x, std::size_t n) {
    std::vector<cplx> buf(std::max(n, x.size()));
    std::copy(x.begin(), x.end(), buf.begin());
    return forward(buf);
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace byhe::fft
