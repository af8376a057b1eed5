#include "subcyclo/fft.hpp"

#include <mutex>

#include <fftw3.h>

namespace subcyclo::fft {

namespace {

// The FFTW planner is not reentrant; execution of a finished plan is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

std::vector<cplx> run_c2c(const std::vector<cplx>& x, int sign) {
    std::vector<cplx> in(x), out(x.size());
    if (x.empty()) return out;
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(x.size()), as_fftw(in.data()), as_fftw(out.data()), sign,
                                FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

} // namespace

std::vector<cplx> forward(const std::vector<cplx>& x) { return run_c2c(x, FFTW_FORWARD); }

std::vector<cplx> inverse(const std::vector<cplx>& x) { return run_c2c(x, FFTW_BACKWARD); }

std::vector<cplx> forward_real(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<cplx> out(n);
    if (n == 0) return out;
    std::vector<double> in(x);
    std::vector<cplx> half(n / 2 + 1);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), as_fftw(half.data()), FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    for (std::size_t k = 0; k < half.size(); ++k) out[k] = half[k];
    for (std::size_t k = half.size(); k < n; ++k) out[k] = std::conj(half[n - k]);
    return out;
}

void forward_batch(cplx* data, int n, int howmany) {
    if (n <= 0 || howmany <= 0) return;
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_many_dft(1, &n, howmany, as_fftw(data), nullptr, 1, n, as_fftw(data), nullptr, 1, n,
                                  FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
}

} // namespace subcyclo::fft
