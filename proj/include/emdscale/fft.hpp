#pragma once

#include <fftw3.h>

#include <complex>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace emdscale::fft {

namespace detail {

// FFTW planning is not thread-safe; execution with a private plan is.
inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct PlanDeleter {
    void operator()(fftw_plan_s* plan) const {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
};

}  // namespace detail

enum class Direction { Forward = FFTW_FORWARD, Backward = FFTW_BACKWARD };

/// Unnormalized DFT of any length; Backward followed by Forward scales by n.
inline std::vector<std::complex<double>> transform(std::span<const std::complex<double>> input,
                                                   Direction direction) {
    const int n = static_cast<int>(input.size());
    std::vector<std::complex<double>> in(input.begin(), input.end());
    std::vector<std::complex<double>> out(input.size());
    if (n == 0) {
        return out;
    }
    auto* in_ptr = reinterpret_cast<fftw_complex*>(in.data());
    auto* out_ptr = reinterpret_cast<fftw_complex*>(out.data());
    std::unique_ptr<fftw_plan_s, detail::PlanDeleter> plan;
    {
        std::lock_guard lock(detail::planner_mutex());
        plan.reset(fftw_plan_dft_1d(n, in_ptr, out_ptr, static_cast<int>(direction), FFTW_ESTIMATE));
    }
    fftw_execute(plan.get());
    return out;
}

inline std::vector<std::complex<double>> forward(std::span<const double> input) {
    std::vector<std::complex<double>> in(input.begin(), input.end());
    return transform(in, Direction::Forward);
}

}  // namespace emdscale::fft
