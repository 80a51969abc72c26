#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

namespace emoperf::dsp::detail {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

RealFft::RealFft(std::size_t size) : size_(size), in_(size), out_(size / 2 + 1) {
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(size_), in_.data(), reinterpret_cast<fftw_complex*>(out_.data()),
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
}

RealFft::~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
}

void RealFft::magnitudes(std::span<const double> input, std::span<double> output) {
    std::copy(input.begin(), input.end(), in_.begin());
    fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_), in_.data(), reinterpret_cast<fftw_complex*>(out_.data()));
    for (std::size_t k = 0; k < out_.size(); ++k) output[k] = std::abs(out_[k]);
}

}  // namespace emoperf::dsp::detail
