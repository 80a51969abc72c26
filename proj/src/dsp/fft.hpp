#pragma once

#include <complex>
#include <span>
#include <vector>

namespace emoperf::dsp::detail {

/// Real-input forward DFT of a fixed size. Plans are created under a global lock;
/// execution is reentrant, so one instance per thread.
class RealFft {
public:
    explicit RealFft(std::size_t size);
    ~RealFft();
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    /// |X[k]| for k = 0..size/2.
    void magnitudes(std::span<const double> input, std::span<double> output);

private:
    std::size_t size_;
    std::vector<double> in_;
    std::vector<std::complex<double>> out_;
    void* plan_;
};

}  // namespace emoperf::dsp::detail
