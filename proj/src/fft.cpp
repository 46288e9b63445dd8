#include "molmem/fft.hpp"

#include <cstring>
#include <mutex>

#include <fftw3.h>

#include "molmem/units.hpp"

namespace molmem {

namespace {
// Planner calls are not thread-safe in FFTW.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

struct Fft::Plans {
    fftw_complex* buf_in = nullptr;
    fftw_complex* buf_out = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;

    explicit Plans(std::size_t n) {
        std::lock_guard lock(planner_mutex());
        buf_in = fftw_alloc_complex(n);
        buf_out = fftw_alloc_complex(n);
        // FFTW_ESTIMATE keeps the chosen algorithm, and hence the output bits,
        // independent of run-time measurements.
        fwd = fftw_plan_dft_1d(static_cast<int>(n), buf_in, buf_out, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_1d(static_cast<int>(n), buf_in, buf_out, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~Plans() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(buf_in);
        fftw_free(buf_out);
    }
};

Fft::Fft(std::size_t n) : n_(n), plans_(std::make_unique<Plans>(n)) {}
Fft::~Fft() = default;
Fft::Fft(Fft&&) noexcept = default;
Fft& Fft::operator=(Fft&&) noexcept = default;

void Fft::forward(const std::complex<double>* in, std::complex<double>* out) {
    std::memcpy(plans_->buf_in, in, n_ * sizeof(fftw_complex));
    fftw_execute(plans_->fwd);
    std::memcpy(static_cast<void*>(out), plans_->buf_out, n_ * sizeof(fftw_complex));
}

void Fft::backward(const std::complex<double>* in, std::complex<double>* out) {
    std::memcpy(plans_->buf_in, in, n_ * sizeof(fftw_complex));
    fftw_execute(plans_->bwd);
    std::memcpy(static_cast<void*>(out), plans_->buf_out, n_ * sizeof(fftw_complex));
}

double fft_frequency(std::size_t k, std::size_t n, double dt) {
    const auto kk = static_cast<long>(k);
    const auto nn = static_cast<long>(n);
    const long signed_k = kk < (nn + 1) / 2 ? kk : kk - nn;
    return units::two_pi * static_cast<double>(signed_k) / (static_cast<double>(n) * dt);
}

}  // namespace molmem
