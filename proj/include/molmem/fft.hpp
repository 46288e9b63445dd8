#pragma once

// Thin RAII wrapper over FFTW for one-dimensional complex transforms.

#include <complex>
#include <memory>
#include <vector>

namespace molmem {

class Fft {
public:
    explicit Fft(std::size_t n);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;
    Fft(Fft&&) noexcept;
    Fft& operator=(Fft&&) noexcept;

    std::size_t size() const { return n_; }

    // out_k = sum_n in_n exp(-2 pi i k n / N)
    void forward(const std::complex<double>* in, std::complex<double>* out);
    // out_n = sum_k in_k exp(+2 pi i k n / N), unnormalised
    void backward(const std::complex<double>* in, std::complex<double>* out);

private:
    struct Plans;
    std::size_t n_;
    std::unique_ptr<Plans> plans_;
};

// FFT bin k as an angular frequency for sample spacing dt, in the signed
// range [-pi/dt, pi/dt).
double fft_frequency(std::size_t k, std::size_t n, double dt);

}  // namespace molmem
