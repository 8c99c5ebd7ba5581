#pragma once

// Thin RAII layer over FFTW for the batched real transforms the Wigner
// solver needs and the long complex transform used by the correlation
// oracle. Plans are created with FFTW_ESTIMATE | FFTW_UNALIGNED so any
// std::vector storage can be passed at execute time.

#include <fftw3.h>

#include <complex>
#include <memory>
#include <type_traits>

namespace qplasma::detail {

struct PlanDeleter {
    void operator()(fftw_plan p) const noexcept { fftw_destroy_plan(p); }
};
using Plan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDeleter>;

inline fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

/// Batch of `howmany` length-`n` real transforms. Element k of batch b lives at
/// `b * real_dist + k * real_stride` (real side) and
/// `b * complex_dist + k * complex_stride` (half-spectrum side, n/2+1 entries).
/// Neither direction normalizes.
class BatchedRealFft {
public:
    BatchedRealFft(int n, int howmany, int real_stride, int real_dist, int complex_stride,
                   int complex_dist)
        : n_(n) {
        // Planning with FFTW_ESTIMATE never touches the arrays, but FFTW still
        // wants non-null pointers with the right strides.
        std::unique_ptr<double[]> rbuf(new double[1]);
        std::unique_ptr<std::complex<double>[]> cbuf(new std::complex<double>[1]);
        constexpr unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        forward_.reset(fftw_plan_many_dft_r2c(1, &n_, howmany, rbuf.get(), nullptr, real_stride,
                                              real_dist, as_fftw(cbuf.get()), nullptr,
                                              complex_stride, complex_dist, flags));
        inverse_.reset(fftw_plan_many_dft_c2r(1, &n_, howmany, as_fftw(cbuf.get()), nullptr,
                                              complex_stride, complex_dist, rbuf.get(), nullptr,
                                              real_stride, real_dist, flags));
    }

    void forward(double* in, std::complex<double>* out) const {
        fftw_execute_dft_r2c(forward_.get(), in, as_fftw(out));
    }
    // Destroys `in`.
    void inverse(std::complex<double>* in, double* out) const {
        fftw_execute_dft_c2r(inverse_.get(), as_fftw(in), out);
    }

    int size() const noexcept { return n_; }

private:
    int n_;
    Plan forward_;
    Plan inverse_;
};

/// Single in-place complex transform of length n, forward (e^{-i...}) sign.
class ComplexFft {
public:
    explicit ComplexFft(int n) : n_(n) {
        std::unique_ptr<std::complex<double>[]> buf(new std::complex<double>[1]);
        plan_.reset(fftw_plan_dft_1d(n_, as_fftw(buf.get()), as_fftw(buf.get()), FFTW_FORWARD,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED));
    }
    void forward(std::complex<double>* data) const {
        fftw_execute_dft(plan_.get(), as_fftw(data), as_fftw(data));
    }

private:
    int n_;
    Plan plan_;
};

} // namespace qplasma::detail
