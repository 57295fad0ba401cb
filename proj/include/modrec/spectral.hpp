#pragma once

// DTFT machinery on a uniform M-point frequency grid: the out-of-band region
// rho = (-ws/2, -wm) U (wm, ws/2), the partial DTFT restricted to rho, its
// adjoint, and the highpass projection F*_rho F_rho used as a gradient.
//
// Sequences are embedded circularly into the grid (index n at bin position
// n mod M). Grid bin k sits at normalized frequency 2*pi*k/M wrapped into
// (-pi, pi]; the physical frequency is that value divided by T_s.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "modrec/errors.hpp"
#include "modrec/sequence.hpp"

namespace modrec {

template <typename Scalar>
using ComplexSequence = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

/// Smallest power of two that is at least four times the window length.
inline Eigen::Index grid_size_for(Eigen::Index window_length) {
    Eigen::Index m = 4;
    while (m < 4 * window_length) m *= 2;
    return m;
}

template <typename Scalar>
class SpectralBand {
public:
    SpectralBand(Scalar band_edge, Scalar sampling_interval, Eigen::Index grid_size)
        : band_edge_(band_edge), sampling_interval_(sampling_interval), grid_size_(grid_size) {
        if (!(band_edge > 0) || !(sampling_interval > 0))
            throw InvalidArgument("band edge and sampling interval must be positive");
        if (grid_size < 4 || (grid_size & (grid_size - 1)) != 0)
            throw InvalidArgument("grid size must be a power of two >= 4");
        const Scalar pi = std::numbers::pi_v<Scalar>;
        // Bins strictly above this count (in |k|) lie past the band edge.
        const Scalar cutoff = band_edge * sampling_interval * Scalar(grid_size) / (2 * pi);
        if (!(cutoff < Scalar(grid_size) / 2 * (1 - Scalar(1e-12))))
            throw EmptyBand("oversampling factor must exceed one");
        const Scalar guard = Scalar(1e-9) * std::max<Scalar>(1, cutoff);

        mask_ = Sequence<Scalar>::Zero(grid_size);
        for (Eigen::Index k = 0; k < grid_size; ++k) {
            const Eigen::Index wrapped = std::min(k, grid_size - k);
            if (Scalar(wrapped) > cutoff + guard && 2 * wrapped < grid_size) {
                mask_[k] = 1;
                bins_.push_back(k);
            }
        }
        if (bins_.empty()) throw EmptyBand("out-of-band region holds no grid bins");

        ComplexSequence<Scalar> spectrum = mask_.template cast<std::complex<Scalar>>();
        ComplexSequence<Scalar> impulse;
        Eigen::FFT<Scalar> fft;
        fft.inv(impulse, spectrum);
        kernel_ = impulse.real();
        for (Eigen::Index k = 1; 2 * k <= grid_size; ++k)
            kernel_[k] = kernel_[grid_size - k] = (kernel_[k] + kernel_[grid_size - k]) / 2;
    }

    Scalar band_edge() const { return band_edge_; }
    Scalar sampling_interval() const { return sampling_interval_; }
    Scalar sampling_rate() const { return 2 * std::numbers::pi_v<Scalar> / sampling_interval_; }
    Scalar oversampling_factor() const {
        return std::numbers::pi_v<Scalar> / (sampling_interval_ * band_edge_);
    }
    Eigen::Index grid_size() const { return grid_size_; }

    /// Flagged bins in ascending FFT order.
    const std::vector<Eigen::Index>& bins() const { return bins_; }
    bool in_band(Eigen::Index k) const { return mask_[k] != 0; }
    const Sequence<Scalar>& mask() const { return mask_; }

    /// Physical frequency of bin k in rad/s, in (-ws/2, ws/2].
    Scalar frequency(Eigen::Index k) const {
        const Eigen::Index wrapped = 2 * k > grid_size_ ? k - grid_size_ : k;
        return 2 * std::numbers::pi_v<Scalar> * Scalar(wrapped) / Scalar(grid_size_) / sampling_interval_;
    }

    /// Riemann weight ws*Ts/(2*pi*M) = 1/M turning bin sums into the integral form.
    Scalar weight() const { return Scalar(1) / Scalar(grid_size_); }

    /// Impulse response of the grid highpass; h(0) = (#flagged bins) / M.
    Scalar kernel_at(Eigen::Index lag) const {
        Eigen::Index k = lag % grid_size_;
        if (k < 0) k += grid_size_;
        return kernel_[k];
    }

private:
    Scalar band_edge_;
    Scalar sampling_interval_;
    Eigen::Index grid_size_;
    Sequence<Scalar> mask_;
    Sequence<Scalar> kernel_;
    std::vector<Eigen::Index> bins_;
};

template <typename Scalar>
SpectralBand<Scalar> band_rho(Scalar band_edge, Scalar sampling_interval, Eigen::Index grid_size) {
    return SpectralBand<Scalar>(band_edge, sampling_interval, grid_size);
}

/// Values of a DTFT on the flagged bins of a band, in band.bins() order.
template <typename Scalar>
struct Spectrum {
    ComplexSequence<Scalar> values;
    Eigen::Index grid_size{0};
    // Set when the spectrum came from a real sequence, so its adjoint must be real.
    bool conjugate_symmetric{false};
};

namespace detail {

template <typename Derived>
ComplexSequence<typename Derived::Scalar> embed(const Eigen::MatrixBase<Derived>& x, Eigen::Index m) {
    using Scalar = typename Derived::Scalar;
    if (x.size() > m) throw InvalidArgument("sequence is longer than the frequency grid");
    ComplexSequence<Scalar> buf = ComplexSequence<Scalar>::Zero(m);
    const Eigen::Index first = first_index(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::Index k = (first + i) % m;
        if (k < 0) k += m;
        buf[k] = std::complex<Scalar>(x[i], 0);
    }
    return buf;
}

// Window of length `length` read back from a circular grid buffer.
template <typename Scalar>
ComplexSequence<Scalar> restrict(const ComplexSequence<Scalar>& buf, Eigen::Index length) {
    const Eigen::Index m = buf.size();
    ComplexSequence<Scalar> out(length);
    const Eigen::Index first = first_index(length);
    for (Eigen::Index i = 0; i < length; ++i) {
        Eigen::Index k = (first + i) % m;
        if (k < 0) k += m;
        out[i] = buf[k];
    }
    return out;
}

}  // namespace detail

/// X(w_k) = sum_n x[n] exp(-j w_k n Ts) on the flagged bins, via one FFT.
template <typename Derived, typename Scalar = typename Derived::Scalar>
Spectrum<Scalar> partial_dtft(const Eigen::MatrixBase<Derived>& x, const SpectralBand<Scalar>& band) {
    ComplexSequence<Scalar> buf = detail::embed(x, band.grid_size());
    ComplexSequence<Scalar> spec;
    Eigen::FFT<Scalar> fft;
    fft.fwd(spec, buf);
    Spectrum<Scalar> out;
    out.grid_size = band.grid_size();
    out.conjugate_symmetric = true;
    out.values.resize(static_cast<Eigen::Index>(band.bins().size()));
    for (std::size_t i = 0; i < band.bins().size(); ++i)
        out.values[static_cast<Eigen::Index>(i)] = spec[band.bins()[i]];
    return out;
}

/// Weighted inner product Re <X, Y> = (1/M) sum_k Re(X_k conj(Y_k)).
template <typename Scalar>
Scalar spectral_inner(const Spectrum<Scalar>& x, const Spectrum<Scalar>& y,
                      const SpectralBand<Scalar>& band) {
    if (x.values.size() != y.values.size()) throw InvalidArgument("spectrum size mismatch");
    return band.weight() * (x.values.array() * y.values.array().conjugate()).real().sum();
}

template <typename Scalar>
Scalar spectral_norm_squared(const Spectrum<Scalar>& x, const SpectralBand<Scalar>& band) {
    return band.weight() * x.values.squaredNorm();
}

/// F*_rho X: Riemann sum of the inverse DTFT over rho, real part, over a
/// centered window of `length` samples. Throws ConsistencyError when a
/// spectrum marked conjugate-symmetric synthesizes a visibly complex sequence.
template <typename Scalar>
Sequence<Scalar> apply_adjoint(const Spectrum<Scalar>& x, const SpectralBand<Scalar>& band,
                               Eigen::Index length) {
    if (x.values.size() != static_cast<Eigen::Index>(band.bins().size()))
        throw InvalidArgument("spectrum does not match the band");
    const Eigen::Index m = band.grid_size();
    if (length > m) throw InvalidArgument("output window is longer than the frequency grid");
    ComplexSequence<Scalar> buf = ComplexSequence<Scalar>::Zero(m);
    for (std::size_t i = 0; i < band.bins().size(); ++i)
        buf[band.bins()[i]] = x.values[static_cast<Eigen::Index>(i)];
    ComplexSequence<Scalar> time;
    Eigen::FFT<Scalar> fft;
    fft.inv(time, buf);  // includes the 1/M Riemann weight

    if (x.conjugate_symmetric) {
        const Scalar scale = std::sqrt(spectral_norm_squared(x, band));
        if (time.imag().norm() > Scalar(1e-10) * std::max(scale, std::numeric_limits<Scalar>::min()))
            throw ConsistencyError("adjoint of a conjugate-symmetric spectrum is not real");
    }
    return detail::restrict(time, length).real();
}

/// P x = F*_rho F_rho x: zero-pad onto the grid, drop bins outside rho,
/// transform back and truncate to the input window. On a full-grid input this
/// is an orthogonal projection; on shorter windows it is a contraction.
template <typename Derived, typename Scalar = typename Derived::Scalar>
Sequence<Scalar> highpass_project(const Eigen::MatrixBase<Derived>& x, const SpectralBand<Scalar>& band) {
    ComplexSequence<Scalar> buf = detail::embed(x, band.grid_size());
    ComplexSequence<Scalar> spec;
    Eigen::FFT<Scalar> fft;
    fft.fwd(spec, buf);
    spec.array() *= band.mask().array().template cast<std::complex<Scalar>>();
    fft.inv(buf, spec);
    return detail::restrict(buf, x.size()).real();
}

/// Dense Gram matrix of the projection restricted to the support {-n, ..., n}:
/// G(i, j) = h(i - j). Its blocks around the center give every smaller support.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> restricted_gram(const SpectralBand<Scalar>& band,
                                                                      Eigen::Index n) {
    const Eigen::Index size = 2 * n + 1;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> g(size, size);
    for (Eigen::Index j = 0; j < size; ++j)
        for (Eigen::Index i = 0; i < size; ++i) g(i, j) = band.kernel_at(i - j);
    return g;
}

}  // namespace modrec
