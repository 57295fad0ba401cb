#pragma once

// Bandlimited test signals, uniform sampling, the modulo fold, the residual
// decomposition f_lambda = f + z, additive noise and quality metrics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "modrec/errors.hpp"
#include "modrec/sequence.hpp"

namespace modrec {

/// Lowest reported MSE; stands in for -inf when the estimate is exact.
inline constexpr double kMseFloorDb = -300.0;
/// Reported for non-finite estimates (overflowing baselines).
inline constexpr double kMseCeilingDb = 300.0;

template <typename Scalar>
struct Pulse {
    Scalar amplitude;
    Scalar center;  // seconds

    bool operator==(const Pulse&) const = default;
};

/// Finite-energy signal in B_{band_edge}: a weighted sum of shifted kernels
/// sinc(band_edge * t / (p * pi))^p. The p-th power keeps the spectrum inside
/// (-band_edge, band_edge) while the tails fall off like |t|^-p.
template <typename Scalar>
struct AnalogModel {
    std::vector<Pulse<Scalar>> pulses;
    Scalar band_edge{std::numbers::pi_v<Scalar>};
    int kernel_power{4};
    Scalar normalization{1};

    Scalar kernel(Scalar tau) const {
        const Scalar x = band_edge * tau / Scalar(kernel_power);
        const Scalar s = std::abs(x) < Scalar(1e-300) ? Scalar(1) : std::sin(x) / x;
        Scalar out = 1;
        for (int i = 0; i < kernel_power; ++i) out *= s;
        return out;
    }

    Scalar unnormalized(Scalar t) const {
        Scalar acc = 0;
        for (const auto& p : pulses) acc += p.amplitude * kernel(t - p.center);
        return acc;
    }

    Scalar operator()(Scalar t) const { return normalization * unnormalized(t); }

    Scalar max_abs_center() const {
        Scalar m = 0;
        for (const auto& p : pulses) m = std::max(m, std::abs(p.center));
        return m;
    }

    // Upper bound on |f(s)| valid for every |s| >= |t|, using |sinc(x)| <= 1/(pi|x|).
    Scalar envelope_bound(Scalar t) const {
        const Scalar at = std::abs(t);
        Scalar acc = 0;
        for (const auto& p : pulses) {
            const Scalar d = at - std::abs(p.center);
            Scalar k = 1;
            if (d > 0) k = std::min<Scalar>(1, Scalar(kernel_power) / (band_edge * d));
            acc += std::abs(p.amplitude) * std::pow(k, kernel_power);
        }
        return std::abs(normalization) * acc;
    }

    bool operator==(const AnalogModel&) const = default;
};

namespace detail {

// Golden-section search for the maximum of |f| on [a, b].
template <typename Scalar, typename F>
Scalar refine_peak(const F& f, Scalar a, Scalar b) {
    const Scalar g = (std::sqrt(Scalar(5)) - 1) / 2;
    Scalar c = b - g * (b - a);
    Scalar d = a + g * (b - a);
    Scalar fc = std::abs(f(c));
    Scalar fd = std::abs(f(d));
    for (int it = 0; it < 200 && (b - a) > Scalar(1e-13) * (1 + std::abs(a)); ++it) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - g * (b - a); fc = std::abs(f(c));
        } else {
            a = c; c = d; fc = fd;
            d = a + g * (b - a); fd = std::abs(f(d));
        }
    }
    return std::max({fc, fd, std::abs(f((a + b) / 2))});
}

}  // namespace detail

/// Peak of |f| over the region holding the pulses, found on a grid of 32
/// points per Nyquist interval and refined around every candidate maximum.
template <typename Scalar>
Scalar peak_magnitude(const AnalogModel<Scalar>& model) {
    if (model.pulses.empty()) return 0;
    Scalar lo = model.pulses.front().center, hi = lo;
    for (const auto& p : model.pulses) {
        lo = std::min(lo, p.center);
        hi = std::max(hi, p.center);
    }
    const Scalar pi = std::numbers::pi_v<Scalar>;
    const Scalar reach = 2 * Scalar(model.kernel_power) * pi / model.band_edge;
    lo -= reach;
    hi += reach;
    const Scalar step = pi / model.band_edge / 32;
    const auto count = static_cast<Eigen::Index>(std::ceil((hi - lo) / step)) + 1;

    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> grid(count);
    for (Eigen::Index i = 0; i < count; ++i) grid[i] = std::abs(model(lo + Scalar(i) * step));
    const Scalar coarse = grid.maxCoeff();

    Scalar best = coarse;
    for (Eigen::Index i = 0; i < count; ++i) {
        const bool left = i == 0 || grid[i] >= grid[i - 1];
        const bool right = i + 1 == count || grid[i] >= grid[i + 1];
        if (left && right && grid[i] >= Scalar(0.5) * coarse) {
            const Scalar t = lo + Scalar(i) * step;
            best = std::max(best, detail::refine_peak<Scalar>(model, t - step, t + step));
        }
    }
    return best;
}

/// Random model: amplitudes uniform in [-1, 1], centers uniform in
/// [-center_spread/2, center_spread/2], scaled to unit peak.
template <typename Scalar = double>
AnalogModel<Scalar> generate_bandlimited(std::uint64_t seed, Scalar band_edge, int num_pulses,
                                         Scalar center_spread, int kernel_power = 4) {
    if (!(band_edge > 0)) throw InvalidArgument("band edge must be positive");
    if (num_pulses < 1) throw InvalidArgument("num_pulses must be at least 1");
    if (kernel_power < 1) throw InvalidArgument("kernel_power must be at least 1");
    if (!(center_spread >= 0)) throw InvalidArgument("center_spread must be non-negative");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    std::uniform_real_distribution<double> ctr(-0.5, 0.5);

    AnalogModel<Scalar> model;
    model.band_edge = band_edge;
    model.kernel_power = kernel_power;
    model.pulses.reserve(static_cast<std::size_t>(num_pulses));
    for (int i = 0; i < num_pulses; ++i) {
        const auto a = static_cast<Scalar>(amp(rng));
        const auto c = static_cast<Scalar>(ctr(rng)) * center_spread;
        model.pulses.push_back({a, c});
    }
    model.normalization = 1;
    const Scalar peak = peak_magnitude(model);
    if (!(peak > 0)) throw InvalidArgument("generated model is identically zero");
    model.normalization = Scalar(1) / peak;
    return model;
}

template <typename Scalar>
struct SampledSignal {
    Sequence<Scalar> samples;      // n = -N_w .. N_w
    Scalar sampling_interval{1};   // T_s
    Scalar band_edge{1};           // omega_m

    Eigen::Index half_length() const { return samples.size() / 2; }
    Scalar at(Eigen::Index n) const { return samples[position(samples, n)]; }
    Scalar sampling_rate() const { return 2 * std::numbers::pi_v<Scalar> / sampling_interval; }
    Scalar oversampling_factor() const {
        return std::numbers::pi_v<Scalar> / (sampling_interval * band_edge);
    }
};

template <typename Scalar>
void require_nyquist(Scalar sampling_interval, Scalar band_edge) {
    if (!(sampling_interval > 0) || !(band_edge > 0))
        throw InvalidArgument("sampling interval and band edge must be positive");
    const Scalar of = std::numbers::pi_v<Scalar> / (sampling_interval * band_edge);
    if (of < Scalar(1) - Scalar(1e-12))
        throw InvalidArgument("sampling rate is below the Nyquist rate");
}

template <typename Scalar>
SampledSignal<Scalar> sample(const AnalogModel<Scalar>& model, Scalar sampling_interval,
                             Eigen::Index half_length) {
    require_nyquist(sampling_interval, model.band_edge);
    if (half_length < 0) throw InvalidArgument("window half-length must be non-negative");
    SampledSignal<Scalar> s;
    s.sampling_interval = sampling_interval;
    s.band_edge = model.band_edge;
    s.samples.resize(2 * half_length + 1);
    for (Eigen::Index n = -half_length; n <= half_length; ++n)
        s.samples[n + half_length] = model(Scalar(n) * sampling_interval);
    return s;
}

/// Smallest N_w such that the model's envelope stays below
/// rel_tolerance * lambda for every |t| >= N_w * T_s.
template <typename Scalar>
Eigen::Index window_half_length(const AnalogModel<Scalar>& model, Scalar sampling_interval,
                                Scalar lambda, Scalar rel_tolerance = Scalar(1e-4)) {
    if (!(lambda > 0) || !(rel_tolerance > 0))
        throw InvalidArgument("lambda and tolerance must be positive");
    if (!(sampling_interval > 0)) throw InvalidArgument("sampling interval must be positive");
    const Scalar target = rel_tolerance * lambda;
    auto quiet = [&](Eigen::Index n) {
        return model.envelope_bound(Scalar(n) * sampling_interval) < target;
    };
    Eigen::Index hi = std::max<Eigen::Index>(
        1, static_cast<Eigen::Index>(std::ceil(model.max_abs_center() / sampling_interval)) + 1);
    Eigen::Index lo = hi - 1;
    while (!quiet(hi)) {
        lo = hi;
        hi *= 2;
        if (hi > (Eigen::Index(1) << 40)) throw WindowTooSmall("signal tails never reach tolerance");
    }
    while (hi - lo > 1) {
        const Eigen::Index mid = lo + (hi - lo) / 2;
        (quiet(mid) ? hi : lo) = mid;
    }
    return hi;
}

/// M_lambda(a) = (a + lambda) mod 2 lambda - lambda, with result in [-lambda, lambda).
template <typename Scalar>
Scalar modulo_fold(Scalar a, Scalar lambda) {
    if (!(lambda > 0)) throw InvalidArgument("lambda must be positive");
    if (a >= -lambda && a < lambda) return a;
    const Scalar period = 2 * lambda;
    Scalar r = std::fmod(a + lambda, period);
    if (r < 0) r += period;
    if (r >= period) r = 0;
    return r - lambda;
}

/// Elementwise fold as an Eigen expression.
template <typename Derived>
auto folded(const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar lambda) {
    using Scalar = typename Derived::Scalar;
    if (!(lambda > 0)) throw InvalidArgument("lambda must be positive");
    return x.unaryExpr([lambda](Scalar a) { return modulo_fold(a, lambda); });
}

/// Nearest point of the lattice 2*lambda*Z; ties round away from zero.
template <typename Scalar>
Scalar round_to_lattice(Scalar x, Scalar lambda) {
    const Scalar period = 2 * lambda;
    return period * std::round(x / period);
}

template <typename Derived>
auto lattice_rounded(const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar lambda) {
    using Scalar = typename Derived::Scalar;
    return x.unaryExpr([lambda](Scalar a) { return round_to_lattice(a, lambda); });
}

template <typename Scalar>
struct FoldedSignal {
    Sequence<Scalar> samples;
    Scalar threshold{1};  // lambda
    Scalar sampling_interval{1};
    Scalar band_edge{1};
    bool noisy{false};
    Scalar noise_variance{0};

    Eigen::Index half_length() const { return samples.size() / 2; }
    Scalar oversampling_factor() const {
        return std::numbers::pi_v<Scalar> / (sampling_interval * band_edge);
    }
};

template <typename Scalar>
FoldedSignal<Scalar> fold_signal(const SampledSignal<Scalar>& s, Scalar lambda) {
    FoldedSignal<Scalar> out;
    out.samples = folded(s.samples, lambda);
    out.threshold = lambda;
    out.sampling_interval = s.sampling_interval;
    out.band_edge = s.band_edge;
    return out;
}

template <typename Scalar>
struct ResidualSequence {
    Sequence<Scalar> values;  // each an exact multiple of 2*lambda
    Scalar threshold{1};
    Eigen::Index support_bound{0};
};

/// z = f_lambda - f, snapped onto 2*lambda*Z.
template <typename Scalar>
ResidualSequence<Scalar> residual(const SampledSignal<Scalar>& s, const FoldedSignal<Scalar>& f) {
    if (s.samples.size() != f.samples.size())
        throw InvalidArgument("signal and folded signal differ in length");
    if (f.noisy) throw InvalidArgument("residual requires noiseless folded samples");
    const Scalar lambda = f.threshold;
    const Scalar period = 2 * lambda;
    ResidualSequence<Scalar> z;
    z.threshold = lambda;
    z.values.resize(s.samples.size());
    const Eigen::Index h = s.samples.size() / 2;
    for (Eigen::Index i = 0; i < z.values.size(); ++i) {
        const Scalar v = f.samples[i] - s.samples[i];
        const Scalar k = std::round(v / period);
        if (std::abs(v - k * period) > Scalar(1e-9))
            throw ConsistencyError("residual value is not a multiple of 2*lambda");
        z.values[i] = k * period;
        if (k != 0) z.support_bound = std::max(z.support_bound, std::abs(i - h));
    }
    return z;
}

/// Smallest N >= 0 with |s[n]| < lambda for all |n| > N.
template <typename Scalar>
Eigen::Index compute_support_bound(const SampledSignal<Scalar>& s, Scalar lambda) {
    if (!(lambda > 0)) throw InvalidArgument("lambda must be positive");
    const auto& x = s.samples;
    if (x.size() == 0) throw InvalidArgument("empty signal");
    if (std::abs(x[0]) >= lambda || std::abs(x[x.size() - 1]) >= lambda)
        throw WindowTooSmall("window edge is not inside the dynamic range");
    const Eigen::Index h = x.size() / 2;
    Eigen::Index bound = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (std::abs(x[i]) >= lambda) bound = std::max(bound, std::abs(i - h));
    return bound;
}

/// Adds i.i.d. N(0, sigma^2) noise with sigma^2 set from the folded signal's
/// mean power and snr_db. snr_db = +inf returns the input untouched.
template <typename Scalar>
FoldedSignal<Scalar> add_noise(const FoldedSignal<Scalar>& f, Scalar snr_db, std::uint64_t seed) {
    if (f.samples.size() == 0) throw InvalidArgument("cannot add noise to an empty sequence");
    if (std::isnan(snr_db) || snr_db == -std::numeric_limits<Scalar>::infinity())
        throw InvalidArgument("snr_db must be finite or +inf");
    if (std::isinf(snr_db)) return f;

    const Scalar power = f.samples.squaredNorm() / Scalar(f.samples.size());
    const Scalar variance = power / std::pow(Scalar(10), snr_db / 10);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(static_cast<double>(variance)));

    FoldedSignal<Scalar> out = f;
    for (Eigen::Index i = 0; i < out.samples.size(); ++i)
        out.samples[i] += static_cast<Scalar>(normal(rng));
    out.noisy = true;
    out.noise_variance = f.noise_variance + variance;
    return out;
}

/// Normalized squared error 10*log10(|truth - estimate|^2 / |truth|^2),
/// clamped to [kMseFloorDb, kMseCeilingDb] for exact or non-finite input.
template <typename DerivedA, typename DerivedB>
double mse_db(const Eigen::MatrixBase<DerivedA>& estimate, const Eigen::MatrixBase<DerivedB>& truth) {
    if (estimate.size() != truth.size()) throw InvalidArgument("length mismatch in mse_db");
    const double denom = static_cast<double>(truth.squaredNorm());
    if (!(denom > 0)) throw InvalidArgument("truth has zero norm");
    const double ratio = static_cast<double>((truth - estimate).squaredNorm()) / denom;
    if (!std::isfinite(ratio)) return kMseCeilingDb;
    if (ratio == 0) return kMseFloorDb;
    return std::clamp(10.0 * std::log10(ratio), kMseFloorDb, kMseCeilingDb);
}

}  // namespace modrec
