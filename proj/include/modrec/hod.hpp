#pragma once

// Higher-order-differences unfolding: when |Delta^K f| < lambda, folding the
// K-th difference of the modulo samples returns Delta^K f, so Delta^K z is
// known on the lattice 2*lambda*Z. The residual is then rebuilt by K stages
// of anti-differencing, each with its integration constant fixed by the quiet
// leading samples of the window.

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "modrec/errors.hpp"
#include "modrec/sequence.hpp"
#include "modrec/signal.hpp"

namespace modrec {

template <typename Scalar>
struct HodOptions {
    int order{1};
    bool auto_order{true};
    int max_order{10};
    // Bound on |f| used by the automatic order rule (unit-peak signals: 1).
    Scalar amplitude_bound{1};
};

template <typename Scalar>
struct HodResult {
    Sequence<Scalar> recovered;
    int order{1};
    // Rebuilt residual vanishes on the trailing samples, as it must for a
    // time-limited residual.
    bool consistent{true};
};

/// K-fold forward difference (Dx)[i] = x[i+1] - x[i]; the result is K shorter.
template <typename Derived>
Sequence<typename Derived::Scalar> finite_difference(const Eigen::MatrixBase<Derived>& x, int order) {
    if (order < 1) throw InvalidArgument("difference order must be at least 1");
    if (x.size() < order + 1) throw InvalidArgument("sequence too short for the difference order");
    Sequence<typename Derived::Scalar> d = x;
    for (int k = 0; k < order; ++k) {
        const Eigen::Index m = d.size() - 1;
        d = (d.tail(m) - d.head(m)).eval();
    }
    return d;
}

/// Inverse of finite_difference: `initial` holds x[0], (Dx)[0], ..., (D^{K-1}x)[0].
template <typename Derived, typename DerivedInit>
Sequence<typename Derived::Scalar> anti_difference(const Eigen::MatrixBase<Derived>& d, int order,
                                                   const Eigen::MatrixBase<DerivedInit>& initial) {
    using Scalar = typename Derived::Scalar;
    if (order < 1) throw InvalidArgument("difference order must be at least 1");
    if (initial.size() != order) throw InvalidArgument("need one integration constant per order");
    Sequence<Scalar> x = d;
    for (int k = order - 1; k >= 0; --k) {
        Sequence<Scalar> up(x.size() + 1);
        up[0] = initial[k];
        for (Eigen::Index i = 0; i < x.size(); ++i) up[i + 1] = up[i] + x[i];
        x = std::move(up);
    }
    return x;
}

/// Leading values of x, Dx, ..., D^{K-1}x, suitable for anti_difference.
template <typename Derived>
Sequence<typename Derived::Scalar> initial_differences(const Eigen::MatrixBase<Derived>& x, int order) {
    Sequence<typename Derived::Scalar> init(order);
    init[0] = x[0];
    for (int k = 1; k < order; ++k) init[k] = finite_difference(x.head(k + 1), k)[0];
    return init;
}

/// Smallest K with (Ts * wm * e)^K <= lambda / amplitude_bound, clamped to
/// [1, max_order]; max_order when the rate is too low for the bound to shrink.
template <typename Scalar>
int auto_order(Scalar oversampling_factor, Scalar lambda, const HodOptions<Scalar>& opts) {
    const Scalar growth = std::numbers::pi_v<Scalar> * std::numbers::e_v<Scalar> / oversampling_factor;
    if (growth >= 1) return opts.max_order;
    const Scalar ratio = lambda / opts.amplitude_bound;
    if (ratio >= 1) return 1;
    const auto k = static_cast<int>(std::ceil(std::log(ratio) / std::log(growth) - Scalar(1e-12)));
    return std::clamp(k, 1, opts.max_order);
}

/// Recover true samples from (possibly noisy) modulo samples. `anchor` is the
/// value the estimate takes at the first index, normally f_lambda there.
template <typename Scalar>
HodResult<Scalar> hod_recover(const FoldedSignal<Scalar>& f, const HodOptions<Scalar>& opts, Scalar anchor) {
    const Scalar lambda = f.threshold;
    if (!(lambda > 0)) throw InvalidArgument("lambda must be positive");
    const int order = opts.auto_order ? auto_order(f.oversampling_factor(), lambda, opts) : opts.order;
    if (order < 1) throw InvalidArgument("difference order must be at least 1");
    const Eigen::Index len = f.samples.size();
    if (len < order + 2) throw InvalidArgument("sequence too short for the difference order");

    const Scalar period = 2 * lambda;
    const Sequence<Scalar> d = finite_difference(f.samples, order);
    // D^K z in units of 2*lambda.
    Sequence<Scalar> counts = (d - folded(d, lambda)).unaryExpr([period](Scalar v) { return std::round(v / period); });

    // Stage constants D^k z[first] vanish on the quiet leading samples; the
    // zeroth one comes from the anchor.
    Sequence<Scalar> init = Sequence<Scalar>::Zero(order);
    init[0] = std::round((f.samples[0] - anchor) / period);
    const Sequence<Scalar> z_counts = anti_difference(counts, order, init);

    HodResult<Scalar> out;
    out.order = order;
    out.recovered = f.samples - period * z_counts;
    const Eigen::Index tail = std::min<Eigen::Index>(len, order + 1);
    out.consistent = z_counts.tail(tail).cwiseAbs().maxCoeff() == 0 && out.recovered.allFinite();
    return out;
}

template <typename Scalar>
HodResult<Scalar> hod_recover(const FoldedSignal<Scalar>& f, const HodOptions<Scalar>& opts) {
    return hod_recover(f, opts, f.samples[0]);
}

/// Whether the unfolding condition |D^K (f + v)| < lambda holds, given clean
/// samples and the noisy modulo samples they produced.
template <typename Scalar>
bool hod_condition_holds(const SampledSignal<Scalar>& clean, const FoldedSignal<Scalar>& noisy, int order) {
    const Sequence<Scalar> noise = noisy.samples - folded(clean.samples, noisy.threshold).eval();
    const Sequence<Scalar> d = finite_difference((clean.samples + noise).eval(), order);
    return d.cwiseAbs().maxCoeff() < noisy.threshold;
}

}  // namespace modrec
