#pragma once

// Beyond-bandwidth residual reconstruction. The residual z = f_lambda - f is
// time-limited to {-N, ..., N} and shares the out-of-band spectrum of the
// folded samples, so it is estimated by projected gradient descent on
//
//     C(z) = 1/2 |F_rho f_lambda - F_rho z|^2   subject to   z in S_N,
//
// rounded onto 2*lambda*Z and peeled from the support edges inward.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "modrec/errors.hpp"
#include "modrec/sequence.hpp"
#include "modrec/signal.hpp"
#include "modrec/spectral.hpp"

namespace modrec {

template <typename Scalar>
struct PgdOptions {
    int max_iters{2000};
    Scalar rel_cost_tol{1e-12};
    Scalar armijo_c{1e-4};
    Scalar shrink{0.5};
    Scalar gamma_init{2.0};
    int max_backtracks{60};

    void validate() const {
        if (max_iters < 1) throw InvalidArgument("max_iters must be at least 1");
        if (!(shrink > 0 && shrink < 1)) throw InvalidArgument("shrink must lie in (0, 1)");
        if (!(armijo_c > 0 && armijo_c < 1)) throw InvalidArgument("armijo_c must lie in (0, 1)");
        if (!(gamma_init > 0)) throw InvalidArgument("gamma_init must be positive");
        if (!(rel_cost_tol >= 0)) throw InvalidArgument("rel_cost_tol must be non-negative");
        if (max_backtracks < 1) throw InvalidArgument("max_backtracks must be at least 1");
    }
};

/// How each peel after the first is started.
enum class Reinit {
    ProjectedPrevious,  // z0 = P_{S_{N-1}}(rounded estimate of the previous peel)
    FreshGuess,         // z0 = init_guess on the updated samples
};

template <typename Scalar>
struct PgdResult {
    Sequence<Scalar> estimate;  // window length, zero outside the support
    int iterations{0};
    Scalar final_cost{0};
    bool reached_tolerance{false};
    std::vector<Scalar> costs;  // cost before the first step, then after every accepted step
};

template <typename Scalar>
struct PeelRecord {
    Eigen::Index support{0};
    int iterations{0};
    Scalar final_cost{0};
    bool reached_tolerance{false};
    Sequence<Scalar> estimate;  // rounded residual estimate on {-support, ..., support}
};

template <typename Scalar>
struct RecoveryTrace {
    std::vector<PeelRecord<Scalar>> peels;
    // max |P f_hat| over the window; a wrong lattice decision leaves a
    // highpass spike of about 2*lambda*(1 - 1/OF) here.
    Scalar highpass_peak{0};
    bool consistent{true};

    bool converged() const { return consistent; }
    bool all_peels_reached_tolerance() const {
        return std::all_of(peels.begin(), peels.end(), [](const auto& p) { return p.reached_tolerance; });
    }
};

template <typename Scalar>
struct Recovery {
    Sequence<Scalar> recovered;
    RecoveryTrace<Scalar> trace;
};

template <typename Derived>
Sequence<typename Derived::Scalar> support_project(const Eigen::MatrixBase<Derived>& y, Eigen::Index n) {
    if (n < 0) throw InvalidArgument("support bound must be non-negative");
    Sequence<typename Derived::Scalar> out = Sequence<typename Derived::Scalar>::Zero(y.size());
    const Eigen::Index h = y.size() / 2;
    const Eigen::Index lo = std::max<Eigen::Index>(0, h - n);
    const Eigen::Index hi = std::min<Eigen::Index>(y.size() - 1, h + n);
    if (lo <= hi) out.segment(lo, hi - lo + 1) = y.segment(lo, hi - lo + 1);
    return out;
}

template <typename DerivedZ, typename DerivedF, typename Scalar = typename DerivedZ::Scalar>
Scalar cost(const Eigen::MatrixBase<DerivedZ>& z, const Eigen::MatrixBase<DerivedF>& f,
            const SpectralBand<Scalar>& band) {
    if (z.size() != f.size()) throw InvalidArgument("window mismatch in cost");
    const Sequence<Scalar> diff = f - z;
    return spectral_norm_squared(partial_dtft(diff, band), band) / 2;
}

/// grad C(z) = F*_rho F_rho (z - f), the highpass part of z - f.
template <typename DerivedZ, typename DerivedF, typename Scalar = typename DerivedZ::Scalar>
Sequence<Scalar> gradient(const Eigen::MatrixBase<DerivedZ>& z, const Eigen::MatrixBase<DerivedF>& f,
                          const SpectralBand<Scalar>& band) {
    if (z.size() != f.size()) throw InvalidArgument("window mismatch in gradient");
    const Sequence<Scalar> diff = z - f;
    return highpass_project(diff, band);
}

template <typename Derived, typename Scalar = typename Derived::Scalar>
Sequence<Scalar> init_guess(const Eigen::MatrixBase<Derived>& f, Eigen::Index n, const SpectralBand<Scalar>& band) {
    return support_project(highpass_project(f, band), n);
}

namespace detail {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// PGD on q(z) = c0 - <b, z> + 1/2 z'Gz over the support coordinates. The
// gradient Gz - b already lives on the support, so the projection is implicit.
template <typename Scalar, typename GramExpr>
PgdResult<Scalar> pgd_on_support(const GramExpr& gram, const Sequence<Scalar>& b, Scalar c0,
                                 Sequence<Scalar> z, const PgdOptions<Scalar>& opts) {
    PgdResult<Scalar> out;
    Sequence<Scalar> gz = gram * z;
    Scalar c = c0 - b.dot(z) + z.dot(gz) / 2;
    if (!std::isfinite(c)) throw DivergenceError("non-finite cost at the initial point");
    c = std::max<Scalar>(c, 0);
    out.costs.push_back(c);

    Sequence<Scalar> g(z.size()), gg(z.size());
    int it = 0;
    for (; it < opts.max_iters; ++it) {
        if (it % 64 == 63) gz.noalias() = gram * z;  // refresh the running product
        g = gz - b;
        const Scalar g2 = g.squaredNorm();
        if (g2 == 0 || c <= 0) {
            out.reached_tolerance = true;
            break;
        }
        gg.noalias() = gram * g;
        const Scalar curv = g.dot(gg);

        // Backtracking: the decrease of a quadratic along -g is exact.
        Scalar gamma = opts.gamma_init;
        Scalar decrease = 0;
        bool accepted = false;
        for (int bt = 0; bt < opts.max_backtracks; ++bt) {
            decrease = gamma * g2 - gamma * gamma * curv / 2;
            if (decrease >= opts.armijo_c * gamma * g2) {
                accepted = true;
                break;
            }
            gamma *= opts.shrink;
        }
        if (!accepted) {
            out.reached_tolerance = true;  // no representable descent step left
            break;
        }
        z -= gamma * g;
        gz -= gamma * gg;
        const Scalar previous = c;
        c = std::max<Scalar>(previous - decrease, 0);
        if (!std::isfinite(c)) throw DivergenceError("non-finite cost during projected gradient descent");
        out.costs.push_back(c);
        if (decrease <= opts.rel_cost_tol * previous) {
            ++it;
            out.reached_tolerance = true;
            break;
        }
    }
    out.iterations = it;
    out.final_cost = c;
    out.estimate = std::move(z);
    return out;
}

}  // namespace detail

/// Projected gradient descent for the residual on S_n, started from z0
/// (window length, supported on S_n). Returns the unrounded final iterate.
template <typename DerivedF, typename DerivedZ, typename Scalar = typename DerivedF::Scalar>
PgdResult<Scalar> pgd_solve(const Eigen::MatrixBase<DerivedF>& f, Eigen::Index n, const SpectralBand<Scalar>& band,
                            const PgdOptions<Scalar>& opts, const Eigen::MatrixBase<DerivedZ>& z0) {
    opts.validate();
    if (z0.size() != f.size()) throw InvalidArgument("initial point and data differ in length");
    const Eigen::Index h = f.size() / 2;
    if (n < 0 || n > h) throw InvalidArgument("support bound exceeds the window");
    if ((support_project(z0, n) - z0).cwiseAbs().maxCoeff() != 0)
        throw InvalidArgument("initial point is not supported on S_n");

    const Sequence<Scalar> pf = highpass_project(f, band);
    const Scalar c0 = f.dot(pf) / 2;
    const Sequence<Scalar> b = pf.segment(h - n, 2 * n + 1);
    const detail::Matrix<Scalar> gram = restricted_gram(band, n);
    auto res = detail::pgd_on_support<Scalar>(gram, b, c0, z0.segment(h - n, 2 * n + 1).eval(), opts);
    Sequence<Scalar> full = Sequence<Scalar>::Zero(f.size());
    full.segment(h - n, 2 * n + 1) = res.estimate;
    res.estimate = std::move(full);
    return res;
}

/// Sequential recovery: solve on S_N, round to 2*lambda*Z, subtract, shrink N
/// by one and repeat while N > 0. Returns f_hat = f_lambda - sum of estimates.
template <typename Scalar>
Recovery<Scalar> b2r2_recover(const FoldedSignal<Scalar>& f, Eigen::Index support_bound,
                              const SpectralBand<Scalar>& band, const PgdOptions<Scalar>& opts = {},
                              Reinit reinit = Reinit::ProjectedPrevious) {
    opts.validate();
    const Scalar lambda = f.threshold;
    if (!(lambda > 0)) throw InvalidArgument("lambda must be positive");
    const Eigen::Index h = f.samples.size() / 2;
    if (support_bound < 0 || support_bound >= h)
        throw InvalidArgument("support bound must be non-negative and inside the window");

    Recovery<Scalar> out;
    out.recovered = f.samples;
    Sequence<Scalar>& fh = out.recovered;

    if (support_bound > 0) {
        const detail::Matrix<Scalar> gram = restricted_gram(band, support_bound);
        Sequence<Scalar> z = init_guess(fh, support_bound, band).segment(h - support_bound, 2 * support_bound + 1);

        for (Eigen::Index n = support_bound; n > 0; --n) {
            const Eigen::Index off = support_bound - n;
            const Eigen::Index len = 2 * n + 1;
            const Sequence<Scalar> pf = highpass_project(fh, band);
            const Scalar c0 = fh.dot(pf) / 2;
            const Sequence<Scalar> b = pf.segment(h - n, len);

            auto res = detail::pgd_on_support<Scalar>(gram.block(off, off, len, len), b, c0, std::move(z), opts);
            Sequence<Scalar> rounded = lattice_rounded(res.estimate, lambda);
            fh.segment(h - n, len) -= rounded;

            if (reinit == Reinit::ProjectedPrevious) {
                z = rounded.segment(1, len - 2);
            } else {
                z = init_guess(fh, n - 1, band).segment(h - n + 1, len - 2);
            }
            out.trace.peels.push_back({n, res.iterations, res.final_cost, res.reached_tolerance, std::move(rounded)});
        }
    }

    out.trace.highpass_peak = highpass_project(fh, band).cwiseAbs().maxCoeff();
    out.trace.consistent = out.trace.highpass_peak < lambda;
    return out;
}

}  // namespace modrec
