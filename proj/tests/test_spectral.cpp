#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "modrec/modrec.hpp"
#include "oracles.hpp"

using namespace modrec;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

SpectralBand<double> band_at(double of, Eigen::Index m) { return band_rho(kPi, 1.0 / of, m); }

double rel_err(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_CASE("grid_size_for") {
    CHECK(grid_size_for(1) == 4);
    CHECK(grid_size_for(2) == 8);
    CHECK(grid_size_for(255) == 1024);
    CHECK(grid_size_for(256) == 1024);
    CHECK(grid_size_for(257) == 2048);
}

TEST_CASE("band bin counts") {
    SUBCASE("OF = 4 flags the outer three quarters of the grid") {
        const auto b = band_at(4.0, 1024);
        // Half-open exclusions at both edges: 768 minus the two edge bins.
        CHECK(std::abs(static_cast<long>(b.bins().size()) - 768) <= 2);
    }
    SUBCASE("OF = 2") {
        const auto b = band_at(2.0, 1024);
        CHECK(std::abs(static_cast<long>(b.bins().size()) - 512) <= 2);
    }
    SUBCASE("every flagged bin lies strictly inside rho") {
        for (double of : {1.5, 3.0, 6.0, 10.0}) {
            const auto b = band_at(of, 512);
            for (auto k : b.bins()) {
                const double w = std::abs(b.frequency(k));
                CHECK(w > kPi);
                CHECK(w < b.sampling_rate() / 2);
            }
            const auto count = std::count_if(b.mask().begin(), b.mask().end(), [](double v) { return v != 0; });
            CHECK(static_cast<std::size_t>(count) == b.bins().size());
        }
    }
    SUBCASE("bins are symmetric under k -> M - k") {
        const auto b = band_at(5.0, 256);
        for (auto k : b.bins()) CHECK(b.in_band(256 - k));
    }
}

TEST_CASE("band construction errors") {
    CHECK_THROWS_AS(band_rho(kPi, 1.0, 1024), EmptyBand);        // OF = 1
    CHECK_THROWS_AS(band_rho(kPi, 1.0 / 0.9, 1024), EmptyBand);  // below Nyquist
    CHECK_THROWS_AS(band_rho(kPi, 0.25, 1000), InvalidArgument);
    CHECK_THROWS_AS(band_rho(kPi, 0.25, 2), InvalidArgument);
    CHECK_THROWS_AS(band_rho(-1.0, 0.25, 64), InvalidArgument);
    CHECK_THROWS_AS(band_rho(1.01 * kPi, 1.0, 8), EmptyBand);    // no bins past the edge
}

TEST_CASE("partial DTFT of a unit impulse is one on every bin") {
    const auto b = band_at(4.0, 256);
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(31);
    delta[15] = 1;
    const auto x = partial_dtft(delta, b);
    CHECK(x.values.size() == static_cast<Eigen::Index>(b.bins().size()));
    CHECK((x.values.array() - std::complex<double>(1, 0)).abs().maxCoeff() < 1e-12);
}

TEST_CASE("partial DTFT agrees with the direct sum") {
    std::mt19937_64 rng(17);
    for (Eigen::Index len : {1, 2, 7, 64, 255, 511}) {
        for (double of : {1.7, 4.0, 9.0}) {
            const auto b = band_at(of, std::max<Eigen::Index>(64, grid_size_for(len)));
            const Eigen::VectorXd x = oracle::random_vector(rng, len);
            CHECK(rel_err(partial_dtft(x, b).values, oracle::direct_dtft(x, b)) < 1e-10);
        }
    }
}

TEST_CASE("partial DTFT of a real sequence is conjugate symmetric") {
    std::mt19937_64 rng(3);
    const auto b = band_at(6.0, 512);
    const Eigen::VectorXd x = oracle::random_vector(rng, 101);
    const auto spec = partial_dtft(x, b);
    CHECK(spec.conjugate_symmetric);
    std::map<Eigen::Index, std::complex<double>> by_bin;
    for (std::size_t i = 0; i < b.bins().size(); ++i) by_bin[b.bins()[i]] = spec.values[static_cast<Eigen::Index>(i)];
    for (const auto& [k, v] : by_bin) CHECK(std::abs(v - std::conj(by_bin.at(512 - k))) < 1e-10 * spec.values.norm());
}

TEST_CASE("adjoint matches the explicit Riemann sum") {
    std::mt19937_64 rng(23);
    for (Eigen::Index len : {5, 64, 301}) {
        const auto b = band_at(3.5, grid_size_for(len));
        const Eigen::VectorXd x = oracle::random_vector(rng, len);
        const auto spec = partial_dtft(x, b);
        const Eigen::VectorXd fast = apply_adjoint(spec, b, len);
        const Eigen::VectorXd slow = oracle::direct_adjoint(spec.values, b, len);
        CHECK((fast - slow).norm() <= 1e-10 * slow.norm());
    }
}

TEST_CASE("adjoint identity <F x, Y> = <x, F* Y>") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index len = 40 + 13 * trial;
        const auto b = band_at(1.5 + 0.4 * trial, grid_size_for(len));
        const Eigen::VectorXd x = oracle::random_vector(rng, len);
        const Eigen::VectorXd y = oracle::random_vector(rng, len);
        const auto fy = partial_dtft(y, b);
        const double lhs = spectral_inner(partial_dtft(x, b), fy, b);
        const double rhs = x.dot(apply_adjoint(fy, b, len));
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("adjoint rejects a symmetric-flagged spectrum that synthesizes a complex sequence") {
    const auto b = band_at(4.0, 64);
    Spectrum<double> s;
    s.grid_size = 64;
    s.values = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(b.bins().size()));
    s.values[0] = {0, 1};
    s.conjugate_symmetric = true;
    CHECK_THROWS_AS(apply_adjoint(s, b, 31), ConsistencyError);
    s.conjugate_symmetric = false;
    CHECK_NOTHROW(apply_adjoint(s, b, 31));
    CHECK_THROWS_AS(apply_adjoint(s, b, 65), InvalidArgument);
}

TEST_CASE("highpass projection") {
    std::mt19937_64 rng(7);
    SUBCASE("idempotent on full-grid inputs") {
        for (double of : {2.0, 4.0, 10.0}) {
            const auto b = band_at(of, 256);
            const Eigen::VectorXd x = oracle::random_vector(rng, 256);
            const Eigen::VectorXd px = highpass_project(x, b);
            CHECK((highpass_project(px, b) - px).norm() <= 1e-8 * px.norm());
            // Orthogonal: the residual is perpendicular to the range.
            CHECK(std::abs((x - px).dot(px)) <= 1e-8 * x.squaredNorm());
        }
    }
    SUBCASE("norm never grows") {
        for (Eigen::Index len : {3, 50, 200}) {
            const auto b = band_at(3.0, grid_size_for(len));
            const Eigen::VectorXd x = oracle::random_vector(rng, len);
            CHECK(highpass_project(x, b).norm() <= x.norm() * (1 + 1e-12));
        }
    }
    SUBCASE("equals the adjoint of the partial DTFT") {
        const auto b = band_at(5.0, 512);
        const Eigen::VectorXd x = oracle::random_vector(rng, 97);
        const Eigen::VectorXd a = highpass_project(x, b);
        const Eigen::VectorXd c = apply_adjoint(partial_dtft(x, b), b, 97);
        CHECK((a - c).norm() <= 1e-12 * x.norm());
    }
    SUBCASE("annihilates constants on the full grid") {
        const auto b = band_at(4.0, 128);
        CHECK(highpass_project(Eigen::VectorXd::Ones(128), b).norm() < 1e-12);
    }
}

TEST_CASE("highpass kernel") {
    for (double of : {2.0, 4.0, 8.0, 10.0}) {
        const auto b = band_at(of, 4096);
        const double expected = static_cast<double>(b.bins().size()) / 4096.0;
        CHECK(b.kernel_at(0) == Approx(expected).epsilon(1e-12));
        CHECK(b.kernel_at(0) == Approx(1 - 1 / of).epsilon(2e-3));
        CHECK(b.kernel_at(5) == Approx(b.kernel_at(-5)).epsilon(1e-12));
    }
}

TEST_CASE("restricted Gram matrix reproduces the projection on the support") {
    std::mt19937_64 rng(1);
    const auto b = band_at(4.0, 512);
    const Eigen::Index len = 101, n = 12, h = len / 2;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(len);
    x.segment(h - n, 2 * n + 1) = oracle::random_vector(rng, 2 * n + 1);
    const Eigen::MatrixXd g = restricted_gram(b, n);
    CHECK((g - g.transpose()).norm() == 0.0);
    const Eigen::VectorXd px = highpass_project(x, b);
    CHECK((g * x.segment(h - n, 2 * n + 1) - px.segment(h - n, 2 * n + 1)).norm() <= 1e-12 * x.norm());
    // Positive semidefinite and bounded by one.
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
    CHECK(es.eigenvalues().maxCoeff() < 1 + 1e-12);
}

TEST_CASE("residual and folded samples share their out-of-band spectrum") {
    // f is bandlimited, so F_rho f is only discretization error; F_rho z
    // must then match F_rho f_lambda to within that error.
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto m = generate_bandlimited(seed, kPi, 4, 4.0);
        for (double lam : {0.05, 0.2}) {
            const double ts = 1.0 / 6.0;
            const auto s = sample(m, ts, window_half_length(m, ts, lam, 1e-6));
            const auto f = fold_signal(s, lam);
            const auto z = residual(s, f);
            const auto b = band_rho(kPi, ts, grid_size_for(s.samples.size()));
            const auto fz = partial_dtft(z.values, b).values;
            const auto ff = partial_dtft(f.samples, b).values;
            CHECK((fz - ff).norm() <= 1e-6 * fz.norm());
        }
    }
}
