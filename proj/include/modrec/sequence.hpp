#pragma once

#include <algorithm>

#include <Eigen/Dense>

namespace modrec {

/// A finite real sequence stored densely. Index n of the sequence lives at
/// position n - first_index(size), with first_index(size) = -(size / 2):
/// odd lengths cover {-N, ..., N}, even lengths {-N, ..., N-1}.
template <typename Scalar>
using Sequence = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

constexpr Eigen::Index first_index(Eigen::Index size) { return -(size / 2); }

template <typename Derived>
Eigen::Index position(const Eigen::MatrixBase<Derived>& x, Eigen::Index n) {
    return n - first_index(x.size());
}

/// Zero-padded copy of x with the same centering and the requested length.
template <typename Derived>
Sequence<typename Derived::Scalar> centered_resize(const Eigen::MatrixBase<Derived>& x,
                                                   Eigen::Index length) {
    Sequence<typename Derived::Scalar> out = Sequence<typename Derived::Scalar>::Zero(length);
    const Eigen::Index lo = std::max(first_index(x.size()), first_index(length));
    const Eigen::Index hi = std::min(first_index(x.size()) + x.size(), first_index(length) + length);
    for (Eigen::Index n = lo; n < hi; ++n) out[n - first_index(length)] = x[n - first_index(x.size())];
    return out;
}

}  // namespace modrec
