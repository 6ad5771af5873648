#pragma once

#include "gifs/system.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace gifs {

namespace detail {

// Flat row-major copy; the inner loops below are the hot path for large
// clouds, and chasing per-point heap blocks there is measurably slower.
template <class Scalar>
std::vector<Scalar> flatten(const PointCloud<Scalar>& c) {
    std::vector<Scalar> out(c.size() * static_cast<std::size_t>(c.dim()));
    std::size_t k = 0;
    for (const auto& p : c)
        for (Eigen::Index i = 0; i < p.size(); ++i) out[k++] = p[i];
    return out;
}

}  // namespace detail

/// max_{a in A} min_{b in B} |a-b|_2, computed exactly. A point whose running
/// minimum already falls below the current maximum cannot raise it, so its
/// scan is cut short; the result is unchanged.
template <class Scalar>
Scalar directed_hausdorff(const PointCloud<Scalar>& a, const PointCloud<Scalar>& b) {
    if (a.empty() || b.empty()) throw config_error("hausdorff: empty cloud");
    if (a.dim() != b.dim()) throw config_error("hausdorff: dimension mismatch");
    const int d = a.dim();
    const std::vector<Scalar> fa = detail::flatten(a);
    const std::vector<Scalar> fb = detail::flatten(b);
    const std::size_t na = a.size(), nb = b.size();

    Scalar max2 = 0;
    std::size_t hint = 0;  // nearest neighbors of consecutive points correlate
    for (std::size_t i = 0; i < na; ++i) {
        const Scalar* pa = fa.data() + i * d;
        Scalar min2 = std::numeric_limits<Scalar>::infinity();
        for (std::size_t jj = 0; jj < nb; ++jj) {
            const std::size_t j = (jj + hint) % nb;
            const Scalar* pb = fb.data() + j * d;
            Scalar s = 0;
            for (int t = 0; t < d; ++t) {
                const Scalar diff = pa[t] - pb[t];
                s += diff * diff;
            }
            if (s < min2) {
                min2 = s;
                hint = j;
                if (min2 <= max2) break;
            }
        }
        if (min2 > max2) max2 = min2;
    }
    return std::sqrt(max2);
}

/// Distance from one point to the nearest point of a cloud.
template <class Scalar>
Scalar distance_to_cloud(const Vector<Scalar>& p, const PointCloud<Scalar>& c) {
    if (c.empty()) throw config_error("distance_to_cloud: empty cloud");
    Scalar min2 = std::numeric_limits<Scalar>::infinity();
    for (const auto& q : c) min2 = std::min(min2, (p - q).squaredNorm());
    return std::sqrt(min2);
}

/// Hausdorff-Pompeiu distance between finite clouds.
template <class Scalar>
Scalar hausdorff_distance(const PointCloud<Scalar>& a, const PointCloud<Scalar>& b) {
    return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

}  // namespace gifs
