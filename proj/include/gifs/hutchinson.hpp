#pragma once

#include "gifs/system.hpp"

#include <span>
#include <vector>

namespace gifs {

namespace detail {

template <class Scalar>
struct CloudInsertSink {
    PointCloud<Scalar>& out;
    void add(const Scalar* p, int d) {
        out.insert(Eigen::Map<const Vector<Scalar>>(p, d));
    }
};

// Streams f_i(x_1,...,x_m) over the full Cartesian product of the window
// clouds into a sink, in ascending odometer order (slot m-1 fastest). The
// order is part of the contract: decimation keeps first-encountered
// representatives, so downstream results depend on it.
template <class Scalar, class Sink>
void product_images_into(const GifsSystem<Scalar>& G,
                         std::span<const PointCloud<Scalar>> window, Sink& sink) {
    const int m = G.order;
    const int d = G.dim;
    if (static_cast<int>(window.size()) != m)
        throw config_error("hutchinson: expected one cloud per argument slot");
    for (const auto& c : window) {
        if (c.empty()) throw config_error("hutchinson: empty input cloud");
        if (c.dim() != d) throw config_error("hutchinson: cloud dimension mismatch");
    }

    std::vector<std::size_t> sizes(m);
    for (int j = 0; j < m; ++j) sizes[j] = window[j].size();

    for (int i = 0; i < G.map_count(); ++i) {
        const GifsMap<Scalar>& f = G.maps[i];
        if (f.is_affine()) {
            const AffineMap<Scalar>& a = f.affine_part();
            // Per-slot transformed lists: T_j[p] = A_j * K_j[p] (plus b once).
            // Each point is transformed a single time instead of once per tuple.
            std::vector<std::vector<Scalar>> T(m);
            for (int j = 0; j < m; ++j) {
                T[j].resize(sizes[j] * d);
                for (std::size_t p = 0; p < sizes[j]; ++p) {
                    Vector<Scalar> y = a.coeffs[j] * window[j][p];
                    if (j == 0) y += a.offset;
                    for (int t = 0; t < d; ++t) T[j][p * d + t] = y[t];
                }
            }
            // Running prefix sums over the odometer; only suffixes of the
            // changed slot are recomputed.
            std::vector<std::size_t> idx(m, 0);
            std::vector<Scalar> partial((m + 1) * d, Scalar(0));
            auto refresh = [&](int from) {
                for (int j = from; j < m; ++j) {
                    const Scalar* row = T[j].data() + idx[j] * d;
                    const Scalar* prev = partial.data() + j * d;
                    Scalar* cur = partial.data() + (j + 1) * d;
                    for (int t = 0; t < d; ++t) cur[t] = prev[t] + row[t];
                }
            };
            refresh(0);
            for (;;) {
                sink.add(partial.data() + m * d, d);
                int j = m - 1;
                while (j >= 0 && idx[j] + 1 == sizes[j]) idx[j--] = 0;
                if (j < 0) break;
                ++idx[j];
                refresh(j);
            }
        } else {
            std::vector<std::size_t> idx(m, 0);
            std::vector<Vector<Scalar>> args(m);
            for (;;) {
                for (int j = 0; j < m; ++j) args[j] = window[j][idx[j]];
                Vector<Scalar> y = f(std::span<const Vector<Scalar>>(args));
                sink.add(y.data(), d);
                int j = m - 1;
                while (j >= 0 && idx[j] + 1 == sizes[j]) idx[j--] = 0;
                if (j < 0) break;
                ++idx[j];
            }
        }
    }
}

}  // namespace detail

/// F(K_1,...,K_m) = union over maps of f_i(K_1 x ... x K_m).
template <class Scalar>
PointCloud<Scalar> hutchinson(const GifsSystem<Scalar>& G,
                              std::span<const PointCloud<Scalar>> window) {
    PointCloud<Scalar> out(G.dim);
    detail::CloudInsertSink<Scalar> sink{out};
    detail::product_images_into(G, window, sink);
    return out;
}

template <class Scalar>
PointCloud<Scalar> hutchinson(const GifsSystem<Scalar>& G,
                              const std::vector<PointCloud<Scalar>>& window) {
    return hutchinson(G, std::span<const PointCloud<Scalar>>(window));
}

/// The diagonal variant F(K,...,K).
template <class Scalar>
PointCloud<Scalar> simplified_hutchinson(const GifsSystem<Scalar>& G,
                                         const PointCloud<Scalar>& K) {
    std::vector<PointCloud<Scalar>> window(static_cast<std::size_t>(G.order), K);
    return hutchinson(G, window);
}

}  // namespace gifs
