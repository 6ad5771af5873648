#pragma once

#include "gifs/hutchinson.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

namespace gifs {

namespace detail {

// Open-addressed set of occupied grid cells, keeping the first point seen in
// each cell. Kept points are stored append-only, so iteration order equals
// insertion order.
template <class Scalar>
class GridSink {
public:
    GridSink(int dim, Scalar resolution) : dim_(dim), inv_res_(Scalar(1) / resolution) {
        if (!(resolution > Scalar(0))) throw config_error("decimation resolution must be positive");
        rehash(1024);
    }

    void add(const Scalar* p, int d) {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL;
        for (int t = 0; t < d; ++t) {
            cell_scratch_[t] = static_cast<std::int64_t>(std::floor(p[t] * inv_res_));
            h = mix_u64(h ^ static_cast<std::uint64_t>(cell_scratch_[t]));
        }
        std::size_t slot = h & mask_;
        for (;;) {
            std::uint32_t s = state_[slot];
            if (s == kEmpty) break;
            const std::int64_t* c = cells_.data() + static_cast<std::size_t>(s - 1) * dim_;
            bool same = true;
            for (int t = 0; t < d; ++t)
                if (c[t] != cell_scratch_[t]) { same = false; break; }
            if (same) return;  // cell already has its representative
            slot = (slot + 1) & mask_;
        }
        const std::uint32_t id = static_cast<std::uint32_t>(count()) + 1;
        state_[slot] = id;
        cells_.insert(cells_.end(), cell_scratch_.begin(), cell_scratch_.end());
        kept_.insert(kept_.end(), p, p + d);
        if (count() * 2 > mask_) grow();
    }

    std::size_t count() const { return kept_.size() / dim_; }

    PointCloud<Scalar> to_cloud() const {
        PointCloud<Scalar> out(dim_);
        for (std::size_t i = 0; i < count(); ++i)
            out.insert(Eigen::Map<const Vector<Scalar>>(kept_.data() + i * dim_, dim_));
        return out;
    }

private:
    static constexpr std::uint32_t kEmpty = 0;

    void rehash(std::size_t cap) {
        state_.assign(cap, kEmpty);
        mask_ = cap - 1;
        cell_scratch_.resize(dim_);
        for (std::size_t i = 0; i < count(); ++i) {
            std::uint64_t h = 0x9e3779b97f4a7c15ULL;
            const std::int64_t* c = cells_.data() + i * dim_;
            for (int t = 0; t < dim_; ++t) h = mix_u64(h ^ static_cast<std::uint64_t>(c[t]));
            std::size_t slot = h & mask_;
            while (state_[slot] != kEmpty) slot = (slot + 1) & mask_;
            state_[slot] = static_cast<std::uint32_t>(i) + 1;
        }
    }

    void grow() { rehash((mask_ + 1) * 2); }

    int dim_;
    Scalar inv_res_;
    std::size_t mask_ = 0;
    std::vector<std::uint32_t> state_;       // 0 = empty, else kept index + 1
    std::vector<std::int64_t> cells_;
    std::vector<Scalar> kept_;
    std::vector<std::int64_t> cell_scratch_;
};

template <class Scalar>
double product_work(const GifsSystem<Scalar>& G,
                    std::span<const PointCloud<Scalar>> window) {
    double w = G.map_count();
    for (const auto& c : window) w *= static_cast<double>(c.size());
    return w;
}

}  // namespace detail

/// Cardinality budget for a single set-operator evaluation. Window products
/// grow doubly exponentially without decimation, so runs refuse loudly
/// instead of hanging.
inline constexpr std::uint64_t kDefaultWorkBudget = std::uint64_t(1) << 33;

/// Grid-snaps a cloud: one representative per occupied cell of size
/// `resolution` (the first point encountered, not a centroid). Moves the
/// cloud by at most resolution * sqrt(d) in Hausdorff distance.
template <class Scalar>
PointCloud<Scalar> decimate(const PointCloud<Scalar>& cloud, Scalar resolution) {
    detail::GridSink<Scalar> sink(cloud.dim(), resolution);
    for (const auto& p : cloud) sink.add(p.data(), cloud.dim());
    return sink.to_cloud();
}

/// Sliding window D_0..D_{m-1} of the order-m set iteration.
template <class Scalar>
struct DeterministicState {
    std::vector<PointCloud<Scalar>> window;
    long iteration = 0;
};

template <class Scalar>
DeterministicState<Scalar> det_init(const GifsSystem<Scalar>& G,
                                    std::vector<PointCloud<Scalar>> seeds) {
    if (static_cast<int>(seeds.size()) != G.order)
        throw config_error("det_init: need exactly m seed clouds");
    for (const auto& c : seeds) {
        if (c.empty()) throw config_error("det_init: empty seed cloud");
        if (c.dim() != G.dim) throw config_error("det_init: seed dimension mismatch");
    }
    return DeterministicState<Scalar>{std::move(seeds), 0};
}

/// m copies of the first map's fixed point: seeds guaranteed to lie inside
/// the attractor.
template <class Scalar>
std::vector<PointCloud<Scalar>> default_seeds(const GifsSystem<Scalar>& G) {
    PointCloud<Scalar> s = PointCloud<Scalar>::singleton(fixed_point(G, 0));
    return std::vector<PointCloud<Scalar>>(static_cast<std::size_t>(G.order), s);
}

/// One main-loop pass: K := F(D_0,...,D_{m-1}), shift the window, append K.
/// With `resolution` set, K is decimated before being returned and reused.
template <class Scalar>
PointCloud<Scalar> det_step(DeterministicState<Scalar>& state, const GifsSystem<Scalar>& G,
                            std::optional<Scalar> resolution = std::nullopt,
                            std::uint64_t work_budget = kDefaultWorkBudget) {
    std::span<const PointCloud<Scalar>> window(state.window);
    if (detail::product_work(G, window) > static_cast<double>(work_budget))
        throw budget_error("det_step: window product exceeds work budget; decimate or lower depth");
    PointCloud<Scalar> K(G.dim);
    if (resolution) {
        detail::GridSink<Scalar> sink(G.dim, *resolution);
        detail::product_images_into(G, window, sink);
        K = sink.to_cloud();
    } else {
        detail::CloudInsertSink<Scalar> sink{K};
        detail::product_images_into(G, window, sink);
    }
    for (int i = 0; i + 1 < G.order; ++i) state.window[i] = std::move(state.window[i + 1]);
    state.window[G.order - 1] = K;
    ++state.iteration;
    return K;
}

/// Runs `iterations` main-loop passes and returns the last K.
template <class Scalar>
PointCloud<Scalar> det_run(const GifsSystem<Scalar>& G, std::vector<PointCloud<Scalar>> seeds,
                           int iterations, std::optional<Scalar> resolution = std::nullopt,
                           std::uint64_t work_budget = kDefaultWorkBudget) {
    if (iterations < 1) throw config_error("det_run: iterations must be >= 1");
    DeterministicState<Scalar> state = det_init(G, std::move(seeds));
    PointCloud<Scalar> K(G.dim);
    for (int i = 0; i < iterations; ++i) K = det_step(state, G, resolution, work_budget);
    return K;
}

/// Iterates the diagonal operator K -> F(K,...,K). Converges at rate c^k
/// instead of c^{k/m}, so this is the default renderer.
template <class Scalar>
PointCloud<Scalar> det_run_simplified(const GifsSystem<Scalar>& G, const PointCloud<Scalar>& seed,
                                      int iterations,
                                      std::optional<Scalar> resolution = std::nullopt,
                                      std::uint64_t work_budget = kDefaultWorkBudget) {
    if (iterations < 1) throw config_error("det_run_simplified: iterations must be >= 1");
    if (seed.empty()) throw config_error("det_run_simplified: empty seed cloud");
    PointCloud<Scalar> K = seed;
    for (int i = 0; i < iterations; ++i) {
        std::vector<PointCloud<Scalar>> window(static_cast<std::size_t>(G.order), K);
        std::span<const PointCloud<Scalar>> span_window(window);
        if (detail::product_work(G, span_window) > static_cast<double>(work_budget))
            throw budget_error("det_run_simplified: product exceeds work budget; decimate or lower depth");
        if (resolution) {
            detail::GridSink<Scalar> sink(G.dim, *resolution);
            detail::product_images_into(G, span_window, sink);
            K = sink.to_cloud();
        } else {
            PointCloud<Scalar> next(G.dim);
            detail::CloudInsertSink<Scalar> sink{next};
            detail::product_images_into(G, span_window, sink);
            K = std::move(next);
        }
    }
    return K;
}

}  // namespace gifs
