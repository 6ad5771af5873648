#pragma once

#include "gifs/system.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace gifs {

/// Seed for the fixed stream generator below. Identical specs give
/// bit-identical symbol streams and therefore bit-identical point streams.
struct RngSpec {
    std::uint64_t seed = 0;
};

/// SplitMix64: 64-bit counter state passed through a mixing permutation.
/// Chosen for exact reproducibility across platforms; quality is far beyond
/// what symbol selection needs.
class SymbolRng {
public:
    explicit SymbolRng(RngSpec spec) : state_(spec.seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform symbol in {0,...,n-1}, via rejection so the draw is unbiased.
    int next_symbol(int n) {
        const std::uint64_t span = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        for (;;) {
            const std::uint64_t v = next_u64();
            if (v < limit) return static_cast<int>(v % span);
        }
    }

    /// Weighted symbol draw by inverse CDF over a positive weight vector.
    template <class Scalar>
    int next_symbol_weighted(std::span<const Scalar> p) {
        const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        double acc = 0;
        for (std::size_t i = 0; i + 1 < p.size(); ++i) {
            acc += static_cast<double>(p[i]);
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(p.size()) - 1;
    }

private:
    std::uint64_t state_;
};

/// Walk state of the tree-ordered random iteration. z_i[0] holds the current
/// base point; z_i[l] for l >= 1 holds the latest emitted point of level l
/// whose index is congruent to i modulo m (residue 0 mapped to m).
template <class Scalar>
struct ChaosState {
    std::uint64_t j = 1, k = 1;
    std::vector<std::vector<Vector<Scalar>>> z;        // m lists, slot per level
    std::vector<std::vector<char>> written;            // parallel to z
    std::uint64_t emitted = 0;
    SymbolRng rng{RngSpec{}};
    Vector<Scalar> last;
    std::uint64_t max_level_read = 0;                  // diagnostics
};

namespace detail {

template <class Scalar>
int draw_map_symbol(SymbolRng& rng, const GifsSystem<Scalar>& G) {
    if (G.probabilities.empty()) return rng.next_symbol(G.map_count());
    return rng.next_symbol_weighted(std::span<const Scalar>(G.probabilities));
}

template <class Scalar>
void z_store(ChaosState<Scalar>& st, int list, std::uint64_t level, const Vector<Scalar>& p) {
    auto& zi = st.z[list];
    auto& wi = st.written[list];
    if (zi.size() <= level) {
        zi.resize(level + 1);
        wi.resize(level + 1, 0);
    }
    zi[level] = p;
    wi[level] = 1;
}

template <class Scalar>
const Vector<Scalar>& z_load(const ChaosState<Scalar>& st, int list, std::uint64_t level) {
    if (level >= st.z[list].size() || !st.written[list][level])
        throw std::logic_error("chaos game read an unwritten history slot");
    return st.z[list][level];
}

}  // namespace detail

/// Emits the first point f_gamma(x0,...,x0) and seeds the history lists.
template <class Scalar>
ChaosState<Scalar> chaos_init(const GifsSystem<Scalar>& G, const Vector<Scalar>& x0,
                              RngSpec rng) {
    if (static_cast<int>(x0.size()) != G.dim) throw config_error("chaos_init: x0 dimension mismatch");
    ChaosState<Scalar> st;
    st.rng = SymbolRng(rng);
    st.z.resize(G.order);
    st.written.resize(G.order);
    for (int i = 0; i < G.order; ++i) detail::z_store(st, i, 0, x0);

    const int gamma = detail::draw_map_symbol(st.rng, G);
    std::vector<Vector<Scalar>> args(static_cast<std::size_t>(G.order), x0);
    st.last = G.maps[gamma](std::span<const Vector<Scalar>>(args));
    detail::z_store(st, 0, 1, st.last);  // j = 1 -> list 1
    st.emitted = 1;
    return st;
}

/// Advances (j,k) by the successor rule and emits the next point.
template <class Scalar>
const Vector<Scalar>& chaos_step(ChaosState<Scalar>& st, const GifsSystem<Scalar>& G) {
    if (st.emitted == 0) throw std::logic_error("chaos_step: state not initialized");
    const std::uint64_t m = static_cast<std::uint64_t>(G.order);
    const int gamma = detail::draw_map_symbol(st.rng, G);

    if (st.j % m != 0) {
        // descend to a fresh level-1 index
        std::uint64_t scale = 1;
        for (std::uint64_t t = 1; t < st.k; ++t) scale *= m;
        st.j = scale * st.j + 1;
        st.k = 1;
    } else {
        st.j /= m;
        st.k += 1;
    }

    std::vector<Vector<Scalar>> args(G.order);
    for (int i = 0; i < G.order; ++i) args[i] = detail::z_load(st, i, st.k - 1);
    st.max_level_read = std::max(st.max_level_read, st.k - 1);
    st.last = G.maps[gamma](std::span<const Vector<Scalar>>(args));

    const int list = static_cast<int>((st.j - 1) % m);  // j mod m with 0 -> m
    detail::z_store(st, list, st.k, st.last);
    if (st.k >= 2 && st.j % m != 0) {
        // new base point for the next run of level-1 indices
        for (int i = 0; i < G.order; ++i) detail::z_store(st, i, 0, st.last);
    }
    ++st.emitted;
    return st.last;
}

/// Emits `count` points and returns all but the first `burn_in` as a cloud.
/// Without an explicit start, x0 is the first map's fixed point, which lies
/// in the attractor, and burn_in defaults to 0; an arbitrary x0 defaults to
/// a burn-in of 200.
template <class Scalar>
PointCloud<Scalar> chaos_run(const GifsSystem<Scalar>& G, std::optional<Vector<Scalar>> x0,
                             std::uint64_t count, std::int64_t burn_in, RngSpec rng) {
    Vector<Scalar> start = x0 ? *x0 : fixed_point(G, 0);
    if (burn_in < 0) burn_in = x0 ? 200 : 0;
    if (count <= static_cast<std::uint64_t>(burn_in))
        throw config_error("chaos_run: count must exceed burn_in");

    ChaosState<Scalar> st = chaos_init(G, start, rng);
    PointCloud<Scalar> out(G.dim);
    if (burn_in == 0) out.insert(st.last);
    for (std::uint64_t i = 1; i < count; ++i) {
        const Vector<Scalar>& p = chaos_step(st, G);
        if (i >= static_cast<std::uint64_t>(burn_in)) out.insert(p);
    }
    return out;
}

}  // namespace gifs
