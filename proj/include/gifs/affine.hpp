#pragma once

#include "gifs/codespace.hpp"
#include "gifs/deterministic.hpp"

#include <optional>
#include <vector>

namespace gifs {

inline constexpr std::uint64_t kDefaultTableBudget = 1'000'000;

/// Places needed for the level-k result of the full coefficient algorithm:
/// one B vector, m^k A matrices and m^(k-1) C vectors per address.
inline BigIndex full_table_entries(int n, int m, int k) {
    if (k == 1) return BigIndex(n) * (1 + m);
    return address_count(n, m, k) * (1 + (BigIndex(m) + 1) * big_pow(m, k - 1));
}

/// Places needed for the level-k result of the shortcut: the child-index
/// scratch list plus one B vector per address.
inline BigIndex shortcut_result_entries(int n, int m, int k) {
    return BigIndex(m) + address_count(n, m, k);
}

namespace detail {

template <class Scalar>
void require_affine(const GifsSystem<Scalar>& G, const char* who) {
    G.validate();
    for (const auto& f : G.maps)
        if (!f.is_affine()) throw config_error(std::string(who) + ": non-affine map present");
}

// Cached integer powers for carving child indices out of N at one level.
struct ChildIndexer {
    int n, m, k;
    // per component position i = 2..k and branch j = 1..m
    std::vector<BigIndex> divisor;   // n^(digits right of the component)
    std::vector<BigIndex> modulus;   // n^(component width), per i only
    std::vector<BigIndex> weight;    // n^(digits after the component in the child)

    ChildIndexer(int n_, int m_, int k_) : n(n_), m(m_), k(k_) {
        const BigIndex total = address_length_big(m, k);
        for (int i = 2; i <= k; ++i) {
            const BigIndex width = big_pow(m, i - 2);
            modulus.push_back(boost::multiprecision::pow(BigIndex(n), to_u64(width, "child width")));
            BigIndex tail = 0;
            for (int t = i - 1; t <= k - 2; ++t) tail += big_pow(m, t);
            weight.push_back(boost::multiprecision::pow(BigIndex(n), to_u64(tail, "child weight")));
            for (int j = 1; j <= m; ++j) {
                const BigIndex shift = total - address_length_big(m, i - 1) - BigIndex(j) * width;
                divisor.push_back(boost::multiprecision::pow(BigIndex(n), to_u64(shift, "child shift")));
            }
        }
    }

    std::uint64_t child(std::uint64_t N, int branch) const {
        BigIndex result = 0;
        for (int i = 2; i <= k; ++i) {
            const std::size_t row = static_cast<std::size_t>(i - 2);
            const BigIndex piece = (BigIndex(N) / divisor[row * m + (branch - 1)]) % modulus[row];
            result += piece * weight[row];
        }
        return to_u64(result, "child index");
    }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Full coefficient tables
// ---------------------------------------------------------------------------

/// Per-level tables realizing the closed form: B[k][N] is the composed
/// translation, A[k][N*m^k + P] the coefficient matrix of argument slot P.
/// Only level 1 and the last built level are retained unless the build is
/// asked to keep everything.
template <class Scalar>
struct CoefficientTables {
    int n = 0, m = 0, d = 0, k_max = 0;
    std::vector<std::vector<Vector<Scalar>>> B;  // [level][N]
    std::vector<std::vector<Matrix<Scalar>>> A;  // [level][N * m^level + P]
    std::vector<std::vector<Vector<Scalar>>> C;  // [level][N * m^(level-1) + P'], kept levels only

    bool has_level(int k) const {
        return k >= 1 && k <= k_max && !B[static_cast<std::size_t>(k)].empty();
    }
};

/// Builds levels 1..k_max by the two-term recursion: each level-k entry is a
/// product or sum of one level-(k-1) entry and one level-1 entry.
template <class Scalar>
CoefficientTables<Scalar> build_tables_full(const GifsSystem<Scalar>& G, int k_max,
                                            std::uint64_t budget = kDefaultTableBudget,
                                            bool keep_history = false) {
    detail::require_affine(G, "build_tables_full");
    if (k_max < 1) throw config_error("build_tables_full: k_max must be >= 1");
    const int n = G.map_count(), m = G.order, d = G.dim;
    for (int k = 1; k <= k_max; ++k)
        if (full_table_entries(n, m, k) > BigIndex(budget))
            throw budget_error("build_tables_full: level " + std::to_string(k) + " needs " +
                               full_table_entries(n, m, k).str() + " entries, budget " +
                               std::to_string(budget));

    CoefficientTables<Scalar> T;
    T.n = n;
    T.m = m;
    T.d = d;
    T.k_max = k_max;
    T.B.resize(k_max + 1);
    T.A.resize(k_max + 1);
    T.C.resize(k_max + 1);

    auto& B1 = T.B[1];
    auto& A1 = T.A[1];
    B1.resize(n);
    A1.resize(static_cast<std::size_t>(n) * m);
    for (int N = 0; N < n; ++N) {
        const AffineMap<Scalar>& f = G.maps[N].affine_part();
        B1[N] = f.offset;
        for (int P = 0; P < m; ++P) A1[static_cast<std::size_t>(N) * m + P] = f.coeffs[P];
    }

    for (int k = 2; k <= k_max; ++k) {
        const std::uint64_t count_prev = to_u64(address_count(n, m, k - 1), "table size");
        const std::uint64_t blocks = to_u64(block_count(n, m, k), "block table size");
        const std::uint64_t count = count_prev * blocks;
        const std::uint64_t p_prev = to_u64(big_pow(m, k - 1), "P range");  // paths into level k-1
        const std::uint64_t p_cur = p_prev * m;

        std::vector<std::uint64_t> npow(p_prev);  // n^t for digit extraction
        npow[0] = 1;
        for (std::uint64_t t = 1; t < p_prev; ++t) npow[t] = npow[t - 1] * n;

        const auto& Bp = T.B[k - 1];
        const auto& Ap = T.A[k - 1];
        auto& Bk = T.B[k];
        auto& Ak = T.A[k];
        Bk.resize(count);
        Ak.resize(count * p_cur);
        std::vector<Vector<Scalar>>* Ck = nullptr;
        if (keep_history) {
            T.C[k].resize(count * p_prev);
            Ck = &T.C[k];
        }

        for (std::uint64_t Np = 0; Np < count_prev; ++Np) {
            for (std::uint64_t M = 0; M < blocks; ++M) {
                const std::uint64_t NN = Np * blocks + M;
                Vector<Scalar> acc = Bp[Np];
                for (std::uint64_t P = 0; P < p_prev; ++P) {
                    const int digit = static_cast<int>((M / npow[p_prev - 1 - P]) % n);
                    const Matrix<Scalar>& left = Ap[Np * p_prev + P];
                    Vector<Scalar> cval = left * B1[digit];
                    acc += cval;
                    if (Ck) (*Ck)[NN * p_prev + P] = std::move(cval);
                    for (int I = 0; I < m; ++I)
                        Ak[NN * p_cur + (P * m + I)].noalias() =
                            left * A1[static_cast<std::size_t>(digit) * m + I];
                }
                Bk[NN] = std::move(acc);
            }
        }
        if (!keep_history && k - 1 > 1) {
            T.B[k - 1].clear();
            T.B[k - 1].shrink_to_fit();
            T.A[k - 1].clear();
            T.A[k - 1].shrink_to_fit();
        }
    }
    return T;
}

/// Closed-form evaluation: sum over argument slots of A[k][N,P] x_P, plus
/// B[k][N]. Slots ascend for reproducible rounding.
template <class Scalar>
Vector<Scalar> eval_f_alpha_closed(const CoefficientTables<Scalar>& T, const Address& addr,
                                   std::span<const Vector<Scalar>> x) {
    addr.validate();
    if (addr.n != T.n || addr.m != T.m)
        throw config_error("eval_f_alpha_closed: address shape does not match tables");
    if (!T.has_level(addr.k))
        throw config_error("eval_f_alpha_closed: level " + std::to_string(addr.k) + " not built");
    const std::uint64_t slots = to_u64(big_pow(T.m, addr.k), "argument tuple size");
    if (x.size() != slots)
        throw config_error("eval_f_alpha_closed: expected " + std::to_string(slots) + " points");
    const std::uint64_t N = to_u64(encode_N(addr), "address index");

    const auto& Ak = T.A[addr.k];
    Vector<Scalar> acc = Vector<Scalar>::Zero(T.d);
    for (std::uint64_t P = 0; P < slots; ++P) acc.noalias() += Ak[N * slots + P] * x[P];
    acc += T.B[addr.k][N];
    return acc;
}

// ---------------------------------------------------------------------------
// Shortcut: translation parts only
// ---------------------------------------------------------------------------

/// Per-level composed translations B[k][N], all levels retained.
template <class Scalar>
struct ShortcutTables {
    int n = 0, m = 0, d = 0, k_max = 0;
    std::vector<std::vector<Vector<Scalar>>> B;  // [level][N]
};

/// Builds B level by level: each entry combines the m child entries of the
/// previous level with the root map's matrices and translation. Child
/// positions come from the numeric index arithmetic, not digit slicing.
template <class Scalar>
ShortcutTables<Scalar> build_B_shortcut(const GifsSystem<Scalar>& G, int k_max,
                                        std::uint64_t budget = kDefaultTableBudget) {
    detail::require_affine(G, "build_B_shortcut");
    if (k_max < 1) throw config_error("build_B_shortcut: k_max must be >= 1");
    const int n = G.map_count(), m = G.order, d = G.dim;
    for (int k = 1; k <= k_max; ++k)
        if (shortcut_result_entries(n, m, k) > BigIndex(budget))
            throw budget_error("build_B_shortcut: level " + std::to_string(k) + " needs " +
                               shortcut_result_entries(n, m, k).str() + " entries, budget " +
                               std::to_string(budget));

    ShortcutTables<Scalar> T;
    T.n = n;
    T.m = m;
    T.d = d;
    T.k_max = k_max;
    T.B.resize(k_max + 1);
    T.B[1].resize(n);
    for (int N = 0; N < n; ++N) T.B[1][N] = G.maps[N].affine_part().offset;

    for (int k = 2; k <= k_max; ++k) {
        const std::uint64_t count = to_u64(address_count(n, m, k), "table size");
        const std::uint64_t root_div = count / static_cast<std::uint64_t>(n);
        const detail::ChildIndexer idx(n, m, k);
        const auto& Bp = T.B[k - 1];
        auto& Bk = T.B[k];
        Bk.resize(count);
        for (std::uint64_t N = 0; N < count; ++N) {
            const int root = static_cast<int>(N / root_div);
            const AffineMap<Scalar>& f = G.maps[root].affine_part();
            Vector<Scalar> acc = f.coeffs[0] * Bp[idx.child(N, 1)];
            for (int j = 2; j <= m; ++j) acc.noalias() += f.coeffs[j - 1] * Bp[idx.child(N, j)];
            acc += f.offset;
            Bk[N] = std::move(acc);
        }
    }
    return T;
}

// ---------------------------------------------------------------------------
// Attractor approximations
// ---------------------------------------------------------------------------

/// The cloud of all composed translations at depth k. Within budget this is
/// the exact table; beyond it, and given a decimation resolution, levels are
/// advanced by streaming every child combination of the previous level's
/// kept points through the decimation grid. Every kept point is still an
/// exact composed translation; decimation only prunes which ones are kept.
template <class Scalar>
PointCloud<Scalar> attractor_shortcut(const GifsSystem<Scalar>& G, int k,
                                      std::uint64_t budget = kDefaultTableBudget,
                                      std::optional<Scalar> decimation = std::nullopt,
                                      std::uint64_t work_budget = kDefaultWorkBudget) {
    detail::require_affine(G, "attractor_shortcut");
    if (k < 1) throw config_error("attractor_shortcut: k must be >= 1");
    const int n = G.map_count(), m = G.order;

    int k_fit = 0;
    for (int t = 1; t <= k; ++t) {
        if (shortcut_result_entries(n, m, t) > BigIndex(budget)) break;
        k_fit = t;
    }
    if (k_fit == 0)
        throw budget_error("attractor_shortcut: level 1 already exceeds the table budget");
    if (k_fit < k && !decimation)
        throw budget_error("attractor_shortcut: level " + std::to_string(k) + " needs " +
                           shortcut_result_entries(n, m, k).str() +
                           " entries; pass a decimation resolution to stream beyond budget");

    ShortcutTables<Scalar> T = build_B_shortcut(G, k_fit, budget);
    PointCloud<Scalar> cloud(G.dim);
    for (const auto& b : T.B[k_fit]) cloud.insert(b);
    if (k_fit == k && !decimation) return cloud;

    cloud = decimate(cloud, *decimation);
    for (int level = k_fit + 1; level <= k; ++level) {
        // One level of the translation recursion over kept representatives:
        // exactly the system's set operator applied diagonally to the cloud.
        std::vector<PointCloud<Scalar>> window(static_cast<std::size_t>(m), cloud);
        std::span<const PointCloud<Scalar>> span_window(window);
        if (detail::product_work(G, span_window) > static_cast<double>(work_budget))
            throw budget_error("attractor_shortcut: streamed level exceeds work budget");
        detail::GridSink<Scalar> sink(G.dim, *decimation);
        detail::product_images_into(G, span_window, sink);
        cloud = sink.to_cloud();
    }
    return cloud;
}

/// Lemma-style approximation from a single seed x0: the cloud of
/// S[k][N] x0 + B[k][N], where S accumulates the row sums of the coefficient
/// matrices by the same child recursion (one extra matrix per entry instead
/// of all m^k).
template <class Scalar>
PointCloud<Scalar> attractor_from_seed(const GifsSystem<Scalar>& G, int k,
                                       const Vector<Scalar>& x0,
                                       std::uint64_t budget = kDefaultTableBudget) {
    detail::require_affine(G, "attractor_from_seed");
    if (k < 1) throw config_error("attractor_from_seed: k must be >= 1");
    if (static_cast<int>(x0.size()) != G.dim)
        throw config_error("attractor_from_seed: seed dimension mismatch");
    const int n = G.map_count(), m = G.order, d = G.dim;
    for (int t = 1; t <= k; ++t) {
        const BigIndex entries = BigIndex(m) + 2 * address_count(n, m, t);
        if (entries > BigIndex(budget))
            throw budget_error("attractor_from_seed: level " + std::to_string(t) + " needs " +
                               entries.str() + " entries, budget " + std::to_string(budget));
    }

    std::vector<Vector<Scalar>> B(n);
    std::vector<Matrix<Scalar>> S(n);
    for (int N = 0; N < n; ++N) {
        const AffineMap<Scalar>& f = G.maps[N].affine_part();
        B[N] = f.offset;
        Matrix<Scalar> s = f.coeffs[0];
        for (int j = 1; j < m; ++j) s += f.coeffs[j];
        S[N] = std::move(s);
    }

    for (int level = 2; level <= k; ++level) {
        const std::uint64_t count = to_u64(address_count(n, m, level), "table size");
        const std::uint64_t root_div = count / static_cast<std::uint64_t>(n);
        const detail::ChildIndexer idx(n, m, level);
        std::vector<Vector<Scalar>> Bnext(count);
        std::vector<Matrix<Scalar>> Snext(count);
        for (std::uint64_t N = 0; N < count; ++N) {
            const int root = static_cast<int>(N / root_div);
            const AffineMap<Scalar>& f = G.maps[root].affine_part();
            Vector<Scalar> b = f.coeffs[0] * B[idx.child(N, 1)];
            Matrix<Scalar> s = f.coeffs[0] * S[idx.child(N, 1)];
            for (int j = 2; j <= m; ++j) {
                b.noalias() += f.coeffs[j - 1] * B[idx.child(N, j)];
                s.noalias() += f.coeffs[j - 1] * S[idx.child(N, j)];
            }
            b += f.offset;
            Bnext[N] = std::move(b);
            Snext[N] = std::move(s);
        }
        B = std::move(Bnext);
        S = std::move(Snext);
    }

    PointCloud<Scalar> cloud(d);
    for (std::size_t i = 0; i < B.size(); ++i) cloud.insert(S[i] * x0 + B[i]);
    return cloud;
}

}  // namespace gifs
