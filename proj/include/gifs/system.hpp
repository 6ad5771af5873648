#pragma once

#include "gifs/types.hpp"

#include <cmath>
#include <cstring>
#include <functional>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gifs {

// ---------------------------------------------------------------------------
// Maps and systems
// ---------------------------------------------------------------------------

/// f(x_1,...,x_m) = A_1 x_1 + ... + A_m x_m + b with d×d matrices A_j and a
/// d-vector b.
template <class Scalar>
struct AffineMap {
    std::vector<Matrix<Scalar>> coeffs;  // A_1..A_m
    Vector<Scalar> offset;               // b

    int order() const { return static_cast<int>(coeffs.size()); }
    int dim() const { return static_cast<int>(offset.size()); }

    void validate() const {
        if (coeffs.empty()) throw config_error("affine map needs at least one coefficient matrix");
        const int d = dim();
        if (d < 1) throw config_error("affine map translation must be nonempty");
        for (const auto& a : coeffs) {
            if (a.rows() != d || a.cols() != d)
                throw config_error("affine map coefficient matrix is not d x d");
            if (!a.allFinite()) throw config_error("affine map has non-finite matrix entry");
        }
        if (!offset.allFinite()) throw config_error("affine map has non-finite translation entry");
    }
};

/// One map of a system: either affine or an opaque evaluator X^m -> X.
template <class Scalar>
class GifsMap {
public:
    using Evaluator = std::function<Vector<Scalar>(std::span<const Vector<Scalar>>)>;

    static GifsMap affine(AffineMap<Scalar> a) {
        a.validate();
        GifsMap f;
        f.dim_ = a.dim();
        f.order_ = a.order();
        f.affine_ = std::move(a);
        return f;
    }

    static GifsMap generic(int dim, int order, Evaluator eval) {
        if (dim < 1 || order < 1) throw config_error("generic map needs dim >= 1 and order >= 1");
        if (!eval) throw config_error("generic map needs an evaluator");
        GifsMap f;
        f.dim_ = dim;
        f.order_ = order;
        f.eval_ = std::move(eval);
        return f;
    }

    bool is_affine() const { return affine_.has_value(); }
    const AffineMap<Scalar>& affine_part() const { return *affine_; }
    int dim() const { return dim_; }
    int order() const { return order_; }

    Vector<Scalar> operator()(std::span<const Vector<Scalar>> args) const {
        if (affine_) {
            Vector<Scalar> y = affine_->offset;
            for (int j = 0; j < order_; ++j) y.noalias() += affine_->coeffs[j] * args[j];
            return y;
        }
        return eval_(args);
    }

private:
    GifsMap() = default;
    int dim_ = 0;
    int order_ = 0;
    std::optional<AffineMap<Scalar>> affine_;
    Evaluator eval_;
};

/// A finite family of maps X^m -> X on R^d, optionally with a probability
/// vector for the stochastic algorithm.
template <class Scalar>
struct GifsSystem {
    int dim = 0;    // d
    int order = 0;  // m
    std::vector<GifsMap<Scalar>> maps;
    std::vector<Scalar> probabilities;  // empty, or one positive weight per map

    int map_count() const { return static_cast<int>(maps.size()); }

    void validate() const {
        if (dim < 1) throw config_error("dimension must be >= 1");
        if (order < 1) throw config_error("order must be >= 1");
        if (maps.empty()) throw config_error("maps: at least one map required");
        for (const auto& f : maps) {
            if (f.dim() != dim) throw config_error("maps: dimension mismatch");
            if (f.order() != order) throw config_error("maps: order mismatch");
        }
        if (!probabilities.empty()) {
            if (probabilities.size() != maps.size())
                throw config_error("probabilities: need one entry per map");
            Scalar sum = 0;
            for (Scalar p : probabilities) {
                if (!(p > 0)) throw config_error("probabilities: entries must be positive");
                sum += p;
            }
            if (std::abs(static_cast<double>(sum) - 1.0) > 1e-12)
                throw config_error("probabilities: must sum to 1");
        }
    }
};

// ---------------------------------------------------------------------------
// Point clouds
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t mix_u64(std::uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
}

template <class Scalar>
std::uint64_t hash_point(const Vector<Scalar>& p) {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        std::uint64_t bits = 0;
        static_assert(sizeof(Scalar) <= sizeof(bits));
        std::memcpy(&bits, &p[i], sizeof(Scalar));
        h = mix_u64(h ^ bits);
    }
    return h;
}

template <class Scalar>
bool bit_equal(const Vector<Scalar>& a, const Vector<Scalar>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), sizeof(Scalar) * a.size()) == 0;
}

}  // namespace detail

/// Finite set of d-dimensional points. Duplicates are collapsed by exact bit
/// equality; approximate merging is a decimation concern, not a set concern.
template <class Scalar>
class PointCloud {
public:
    PointCloud() = default;
    explicit PointCloud(int dim) : dim_(dim) {
        if (dim < 1) throw config_error("point cloud dimension must be >= 1");
    }

    int dim() const { return dim_; }
    std::size_t size() const { return pts_.size(); }
    bool empty() const { return pts_.empty(); }

    const Vector<Scalar>& operator[](std::size_t i) const { return pts_[i]; }
    auto begin() const { return pts_.begin(); }
    auto end() const { return pts_.end(); }
    const std::vector<Vector<Scalar>>& points() const { return pts_; }

    /// Returns true if the point was new.
    bool insert(const Vector<Scalar>& p) {
        if (p.size() != dim_) throw config_error("point dimension mismatch");
        if (!p.allFinite()) throw config_error("point has non-finite coordinate");
        const std::uint64_t h = detail::hash_point(p);
        auto [lo, hi] = index_.equal_range(h);
        for (auto it = lo; it != hi; ++it)
            if (detail::bit_equal(pts_[it->second], p)) return false;
        index_.emplace(h, pts_.size());
        pts_.push_back(p);
        return true;
    }

    static PointCloud singleton(const Vector<Scalar>& p) {
        PointCloud c(static_cast<int>(p.size()));
        c.insert(p);
        return c;
    }

    static PointCloud of(int dim, std::initializer_list<Vector<Scalar>> pts) {
        PointCloud c(dim);
        for (const auto& p : pts) c.insert(p);
        return c;
    }

    bool contains(const Vector<Scalar>& p) const {
        const std::uint64_t h = detail::hash_point(p);
        auto [lo, hi] = index_.equal_range(h);
        for (auto it = lo; it != hi; ++it)
            if (detail::bit_equal(pts_[it->second], p)) return true;
        return false;
    }

private:
    int dim_ = 0;
    std::vector<Vector<Scalar>> pts_;
    std::unordered_multimap<std::uint64_t, std::size_t> index_;
};

using PointCloudd = PointCloud<double>;

// ---------------------------------------------------------------------------
// Map evaluation and contractivity
// ---------------------------------------------------------------------------

/// Evaluates one map at an m-tuple of d-vectors.
template <class Scalar>
Vector<Scalar> eval_map(const GifsMap<Scalar>& f, std::span<const Vector<Scalar>> args) {
    if (static_cast<int>(args.size()) != f.order())
        throw config_error("eval_map: expected " + std::to_string(f.order()) + " arguments");
    for (const auto& a : args)
        if (static_cast<int>(a.size()) != f.dim()) throw config_error("eval_map: argument dimension mismatch");
    return f(args);
}

template <class Scalar>
Vector<Scalar> eval_map(const GifsMap<Scalar>& f, const std::vector<Vector<Scalar>>& args) {
    return eval_map(f, std::span<const Vector<Scalar>>(args));
}

/// Sum of Frobenius norms of the coefficient matrices: an upper bound on the
/// Lipschitz constant w.r.t. the maximum metric on X^m and the Euclidean
/// metric on X.
template <class Scalar>
Scalar lipschitz_bound(const AffineMap<Scalar>& f) {
    Scalar s = 0;
    for (const auto& a : f.coeffs) s += a.norm();
    return s;
}

/// Per-map contractivity report. Generic maps are unverifiable, not failed.
template <class Scalar>
struct ContractivityReport {
    struct Entry {
        int map_index = 0;                  // 0-based
        std::optional<Scalar> bound;        // empty for generic maps
    };
    std::vector<Entry> entries;
    Scalar max_bound = 0;                   // max over verifiable maps; 0 if none
    int unverifiable = 0;
    bool pass = false;                      // max_bound < 1
};

template <class Scalar>
ContractivityReport<Scalar> validate_contractive(const GifsSystem<Scalar>& G) {
    ContractivityReport<Scalar> r;
    for (int i = 0; i < G.map_count(); ++i) {
        typename ContractivityReport<Scalar>::Entry e;
        e.map_index = i;
        if (G.maps[i].is_affine()) {
            e.bound = lipschitz_bound(G.maps[i].affine_part());
            r.max_bound = std::max(r.max_bound, *e.bound);
        } else {
            ++r.unverifiable;
        }
        r.entries.push_back(std::move(e));
    }
    r.pass = r.max_bound < Scalar(1);
    return r;
}

/// The unique x with f_i(x,...,x) = x. Affine maps are solved exactly with a
/// partially pivoted LU; generic maps fall back to diagonal iteration.
template <class Scalar>
Vector<Scalar> fixed_point(const GifsSystem<Scalar>& G, int map_index) {
    if (map_index < 0 || map_index >= G.map_count())
        throw config_error("fixed_point: map index out of range");
    const GifsMap<Scalar>& f = G.maps[map_index];
    const int d = G.dim;
    if (f.is_affine()) {
        const AffineMap<Scalar>& a = f.affine_part();
        Matrix<Scalar> s = Matrix<Scalar>::Identity(d, d);
        for (const auto& A : a.coeffs) s -= A;
        Eigen::PartialPivLU<Matrix<Scalar>> lu(s);
        Vector<Scalar> x = lu.solve(a.offset);
        const Scalar scale = std::max<Scalar>(Scalar(1), a.offset.norm());
        if (!x.allFinite() || (s * x - a.offset).norm() > Scalar(1e-9) * scale)
            throw std::runtime_error("fixed_point: I - sum(A_j) is singular");
        return x;
    }
    // Diagonal Banach iteration for opaque maps.
    std::vector<Vector<Scalar>> args(static_cast<std::size_t>(G.order), Vector<Scalar>::Zero(d));
    Vector<Scalar> x = Vector<Scalar>::Zero(d);
    for (int it = 0; it < 100000; ++it) {
        for (auto& a : args) a = x;
        Vector<Scalar> y = f(std::span<const Vector<Scalar>>(args));
        const Scalar step = (y - x).norm();
        x = std::move(y);
        if (step < Scalar(1e-12)) return x;
    }
    throw std::runtime_error("fixed_point: iteration did not converge");
}

}  // namespace gifs
