#pragma once

#include "gifs/system.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace gifs {

/// Index values N, M, P reach n^((m^k-1)/(m-1)) and overflow machine words at
/// modest depth, so all encodings are arbitrary precision.
using BigIndex = boost::multiprecision::cpp_int;

inline BigIndex big_pow(std::uint64_t base, std::uint64_t exp) {
    BigIndex r = 1, b = base;
    while (exp) {
        if (exp & 1) r *= b;
        b *= b;
        exp >>= 1;
    }
    return r;
}

inline std::uint64_t to_u64(const BigIndex& v, const char* what) {
    if (v < 0 || v > BigIndex(UINT64_MAX)) throw std::overflow_error(std::string(what) + ": value exceeds 64 bits");
    return v.template convert_to<std::uint64_t>();
}

/// Digit count of a depth-k address: 1 + m + ... + m^(k-1).
inline BigIndex address_length_big(int m, int k) {
    BigIndex len = 0, p = 1;
    for (int t = 0; t < k; ++t) {
        len += p;
        p *= m;
    }
    return len;
}

inline std::uint64_t address_length(int m, int k) {
    return to_u64(address_length_big(m, k), "address_length");
}

/// Number of depth-k addresses: n^(1 + m + ... + m^(k-1)).
inline BigIndex address_count(int n, int m, int k) {
    return boost::multiprecision::pow(BigIndex(n),
                                      to_u64(address_length_big(m, k), "address_count exponent"));
}

/// Number of level-k blocks: n^(m^(k-1)).
inline BigIndex block_count(int n, int m, int k) {
    return boost::multiprecision::pow(BigIndex(n), to_u64(big_pow(m, k - 1), "block_count exponent"));
}

// ---------------------------------------------------------------------------
// Index types
// ---------------------------------------------------------------------------

/// A path (e_1,...,e_k) with entries in {1..m}, selecting one slot of the
/// m^k-fold argument tuple.
struct EpsilonPath {
    int m = 0;
    std::vector<int> digits;

    int length() const { return static_cast<int>(digits.size()); }
    void validate() const {
        if (m < 1) throw config_error("epsilon path: m must be >= 1");
        for (int d : digits)
            if (d < 1 || d > m) throw config_error("epsilon path: digit out of range");
    }
};

struct IndexPair {
    std::uint64_t j = 1, k = 1;
    bool operator==(const IndexPair&) const = default;
};

/// One level-k block: m^(k-1) symbols in {1..n}, stored flat.
struct LevelBlock {
    int n = 0, m = 0, k = 0;
    std::vector<int> digits;

    void validate() const {
        if (n < 1 || m < 1 || k < 1) throw config_error("level block: bad shape");
        if (BigIndex(digits.size()) != big_pow(m, k - 1))
            throw config_error("level block: wrong digit count");
        for (int d : digits)
            if (d < 1 || d > n) throw config_error("level block: digit out of range");
    }
};

/// A depth-k address, stored as the flat digit sequence obtained by erasing
/// all brackets but the outermost: the level-1 symbol, then the level-2
/// block, and so on.
struct Address {
    int n = 0, m = 0, k = 0;
    std::vector<int> digits;

    void validate() const {
        if (n < 1 || m < 1 || k < 1) throw config_error("address: bad shape");
        if (BigIndex(digits.size()) != address_length_big(m, k))
            throw config_error("address: wrong digit count");
        for (int d : digits)
            if (d < 1 || d > n) throw config_error("address: digit out of range");
    }

    int root() const { return digits[0]; }  // the level-1 symbol

    /// Flat view of the level-i block, i in 1..k.
    std::span<const int> level_block(int i) const {
        const std::uint64_t start = address_length(m, i - 1);
        const std::uint64_t len = to_u64(big_pow(m, i - 1), "level block length");
        return std::span<const int>(digits).subspan(start, len);
    }
};

// ---------------------------------------------------------------------------
// The pairing bijection H
// ---------------------------------------------------------------------------

/// Successor rule: (j,k) -> (m^(k-1) j + 1, 1) when j is not divisible by m,
/// else (j/m, k+1). Iterating from (1,1) visits every pair exactly once.
inline IndexPair h_successor(IndexPair p, int m) {
    if (m < 1) throw config_error("h_successor: m must be >= 1");
    const std::uint64_t mu = static_cast<std::uint64_t>(m);
    if (p.j % mu != 0) {
        BigIndex next = big_pow(mu, p.k - 1) * p.j + 1;
        return IndexPair{to_u64(next, "h_successor"), 1};
    }
    return IndexPair{p.j / mu, p.k + 1};
}

/// Position of (j,k) in the successor order, one-based. Evaluated in closed
/// form: with L = j * m^(k-1), H(j,k) = k + sum_{t>=0} floor((L-1)/m^t),
/// which counts the pairs emitted no later than (j,k). Verified against
/// successor iteration in the tests.
inline std::uint64_t h_index(IndexPair p, int m) {
    if (m < 1 || p.j < 1 || p.k < 1) throw config_error("h_index: bad arguments");
    if (m == 1) {
        if (p.j != 1) throw config_error("h_index: for m = 1 only pairs (1,k) occur");
        return p.k;
    }
    BigIndex rest = BigIndex(p.j) * big_pow(m, p.k - 1) - 1;
    BigIndex sum = p.k;
    while (rest != 0) {
        sum += rest;
        rest /= m;
    }
    return to_u64(sum, "h_index");
}

/// Inverse of h_index, by replaying the successor rule. Streaming callers
/// keep their current pair instead.
inline IndexPair h_inverse(std::uint64_t i, int m) {
    if (i < 1) throw config_error("h_inverse: index must be >= 1");
    IndexPair p;
    for (std::uint64_t t = 1; t < i; ++t) p = h_successor(p, m);
    return p;
}

// ---------------------------------------------------------------------------
// Flat encodings N, M, P
// ---------------------------------------------------------------------------

/// P(e,k) = (e_1 - 1) m^(k-1) + ... + (e_k - 1) m^0.
inline BigIndex encode_P(const EpsilonPath& eps) {
    eps.validate();
    BigIndex v = 0;
    for (int d : eps.digits) v = v * eps.m + (d - 1);
    return v;
}

/// Base-n value of a block's digits shifted down by one.
inline BigIndex encode_M(const LevelBlock& block) {
    block.validate();
    BigIndex v = 0;
    for (int d : block.digits) v = v * block.n + (d - 1);
    return v;
}

/// Base-n value of the full flattened address, digits shifted down by one.
inline BigIndex encode_N(const Address& addr) {
    addr.validate();
    BigIndex v = 0;
    for (int d : addr.digits) v = v * addr.n + (d - 1);
    return v;
}

/// Symbol of a level-k block addressed by a path of length k-1, extracted
/// from the numeric encoding: floor(M / n^(m^(k-1) - 1 - P)) mod n, plus one.
inline int digit_at(const LevelBlock& block, const EpsilonPath& eps) {
    block.validate();
    eps.validate();
    if (eps.m != block.m || eps.length() != block.k - 1)
        throw config_error("digit_at: path length must be block level minus one");
    const BigIndex M = encode_M(block);
    const BigIndex P = encode_P(eps);
    const BigIndex e = big_pow(block.m, block.k - 1) - 1 - P;
    BigIndex q = M / boost::multiprecision::pow(BigIndex(block.n), to_u64(e, "digit_at exponent"));
    return static_cast<int>(q % block.n) + 1;
}

// ---------------------------------------------------------------------------
// Sub-addresses
// ---------------------------------------------------------------------------

/// alpha(i): drop the level-1 symbol and keep the i-th component of every
/// remaining block. Digit slicing on the flat form.
inline Address subaddress(const Address& addr, int branch) {
    addr.validate();
    if (addr.k < 2) throw config_error("subaddress: requires level >= 2");
    if (branch < 1 || branch > addr.m) throw config_error("subaddress: branch out of range");
    Address out;
    out.n = addr.n;
    out.m = addr.m;
    out.k = addr.k - 1;
    for (int i = 2; i <= addr.k; ++i) {
        const auto block = addr.level_block(i);
        const std::size_t piece = block.size() / addr.m;
        const auto part = block.subspan(static_cast<std::size_t>(branch - 1) * piece, piece);
        out.digits.insert(out.digits.end(), part.begin(), part.end());
    }
    return out;
}

/// N(alpha(j), k-1) computed from N(alpha, k) alone. Each block component is
/// carved out with one floor/mod pair and reassembled at its shifted weight.
inline BigIndex child_N(const BigIndex& N, int n, int m, int k, int branch) {
    if (k < 2) throw config_error("child_N: requires level >= 2");
    if (branch < 1 || branch > m) throw config_error("child_N: branch out of range");
    const BigIndex total_len = address_length_big(m, k);
    BigIndex result = 0;
    for (int i = 2; i <= k; ++i) {
        const BigIndex width = big_pow(m, i - 2);                        // digits in one component
        const BigIndex shift = total_len - address_length_big(m, i - 1)  // digits right of the component
                               - BigIndex(branch) * width;
        const BigIndex piece = (N / boost::multiprecision::pow(BigIndex(n), to_u64(shift, "child_N shift"))) %
                               boost::multiprecision::pow(BigIndex(n), to_u64(width, "child_N width"));
        BigIndex tail = 0;  // digits of the child address after this component
        for (int t = i - 1; t <= k - 2; ++t) tail += big_pow(m, t);
        result += piece * boost::multiprecision::pow(BigIndex(n), to_u64(tail, "child_N weight"));
    }
    return result;
}

inline BigIndex child_N(const Address& addr, int branch) {
    addr.validate();
    return child_N(encode_N(addr), addr.n, addr.m, addr.k, branch);
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kDefaultAddressBudget = 10'000'000;

/// Streams every depth-k address exactly once, in increasing N order.
/// Refuses counts beyond the budget up front.
class AddressEnumerator {
public:
    AddressEnumerator(int n, int m, int k, std::uint64_t budget = kDefaultAddressBudget)
        : n_(n), m_(m), k_(k), count_(address_count(n, m, k)) {
        if (n < 1 || m < 1 || k < 1) throw config_error("address enumeration: bad shape");
        if (count_ > BigIndex(budget))
            throw budget_error("address enumeration: " + count_.str() + " addresses exceed budget " +
                               std::to_string(budget));
        current_.assign(address_length(m, k), 1);
    }

    const BigIndex& count() const { return count_; }

    /// Fills `out` with the next address; false when exhausted.
    bool next(Address& out) {
        if (done_) return false;
        out.n = n_;
        out.m = m_;
        out.k = k_;
        out.digits = current_;
        // odometer increment, least significant digit last
        int i = static_cast<int>(current_.size()) - 1;
        while (i >= 0 && current_[i] == n_) current_[i--] = 1;
        if (i < 0)
            done_ = true;
        else
            ++current_[i];
        return true;
    }

private:
    int n_, m_, k_;
    BigIndex count_;
    std::vector<int> current_;
    bool done_ = false;
};

// ---------------------------------------------------------------------------
// Recursive evaluation of composed maps
// ---------------------------------------------------------------------------

/// f_alpha evaluated by structural recursion: the brute-force oracle the
/// closed-form coefficient machinery is checked against. The flat argument
/// tuple has m^k points, ordered so chunk i feeds subtree i.
template <class Scalar>
Vector<Scalar> eval_f_alpha_recursive(const GifsSystem<Scalar>& G, const Address& addr,
                                      std::span<const Vector<Scalar>> x) {
    addr.validate();
    if (addr.n != G.map_count() || addr.m != G.order)
        throw config_error("eval_f_alpha_recursive: address shape does not match system");
    const std::uint64_t want = to_u64(big_pow(G.order, addr.k), "argument tuple size");
    if (x.size() != want)
        throw config_error("eval_f_alpha_recursive: expected " + std::to_string(want) + " points");

    if (addr.k == 1) return eval_map(G.maps[addr.root() - 1], x);

    const std::size_t chunk = x.size() / G.order;
    std::vector<Vector<Scalar>> inner(G.order);
    for (int i = 1; i <= G.order; ++i)
        inner[i - 1] = eval_f_alpha_recursive(G, subaddress(addr, i),
                                              x.subspan((i - 1) * chunk, chunk));
    return eval_map(G.maps[addr.root() - 1], std::span<const Vector<Scalar>>(inner));
}

}  // namespace gifs
