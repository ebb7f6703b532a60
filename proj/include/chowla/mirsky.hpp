// mirsky.hpp
// Densities of squarefree / non-squarefree patterns at consecutive integers
// n, n+1, ..., n+k (k <= 3) from truncated Euler products, and a direct
// counting oracle over a sieved Moebius table.
//
// For a shift set S the density of {n : n + j squarefree for all j in S} is
//   prod_p (1 - rho_S(p) / p^2),   rho_S(p) = #{a mod p^2 : p^2 | a + j, some j in S}.
// The "iff" pattern (squarefree exactly on S0) follows by inclusion-exclusion
// over supersets T of S0 inside {0..k}.

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "chowla/arith_sieve.hpp"
#include "chowla/common.hpp"

namespace chowla {

using ShiftSet = std::vector<int>;

struct SquarefreePatternConstant {
    std::vector<int> epsilon;
    double density = 0.0;    // iff-pattern squarefree density
    double value = 0.0;      // density / 2^r
    std::uint64_t truncation = 0;
    double tail_bound = 0.0; // bound on |value - limit|
    int r = 0;               // number of nonzero entries
};

inline std::int64_t local_count(std::span<const int> S, std::uint64_t p)
{
    if (S.empty()) throw DomainError("local_count: shift set must be nonempty");
    const auto p2 = static_cast<std::int64_t>(p * p);
    std::set<std::int64_t> residues;
    for (int j : S) residues.insert(((-j) % p2 + p2) % p2);
    return static_cast<std::int64_t>(residues.size());
}

struct DensityWithTail {
    double value;
    double tail_bound;
};

inline DensityWithTail all_squarefree_density(std::span<const int> S, std::uint64_t P)
{
    if (P < 1000) throw DomainError("all_squarefree_density: truncation P must be >= 1000");
    if (S.empty()) return {1.0, 0.0};
    double prod = 1.0;
    for (std::uint64_t p : primes_up_to(P)) {
        const double rho = static_cast<double>(local_count(S, p));
        prod *= 1.0 - rho / (static_cast<double>(p) * static_cast<double>(p));
    }
    // sum_{p > P} |S| / p^2 <= |S| / (P - 1)
    return {prod, static_cast<double>(S.size()) / static_cast<double>(P - 1)};
}

inline SquarefreePatternConstant pattern_constant(std::span<const int> epsilon, std::uint64_t P = 100000)
{
    if (epsilon.empty()) throw DomainError("pattern_constant: empty pattern");
    if (epsilon.size() > 4) throw DomainError("pattern_constant: pattern length must be <= 4");
    for (int e : epsilon)
        if (e < -1 || e > 1) throw DomainError("pattern_constant: entries must lie in {-1, 0, 1}");
    const int len = static_cast<int>(epsilon.size());
    unsigned s0 = 0;
    int r = 0;
    for (int j = 0; j < len; ++j)
        if (epsilon[static_cast<std::size_t>(j)] != 0) {
            s0 |= 1u << j;
            ++r;
        }
    SquarefreePatternConstant out;
    out.epsilon.assign(epsilon.begin(), epsilon.end());
    out.truncation = P;
    out.r = r;
    const unsigned full = (1u << len) - 1;
    double density = 0.0;
    double tail = 0.0;
    for (unsigned t = 0; t <= full; ++t) {
        if ((t & s0) != s0) continue;
        ShiftSet T;
        for (int j = 0; j < len; ++j)
            if (t >> j & 1u) T.push_back(j);
        const auto d = all_squarefree_density(T, P);
        const int sign = (std::popcount(t) - r) % 2 ? -1 : 1;
        density += sign * d.value;
        tail += d.tail_bound;
    }
    out.density = density;
    out.value = std::ldexp(density, -r);
    out.tail_bound = std::ldexp(tail, -r);
    return out;
}

// Share of n <= x with: mu(n + j) != 0 exactly when epsilon_j != 0.
inline double brute_force_density(std::span<const int> epsilon, std::uint64_t x, const TableSet& tables)
{
    if (x < 1) throw DomainError("brute_force_density: x must be >= 1");
    if (x > 100000000) throw DomainError("brute_force_density: x must be <= 10^8");
    const auto k = static_cast<std::int64_t>(epsilon.size());
    const ArithTable& mu = tables.require(ArithKind::Mobius, 1, static_cast<std::int64_t>(x) + k - 1);
    std::uint64_t hits = 0;
    for (std::uint64_t n = 1; n <= x; ++n) {
        bool ok = true;
        for (std::int64_t j = 0; j < k && ok; ++j)
            ok = (mu.at(n + static_cast<std::uint64_t>(j)) != 0) == (epsilon[static_cast<std::size_t>(j)] != 0);
        hits += ok;
    }
    return static_cast<double>(hits) / static_cast<double>(x);
}

} // namespace chowla
