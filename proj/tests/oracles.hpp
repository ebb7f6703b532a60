// oracles.hpp
// Test-only reference computations. Nothing here shares code with the
// library paths it checks: factorisation is by trial division, densities
// are direct counts, character values come from brute-force power tables.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <vector>

namespace oracle {

struct Factorization {
    int big = 0;   // Omega
    int small = 0; // omega
};

inline Factorization trial_division(std::uint64_t n)
{
    Factorization f;
    for (std::uint64_t p = 2; p * p <= n; ++p) {
        if (n % p) continue;
        ++f.small;
        while (n % p == 0) {
            n /= p;
            ++f.big;
        }
    }
    if (n > 1) {
        ++f.small;
        ++f.big;
    }
    return f;
}

inline int liouville(std::uint64_t n) { return trial_division(n).big % 2 ? -1 : 1; }

inline int mobius(std::uint64_t n)
{
    const auto f = trial_division(n);
    if (f.big != f.small) return 0;
    return f.small % 2 ? -1 : 1;
}

inline bool is_prime(std::uint64_t n)
{
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

inline std::uint64_t gcd(std::uint64_t a, std::uint64_t b)
{
    while (b) {
        const auto t = a % b;
        a = b;
        b = t;
    }
    return a;
}

// Sieve of squarefree flags on [0, limit] by crossing out multiples of d^2.
inline std::vector<char> squarefree_flags(std::uint64_t limit)
{
    std::vector<char> sf(limit + 1, 1);
    sf[0] = 0;
    for (std::uint64_t d = 2; d * d <= limit; ++d)
        for (std::uint64_t m = d * d; m <= limit; m += d * d) sf[m] = 0;
    return sf;
}

// Natural density over n <= x of: n + j squarefree iff mask bit j is set.
inline double squarefree_pattern_density(unsigned mask, int length, std::uint64_t x)
{
    const auto sf = squarefree_flags(x + static_cast<std::uint64_t>(length));
    std::uint64_t hits = 0;
    for (std::uint64_t n = 1; n <= x; ++n) {
        bool ok = true;
        for (int j = 0; j < length && ok; ++j) ok = (sf[n + j] != 0) == (((mask >> j) & 1u) != 0);
        hits += ok;
    }
    return static_cast<double>(hits) / static_cast<double>(x);
}

} // namespace oracle
