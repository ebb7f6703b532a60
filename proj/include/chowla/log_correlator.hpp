// log_correlator.hpp
// Correlation sequences
//   f(a) = E^log_{x/omega <= n <= x} prod_j g_j(q_j n + a h_j)
// over one finite window, and the density, isotopy and periodicity
// diagnostics built from them.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "chowla/arith_sieve.hpp"
#include "chowla/common.hpp"
#include "chowla/log_window.hpp"
#include "chowla/mirsky.hpp"
#include "chowla/mult_func.hpp"

namespace chowla {

struct CorrelationFactor {
    MultFuncSpec g;
    std::int64_t h = 0;
    std::int64_t q = 1;
};

struct CorrelationSpec {
    std::vector<CorrelationFactor> factors;
};

// g(n + h_0) ... g(n + h_k), undilated
inline CorrelationSpec shifted_product(const MultFuncSpec& g, std::span<const std::int64_t> shifts)
{
    CorrelationSpec s;
    for (auto h : shifts) s.factors.push_back({g, h, 1});
    return s;
}

inline CorrelationSpec conjugate(const CorrelationSpec& spec)
{
    CorrelationSpec out;
    for (const auto& f : spec.factors) out.factors.push_back({conjugate(f.g), f.h, f.q});
    return out;
}

inline void validate(const CorrelationSpec& spec)
{
    if (spec.factors.empty()) throw DomainError("correlation spec needs at least one factor");
    for (const auto& f : spec.factors)
        if (f.q < 1) throw DomainError("correlation spec: every q must be >= 1");
}

inline std::vector<ArithKind> required_kinds(const CorrelationSpec& spec)
{
    std::set<ArithKind> s;
    for (const auto& f : spec.factors) collect_kinds(f.g, s);
    return {s.begin(), s.end()};
}

namespace detail {

inline std::int64_t affine_arg(std::int64_t q, std::int64_t n, std::int64_t a, std::int64_t h)
{
    const __int128 v = static_cast<__int128>(q) * n + static_cast<__int128>(a) * h;
    if (v > (static_cast<__int128>(1) << 62) || v < -(static_cast<__int128>(1) << 62))
        throw RangeError("correlation argument q*n + a*h out of range");
    return static_cast<std::int64_t>(v);
}

} // namespace detail

// Largest argument q_j n + a h_j met for n in [1, x].
inline std::int64_t max_argument(const CorrelationSpec& spec, std::int64_t a, std::int64_t x)
{
    std::int64_t m = 1;
    for (const auto& f : spec.factors) {
        m = std::max(m, detail::affine_arg(f.q, x, a, f.h));
        m = std::max(m, detail::affine_arg(f.q, 1, a, f.h));
    }
    return m;
}

struct CorrelationSample {
    std::int64_t a = 0;
    cplx value{};
    LogWindow window;
    std::int64_t count = 0;
};

inline CorrelationSample correlation(const CorrelationSpec& spec, std::int64_t a, const LogWindow& window,
                                     const TableSet& tables)
{
    validate(spec);
    window.validate();
    const std::int64_t lo = window.lo(), hi = window.hi();
    std::vector<CompiledMultFunc> fs;
    std::vector<std::int64_t> steps, offsets;
    bool real = true;
    for (const auto& f : spec.factors) {
        const std::int64_t alo = detail::affine_arg(f.q, lo, a, f.h);
        const std::int64_t ahi = detail::affine_arg(f.q, hi, a, f.h);
        fs.emplace_back(f.g, tables, std::max<std::int64_t>(alo, 1), std::max<std::int64_t>(ahi, 1));
        steps.push_back(f.q);
        offsets.push_back(detail::affine_arg(f.q, 0, a, f.h));
        real = real && fs.back().real();
    }
    auto run = [&]<typename T>(T*) {
        return weighted_average<T>(lo, hi, AverageMode::Logarithmic, [&](std::int64_t b_lo, std::size_t len, T* out) {
            thread_local std::vector<T> tmp;
            fs[0].fill(steps[0] * b_lo + offsets[0], steps[0], len, out);
            if (fs.size() > 1) {
                tmp.resize(len);
                for (std::size_t j = 1; j < fs.size(); ++j) {
                    fs[j].fill(steps[j] * b_lo + offsets[j], steps[j], len, tmp.data());
                    for (std::size_t i = 0; i < len; ++i) out[i] *= tmp[i];
                }
            }
        });
    };
    CorrelationSample s;
    s.a = a;
    s.window = window;
    s.count = window.count();
    s.value = real ? run(static_cast<double*>(nullptr)) : run(static_cast<cplx*>(nullptr));
    return s;
}

struct OddSuiteReport {
    std::vector<CorrelationSample> samples;
    double max_abs = 0.0;
};

// Liouville correlations lambda(n + h_0)...lambda(n + h_k) for even k; shifts may repeat.
inline OddSuiteReport odd_correlation_suite(int k, std::span<const std::vector<std::int64_t>> shift_sets,
                                            const LogWindow& window, const TableSet& tables)
{
    if (k < 0 || k % 2 != 0) throw DomainError("odd_correlation_suite: k must be even and >= 0");
    OddSuiteReport r;
    for (const auto& shifts : shift_sets) {
        if (shifts.size() != static_cast<std::size_t>(k) + 1)
            throw DomainError("odd_correlation_suite: each shift set needs k + 1 entries");
        r.samples.push_back(correlation(shifted_product(liouville(), shifts), 1, window, tables));
        r.max_abs = std::max(r.max_abs, std::abs(r.samples.back().value));
    }
    return r;
}

// -------------------------------------------------------
// Sign patterns
// -------------------------------------------------------
enum class Alphabet { Liouville, Mobius };

struct SignPattern {
    Alphabet alphabet = Alphabet::Liouville;
    std::vector<int> symbols;
    std::vector<std::int64_t> shifts;

    static SignPattern consecutive(Alphabet alphabet, std::vector<int> symbols)
    {
        SignPattern p{alphabet, std::move(symbols), {}};
        for (std::size_t j = 0; j < p.symbols.size(); ++j) p.shifts.push_back(static_cast<std::int64_t>(j));
        return p;
    }

    bool is_consecutive() const
    {
        for (std::size_t j = 0; j < shifts.size(); ++j)
            if (shifts[j] != static_cast<std::int64_t>(j)) return false;
        return true;
    }

    void validate() const
    {
        if (symbols.empty()) throw DomainError("sign pattern: empty pattern");
        if (symbols.size() != shifts.size()) throw DomainError("sign pattern: symbols and shifts differ in length");
        for (int s : symbols) {
            if (alphabet == Alphabet::Liouville && s != 1 && s != -1)
                throw DomainError("sign pattern: Liouville symbols must be +1 or -1");
            if (s < -1 || s > 1) throw DomainError("sign pattern: Mobius symbols must lie in {-1, 0, 1}");
        }
    }
};

inline ArithKind alphabet_kind(Alphabet a) { return a == Alphabet::Liouville ? ArithKind::Liouville : ArithKind::Mobius; }

inline std::size_t alphabet_radix(Alphabet a) { return a == Alphabet::Liouville ? 2 : 3; }

inline std::size_t pattern_bin_count(Alphabet a, std::size_t length)
{
    std::size_t n = 1;
    for (std::size_t j = 0; j < length; ++j) n *= alphabet_radix(a);
    return n;
}

// Bin of a symbol tuple: digit j (least significant first) is 1 for -1 under
// Liouville, and symbol + 1 under Mobius.
inline std::size_t pattern_bin(Alphabet a, std::span<const int> symbols)
{
    std::size_t idx = 0, mult = 1;
    for (int s : symbols) {
        idx += mult * static_cast<std::size_t>(a == Alphabet::Liouville ? (s < 0 ? 1 : 0) : s + 1);
        mult *= alphabet_radix(a);
    }
    return idx;
}

inline std::vector<int> pattern_symbols(Alphabet a, std::size_t length, std::size_t bin)
{
    std::vector<int> out(length);
    const std::size_t r = alphabet_radix(a);
    for (std::size_t j = 0; j < length; ++j, bin /= r) {
        const int d = static_cast<int>(bin % r);
        out[j] = a == Alphabet::Liouville ? (d ? -1 : 1) : d - 1;
    }
    return out;
}

namespace detail {

inline void check_positive_shifts(const LogWindow& w, std::span<const std::int64_t> shifts, const char* who)
{
    for (auto h : shifts)
        if (w.lo() + h < 1) throw DomainError(std::string(who) + ": window start plus shift must be >= 1");
}

// E^log over the window of bin indicators; bin_of(n) gives the cell of n.
template <typename BinOf>
std::vector<double> log_cell_masses(const LogWindow& window, std::size_t cells, BinOf&& bin_of)
{
    struct Partial {
        std::vector<NeumaierSum> cells;
        NeumaierSum den;
    };
    if (cells > (std::size_t{1} << 16)) throw CapacityError("too many cells for a density table");
    const BlockRange blocks{window.lo(), window.hi(), kReduceBlock};
    std::vector<NeumaierSum> total(cells);
    NeumaierSum den;
    // blocks are folded in fixed-size groups to bound memory
    constexpr std::size_t kGroup = 64;
    for (std::size_t g0 = 0; g0 < blocks.count(); g0 += kGroup) {
        const std::size_t g_len = std::min(kGroup, blocks.count() - g0);
        auto partials = map_blocks<Partial>(g_len, [&](std::size_t i) {
            const std::size_t b = g0 + i;
            Partial p;
            p.cells.resize(cells);
            for (std::int64_t n = blocks.begin(b); n <= blocks.end(b); ++n) {
                const double w = 1.0 / static_cast<double>(n);
                p.cells[bin_of(n)].add(w);
                p.den.add(w);
            }
            return p;
        });
        for (const auto& p : partials) {
            for (std::size_t c = 0; c < cells; ++c) total[c].add(p.cells[c]);
            den.add(p.den);
        }
    }
    std::vector<double> out(cells);
    for (std::size_t c = 0; c < cells; ++c) out[c] = total[c].value() / den.value();
    return out;
}

} // namespace detail

// Logarithmic densities of every pattern over the alphabet at the given shifts,
// indexed by pattern_bin.
inline std::vector<double> sign_pattern_densities(Alphabet alphabet, std::span<const std::int64_t> shifts,
                                                  const LogWindow& window, const TableSet& tables)
{
    window.validate();
    if (shifts.empty()) throw DomainError("sign_pattern_densities: no shifts");
    if (shifts.size() > (alphabet == Alphabet::Liouville ? 16u : 10u))
        throw CapacityError("sign_pattern_densities: too many bins for this pattern length");
    detail::check_positive_shifts(window, shifts, "sign_pattern_densities");
    const auto [hmin, hmax] = std::minmax_element(shifts.begin(), shifts.end());
    const ArithTable& t = tables.require(alphabet_kind(alphabet), window.lo() + *hmin, window.hi() + *hmax);
    const std::size_t r = alphabet_radix(alphabet);
    return detail::log_cell_masses(window, pattern_bin_count(alphabet, shifts.size()), [&](std::int64_t n) {
        std::size_t idx = 0, mult = 1;
        for (auto h : shifts) {
            const int v = t.at(static_cast<std::uint64_t>(n + h));
            idx += mult * static_cast<std::size_t>(alphabet == Alphabet::Liouville ? (v < 0) : v + 1);
            mult *= r;
        }
        return idx;
    });
}

// E^log of the indicator that the alphabet function equals symbol j at n + h_j for all j.
inline double sign_pattern_density(const SignPattern& pattern, const LogWindow& window, const TableSet& tables)
{
    pattern.validate();
    window.validate();
    detail::check_positive_shifts(window, pattern.shifts, "sign_pattern_density");
    const auto [hmin, hmax] = std::minmax_element(pattern.shifts.begin(), pattern.shifts.end());
    const ArithTable& t = tables.require(alphabet_kind(pattern.alphabet), window.lo() + *hmin, window.hi() + *hmax);
    const auto mass = detail::log_cell_masses(window, 2, [&](std::int64_t n) -> std::size_t {
        for (std::size_t j = 0; j < pattern.shifts.size(); ++j)
            if (t.at(static_cast<std::uint64_t>(n + pattern.shifts[j])) != pattern.symbols[j]) return 0;
        return 1;
    });
    return mass[1];
}

struct MirskyCheck {
    double empirical = 0.0;
    double predicted = 0.0;
    SquarefreePatternConstant constant;
};

inline MirskyCheck mirsky_pattern_check(const SignPattern& pattern, const LogWindow& window, const TableSet& tables,
                                        std::uint64_t truncation = 100000)
{
    if (pattern.alphabet != Alphabet::Mobius) throw DomainError("mirsky_pattern_check: needs a Mobius pattern");
    pattern.validate();
    if (!pattern.is_consecutive()) throw DomainError("mirsky_pattern_check: shifts must be 0, 1, ..., k");
    MirskyCheck c;
    c.constant = pattern_constant(pattern.symbols, truncation);
    c.predicted = c.constant.value;
    c.empirical = sign_pattern_density(pattern, window, tables);
    return c;
}

// -------------------------------------------------------
// Omega residues and additive equidistribution
// -------------------------------------------------------

// Cell masses of (Omega(n + h_j) mod q_j)_j; cell index sum_j r_j * prod_{i<j} q_i.
inline std::vector<double> omega_residue_cells(std::span<const std::int64_t> shifts, std::span<const std::int64_t> moduli,
                                               OmegaBase base, const LogWindow& window, const TableSet& tables)
{
    window.validate();
    if (shifts.empty() || shifts.size() != moduli.size())
        throw DomainError("omega_residue: shifts and moduli must be non-empty and of equal length");
    std::size_t cells = 1;
    for (std::size_t i = 0; i < moduli.size(); ++i) {
        if (moduli[i] < 1) throw DomainError("omega_residue: moduli must be >= 1");
        for (std::size_t j = 0; j < i; ++j)
            if (std::gcd(moduli[i], moduli[j]) != 1) throw DomainError("omega_residue: moduli must be pairwise coprime");
        cells *= static_cast<std::size_t>(moduli[i]);
        if (cells > 65536) throw CapacityError("omega_residue: product of moduli exceeds 65536");
    }
    detail::check_positive_shifts(window, shifts, "omega_residue");
    const auto [hmin, hmax] = std::minmax_element(shifts.begin(), shifts.end());
    const ArithTable& t = tables.require(omega_kind(base), window.lo() + *hmin, window.hi() + *hmax);
    return detail::log_cell_masses(window, cells, [&](std::int64_t n) {
        std::size_t idx = 0, mult = 1;
        for (std::size_t j = 0; j < shifts.size(); ++j) {
            idx += mult * static_cast<std::size_t>(t.at(static_cast<std::uint64_t>(n + shifts[j])) % moduli[j]);
            mult *= static_cast<std::size_t>(moduli[j]);
        }
        return idx;
    });
}

inline double omega_residue_density(std::span<const std::int64_t> shifts, std::span<const std::int64_t> moduli,
                                    std::span<const std::int64_t> residues, OmegaBase base, const LogWindow& window,
                                    const TableSet& tables)
{
    if (residues.size() != moduli.size()) throw DomainError("omega_residue: one residue per modulus");
    std::size_t idx = 0, mult = 1;
    for (std::size_t j = 0; j < moduli.size(); ++j) {
        if (residues[j] < 0 || residues[j] >= moduli[j]) throw DomainError("omega_residue: residue out of range");
        idx += mult * static_cast<std::size_t>(residues[j]);
        mult *= static_cast<std::size_t>(moduli[j]);
    }
    return omega_residue_cells(shifts, moduli, base, window, tables)[idx];
}

struct AdditiveEntry {
    double alpha = 0.0;
    std::int64_t shift = 0;
    OmegaBase base = OmegaBase::BigOmega;
};

struct Histogram {
    int bins = 0;
    int dims = 0;
    std::vector<double> mass; // index sum_j b_j * bins^j

    double at(std::span<const int> b) const
    {
        std::size_t idx = 0, mult = 1;
        for (int v : b) {
            idx += mult * static_cast<std::size_t>(v);
            mult *= static_cast<std::size_t>(bins);
        }
        return mass.at(idx);
    }
};

// Bin of the fractional part of alpha * k, for k = Omega values 0..64.
inline int fractional_bin(double alpha, int k, int bins)
{
    const double v = alpha * k;
    const double frac = v - std::floor(v);
    return std::min(bins - 1, static_cast<int>(frac * bins));
}

inline Histogram additive_equidist_histogram(std::span<const AdditiveEntry> entries, int bins, const LogWindow& window,
                                             const TableSet& tables)
{
    window.validate();
    if (bins < 2) throw DomainError("additive_equidist_histogram: bins must be >= 2");
    if (entries.empty()) throw DomainError("additive_equidist_histogram: no entries");
    std::size_t cells = 1;
    for (std::size_t j = 0; j < entries.size(); ++j) {
        cells *= static_cast<std::size_t>(bins);
        if (cells > 65536) throw CapacityError("additive_equidist_histogram: too many joint bins");
    }
    std::vector<std::int64_t> shifts;
    for (const auto& e : entries) shifts.push_back(e.shift);
    detail::check_positive_shifts(window, shifts, "additive_equidist_histogram");
    struct Prepared {
        const ArithTable* table;
        std::int64_t shift;
        std::array<int, 65> bin;
    };
    std::vector<Prepared> prep;
    for (const auto& e : entries) {
        Prepared p{&tables.require(omega_kind(e.base), window.lo() + e.shift, window.hi() + e.shift), e.shift, {}};
        for (int k = 0; k <= 64; ++k) p.bin[static_cast<std::size_t>(k)] = fractional_bin(e.alpha, k, bins);
        prep.push_back(p);
    }
    Histogram h;
    h.bins = bins;
    h.dims = static_cast<int>(entries.size());
    h.mass = detail::log_cell_masses(window, cells, [&](std::int64_t n) {
        std::size_t idx = 0, mult = 1;
        for (const auto& p : prep) {
            const int k = p.table->at(static_cast<std::uint64_t>(n + p.shift));
            idx += mult * static_cast<std::size_t>(p.bin[static_cast<std::size_t>(k)]);
            mult *= static_cast<std::size_t>(bins);
        }
        return idx;
    });
    return h;
}

// -------------------------------------------------------
// Isotopy
// -------------------------------------------------------
inline cplx spec_prime_value(const CorrelationSpec& spec, std::uint64_t p)
{
    cplx v{1.0, 0.0};
    for (const auto& f : spec.factors) v *= prime_value(f.g, p);
    return v;
}

struct IsotopyReport {
    double residual = 0.0;
    cplx f_a{};
    std::int64_t primes = 0;
};

// E_{2^m <= p < 2^{m+1}} |f(a) G(p) - f(ap)| with G = prod_j g_j.
inline IsotopyReport isotopy_residual(const CorrelationSpec& spec, std::int64_t a, int m, const LogWindow& window,
                                      const TableSet& tables)
{
    if (m < 1 || m > 30) throw DomainError("isotopy_residual: m must be in [1, 30]");
    const auto primes = primes_in_dyadic(m).primes;
    IsotopyReport r;
    r.f_a = correlation(spec, a, window, tables).value;
    NeumaierSum s;
    for (auto p : primes) {
        const std::int64_t ap = detail::affine_arg(a, static_cast<std::int64_t>(p), 0, 0);
        const cplx fap = correlation(spec, ap, window, tables).value;
        s.add(std::abs(r.f_a * spec_prime_value(spec, p) - fap));
    }
    r.primes = static_cast<std::int64_t>(primes.size());
    r.residual = s.value() / static_cast<double>(primes.size());
    return r;
}

// -------------------------------------------------------
// Exact period averages for specs built only from characters
// -------------------------------------------------------

// Integer polynomials in a root of unity of order L, modulo the cyclotomic polynomial.
namespace detail {

inline std::vector<std::int64_t> cyclotomic_poly(std::int64_t L)
{
    // Phi_L = prod_{d | L} (x^d - 1)^{mu(L / d)}
    std::vector<std::int64_t> p{1};
    std::vector<std::int64_t> divide_by;
    for (std::int64_t d = 1; d <= L; ++d) {
        if (L % d) continue;
        const auto fs = factorize(static_cast<std::uint64_t>(L / d));
        bool sqfree = true;
        for (const auto& f : fs) sqfree = sqfree && f.e == 1;
        if (!sqfree) continue;
        if (fs.size() % 2 == 0) {
            std::vector<std::int64_t> q(p.size() + static_cast<std::size_t>(d), 0);
            for (std::size_t i = 0; i < p.size(); ++i) {
                q[i + static_cast<std::size_t>(d)] += p[i];
                q[i] -= p[i];
            }
            p = std::move(q);
        } else {
            divide_by.push_back(d);
        }
    }
    for (auto d : divide_by) {
        const auto ud = static_cast<std::size_t>(d);
        std::vector<std::int64_t> q(p.size() - ud, 0);
        for (std::size_t i = q.size(); i-- > 0;) q[i] = p[i + ud] + (i + ud < q.size() ? q[i + ud] : 0);
        p = std::move(q);
    }
    return p;
}

} // namespace detail

// (1 / denom) * sum_k counts[k] * e(k / order)
struct CyclotomicValue {
    std::int64_t order = 1;
    std::int64_t denom = 1;
    std::vector<std::int64_t> counts{0};

    cplx value() const
    {
        ComplexSum s;
        for (std::size_t k = 0; k < counts.size(); ++k)
            if (counts[k])
                s.add(static_cast<double>(counts[k]) *
                      unit_phase(static_cast<double>(k) / static_cast<double>(order)));
        return s.value() / static_cast<double>(denom);
    }

    // multiply by e(k / order)
    CyclotomicValue rotated(std::int64_t k) const
    {
        CyclotomicValue r{order, denom, std::vector<std::int64_t>(counts.size(), 0)};
        const std::int64_t s = mod_floor(k, order);
        for (std::size_t i = 0; i < counts.size(); ++i)
            r.counts[static_cast<std::size_t>((static_cast<std::int64_t>(i) + s) % order)] = counts[i];
        return r;
    }

    CyclotomicValue zero() const { return {order, denom, std::vector<std::int64_t>(counts.size(), 0)}; }

    // coefficients reduced modulo the cyclotomic polynomial of the order
    std::vector<std::int64_t> canonical() const
    {
        const auto phi = detail::cyclotomic_poly(order);
        std::vector<std::int64_t> r = counts;
        const std::size_t deg = phi.size() - 1;
        for (std::size_t i = r.size(); i-- > deg;) {
            const std::int64_t c = r[i];
            if (!c) continue;
            for (std::size_t j = 0; j <= deg; ++j) r[i - deg + j] -= c * phi[j];
        }
        r.resize(deg);
        return r;
    }

    friend bool operator==(const CyclotomicValue& x, const CyclotomicValue& y)
    {
        if (x.order != y.order) return false;
        auto a = x.canonical(), b = y.canonical();
        for (auto& v : a) v *= y.denom;
        for (auto& v : b) v *= x.denom;
        return a == b;
    }
};

// True when g is built from One, DirichletChar, Product and ConjugatePower only.
inline bool is_character_spec(const MultFuncSpec& g)
{
    return std::visit(overloaded{
                          [](const node::One&) { return true; },
                          [](const node::DirichletChar&) { return true; },
                          [](const node::Product& p) {
                              for (const auto& f : p.factors)
                                  if (!is_character_spec(f)) return false;
                              return true;
                          },
                          [](const node::ConjugatePower& c) { return is_character_spec(*c.inner); },
                          [](const auto&) { return false; },
                      },
                      g.node);
}

inline bool is_character_spec(const CorrelationSpec& spec)
{
    for (const auto& f : spec.factors)
        if (!is_character_spec(f.g)) return false;
    return true;
}

// f(a) = E_{n mod Q} prod_j g_j(q_j n + a h_j) for character-built g_j, in exact form.
class CharacterPeriodCorrelation {
public:
    explicit CharacterPeriodCorrelation(const CorrelationSpec& spec)
    {
        validate(spec);
        if (!is_character_spec(spec))
            throw DomainError("exact period correlation needs factors built from characters only");
        std::int64_t L = 1, Q = 1;
        std::vector<std::vector<std::pair<DirichletCharacter, int>>> per_factor;
        for (const auto& f : spec.factors) {
            std::vector<std::pair<DirichletCharacter, int>> terms;
            collect(f.g, 1, terms);
            for (const auto& [chi, c] : terms) {
                L = std::lcm(L, chi.order_bound());
                Q = std::lcm(Q, static_cast<std::int64_t>(chi.modulus()));
                if (Q > 10000000) throw CapacityError("exact period correlation: period exceeds 10^7");
            }
            per_factor.push_back(std::move(terms));
        }
        L_ = L;
        Q_ = Q;
        for (std::size_t j = 0; j < spec.factors.size(); ++j) {
            Factor fac{spec.factors[j].h, spec.factors[j].q, {}};
            for (const auto& [chi, c] : per_factor[j]) {
                Term t{static_cast<std::int64_t>(chi.modulus()), {}};
                const std::int64_t scale = (L / chi.order_bound()) * c;
                t.exp.resize(chi.modulus());
                for (std::uint64_t r = 0; r < chi.modulus(); ++r) {
                    const auto e = chi.exponent(static_cast<std::int64_t>(r));
                    t.exp[r] = e ? mod_floor(*e * scale, L) : -1;
                }
                fac.terms.push_back(std::move(t));
            }
            factors_.push_back(std::move(fac));
        }
    }

    std::int64_t period() const { return Q_; }
    std::int64_t order() const { return L_; }

    CyclotomicValue f(std::int64_t a) const
    {
        CyclotomicValue v{L_, Q_, std::vector<std::int64_t>(static_cast<std::size_t>(L_), 0)};
        for (std::int64_t n = 0; n < Q_; ++n) {
            std::int64_t e = 0;
            bool zero = false;
            for (const auto& fac : factors_) {
                for (const auto& t : fac.terms) {
                    const std::int64_t arg = mod_floor(mod_floor(fac.q, t.q) * n + mod_floor(a, t.q) * mod_floor(fac.h, t.q), t.q);
                    const std::int64_t te = t.exp[static_cast<std::size_t>(arg)];
                    if (te < 0) {
                        zero = true;
                        break;
                    }
                    e = (e + te) % L_;
                }
                if (zero) break;
            }
            if (!zero) ++v.counts[static_cast<std::size_t>(e)];
        }
        return v;
    }

    // exponent of G(b) = prod_j g_j(b) over order(), or nullopt when G(b) = 0
    std::optional<std::int64_t> product_exponent(std::int64_t b) const
    {
        std::int64_t e = 0;
        for (const auto& fac : factors_)
            for (const auto& t : fac.terms) {
                const std::int64_t te = t.exp[static_cast<std::size_t>(mod_floor(b, t.q))];
                if (te < 0) return std::nullopt;
                e = (e + te) % L_;
            }
        return e;
    }

    // f(a) * G(b) in exact form
    CyclotomicValue twisted(std::int64_t a, std::int64_t b) const
    {
        const auto fa = f(a);
        const auto e = product_exponent(b);
        return e ? fa.rotated(*e) : fa.zero();
    }

private:
    struct Term {
        std::int64_t q;
        std::vector<std::int64_t> exp; // -1 where the character vanishes
    };
    struct Factor {
        std::int64_t h;
        std::int64_t q;
        std::vector<Term> terms;
    };

    static void collect(const MultFuncSpec& g, int power, std::vector<std::pair<DirichletCharacter, int>>& out)
    {
        std::visit(overloaded{
                       [&](const node::DirichletChar& c) {
                           if (power != 0) out.emplace_back(c.chi, power);
                       },
                       [&](const node::Product& p) {
                           for (const auto& f : p.factors) collect(f, power, out);
                       },
                       [&](const node::ConjugatePower& c) { collect(*c.inner, power * c.c, out); },
                       [](const auto&) {},
                   },
                   g.node);
    }

    std::int64_t L_ = 1;
    std::int64_t Q_ = 1;
    std::vector<Factor> factors_;
};

// -------------------------------------------------------
// Character twists and periodic fits
// -------------------------------------------------------

// E_{n <= x} f(a n) conj(chi(n)) for any sequence f.
inline cplx character_twist_mean(const std::function<cplx(std::int64_t)>& f, std::int64_t a,
                                 const DirichletCharacter& chi, std::int64_t x)
{
    if (x < 1) throw DomainError("character_twist_mean: x must be >= 1");
    ComplexSum s;
    for (std::int64_t n = 1; n <= x; ++n) {
        const cplx c = chi(n);
        if (c == cplx{}) continue;
        s.add(f(detail::affine_arg(a, n, 0, 0)) * std::conj(c));
    }
    return s.value() / static_cast<double>(x);
}

// f for a correlation: exact period averages when every factor is character-built,
// windowed correlations otherwise.
inline cplx character_twist_mean(const CorrelationSpec& spec, std::int64_t a, const DirichletCharacter& chi,
                                 std::int64_t x, const LogWindow& window, const TableSet& tables)
{
    if (is_character_spec(spec)) {
        const CharacterPeriodCorrelation exact(spec);
        std::vector<cplx> period(static_cast<std::size_t>(exact.period()));
        for (std::int64_t r = 0; r < exact.period(); ++r) period[static_cast<std::size_t>(r)] = exact.f(r).value();
        return character_twist_mean(
            [&](std::int64_t b) { return period[static_cast<std::size_t>(mod_floor(b, exact.period()))]; }, a, chi, x);
    }
    return character_twist_mean([&](std::int64_t b) { return correlation(spec, b, window, tables).value; }, a, chi,
                                x);
}

struct PeriodicFit {
    std::int64_t q = 1;
    std::vector<cplx> values; // fit at residues 0..q-1
    double sup_residual = 0.0;
};

inline PeriodicFit periodic_fit(std::span<const CorrelationSample> samples, std::int64_t q)
{
    if (q < 1) throw DomainError("periodic_fit: q must be >= 1");
    if (static_cast<std::int64_t>(samples.size()) < 2 * q)
        throw DomainError("periodic_fit: insufficient samples, need at least 2q");
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t m = v.size() / 2;
        return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
    };
    PeriodicFit fit;
    fit.q = q;
    fit.values.resize(static_cast<std::size_t>(q));
    for (std::int64_t r = 0; r < q; ++r) {
        std::vector<double> re, im;
        for (const auto& s : samples)
            if (mod_floor(s.a, q) == r) {
                re.push_back(s.value.real());
                im.push_back(s.value.imag());
            }
        if (!re.empty()) fit.values[static_cast<std::size_t>(r)] = {median(re), median(im)};
    }
    for (const auto& s : samples)
        fit.sup_residual =
            std::max(fit.sup_residual, std::abs(s.value - fit.values[static_cast<std::size_t>(mod_floor(s.a, q))]));
    return fit;
}

// -------------------------------------------------------
// CSV
// -------------------------------------------------------
inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_samples_csv(std::ostream& os, std::span<const CorrelationSample> samples)
{
    os << "a,x,omega,re,im,count\n";
    for (const auto& s : samples)
        os << s.a << ',' << s.window.x << ',' << s.window.omega << ',' << format_double(s.value.real()) << ','
           << format_double(s.value.imag()) << ',' << s.count << '\n';
}

} // namespace chowla
