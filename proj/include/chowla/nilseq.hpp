#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "chowla/arith_sieve.hpp"
#include "chowla/common.hpp"
#include "chowla/mult_func.hpp"

namespace chowla {

// -------------------------------------------------------
// Polynomial phases n -> e(a_d n^d + ... + a_0)
// -------------------------------------------------------
struct PolyPhase {
    std::vector<double> coeffs; // coeffs[k] multiplies n^k

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }

    void validate() const
    {
        if (coeffs.size() < 2) throw DomainError("poly phase needs degree >= 1");
        for (double c : coeffs)
            if (!std::isfinite(c)) throw DomainError("poly phase coefficient is not finite");
    }

    // largest |n| with |n|^d <= 2^73, so mantissa * n^d stays inside 128 bits
    std::int64_t max_argument() const
    {
        const int d = std::max(1, degree());
        if (d == 1) return std::int64_t{1} << 62;
        auto r = static_cast<std::int64_t>(std::pow(2.0, 73.0 / d));
        auto fits = [d](std::int64_t n) {
            __int128 v = 1;
            for (int i = 0; i < d; ++i) {
                v *= n;
                if (v > (__int128{1} << 73)) return false;
            }
            return true;
        };
        while (!fits(r)) --r;
        while (fits(r + 1)) ++r;
        return r;
    }
};

namespace detail {

struct SplitProduct {
    __int128 whole; // floor(c * m)
    double frac;    // c * m - floor(c * m)
};

// exact split of c * m for an integer m below 2^53 in magnitude
inline SplitProduct split_product(double c, __int128 m)
{
    if (c == 0.0 || m == 0) return {0, 0.0};
    int e = 0;
    const double f = std::frexp(c, &e);
    // c = mant * 2^(e - 53), |mant| < 2^53
    const auto mant = static_cast<std::int64_t>(std::ldexp(f, 53));
    const int shift = 53 - e;
    const __int128 p = static_cast<__int128>(mant) * m;
    if (shift <= 0) {
        if (-shift >= 20) return {0, 0.0};
        return {p << -shift, 0.0};
    }
    if (shift >= 120) {
        const double t = std::ldexp(static_cast<double>(p), -shift);
        const double fl = std::floor(t);
        return {static_cast<__int128>(fl), t - fl};
    }
    const __int128 r = p & ((static_cast<__int128>(1) << shift) - 1);
    return {(p - r) >> shift, std::ldexp(static_cast<double>(r), -shift)};
}

inline double frac_product(double c, __int128 m)
{
    return split_product(c, m).frac;
}

} // namespace detail

// reduced phase in [0, 1)
inline double poly_phase_angle(const PolyPhase& phase, std::int64_t n)
{
    const std::int64_t bound = phase.max_argument();
    if (n > bound || n < -bound)
        throw RangeError("poly phase argument " + std::to_string(n) + " exceeds " + std::to_string(bound));
    double t = 0.0;
    __int128 power = 1;
    for (std::size_t k = 0; k < phase.coeffs.size(); ++k) {
        t += detail::frac_product(phase.coeffs[k], power);
        t -= std::floor(t);
        if (k + 1 < phase.coeffs.size()) power *= n;
    }
    return t;
}

inline cplx eval_poly_phase(const PolyPhase& phase, std::int64_t n)
{
    return unit_phase(poly_phase_angle(phase, n));
}

// -------------------------------------------------------
// Bracket quadratic nilcharacter n -> e({an} b n), smoothed by a
// two-piece partition of unity in t = {an}
// -------------------------------------------------------
struct BracketNilchar {
    double alpha = 0.0;
    double beta = 0.0;
    double center = 0.25;
    double width = 0.2;

    static constexpr std::int64_t kMaxArgument = std::int64_t{1} << 32;

    void validate() const
    {
        if (!std::isfinite(alpha) || !std::isfinite(beta)) throw DomainError("bracket alpha/beta must be finite");
        if (!(width > 0.0) || !(center - width / 2 > 0.0) || !(center + width / 2 < 0.5))
            throw DomainError("bracket bump must satisfy 0 < center - width/2 and center + width/2 < 1/2");
    }

    // (phi_far, phi_near) with phi_far^2 + phi_near^2 = 1; phi_far vanishes near t = 0,
    // phi_near vanishes near t = 1/2
    std::array<double, 2> partition(double t) const
    {
        const double d = std::min(t, 1.0 - t);
        const double r = std::clamp((d - (center - width / 2)) / width, 0.0, 1.0);
        const double s = 0.5 * (1.0 - std::cos(std::numbers::pi * r));
        const double a = 0.5 * std::numbers::pi * s;
        if (s == 0.0) return {0.0, 1.0};
        if (s == 1.0) return {1.0, 0.0};
        return {std::sin(a), std::cos(a)};
    }
};

inline std::array<cplx, 2> eval_bracket(const BracketNilchar& nc, std::int64_t n)
{
    if (n > BracketNilchar::kMaxArgument || n < -BracketNilchar::kMaxArgument)
        throw RangeError("bracket argument " + std::to_string(n) + " exceeds 2^32");
    const double t = detail::frac_product(nc.alpha, n);
    const auto bn = detail::split_product(nc.beta, n);
    if (bn.whole > (__int128{1} << 53) || bn.whole < -(__int128{1} << 53))
        throw RangeError("bracket beta * n exceeds 2^53");
    const auto w = nc.partition(t);
    // the second piece uses t shifted into [-1/2, 1/2), so its jump sits where the piece vanishes
    const double t_near = t >= 0.5 ? t - 1.0 : t;
    auto phase = [&](double s) {
        double v = detail::frac_product(s, bn.whole) + s * bn.frac;
        return v - std::floor(v);
    };
    std::array<cplx, 2> out{};
    out[0] = w[0] == 0.0 ? cplx{0.0, 0.0} : w[0] * unit_phase(phase(t));
    out[1] = w[1] == 0.0 ? cplx{0.0, 0.0} : w[1] * unit_phase(phase(t_near));
    return out;
}

inline double vector_norm(std::span<const cplx> v)
{
    double s = 0.0;
    for (const cplx& z : v) s += std::norm(z);
    return std::sqrt(s);
}

inline std::vector<cplx> tensor(std::span<const cplx> z, std::span<const cplx> w)
{
    std::vector<cplx> out;
    out.reserve(z.size() * w.size());
    for (const cplx& a : z)
        for (const cplx& b : w) out.push_back(a * b);
    return out;
}

// -------------------------------------------------------
// Symbols of polynomial phases: the top coefficient, kept as an exact
// integer combination of base reals so that group laws hold exactly
// -------------------------------------------------------
enum class SymbolClass { ModInteger, ModRational };

inline constexpr std::int64_t kSymbolMaxDenominator = 1000000;
inline constexpr double kSymbolTolerance = 1e-12;

// smallest denominator q <= q_max with |x - p/q| <= tol among continued-fraction convergents
inline std::optional<std::int64_t> rational_denominator(double x, std::int64_t q_max = kSymbolMaxDenominator,
                                                        double tol = kSymbolTolerance)
{
    if (!std::isfinite(x)) return std::nullopt;
    long double r = x - std::floor(x);
    long double h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    long double y = r;
    for (int iter = 0; iter < 64; ++iter) {
        const long double a = std::floor(y);
        const long double h2 = a * h1 + h0, k2 = a * k1 + k0;
        if (k2 > static_cast<long double>(q_max)) break;
        if (k2 >= 1 && std::abs(r - h2 / k2) <= tol) return static_cast<std::int64_t>(k2);
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        const long double f = y - a;
        if (f == 0) break;
        y = 1 / f;
    }
    return std::nullopt;
}

class PolySymbol {
public:
    PolySymbol() = default;
    PolySymbol(int degree, double top) : degree_(degree)
    {
        if (degree < 1) throw DomainError("symbol degree must be >= 1");
        if (!std::isfinite(top)) throw DomainError("symbol top coefficient is not finite");
        if (top != 0.0) terms_[top] = 1;
    }
    static PolySymbol of(const PolyPhase& phase)
    {
        phase.validate();
        return {phase.degree(), phase.coeffs.back()};
    }

    int degree() const { return degree_; }
    SymbolClass symbol_class() const { return degree_ == 1 ? SymbolClass::ModInteger : SymbolClass::ModRational; }
    const std::map<double, std::int64_t>& terms() const { return terms_; }

    double top() const
    {
        NeumaierSum s;
        for (const auto& [base, c] : terms_) s.add(static_cast<double>(c) * base);
        return s.value();
    }

    // zero in Symb^d: an integer for d = 1, a rational of bounded height for d > 1
    bool is_trivial() const
    {
        if (terms_.empty()) return true;
        const double v = top();
        if (degree_ == 1) return std::abs(v - std::round(v)) <= kSymbolTolerance;
        return rational_denominator(v).has_value();
    }
    bool is_irrational() const { return !rational_denominator(top()).has_value(); }

    friend PolySymbol operator+(const PolySymbol& a, const PolySymbol& b)
    {
        if (a.degree_ != b.degree_)
            throw DomainError("symbol degree mismatch: " + std::to_string(a.degree_) + " vs " +
                              std::to_string(b.degree_));
        PolySymbol out = a;
        for (const auto& [base, c] : b.terms_) out.terms_[base] += c;
        std::erase_if(out.terms_, [](const auto& kv) { return kv.second == 0; });
        return out;
    }
    friend PolySymbol operator-(const PolySymbol& a)
    {
        PolySymbol out = a;
        for (auto& [base, c] : out.terms_) c = -c;
        return out;
    }
    PolySymbol dilate(std::int64_t q) const
    {
        if (q == 0) throw DomainError("dilation by zero");
        __int128 f = 1;
        for (int i = 0; i < degree_; ++i) f *= q;
        PolySymbol out = *this;
        for (auto& [base, c] : out.terms_) {
            const __int128 v = static_cast<__int128>(c) * f;
            if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
                throw RangeError("dilated symbol coefficient overflows");
            c = static_cast<std::int64_t>(v);
        }
        return out;
    }

    // equality in the symbol group
    friend bool operator==(const PolySymbol& a, const PolySymbol& b)
    {
        return a.degree_ == b.degree_ && (a + (-b)).is_trivial();
    }
    bool identical(const PolySymbol& o) const { return degree_ == o.degree_ && terms_ == o.terms_; }

private:
    int degree_ = 1;
    std::map<double, std::int64_t> terms_;
};

enum class SymbolOp { Add, Negate, Dilate };

inline PolySymbol symbol_ops(const PolySymbol& a, const PolySymbol& b, SymbolOp op, std::int64_t q = 1)
{
    switch (op) {
    case SymbolOp::Add: return a + b;
    case SymbolOp::Negate: return -a;
    default: return a.dilate(q);
    }
}

// -------------------------------------------------------
// Equidistribution and bilinear prime averages
// -------------------------------------------------------
using NilSequence = std::variant<PolyPhase, BracketNilchar>;

inline void validate(const NilSequence& s)
{
    std::visit([](const auto& v) { v.validate(); }, s);
}

inline std::size_t dimension(const NilSequence& s)
{
    return std::holds_alternative<PolyPhase>(s) ? 1 : 2;
}

namespace detail {

template <class Fn>
void for_each_value(const NilSequence& s, std::int64_t n, Fn&& fn)
{
    if (const auto* p = std::get_if<PolyPhase>(&s)) {
        fn(0, eval_poly_phase(*p, n));
    } else {
        const auto v = eval_bracket(std::get<BracketNilchar>(s), n);
        fn(0, v[0]);
        fn(1, v[1]);
    }
}

inline std::int64_t max_argument(const NilSequence& s)
{
    if (const auto* p = std::get_if<PolyPhase>(&s)) return p->max_argument();
    return BracketNilchar::kMaxArgument;
}

} // namespace detail

inline std::vector<cplx> equidist_average(const NilSequence& seq, std::int64_t N)
{
    validate(seq);
    if (N < 1000) throw DomainError("equidist N must be >= 1000");
    if (N > detail::max_argument(seq)) throw RangeError("equidist N exceeds the evaluation range");
    const std::size_t dim = dimension(seq);
    const BlockRange range{1, N, kReduceBlock};
    auto parts = map_blocks<std::array<ComplexSum, 2>>(range.count(), [&](std::size_t b) {
        std::array<ComplexSum, 2> acc;
        for (std::int64_t n = range.begin(b); n <= range.end(b); ++n)
            detail::for_each_value(seq, n, [&](std::size_t i, cplx v) { acc[i].add(v); });
        return acc;
    });
    std::vector<cplx> out(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        ComplexSum total;
        for (const auto& p : parts) total.add(p[i]);
        out[i] = total.value() / static_cast<double>(N);
    }
    return out;
}

inline double equidist_mean(const NilSequence& seq, std::int64_t N)
{
    return vector_norm(equidist_average(seq, N));
}

struct DecayRow {
    std::int64_t N;
    double mean;
};

inline std::vector<DecayRow> decay_table(const NilSequence& seq, std::span<const std::int64_t> Ns)
{
    std::vector<DecayRow> rows;
    for (std::int64_t N : Ns) rows.push_back({N, equidist_mean(seq, N)});
    return rows;
}

using PrimeWeight = std::function<double(std::uint64_t)>;

inline double bilinear_prime_mean(const NilSequence& seq, std::int64_t x, std::int64_t y,
                                  const PrimeWeight& a = {}, const PrimeWeight& b = {})
{
    validate(seq);
    if (x < 1000 || y < 1000) throw DomainError("bilinear x and y must be >= 1000");
    const auto px = primes_up_to(static_cast<std::uint64_t>(x));
    const auto py = primes_up_to(static_cast<std::uint64_t>(y));
    const __int128 top = static_cast<__int128>(px.back()) * py.back();
    if (top > detail::max_argument(seq))
        throw CoverageError("bilinear products reach " + std::to_string(static_cast<std::int64_t>(top)) +
                            ", beyond the evaluation range " + std::to_string(detail::max_argument(seq)));
    auto weights = [](const std::vector<std::uint64_t>& ps, const PrimeWeight& w, const char* name) {
        std::vector<double> out(ps.size(), 1.0);
        if (!w) return out;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            out[i] = w(ps[i]);
            if (!(std::abs(out[i]) <= 1.0))
                throw DomainError(std::string(name) + " weight exceeds 1 at p = " + std::to_string(ps[i]));
        }
        return out;
    };
    const auto wa = weights(px, a, "a");
    const auto wb = weights(py, b, "b");
    const std::size_t dim = dimension(seq);
    auto parts = map_blocks<std::array<ComplexSum, 2>>(px.size(), [&](std::size_t i) {
        std::array<ComplexSum, 2> acc;
        for (std::size_t j = 0; j < py.size(); ++j) {
            const double w = wa[i] * wb[j];
            const auto n = static_cast<std::int64_t>(px[i] * py[j]);
            detail::for_each_value(seq, n, [&](std::size_t k, cplx v) { acc[k].add(w * v); });
        }
        return acc;
    });
    const double count = static_cast<double>(px.size()) * static_cast<double>(py.size());
    std::vector<cplx> mean(dim);
    for (std::size_t k = 0; k < dim; ++k) {
        ComplexSum total;
        for (const auto& p : parts) total.add(p[k]);
        mean[k] = total.value() / count;
    }
    return vector_norm(mean);
}

} // namespace chowla
