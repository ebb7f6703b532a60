// mult_func.hpp
// 1-bounded multiplicative functions as expression trees, Dirichlet
// characters with exact root-of-unity values, pretentious distance and
// plain/logarithmic mean values.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "chowla/arith_sieve.hpp"
#include "chowla/common.hpp"
#include "chowla/log_window.hpp"

namespace chowla {

// e(theta) = exp(2 pi i theta), exact at quarter turns.
inline cplx unit_phase(double theta)
{
    theta -= std::floor(theta);
    const double q = theta * 4.0;
    if (q == std::floor(q)) {
        switch (static_cast<int>(q) & 3) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
        }
    }
    if (theta >= 0.5) theta -= 1.0;
    const double a = 2.0 * std::numbers::pi * theta;
    return {std::cos(a), std::sin(a)};
}

// -------------------------------------------------------
// Elementary number theory helpers
// -------------------------------------------------------
struct PrimePower {
    std::uint64_t p;
    int e;
};

inline std::vector<PrimePower> factorize(std::uint64_t n)
{
    std::vector<PrimePower> out;
    for (std::uint64_t p = 2; p * p <= n; ++p) {
        if (n % p) continue;
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        out.push_back({p, e});
    }
    if (n > 1) out.push_back({n, 1});
    return out;
}

inline std::uint64_t euler_phi(std::uint64_t n)
{
    std::uint64_t phi = n;
    for (auto [p, e] : factorize(n)) phi = phi / p * (p - 1);
    return phi;
}

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m)
{
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t powmod(std::uint64_t b, std::uint64_t e, std::uint64_t m)
{
    std::uint64_t r = 1 % m;
    b %= m;
    while (e) {
        if (e & 1) r = mulmod(r, b, m);
        b = mulmod(b, b, m);
        e >>= 1;
    }
    return r;
}

inline std::int64_t mod_floor(std::int64_t n, std::int64_t q)
{
    const std::int64_t r = n % q;
    return r < 0 ? r + q : r;
}

// A root of unity e(num / order), reduced.
struct RootOfUnity {
    std::int64_t num = 0;
    std::int64_t order = 1;

    cplx value() const { return unit_phase(static_cast<double>(num) / static_cast<double>(order)); }
    friend bool operator==(const RootOfUnity&, const RootOfUnity&) = default;
};

inline RootOfUnity make_root(std::int64_t num, std::int64_t order)
{
    num = mod_floor(num, order);
    const std::int64_t g = std::gcd(num, order);
    return {num / g, order / g};
}

// -------------------------------------------------------
// CharacterGroup: the structure of (Z/q)^* as a product of cyclic
// components, with a discrete-log table per component.
// -------------------------------------------------------
class CharacterGroup {
public:
    struct Component {
        std::uint64_t modulus;          // prime power the component lives on
        std::int64_t order;             // cyclic order
        std::vector<std::int32_t> logs; // residue mod modulus -> log, -1 if not a unit
    };

    explicit CharacterGroup(std::uint64_t q) : q_(q)
    {
        for (auto [p, e] : factorize(q)) {
            std::uint64_t pe = 1;
            for (int i = 0; i < e; ++i) pe *= p;
            if (p == 2) add_two_power(pe, e);
            else add_odd_prime_power(p, pe);
        }
        exponent_ = 1;
        for (const auto& c : comps_) exponent_ = std::lcm(exponent_, c.order);
        size_ = 1;
        for (const auto& c : comps_) size_ *= static_cast<std::uint64_t>(c.order);
    }

    std::uint64_t modulus() const { return q_; }
    // lcm of component orders; every character value is an exponent_-th root of unity
    std::int64_t exponent() const { return exponent_; }
    std::uint64_t size() const { return size_; }
    const std::vector<Component>& components() const { return comps_; }

    // fills the log vector of n; false when gcd(n, q) > 1
    bool logs_of(std::int64_t n, std::span<std::int32_t> out) const
    {
        for (std::size_t i = 0; i < comps_.size(); ++i) {
            const auto& c = comps_[i];
            const auto r = static_cast<std::uint64_t>(mod_floor(n, static_cast<std::int64_t>(c.modulus)));
            const std::int32_t l = c.logs[r];
            if (l < 0) return false;
            out[i] = l;
        }
        return true;
    }

private:
    void add_cyclic(std::uint64_t modulus, std::uint64_t gen, std::int64_t order)
    {
        Component c{modulus, order, std::vector<std::int32_t>(modulus, -1)};
        std::uint64_t x = 1 % modulus;
        for (std::int64_t k = 0; k < order; ++k) {
            c.logs[x] = static_cast<std::int32_t>(k);
            x = mulmod(x, gen, modulus);
        }
        comps_.push_back(std::move(c));
    }

    void add_odd_prime_power(std::uint64_t p, std::uint64_t pe)
    {
        const std::uint64_t phi = pe / p * (p - 1);
        const auto fac = factorize(p - 1);
        std::uint64_t g = 2;
        for (;; ++g) {
            bool ok = true;
            for (auto [r, e] : fac)
                if (powmod(g, (p - 1) / r, p) == 1) {
                    ok = false;
                    break;
                }
            if (ok) break;
        }
        // a primitive root mod p^2 is one mod every higher power of p
        if (pe > p && powmod(g, p - 1, p * p) == 1) g += p;
        add_cyclic(pe, g % pe, static_cast<std::int64_t>(phi));
    }

    void add_two_power(std::uint64_t pe, int e)
    {
        if (e == 1) {
            // trivial group, kept so that even n are recognised as non-units
            add_cyclic(2, 1, 1);
            return;
        }
        if (e == 2) {
            add_cyclic(4, 3, 2);
            return;
        }
        // (Z/2^e)^* = <-1> x <5>
        Component sign{pe, 2, std::vector<std::int32_t>(pe, -1)};
        Component five{pe, static_cast<std::int64_t>(pe / 4), std::vector<std::int32_t>(pe, -1)};
        std::uint64_t x = 1;
        for (std::int64_t k = 0; k < five.order; ++k) {
            sign.logs[x] = 0;
            five.logs[x] = static_cast<std::int32_t>(k);
            sign.logs[pe - x] = 1;
            five.logs[pe - x] = static_cast<std::int32_t>(k);
            x = x * 5 % pe;
        }
        comps_.push_back(std::move(sign));
        comps_.push_back(std::move(five));
    }

    std::uint64_t q_;
    std::vector<Component> comps_;
    std::int64_t exponent_ = 1;
    std::uint64_t size_ = 1;
};

// -------------------------------------------------------
// DirichletCharacter: chi(n) = prod_i e(k_i * log_i(n) / order_i).
// Values are exact: exponent(n) is a residue mod group exponent L, so
// chi(n) = e(exponent(n) / L).
// -------------------------------------------------------
class DirichletCharacter {
public:
    DirichletCharacter(std::shared_ptr<const CharacterGroup> group, std::vector<std::int64_t> ks,
                       std::uint64_t index)
        : group_(std::move(group)), ks_(std::move(ks)), index_(index)
    {
        const auto& comps = group_->components();
        weights_.resize(comps.size());
        for (std::size_t i = 0; i < comps.size(); ++i)
            weights_[i] = ks_[i] * (group_->exponent() / comps[i].order);
    }

    std::uint64_t modulus() const { return group_->modulus(); }
    std::uint64_t index() const { return index_; }
    std::int64_t order_bound() const { return group_->exponent(); }
    const std::vector<std::int64_t>& exponents() const { return ks_; }
    const CharacterGroup& group() const { return *group_; }

    bool principal() const
    {
        for (auto k : ks_)
            if (k != 0) return false;
        return true;
    }

    bool is_real() const
    {
        const auto& comps = group_->components();
        for (std::size_t i = 0; i < comps.size(); ++i)
            if ((2 * ks_[i]) % comps[i].order != 0) return false;
        return true;
    }

    // chi(-1) as +1 or -1
    int parity() const
    {
        const auto e = exponent(-1);
        return (e && *e != 0) ? -1 : 1;
    }

    // exponent of chi(n) mod order_bound(), or nullopt when chi(n) = 0
    std::optional<std::int64_t> exponent(std::int64_t n) const
    {
        std::array<std::int32_t, 16> logs{};
        if (!group_->logs_of(n, logs)) return std::nullopt;
        std::int64_t s = 0;
        const std::int64_t L = group_->exponent();
        for (std::size_t i = 0; i < weights_.size(); ++i) s = (s + weights_[i] * logs[i]) % L;
        return s;
    }

    std::optional<RootOfUnity> exact(std::int64_t n) const
    {
        auto e = exponent(n);
        if (!e) return std::nullopt;
        return make_root(*e, group_->exponent());
    }

    cplx operator()(std::int64_t n) const
    {
        auto e = exponent(n);
        if (!e) return {0.0, 0.0};
        return unit_phase(static_cast<double>(*e) / static_cast<double>(group_->exponent()));
    }

    // values at residues 0..q-1
    std::vector<cplx> values() const
    {
        std::vector<cplx> out(modulus());
        for (std::uint64_t r = 0; r < modulus(); ++r) out[r] = (*this)(static_cast<std::int64_t>(r));
        return out;
    }

    friend bool operator==(const DirichletCharacter& a, const DirichletCharacter& b)
    {
        return a.modulus() == b.modulus() && a.ks_ == b.ks_;
    }

private:
    std::shared_ptr<const CharacterGroup> group_;
    std::vector<std::int64_t> ks_;
    std::vector<std::int64_t> weights_;
    std::uint64_t index_;
};

// All phi(q) characters mod q in canonical order: mixed radix over the
// component exponents, last component fastest. Index 0 is principal.
inline std::vector<DirichletCharacter> characters_mod(std::uint64_t q)
{
    if (q < 1) throw DomainError("characters_mod: q must be >= 1");
    if (q > 1000000) throw CapacityError("characters_mod: q = " + std::to_string(q) + " exceeds 10^6");
    auto group = std::make_shared<const CharacterGroup>(q);
    const auto& comps = group->components();
    std::vector<DirichletCharacter> out;
    out.reserve(group->size());
    std::vector<std::int64_t> ks(comps.size(), 0);
    for (std::uint64_t idx = 0; idx < group->size(); ++idx) {
        std::uint64_t rest = idx;
        for (std::size_t i = comps.size(); i-- > 0;) {
            ks[i] = static_cast<std::int64_t>(rest % static_cast<std::uint64_t>(comps[i].order));
            rest /= static_cast<std::uint64_t>(comps[i].order);
        }
        out.emplace_back(group, ks, idx);
    }
    return out;
}

inline DirichletCharacter character_mod(std::uint64_t q, std::uint64_t index)
{
    if (q < 1 || q > 1000000) throw DomainError("character_mod: q out of range");
    auto group = std::make_shared<const CharacterGroup>(q);
    if (index >= group->size())
        throw DomainError("character_mod: index " + std::to_string(index) + " >= phi(q)");
    const auto& comps = group->components();
    std::vector<std::int64_t> ks(comps.size(), 0);
    std::uint64_t rest = index;
    for (std::size_t i = comps.size(); i-- > 0;) {
        ks[i] = static_cast<std::int64_t>(rest % static_cast<std::uint64_t>(comps[i].order));
        rest /= static_cast<std::uint64_t>(comps[i].order);
    }
    return DirichletCharacter(group, ks, index);
}

// The real non-principal character mod an odd prime p (Legendre symbol).
inline DirichletCharacter legendre_character(std::uint64_t p)
{
    const auto group = std::make_shared<const CharacterGroup>(p);
    if (group->components().size() != 1 || group->components()[0].order % 2 != 0 || p == 2)
        throw DomainError("legendre_character: p must be an odd prime");
    const std::int64_t k = group->components()[0].order / 2;
    return DirichletCharacter(group, {k}, static_cast<std::uint64_t>(k));
}

// -------------------------------------------------------
// MultFuncSpec
// -------------------------------------------------------
enum class OmegaBase { BigOmega, SmallOmega };

inline ArithKind omega_kind(OmegaBase b)
{
    return b == OmegaBase::BigOmega ? ArithKind::BigOmega : ArithKind::SmallOmega;
}

struct MultFuncSpec;

namespace node {
struct Liouville {};
struct Mobius {};
struct One {};
struct ArchimedeanTwist {
    double t;
};
struct DirichletChar {
    DirichletCharacter chi;
};
struct AdditivePhase {
    double alpha;
    OmegaBase base;
};
struct Product {
    std::vector<MultFuncSpec> factors;
};
// g^c for c >= 0, conj(g)^|c| for c < 0
struct ConjugatePower {
    std::shared_ptr<const MultFuncSpec> inner;
    int c;
};
} // namespace node

struct MultFuncSpec {
    std::variant<node::Liouville, node::Mobius, node::One, node::ArchimedeanTwist, node::DirichletChar,
                 node::AdditivePhase, node::Product, node::ConjugatePower>
        node;
};

inline MultFuncSpec liouville() { return {node::Liouville{}}; }
inline MultFuncSpec mobius() { return {node::Mobius{}}; }
inline MultFuncSpec one() { return {node::One{}}; }
inline MultFuncSpec archimedean_twist(double t) { return {node::ArchimedeanTwist{t}}; }
inline MultFuncSpec dirichlet(DirichletCharacter chi) { return {node::DirichletChar{std::move(chi)}}; }
inline MultFuncSpec additive_phase(double alpha, OmegaBase base = OmegaBase::BigOmega)
{
    return {node::AdditivePhase{alpha, base}};
}
inline MultFuncSpec product(std::vector<MultFuncSpec> factors) { return {node::Product{std::move(factors)}}; }
inline MultFuncSpec conjugate_power(MultFuncSpec inner, int c)
{
    return {node::ConjugatePower{std::make_shared<const MultFuncSpec>(std::move(inner)), c}};
}
inline MultFuncSpec conjugate(MultFuncSpec g) { return conjugate_power(std::move(g), -1); }

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline void collect_kinds(const MultFuncSpec& g, std::set<ArithKind>& out)
{
    std::visit(overloaded{
                   [&](const node::Liouville&) { out.insert(ArithKind::Liouville); },
                   [&](const node::Mobius&) { out.insert(ArithKind::Mobius); },
                   [&](const node::AdditivePhase& a) { out.insert(omega_kind(a.base)); },
                   [&](const node::Product& p) {
                       for (const auto& f : p.factors) collect_kinds(f, out);
                   },
                   [&](const node::ConjugatePower& c) { collect_kinds(*c.inner, out); },
                   [](const auto&) {},
               },
               g.node);
}

inline std::vector<ArithKind> required_kinds(const MultFuncSpec& g)
{
    std::set<ArithKind> s;
    collect_kinds(g, s);
    return {s.begin(), s.end()};
}

inline bool is_real_valued(const MultFuncSpec& g)
{
    return std::visit(overloaded{
                          [](const node::ArchimedeanTwist& t) { return t.t == 0.0; },
                          [](const node::DirichletChar& c) { return c.chi.is_real(); },
                          [](const node::AdditivePhase& a) {
                              const double two = 2.0 * a.alpha;
                              return two == std::floor(two);
                          },
                          [](const node::Product& p) {
                              for (const auto& f : p.factors)
                                  if (!is_real_valued(f)) return false;
                              return true;
                          },
                          [](const node::ConjugatePower& c) { return is_real_valued(*c.inner); },
                          [](const auto&) { return true; },
                      },
                      g.node);
}

inline cplx int_power(cplx v, int c)
{
    if (c < 0) {
        v = std::conj(v);
        c = -c;
    }
    cplx r{1.0, 0.0};
    for (int i = 0; i < c; ++i) r *= v;
    return r;
}

inline double int_power(double v, int c)
{
    double r = 1.0;
    for (int i = 0; i < (c < 0 ? -c : c); ++i) r *= v;
    return r;
}

// Value at a prime p. No table needed: lambda(p) = mu(p) = -1, Omega(p) = omega(p) = 1.
inline cplx prime_value(const MultFuncSpec& g, std::uint64_t p)
{
    return std::visit(overloaded{
                          [](const node::Liouville&) { return cplx{-1.0, 0.0}; },
                          [](const node::Mobius&) { return cplx{-1.0, 0.0}; },
                          [](const node::One&) { return cplx{1.0, 0.0}; },
                          [&](const node::ArchimedeanTwist& t) {
                              return std::polar(1.0, t.t * std::log(static_cast<double>(p)));
                          },
                          [&](const node::DirichletChar& c) { return c.chi(static_cast<std::int64_t>(p)); },
                          [](const node::AdditivePhase& a) { return unit_phase(a.alpha); },
                          [&](const node::Product& pr) {
                              cplx r{1.0, 0.0};
                              for (const auto& f : pr.factors) r *= prime_value(f, p);
                              return r;
                          },
                          [&](const node::ConjugatePower& c) { return int_power(prime_value(*c.inner, p), c.c); },
                      },
                      g.node);
}

// -------------------------------------------------------
// CompiledMultFunc: a spec bound to tables, able to fill blocks of values
// along arithmetic progressions n0, n0 + step, ... quickly.
// -------------------------------------------------------
class CompiledMultFunc {
public:
    // Binds g to tables, checking coverage of every argument in [lo, hi].
    CompiledMultFunc(const MultFuncSpec& g, const TableSet& tables, std::int64_t lo, std::int64_t hi)
        : real_(is_real_valued(g))
    {
        root_ = compile(g, tables, lo, hi);
    }

    bool real() const { return real_; }

    cplx operator()(std::int64_t n) const
    {
        cplx v;
        fill_node(nodes_[root_], n, 1, 1, &v);
        return v;
    }

    // out[i] = g(n0 + i * step); step >= 1. T is double (real specs only) or cplx.
    template <typename T>
    void fill(std::int64_t n0, std::int64_t step, std::size_t count, T* out) const
    {
        fill_node(nodes_[root_], n0, step, count, out);
    }

private:
    enum class Tag { Table, One, Twist, Char, Phase, Product, Power };
    struct Node {
        Tag tag;
        const ArithTable* table = nullptr;
        double t = 0.0;
        std::int64_t q = 1;
        std::vector<cplx> char_values;
        std::vector<double> char_real;
        std::array<cplx, 65> phases{};
        std::array<double, 65> phases_real{};
        std::vector<std::size_t> children;
        int c = 1;
    };

    std::size_t compile(const MultFuncSpec& g, const TableSet& tables, std::int64_t lo, std::int64_t hi)
    {
        Node nd;
        std::visit(overloaded{
                       [&](const node::Liouville&) {
                           nd.tag = Tag::Table;
                           nd.table = &tables.require(ArithKind::Liouville, lo, hi);
                       },
                       [&](const node::Mobius&) {
                           nd.tag = Tag::Table;
                           nd.table = &tables.require(ArithKind::Mobius, lo, hi);
                       },
                       [&](const node::One&) { nd.tag = Tag::One; },
                       [&](const node::ArchimedeanTwist& t) {
                           nd.tag = Tag::Twist;
                           nd.t = t.t;
                       },
                       [&](const node::DirichletChar& c) {
                           nd.tag = Tag::Char;
                           nd.q = static_cast<std::int64_t>(c.chi.modulus());
                           nd.char_values = c.chi.values();
                           for (auto v : nd.char_values) nd.char_real.push_back(v.real());
                       },
                       [&](const node::AdditivePhase& a) {
                           nd.tag = Tag::Phase;
                           nd.table = &tables.require(omega_kind(a.base), lo, hi);
                           for (int k = 0; k <= 64; ++k) {
                               nd.phases[k] = unit_phase(a.alpha * k);
                               nd.phases_real[k] = nd.phases[k].real();
                           }
                       },
                       [&](const node::Product& p) {
                           nd.tag = Tag::Product;
                           for (const auto& f : p.factors) nd.children.push_back(compile(f, tables, lo, hi));
                       },
                       [&](const node::ConjugatePower& c) {
                           nd.tag = Tag::Power;
                           nd.c = c.c;
                           nd.children.push_back(compile(*c.inner, tables, lo, hi));
                       },
                   },
                   g.node);
        nodes_.push_back(std::move(nd));
        return nodes_.size() - 1;
    }

    template <typename T>
    static T from_cplx(cplx v)
    {
        if constexpr (std::is_same_v<T, double>) return v.real();
        else return v;
    }

    template <typename T>
    void fill_node(const Node& nd, std::int64_t n0, std::int64_t step, std::size_t count, T* out) const
    {
        // arguments n <= 0 evaluate to 0; they can only occur at the start of the run
        std::size_t skip = 0;
        while (skip < count && n0 + static_cast<std::int64_t>(skip) * step <= 0) out[skip++] = T{};
        if (skip == count) return;
        const std::int64_t first = n0 + static_cast<std::int64_t>(skip) * step;
        T* dst = out + skip;
        const std::size_t len = count - skip;
        switch (nd.tag) {
        case Tag::Table: {
            const ArithTable& tab = *nd.table;
            std::uint64_t n = static_cast<std::uint64_t>(first);
            for (std::size_t i = 0; i < len; ++i, n += static_cast<std::uint64_t>(step))
                dst[i] = static_cast<double>(tab.at(n));
            break;
        }
        case Tag::One:
            for (std::size_t i = 0; i < len; ++i) dst[i] = T{1.0};
            break;
        case Tag::Twist:
            for (std::size_t i = 0; i < len; ++i) {
                const double n = static_cast<double>(first + static_cast<std::int64_t>(i) * step);
                dst[i] = from_cplx<T>(std::polar(1.0, nd.t * std::log(n)));
            }
            break;
        case Tag::Char: {
            std::int64_t r = mod_floor(first, nd.q);
            const std::int64_t rs = mod_floor(step, nd.q);
            for (std::size_t i = 0; i < len; ++i) {
                if constexpr (std::is_same_v<T, double>) dst[i] = nd.char_real[static_cast<std::size_t>(r)];
                else dst[i] = nd.char_values[static_cast<std::size_t>(r)];
                r += rs;
                if (r >= nd.q) r -= nd.q;
            }
            break;
        }
        case Tag::Phase: {
            const ArithTable& tab = *nd.table;
            std::uint64_t n = static_cast<std::uint64_t>(first);
            for (std::size_t i = 0; i < len; ++i, n += static_cast<std::uint64_t>(step)) {
                const int k = tab.at(n);
                if constexpr (std::is_same_v<T, double>) dst[i] = nd.phases_real[static_cast<std::size_t>(k)];
                else dst[i] = nd.phases[static_cast<std::size_t>(k)];
            }
            break;
        }
        case Tag::Product: {
            fill_node(nodes_[nd.children[0]], first, step, len, dst);
            if (nd.children.size() > 1) {
                std::vector<T> tmp(len);
                for (std::size_t c = 1; c < nd.children.size(); ++c) {
                    fill_node(nodes_[nd.children[c]], first, step, len, tmp.data());
                    for (std::size_t i = 0; i < len; ++i) dst[i] *= tmp[i];
                }
            }
            break;
        }
        case Tag::Power: {
            fill_node(nodes_[nd.children[0]], first, step, len, dst);
            for (std::size_t i = 0; i < len; ++i) dst[i] = int_power(dst[i], nd.c);
            break;
        }
        }
    }

    bool real_;
    std::vector<Node> nodes_;
    std::size_t root_ = 0;
};

// g(n); 0 for n <= 0. Table-backed nodes need coverage at n.
inline cplx eval(const MultFuncSpec& g, std::int64_t n, const TableSet& tables)
{
    if (n <= 0) return {0.0, 0.0};
    return CompiledMultFunc(g, tables, n, n)(n);
}

// -------------------------------------------------------
// Pretentious distance
// -------------------------------------------------------
struct PretenseReport {
    double distance_sq = 0.0;
    double statistic = 0.0;
    std::uint64_t x = 0;
    double best_t = 0.0; // grid point attaining the minimum
};

// sum_{p <= x} (1 - Re(g(p) conj(h(p)) p^{-it})) / p minimised over the t grid,
// accumulated in ascending prime order. The grid defaults to {0}.
inline PretenseReport pretentious_distance_sq(const MultFuncSpec& g, const MultFuncSpec& h, std::uint64_t x,
                                              std::span<const double> t_grid = {})
{
    if (x < 3) throw DomainError("pretentious_distance_sq: x must be >= 3");
    static constexpr double kZero[] = {0.0};
    if (t_grid.empty()) t_grid = kZero;
    std::vector<NeumaierSum> sums(t_grid.size());
    for_each_prime(2, x + 1, [&](std::uint64_t p) {
        const cplx gh = prime_value(g, p) * std::conj(prime_value(h, p));
        const double inv_p = 1.0 / static_cast<double>(p);
        const double logp = std::log(static_cast<double>(p));
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            const cplx tw = t_grid[i] == 0.0 ? gh : gh * std::polar(1.0, -t_grid[i] * logp);
            sums[i].add((1.0 - tw.real()) * inv_p);
        }
    });
    PretenseReport r;
    r.x = x;
    r.distance_sq = sums[0].value();
    r.best_t = t_grid[0];
    for (std::size_t i = 1; i < sums.size(); ++i) {
        if (sums[i].value() < r.distance_sq) {
            r.distance_sq = sums[i].value();
            r.best_t = t_grid[i];
        }
    }
    // rounding can leave a tiny negative sum when g = h
    if (r.distance_sq < 0.0) r.distance_sq = 0.0;
    r.statistic = r.distance_sq / std::log(std::log(static_cast<double>(x)));
    return r;
}

// E_n g(n) or E^log_n g(n) over the window.
inline cplx mean_value(const MultFuncSpec& g, const LogWindow& window, AverageMode mode, const TableSet& tables)
{
    window.validate();
    if (window.count() < 1) throw DomainError("mean_value: empty window");
    const CompiledMultFunc f(g, tables, window.lo(), window.hi());
    if (f.real())
        return weighted_average<double>(window.lo(), window.hi(), mode,
                                        [&](std::int64_t lo, std::size_t len, double* out) { f.fill(lo, 1, len, out); });
    return weighted_average<cplx>(window.lo(), window.hi(), mode,
                                  [&](std::int64_t lo, std::size_t len, cplx* out) { f.fill(lo, 1, len, out); });
}

} // namespace chowla
