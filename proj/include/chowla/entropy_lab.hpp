// entropy_lab.hpp
// Shannon entropies (natural log) of finite joint distributions with up to
// three coordinates, the uniform-comparison entropy inequality, a Hoeffding
// tail Monte Carlo, log-small set ratios and Gaussian-integer rounding.

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "chowla/arith_sieve.hpp"
#include "chowla/common.hpp"
#include "chowla/log_window.hpp"

namespace chowla {

using Outcome = std::vector<std::int64_t>;

class EmpiricalDist {
public:
    EmpiricalDist(std::vector<Outcome> support, std::vector<double> probs)
        : support_(std::move(support)), probs_(std::move(probs))
    {
        if (support_.empty()) throw DomainError("invalid distribution: empty support");
        if (support_.size() != probs_.size()) throw DomainError("invalid distribution: support and probs differ in size");
        arity_ = static_cast<int>(support_[0].size());
        if (arity_ < 1 || arity_ > 3) throw DomainError("invalid distribution: arity must be 1, 2 or 3");
        NeumaierSum total;
        for (std::size_t i = 0; i < support_.size(); ++i) {
            if (static_cast<int>(support_[i].size()) != arity_)
                throw DomainError("invalid distribution: outcomes of different arity");
            if (!(probs_[i] >= 0.0)) throw DomainError("invalid distribution: negative probability");
            total.add(probs_[i]);
        }
        if (std::abs(total.value() - 1.0) > 1e-12) throw DomainError("invalid distribution: probabilities must sum to 1");
    }

    // Empirical law of a list of samples.
    static EmpiricalDist from_samples(std::span<const Outcome> samples)
    {
        if (samples.empty()) throw DomainError("invalid distribution: no samples");
        std::map<Outcome, std::int64_t> counts;
        for (const auto& s : samples) ++counts[s];
        std::vector<Outcome> support;
        std::vector<double> probs;
        for (const auto& [o, c] : counts) {
            support.push_back(o);
            probs.push_back(static_cast<double>(c) / static_cast<double>(samples.size()));
        }
        return {std::move(support), std::move(probs)};
    }

    int arity() const { return arity_; }
    const std::vector<Outcome>& support() const { return support_; }
    const std::vector<double>& probs() const { return probs_; }

    // Law of the chosen coordinates, outcomes in ascending order.
    EmpiricalDist marginal(std::span<const int> coords) const
    {
        if (coords.empty()) throw DomainError("marginal: no coordinates");
        for (int c : coords)
            if (c < 0 || c >= arity_) throw DomainError("marginal: coordinate out of range");
        std::map<Outcome, NeumaierSum> acc;
        for (std::size_t i = 0; i < support_.size(); ++i) {
            Outcome o;
            for (int c : coords) o.push_back(support_[i][static_cast<std::size_t>(c)]);
            acc[o].add(probs_[i]);
        }
        std::vector<Outcome> support;
        std::vector<double> probs;
        for (const auto& [o, s] : acc) {
            support.push_back(o);
            probs.push_back(s.value());
        }
        return {std::move(support), std::move(probs)};
    }

private:
    std::vector<Outcome> support_;
    std::vector<double> probs_;
    int arity_ = 1;
};

// H of the marginal on coords (all coordinates when empty), with 0 log(1/0) = 0.
inline double entropy(const EmpiricalDist& d, std::span<const int> coords = {})
{
    std::vector<int> all;
    if (coords.empty()) {
        for (int c = 0; c < d.arity(); ++c) all.push_back(c);
        coords = all;
    }
    const auto m = d.marginal(coords);
    NeumaierSum h;
    for (double p : m.probs())
        if (p > 0.0) h.add(-p * std::log(p));
    return h.value();
}

inline double entropy(const EmpiricalDist& d, std::initializer_list<int> coords)
{
    return entropy(d, std::span<const int>(coords.begin(), coords.size()));
}

// H(X | Y) = H(X, Y) - H(Y)
inline double conditional_entropy(const EmpiricalDist& d, std::span<const int> x, std::span<const int> y)
{
    if (y.empty()) return entropy(d, x);
    std::vector<int> xy(x.begin(), x.end());
    xy.insert(xy.end(), y.begin(), y.end());
    return entropy(d, xy) - entropy(d, y);
}

// I(X : Y) for a two-coordinate distribution
inline double mutual_information(const EmpiricalDist& d)
{
    if (d.arity() != 2) throw DomainError("mutual_information: needs a 2-coordinate distribution");
    return entropy(d, {0}) + entropy(d, {1}) - entropy(d, {0, 1});
}

// I(X : Y | Z) = H(X | Z) - H(X | Y, Z)
inline double conditional_mutual_information(const EmpiricalDist& d)
{
    if (d.arity() != 3) throw DomainError("conditional_mutual_information: needs a 3-coordinate distribution");
    return entropy(d, {0, 2}) - entropy(d, {2}) - entropy(d, {0, 1, 2}) + entropy(d, {1, 2});
}

struct EntropyBoundCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

// P(Y in E) <= (H(U) - H(Y) + log 2) / log(1 / P(U in E)) with U uniform on
// the support list of dist (zero-probability outcomes included).
inline EntropyBoundCheck entropy_bound_check(const EmpiricalDist& dist, std::span<const Outcome> E)
{
    const auto& ys = dist.support();
    std::map<Outcome, std::size_t> index;
    for (std::size_t i = 0; i < ys.size(); ++i) index.emplace(ys[i], i);
    if (index.size() != ys.size()) throw DomainError("entropy_bound_check: repeated outcome in the support");
    std::vector<char> in_e(ys.size(), 0);
    for (const auto& e : E) {
        auto it = index.find(e);
        if (it == index.end()) throw DomainError("entropy_bound_check: E must be a subset of the support");
        in_e[it->second] = 1;
    }
    std::size_t e_size = 0;
    for (char c : in_e) e_size += c;
    if (e_size == 0 || e_size == ys.size()) throw DomainError("entropy_bound_check: E must be nonempty and proper");
    NeumaierSum lhs;
    for (std::size_t i = 0; i < ys.size(); ++i)
        if (in_e[i]) lhs.add(dist.probs()[i]);
    const double n = static_cast<double>(ys.size());
    EntropyBoundCheck r;
    r.lhs = lhs.value();
    r.rhs = (std::log(n) - entropy(dist) + std::log(2.0)) / std::log(n / static_cast<double>(e_size));
    r.holds = r.lhs <= r.rhs + 1e-12;
    return r;
}

// -------------------------------------------------------
// Hoeffding
// -------------------------------------------------------
inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct HoeffdingReport {
    double empirical_tail = 0.0;
    double bound = 0.0;
    double slack = 0.0; // 3 sqrt(bound / trials)
    bool holds = false;
};

// Fraction of trials where |mean of N fair +-1 variables| >= epsilon, against 2 exp(-N eps^2 / 2).
// Trial i draws from mt19937_64 seeded by splitmix64(seed + i), so results do not depend on threads.
inline HoeffdingReport hoeffding_tail_demo(std::int64_t N, double epsilon, std::int64_t trials, std::uint64_t seed)
{
    if (N < 100) throw DomainError("hoeffding_tail_demo: N must be >= 100");
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw DomainError("hoeffding_tail_demo: need 0 <= epsilon < 1");
    if (trials < 1000) throw DomainError("hoeffding_tail_demo: trials must be >= 1000");
    constexpr std::int64_t kTrialsPerBlock = 256;
    const auto blocks = static_cast<std::size_t>((trials + kTrialsPerBlock - 1) / kTrialsPerBlock);
    const double threshold = epsilon * static_cast<double>(N);
    auto hits = map_blocks<std::int64_t>(blocks, [&](std::size_t b) {
        std::int64_t h = 0;
        const std::int64_t t0 = static_cast<std::int64_t>(b) * kTrialsPerBlock;
        const std::int64_t t1 = std::min(trials, t0 + kTrialsPerBlock);
        for (std::int64_t t = t0; t < t1; ++t) {
            std::mt19937_64 rng(splitmix64(seed + static_cast<std::uint64_t>(t)));
            std::int64_t ones = 0, left = N;
            while (left >= 64) {
                ones += std::popcount(rng());
                left -= 64;
            }
            if (left > 0) ones += std::popcount(rng() & ((std::uint64_t{1} << left) - 1));
            const std::int64_t sum = 2 * ones - N;
            h += static_cast<double>(sum < 0 ? -sum : sum) >= threshold;
        }
        return h;
    });
    std::int64_t total = 0;
    for (auto h : hits) total += h;
    HoeffdingReport r;
    r.empirical_tail = static_cast<double>(total) / static_cast<double>(trials);
    r.bound = 2.0 * std::exp(-static_cast<double>(N) * epsilon * epsilon / 2.0);
    r.slack = 3.0 * std::sqrt(r.bound / static_cast<double>(trials));
    r.holds = r.empirical_tail <= r.bound + r.slack;
    return r;
}

// -------------------------------------------------------
// Log-small sets
// -------------------------------------------------------
struct LogSmallReport {
    std::int64_t x = 0;
    double partial = 0.0;
    double ratio = 0.0;
};

inline LogSmallReport log_small_ratio(const std::function<bool(std::int64_t)>& member, std::int64_t x)
{
    if (x < 10) throw DomainError("log_small_ratio: x must be >= 10");
    NeumaierSum s;
    for (std::int64_t m = 1; m <= x; ++m)
        if (member(m)) s.add(1.0 / static_cast<double>(m));
    return {x, s.value(), s.value() / std::log(static_cast<double>(x))};
}

// -------------------------------------------------------
// Gaussian-integer rounding
// -------------------------------------------------------
struct GaussianPoint {
    std::int64_t re = 0;
    std::int64_t im = 0;
    double epsilon = 1.0;

    cplx value() const { return {static_cast<double>(re) * epsilon, static_cast<double>(im) * epsilon}; }
    friend bool operator==(const GaussianPoint&, const GaussianPoint&) = default;
};

// Nearest point of epsilon * Z[i]; ties go to the lexicographically smaller (re, im).
inline GaussianPoint discretize(cplx v, double epsilon)
{
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw DomainError("discretize: need 0 < epsilon <= 1");
    if (std::abs(v) > 1.0 + 1e-12) throw DomainError("discretize: value must lie in the unit disk");
    const auto a0 = static_cast<std::int64_t>(std::floor(v.real() / epsilon));
    const auto b0 = static_cast<std::int64_t>(std::floor(v.imag() / epsilon));
    GaussianPoint best{a0, b0, epsilon};
    double best_d = -1.0;
    for (std::int64_t a = a0; a <= a0 + 1; ++a)
        for (std::int64_t b = b0; b <= b0 + 1; ++b) {
            const double dr = v.real() - static_cast<double>(a) * epsilon;
            const double di = v.imag() - static_cast<double>(b) * epsilon;
            const double d = dr * dr + di * di;
            // candidates are visited in lexicographic order, so strict < keeps the smaller on ties
            if (best_d < 0.0 || d < best_d) {
                best = {a, b, epsilon};
                best_d = d;
            }
        }
    return best;
}

// -------------------------------------------------------
// Entropy decrement demo (illustrative only)
// -------------------------------------------------------
struct DecrementRow {
    int m = 0;
    std::uint64_t prime = 0;  // smallest prime in [2^m, 2^{m+1})
    double h_x = 0.0;         // H of the lambda block
    double h_y = 0.0;         // H of n mod prime
    double mutual_info = 0.0; // I(block : n mod prime)
};

// Draws n uniformly from the window, X = (lambda(n + 1), ..., lambda(n + block)),
// Y = n mod p for the smallest prime p in [2^m, 2^{m+1}), and reports
// empirical entropies for m = 1..max_m. Descriptive output, not a check.
inline std::vector<DecrementRow> entropy_decrement_demo(int max_m, int block, std::int64_t samples,
                                                        const LogWindow& window, const TableSet& tables,
                                                        std::uint64_t seed)
{
    if (max_m < 1 || max_m > 12) throw DomainError("entropy_decrement_demo: m must be in [1, 12]");
    if (block < 1 || block > 16) throw DomainError("entropy_decrement_demo: block must be in [1, 16]");
    if (samples < 1) throw DomainError("entropy_decrement_demo: samples must be >= 1");
    window.validate();
    const ArithTable& lam = tables.require(ArithKind::Liouville, window.lo() + 1, window.hi() + block);
    std::mt19937_64 rng(splitmix64(seed));
    std::uniform_int_distribution<std::int64_t> pick(window.lo(), window.hi());
    std::vector<std::int64_t> ns(static_cast<std::size_t>(samples));
    std::vector<std::int64_t> xs(ns.size());
    for (std::size_t i = 0; i < ns.size(); ++i) {
        ns[i] = pick(rng);
        std::int64_t code = 0;
        for (int l = 1; l <= block; ++l)
            code = 2 * code + (lam.at(static_cast<std::uint64_t>(ns[i] + l)) < 0);
        xs[i] = code;
    }
    std::vector<DecrementRow> rows;
    for (int m = 1; m <= max_m; ++m) {
        const auto p = primes_in_dyadic(m).primes.front();
        std::vector<Outcome> joint;
        joint.reserve(ns.size());
        for (std::size_t i = 0; i < ns.size(); ++i)
            joint.push_back({xs[i], ns[i] % static_cast<std::int64_t>(p)});
        const auto d = EmpiricalDist::from_samples(joint);
        rows.push_back({m, p, entropy(d, {0}), entropy(d, {1}), mutual_information(d)});
    }
    return rows;
}

} // namespace chowla
