// log_window.hpp
// Finite averaging windows x/omega <= n <= x and the weighted block
// reduction behind every plain or logarithmic average in the library.

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <type_traits>
#include <string>
#include <vector>

#include "chowla/common.hpp"

namespace chowla {

struct LogWindow {
    std::int64_t x = 1;
    std::int64_t omega = 1;

    // first integer n with n >= x / omega
    std::int64_t lo() const { return (x + omega - 1) / omega; }
    std::int64_t hi() const { return x; }
    std::int64_t count() const { return hi() - lo() + 1; }

    void validate() const
    {
        if (x < 1) throw DomainError("window: x must be >= 1");
        if (omega < 1 || omega > x) throw DomainError("window: need 1 <= omega <= x");
    }

    std::string label() const { return "(" + std::to_string(x) + "," + std::to_string(omega) + ")"; }

    friend bool operator==(const LogWindow&, const LogWindow&) = default;
};

enum class AverageMode { Plain, Logarithmic };

struct WeightedPartial {
    ComplexSum num;
    NeumaierSum den;
};

// Averages the values produced by fill over [lo, hi] with weight 1/n
// (Logarithmic) or 1 (Plain). fill(b_lo, count, out) must write the summand
// for n = b_lo + i into out[i]; T is double or cplx.
template <typename T, typename Fill>
cplx weighted_average(std::int64_t lo, std::int64_t hi, AverageMode mode, Fill&& fill)
{
    if (hi < lo) throw DomainError("average over an empty range");
    const BlockRange blocks{lo, hi, kReduceBlock};
    auto partials = map_blocks<WeightedPartial>(blocks.count(), [&](std::size_t b) {
        const std::int64_t b_lo = blocks.begin(b);
        const std::size_t len = static_cast<std::size_t>(blocks.end(b) - b_lo + 1);
        thread_local std::vector<T> buf;
        buf.resize(len);
        fill(b_lo, len, buf.data());
        WeightedPartial part;
        if (mode == AverageMode::Logarithmic) {
            for (std::size_t i = 0; i < len; ++i) {
                const double w = 1.0 / static_cast<double>(b_lo + static_cast<std::int64_t>(i));
                part.num.add(buf[i] * w);
                part.den.add(w);
            }
        } else {
            for (std::size_t i = 0; i < len; ++i) part.num.add(buf[i]);
            part.den.add(static_cast<double>(len));
        }
        return part;
    });
    ComplexSum num;
    NeumaierSum den;
    for (const auto& p : partials) {
        num.add(p.num);
        den.add(p.den);
    }
    return num.value() / den.value();
}

// E^log (or plain E) over the window of a pointwise weight n -> double/cplx.
template <typename Weight>
cplx log_average(Weight&& weight, const LogWindow& window,
                 AverageMode mode = AverageMode::Logarithmic)
{
    window.validate();
    using T = std::conditional_t<std::is_convertible_v<std::invoke_result_t<Weight&, std::int64_t>, double>,
                                 double, cplx>;
    return weighted_average<T>(window.lo(), window.hi(), mode,
                               [&](std::int64_t b_lo, std::size_t len, T* out) {
                                   for (std::size_t i = 0; i < len; ++i)
                                       out[i] = static_cast<T>(weight(b_lo + static_cast<std::int64_t>(i)));
                               });
}

// Sum of 1/n over the window, the logarithmic normaliser.
inline double harmonic_mass(const LogWindow& window)
{
    const BlockRange blocks{window.lo(), window.hi(), kReduceBlock};
    auto partials = map_blocks<NeumaierSum>(blocks.count(), [&](std::size_t b) {
        NeumaierSum s;
        for (std::int64_t n = blocks.begin(b); n <= blocks.end(b); ++n) s.add(1.0 / static_cast<double>(n));
        return s;
    });
    NeumaierSum total;
    for (const auto& p : partials) total.add(p);
    return total.value();
}

} // namespace chowla
