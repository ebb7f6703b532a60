// common.hpp
// Error types, thread-count control, compensated summation and the
// fixed-order block reduction every averaging routine is built on.
//
// Determinism: work is always cut into the same blocks regardless of the
// number of worker threads, and per-block partial results are combined in
// ascending block order. The thread count therefore changes wall time only.

#pragma once

#include <algorithm>
#include <cmath>
#include <atomic>
#include <complex>
#include <cstdint>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace chowla {

using cplx = std::complex<double>;

// -------------------------------------------------------
// Errors. The CLI maps ConfigError and DomainError -> 1,
// Range/Capacity/Coverage -> 2, IoError -> 3.
// -------------------------------------------------------
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
    using Error::Error;
};
// an argument violates an operation's precondition
struct DomainError : Error {
    using Error::Error;
};
struct RangeError : Error {
    using Error::Error;
};
struct CapacityError : Error {
    using Error::Error;
};
struct CoverageError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

// -------------------------------------------------------
// Worker threads (0 = hardware concurrency).
// -------------------------------------------------------
namespace detail {
inline std::atomic<unsigned> g_thread_count{0};
}

inline void set_thread_count(unsigned n) { detail::g_thread_count.store(n); }

inline unsigned thread_count()
{
    unsigned n = detail::g_thread_count.load();
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

// -------------------------------------------------------
// Neumaier (improved Kahan) summation.
// -------------------------------------------------------
class NeumaierSum {
public:
    void add(double v)
    {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    void add(const NeumaierSum& other)
    {
        add(other.sum_);
        add(other.comp_);
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

class ComplexSum {
public:
    void add(cplx v)
    {
        re_.add(v.real());
        im_.add(v.imag());
    }
    void add(double v) { re_.add(v); }
    void add(const ComplexSum& other)
    {
        re_.add(other.re_);
        im_.add(other.im_);
    }
    cplx value() const { return {re_.value(), im_.value()}; }

private:
    NeumaierSum re_;
    NeumaierSum im_;
};

// Runs fn(b) for b in [0, n_blocks) on the worker pool and returns the
// results indexed by block. fn must be safe to call concurrently.
template <typename Result, typename Fn>
std::vector<Result> map_blocks(std::size_t n_blocks, Fn&& fn)
{
    std::vector<Result> out(n_blocks);
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(thread_count(), n_blocks));
    if (workers <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) out[b] = fn(b);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
        for (;;) {
            const std::size_t b = next.fetch_add(1);
            if (b >= n_blocks) return;
            try {
                out[b] = fn(b);
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
                next.store(n_blocks);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

// Inclusive integer range [lo, hi] cut into fixed-size blocks.
struct BlockRange {
    std::int64_t lo;
    std::int64_t hi;
    std::int64_t block;

    std::size_t count() const
    {
        if (hi < lo) return 0;
        return static_cast<std::size_t>((hi - lo) / block + 1);
    }
    std::int64_t begin(std::size_t b) const { return lo + static_cast<std::int64_t>(b) * block; }
    std::int64_t end(std::size_t b) const { return std::min(hi, begin(b) + block - 1); }
};

inline constexpr std::int64_t kReduceBlock = 1 << 16;

} // namespace chowla
