// arith_sieve.hpp
// Segmented sieving of lambda, mu, Omega and omega, prime enumeration, and
// the binary table cache.
//
// One pass over a block computes Omega(n) and omega(n) for every n in the
// block; the Liouville and Moebius values follow from them:
//   lambda(n) = (-1)^Omega(n)
//   mu(n)     = (-1)^omega(n) if Omega(n) == omega(n) (squarefree), else 0
//
// Cache file layout (little endian):
//   "ARITHTAB" | u16 version = 1 | u8 kind | u8 reserved = 0 |
//   u64 start | u64 len | len x i8 values

#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chowla/common.hpp"

namespace chowla {

enum class ArithKind : std::uint8_t { Liouville = 0, Mobius = 1, BigOmega = 2, SmallOmega = 3 };

inline constexpr std::array<ArithKind, 4> kAllKinds = {
    ArithKind::Liouville, ArithKind::Mobius, ArithKind::BigOmega, ArithKind::SmallOmega};

inline std::string_view kind_name(ArithKind k)
{
    switch (k) {
    case ArithKind::Liouville: return "liouville";
    case ArithKind::Mobius: return "mobius";
    case ArithKind::BigOmega: return "bigomega";
    case ArithKind::SmallOmega: return "smallomega";
    }
    return "?";
}

inline ArithKind parse_kind(std::string_view s)
{
    for (ArithKind k : kAllKinds)
        if (kind_name(k) == s) return k;
    throw ConfigError("unknown arithmetic function kind '" + std::string(s) + "'");
}

// -------------------------------------------------------
// ArithTable: values of one arithmetic function on [start, start + len).
// Immutable once built.
// -------------------------------------------------------
class ArithTable {
public:
    ArithTable(ArithKind kind, std::uint64_t start, std::vector<std::int8_t> values)
        : kind_(kind), start_(start), values_(std::move(values))
    {}

    ArithKind kind() const { return kind_; }
    std::uint64_t start() const { return start_; }
    std::uint64_t len() const { return values_.size(); }
    // one past the last covered n
    std::uint64_t end() const { return start_ + values_.size(); }
    std::span<const std::int8_t> values() const { return values_; }

    bool covers(std::int64_t lo, std::int64_t hi) const
    {
        lo = std::max<std::int64_t>(lo, 1);
        if (hi < lo) return true;
        return static_cast<std::uint64_t>(lo) >= start_ && static_cast<std::uint64_t>(hi) < end();
    }

    // Value at n; 0 for n <= 0 whatever the kind.
    int query(std::int64_t n) const
    {
        if (n <= 0) return 0;
        const auto u = static_cast<std::uint64_t>(n);
        if (u >= end())
            throw RangeError("query: n = " + std::to_string(n) + " beyond table end " +
                             std::to_string(end()));
        if (u < start_)
            throw RangeError("query: n = " + std::to_string(n) + " below table start " +
                             std::to_string(start_));
        return values_[u - start_];
    }

    // Unchecked access for hot loops; caller guarantees start <= n < end.
    int at(std::uint64_t n) const { return values_[n - start_]; }

    friend bool operator==(const ArithTable&, const ArithTable&) = default;

private:
    ArithKind kind_;
    std::uint64_t start_;
    std::vector<std::int8_t> values_;
};

struct SieveOptions {
    std::uint64_t block_size = std::uint64_t{1} << 22;
    // Bytes allowed for one table (or one prime list).
    std::uint64_t memory_budget = std::uint64_t{1} << 30;
};

inline std::uint64_t isqrt(std::uint64_t n)
{
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
    while (r > 0 && r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

// All primes <= limit (simple odd-only sieve; limit is small in practice).
inline std::vector<std::uint64_t> primes_up_to(std::uint64_t limit)
{
    std::vector<std::uint64_t> primes;
    if (limit < 2) return primes;
    primes.push_back(2);
    const std::uint64_t n_odd = (limit - 1) / 2; // odd numbers 3..limit
    std::vector<char> composite(n_odd, 0);
    for (std::uint64_t i = 0; i < n_odd; ++i) {
        if (composite[i]) continue;
        const std::uint64_t p = 2 * i + 3;
        primes.push_back(p);
        for (std::uint64_t m = p * p; m <= limit; m += 2 * p) composite[(m - 3) / 2] = 1;
    }
    return primes;
}

// Calls fn(p) for every prime lo <= p < hi in ascending order.
template <typename Fn>
void for_each_prime(std::uint64_t lo, std::uint64_t hi, Fn&& fn)
{
    if (hi <= 2 || hi <= lo) return;
    lo = std::max<std::uint64_t>(lo, 2);
    const auto base = primes_up_to(isqrt(hi - 1));
    constexpr std::uint64_t kSeg = std::uint64_t{1} << 20;
    std::vector<char> composite;
    for (std::uint64_t seg = lo; seg < hi; seg += kSeg) {
        const std::uint64_t seg_end = std::min(hi, seg + kSeg);
        composite.assign(seg_end - seg, 0);
        for (std::uint64_t p : base) {
            if (p * p >= seg_end) break;
            std::uint64_t m = std::max(p * p, (seg + p - 1) / p * p);
            for (; m < seg_end; m += p) composite[m - seg] = 1;
        }
        for (std::uint64_t n = seg; n < seg_end; ++n)
            if (!composite[n - seg]) fn(n);
    }
}

// -------------------------------------------------------
// DyadicPrimeRange: the primes in [2^m, 2^(m+1)).
// -------------------------------------------------------
struct DyadicPrimeRange {
    int m;
    std::vector<std::uint64_t> primes;
};

inline DyadicPrimeRange primes_in_dyadic(int m, const SieveOptions& opts = {})
{
    if (m < 1) throw RangeError("primes_in_dyadic: m must be >= 1");
    if (m > 40) throw CapacityError("primes_in_dyadic: m = " + std::to_string(m) + " exceeds 40");
    const std::uint64_t lo = std::uint64_t{1} << m;
    // pi(2^(m+1)) - pi(2^m) ~ 2^m / (m log 2); allow 25% headroom
    const double expected = 1.25 * static_cast<double>(lo) / (m * std::log(2.0)) + 16;
    if (expected * sizeof(std::uint64_t) > static_cast<double>(opts.memory_budget))
        throw CapacityError("primes_in_dyadic: prime list for m = " + std::to_string(m) +
                            " exceeds the memory budget");
    DyadicPrimeRange out{m, {}};
    for_each_prime(lo, 2 * lo, [&](std::uint64_t p) { out.primes.push_back(p); });
    return out;
}

namespace detail {

struct FactorCounts {
    std::vector<std::uint8_t> big;   // Omega
    std::vector<std::uint8_t> small; // omega
};

// Omega and omega on [lo, lo + len). base must hold all primes <= isqrt(lo + len - 1).
inline void count_prime_factors(std::uint64_t lo, std::uint64_t len,
                                std::span<const std::uint64_t> base, FactorCounts& out,
                                std::vector<std::uint64_t>& prod)
{
    const std::uint64_t last = lo + len - 1;
    out.big.assign(len, 0);
    out.small.assign(len, 0);
    prod.assign(len, 1);
    for (std::uint64_t p : base) {
        if (p > last / p) break;
        for (std::uint64_t m = (lo + p - 1) / p * p; m <= last; m += p) {
            const std::uint64_t i = m - lo;
            ++out.small[i];
            ++out.big[i];
            prod[i] *= p;
        }
        for (std::uint64_t pk = p * p;;) {
            for (std::uint64_t m = (lo + pk - 1) / pk * pk; m <= last; m += pk) {
                const std::uint64_t i = m - lo;
                ++out.big[i];
                prod[i] *= p;
            }
            if (pk > last / p) break;
            pk *= p;
        }
    }
    // whatever is left of n after removing small primes is 1 or a single large prime
    for (std::uint64_t i = 0; i < len; ++i) {
        if (prod[i] != lo + i) {
            ++out.small[i];
            ++out.big[i];
        }
    }
}

inline std::int8_t derive(ArithKind kind, std::uint8_t big, std::uint8_t small)
{
    switch (kind) {
    case ArithKind::Liouville: return (big & 1) ? -1 : 1;
    case ArithKind::Mobius:
        if (big != small) return 0;
        return (small & 1) ? -1 : 1;
    case ArithKind::BigOmega: return static_cast<std::int8_t>(big);
    case ArithKind::SmallOmega: return static_cast<std::int8_t>(small);
    }
    return 0;
}

inline void validate_range(std::uint64_t start, std::uint64_t len, const SieveOptions& opts)
{
    if (start < 1) throw RangeError("build_table: start must be >= 1");
    if (len < 1) throw RangeError("build_table: len must be >= 1");
    constexpr std::uint64_t kLimit = std::uint64_t{1} << 63;
    if (start > kLimit || len > kLimit - start)
        throw RangeError("build_table: start + len exceeds 2^63");
    if (len > opts.memory_budget)
        throw CapacityError("build_table: len = " + std::to_string(len) +
                            " exceeds the memory budget of " + std::to_string(opts.memory_budget) +
                            " bytes");
}

} // namespace detail

// -------------------------------------------------------
// TableSet: at most one table per kind, shared and immutable.
// -------------------------------------------------------
class TableSet {
public:
    void put(std::shared_ptr<const ArithTable> t)
    {
        tables_[static_cast<std::size_t>(t->kind())] = std::move(t);
    }
    void put(ArithTable t) { put(std::make_shared<const ArithTable>(std::move(t))); }

    const ArithTable* get(ArithKind k) const { return tables_[static_cast<std::size_t>(k)].get(); }
    std::shared_ptr<const ArithTable> shared(ArithKind k) const
    {
        return tables_[static_cast<std::size_t>(k)];
    }

    bool covers(ArithKind k, std::int64_t lo, std::int64_t hi) const
    {
        const ArithTable* t = get(k);
        return t != nullptr && t->covers(lo, hi);
    }

    const ArithTable& require(ArithKind k, std::int64_t lo, std::int64_t hi) const
    {
        const ArithTable* t = get(k);
        lo = std::max<std::int64_t>(lo, 1);
        if (t == nullptr || !t->covers(lo, hi)) {
            std::string msg = "no " + std::string(kind_name(k)) + " table covering [" +
                              std::to_string(lo) + ", " + std::to_string(hi) + "]";
            if (t != nullptr)
                msg += " (have [" + std::to_string(t->start()) + ", " + std::to_string(t->end() - 1) +
                       "])";
            throw CoverageError(msg);
        }
        return *t;
    }

private:
    std::array<std::shared_ptr<const ArithTable>, 4> tables_;
};

// Builds the requested kinds over [start, start + len) in a single sieve pass.
// Output bytes do not depend on the thread count.
inline TableSet build_tables(std::span<const ArithKind> kinds, std::uint64_t start,
                             std::uint64_t len, const SieveOptions& opts = {})
{
    detail::validate_range(start, len, opts);
    if (kinds.size() * len > 4 * opts.memory_budget)
        throw CapacityError("build_tables: requested tables exceed the memory budget");
    const auto base = primes_up_to(isqrt(start + len - 1));
    std::vector<std::vector<std::int8_t>> values(kinds.size(), std::vector<std::int8_t>(len));
    const std::uint64_t block = std::max<std::uint64_t>(opts.block_size, 1);
    const std::size_t n_blocks = static_cast<std::size_t>((len + block - 1) / block);
    map_blocks<char>(n_blocks, [&](std::size_t b) {
        const std::uint64_t off = b * block;
        const std::uint64_t n = std::min(block, len - off);
        detail::FactorCounts counts;
        std::vector<std::uint64_t> prod;
        detail::count_prime_factors(start + off, n, base, counts, prod);
        for (std::size_t k = 0; k < kinds.size(); ++k)
            for (std::uint64_t i = 0; i < n; ++i)
                values[k][off + i] = detail::derive(kinds[k], counts.big[i], counts.small[i]);
        return char{0};
    });
    TableSet out;
    for (std::size_t k = 0; k < kinds.size(); ++k)
        out.put(ArithTable(kinds[k], start, std::move(values[k])));
    return out;
}

inline ArithTable build_table(ArithKind kind, std::uint64_t start, std::uint64_t len,
                              const SieveOptions& opts = {})
{
    const ArithKind kinds[] = {kind};
    auto set = build_tables(kinds, start, len, opts);
    return *set.get(kind);
}

inline int query(const ArithTable& table, std::int64_t n) { return table.query(n); }

// -------------------------------------------------------
// Binary cache
// -------------------------------------------------------
inline constexpr char kCacheMagic[8] = {'A', 'R', 'I', 'T', 'H', 'T', 'A', 'B'};
inline constexpr std::uint16_t kCacheVersion = 1;
inline constexpr std::size_t kCacheHeaderSize = 28;

struct CacheHeader {
    ArithKind kind;
    std::uint64_t start;
    std::uint64_t len;
};

namespace detail {

inline void put_le(std::vector<char>& buf, std::uint64_t v, int bytes)
{
    for (int i = 0; i < bytes; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_le(const unsigned char* p, int bytes)
{
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= std::uint64_t{p[i]} << (8 * i);
    return v;
}

} // namespace detail

inline std::vector<char> encode_header(const ArithTable& t)
{
    std::vector<char> h(std::begin(kCacheMagic), std::end(kCacheMagic));
    detail::put_le(h, kCacheVersion, 2);
    detail::put_le(h, static_cast<std::uint8_t>(t.kind()), 1);
    detail::put_le(h, 0, 1);
    detail::put_le(h, t.start(), 8);
    detail::put_le(h, t.len(), 8);
    return h;
}

inline CacheHeader decode_header(std::span<const unsigned char> bytes)
{
    if (bytes.size() < kCacheHeaderSize) throw IoError("cache: truncated header");
    if (std::memcmp(bytes.data(), kCacheMagic, 8) != 0) throw IoError("cache: bad magic");
    if (detail::get_le(bytes.data() + 8, 2) != kCacheVersion)
        throw IoError("cache: unsupported version");
    const auto kind = detail::get_le(bytes.data() + 10, 1);
    if (kind > 3) throw IoError("cache: bad kind byte");
    if (bytes[11] != 0) throw IoError("cache: reserved byte must be 0");
    return {static_cast<ArithKind>(kind), detail::get_le(bytes.data() + 12, 8),
            detail::get_le(bytes.data() + 20, 8)};
}

// Writes to a temporary name and renames into place.
inline void write_table(const std::filesystem::path& path, const ArithTable& t)
{
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot open " + tmp + " for writing");
        const auto h = encode_header(t);
        os.write(h.data(), static_cast<std::streamsize>(h.size()));
        os.write(reinterpret_cast<const char*>(t.values().data()),
                 static_cast<std::streamsize>(t.len()));
        if (!os) throw IoError("write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename " + tmp + " -> " + path.string() + ": " + ec.message());
}

inline CacheHeader read_header(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    unsigned char h[kCacheHeaderSize];
    is.read(reinterpret_cast<char*>(h), kCacheHeaderSize);
    if (is.gcount() != static_cast<std::streamsize>(kCacheHeaderSize))
        throw IoError("cache: truncated header in " + path.string());
    return decode_header(h);
}

inline ArithTable read_table(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    unsigned char h[kCacheHeaderSize];
    is.read(reinterpret_cast<char*>(h), kCacheHeaderSize);
    if (is.gcount() != static_cast<std::streamsize>(kCacheHeaderSize))
        throw IoError("cache: truncated header in " + path.string());
    const CacheHeader hdr = decode_header(h);
    std::vector<std::int8_t> values(hdr.len);
    is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(hdr.len));
    if (static_cast<std::uint64_t>(is.gcount()) != hdr.len)
        throw IoError("cache: truncated payload in " + path.string());
    return ArithTable(hdr.kind, hdr.start, std::move(values));
}

// -------------------------------------------------------
// TableProvider: hands out tables covering [1, max_n], reusing cached files
// whose header shows they cover the request and sieving the rest in one pass.
// -------------------------------------------------------
class TableProvider {
public:
    explicit TableProvider(std::optional<std::filesystem::path> cache_dir = std::nullopt,
                           SieveOptions opts = {})
        : cache_dir_(std::move(cache_dir)), opts_(opts)
    {}

    const std::optional<std::filesystem::path>& cache_dir() const { return cache_dir_; }

    TableSet ensure(std::span<const ArithKind> kinds, std::uint64_t max_n)
    {
        std::vector<ArithKind> missing;
        for (ArithKind k : kinds) {
            if (have_.covers(k, 1, static_cast<std::int64_t>(max_n))) continue;
            if (auto t = load_cached(k, max_n)) {
                have_.put(std::move(t));
                continue;
            }
            missing.push_back(k);
        }
        if (!missing.empty()) {
            // round up so nearby requests share one cache file
            const std::uint64_t len = (max_n + kGrain - 1) / kGrain * kGrain;
            auto built = build_tables(missing, 1, len, opts_);
            for (ArithKind k : missing) {
                auto t = built.shared(k);
                if (cache_dir_) {
                    std::error_code ec;
                    std::filesystem::create_directories(*cache_dir_, ec);
                    if (ec) throw IoError("cannot create cache dir " + cache_dir_->string());
                    write_table(*cache_dir_ / file_name(k, t->start(), t->len()), *t);
                }
                have_.put(std::move(t));
            }
        }
        TableSet out;
        for (ArithKind k : kinds) out.put(have_.shared(k));
        return out;
    }

    static std::string file_name(ArithKind k, std::uint64_t start, std::uint64_t len)
    {
        return "arith_" + std::string(kind_name(k)) + "_" + std::to_string(start) + "_" +
               std::to_string(len) + ".bin";
    }

private:
    static constexpr std::uint64_t kGrain = std::uint64_t{1} << 20;

    std::shared_ptr<const ArithTable> load_cached(ArithKind k, std::uint64_t max_n) const
    {
        if (!cache_dir_ || !std::filesystem::is_directory(*cache_dir_)) return nullptr;
        std::vector<std::filesystem::path> candidates;
        for (const auto& entry : std::filesystem::directory_iterator(*cache_dir_)) {
            const auto name = entry.path().filename().string();
            if (name.rfind("arith_" + std::string(kind_name(k)) + "_", 0) == 0 &&
                entry.path().extension() == ".bin")
                candidates.push_back(entry.path());
        }
        std::sort(candidates.begin(), candidates.end());
        // smallest covering file wins
        std::optional<std::pair<std::uint64_t, std::filesystem::path>> best;
        for (const auto& path : candidates) {
            CacheHeader h;
            try {
                h = read_header(path);
            } catch (const IoError&) {
                continue;
            }
            if (h.kind != k || h.start != 1 || h.len < max_n) continue;
            if (!best || h.len < best->first) best.emplace(h.len, path);
        }
        if (!best) return nullptr;
        return std::make_shared<const ArithTable>(read_table(best->second));
    }

    std::optional<std::filesystem::path> cache_dir_;
    SieveOptions opts_;
    TableSet have_;
};

} // namespace chowla
