#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "chowla/arith_sieve.hpp"
#include "oracles.hpp"

using namespace chowla;

namespace {

std::vector<int> as_ints(const ArithTable& t)
{
    return {t.values().begin(), t.values().end()};
}

} // namespace

TEST(BuildTable, SmallExamples)
{
    EXPECT_EQ(as_ints(build_table(ArithKind::Liouville, 1, 10)),
              (std::vector<int>{1, -1, -1, 1, -1, 1, -1, -1, 1, 1}));
    EXPECT_EQ(as_ints(build_table(ArithKind::Mobius, 1, 10)),
              (std::vector<int>{1, -1, -1, 0, -1, 1, -1, 0, 0, 1}));
    EXPECT_EQ(as_ints(build_table(ArithKind::BigOmega, 12, 1)), std::vector<int>{3});
}

TEST(BuildTable, MatchesTrialDivisionToAMillion)
{
    constexpr std::uint64_t kN = 1000000;
    auto set = build_tables(kAllKinds, 1, kN);
    const auto& lam = *set.get(ArithKind::Liouville);
    const auto& mu = *set.get(ArithKind::Mobius);
    const auto& big = *set.get(ArithKind::BigOmega);
    const auto& small = *set.get(ArithKind::SmallOmega);
    std::uint64_t mismatches = 0;
    for (std::uint64_t n = 1; n <= kN; ++n) {
        const auto f = oracle::trial_division(n);
        const int l = f.big % 2 ? -1 : 1;
        const int m = f.big != f.small ? 0 : (f.small % 2 ? -1 : 1);
        mismatches += lam.at(n) != l;
        mismatches += mu.at(n) != m;
        mismatches += big.at(n) != f.big;
        mismatches += small.at(n) != f.small;
    }
    EXPECT_EQ(mismatches, 0u);
}

TEST(BuildTable, InvariantsBetweenKinds)
{
    auto set = build_tables(kAllKinds, 999000, 5000);
    for (std::uint64_t n = 999000; n < 1004000; ++n) {
        const int big = set.get(ArithKind::BigOmega)->at(n);
        const int small = set.get(ArithKind::SmallOmega)->at(n);
        const int lam = set.get(ArithKind::Liouville)->at(n);
        const int mu = set.get(ArithKind::Mobius)->at(n);
        ASSERT_LE(small, big);
        ASSERT_EQ(lam, big % 2 ? -1 : 1);
        ASSERT_EQ(mu * mu == 1, big == small);
        if (big == small) {
            ASSERT_EQ(mu, small % 2 ? -1 : 1);
        }
    }
}

TEST(BuildTable, OffsetStartAgainstTrialDivision)
{
    const std::uint64_t start = (std::uint64_t{1} << 40) + 12345;
    auto set = build_tables(kAllKinds, start, 300);
    for (std::uint64_t n = start; n < start + 300; ++n) {
        const auto f = oracle::trial_division(n);
        ASSERT_EQ(set.get(ArithKind::BigOmega)->at(n), f.big) << n;
        ASSERT_EQ(set.get(ArithKind::SmallOmega)->at(n), f.small) << n;
    }
}

TEST(BuildTable, BlockDecompositionInvariance)
{
    const std::uint64_t a = 77777, len = 300000;
    SieveOptions small_blocks;
    small_blocks.block_size = 4099;
    const auto whole = build_table(ArithKind::Mobius, a, len);
    const auto chunked = build_table(ArithKind::Mobius, a, len, small_blocks);
    EXPECT_EQ(whole, chunked);

    const auto left = build_table(ArithKind::Mobius, a, 123456);
    const auto right = build_table(ArithKind::Mobius, a + 123456, len - 123456);
    std::vector<std::int8_t> joined(left.values().begin(), left.values().end());
    joined.insert(joined.end(), right.values().begin(), right.values().end());
    EXPECT_EQ(ArithTable(ArithKind::Mobius, a, joined), whole);
}

TEST(BuildTable, IdenticalAcrossThreadCounts)
{
    set_thread_count(1);
    const auto one = build_table(ArithKind::Liouville, 1, 3000000, {std::uint64_t{1} << 18, std::uint64_t{1} << 30});
    set_thread_count(5);
    const auto five = build_table(ArithKind::Liouville, 1, 3000000, {std::uint64_t{1} << 18, std::uint64_t{1} << 30});
    set_thread_count(0);
    EXPECT_EQ(one, five);
}

TEST(BuildTable, SquarefreeDensityAtTenMillion)
{
    constexpr std::uint64_t kX = 10000000;
    const auto mu = build_table(ArithKind::Mobius, 1, kX);
    std::uint64_t count = 0;
    for (auto v : mu.values()) count += (v != 0);
    const double ratio = static_cast<double>(count) / kX;
    // direct count with the d^2 crossing-out oracle
    const auto sf = oracle::squarefree_flags(kX);
    std::uint64_t direct = 0;
    for (std::uint64_t n = 1; n <= kX; ++n) direct += sf[n];
    EXPECT_EQ(count, direct);
    EXPECT_NEAR(ratio, 0.607927, 1e-3);
}

TEST(BuildTable, Errors)
{
    EXPECT_THROW(build_table(ArithKind::Liouville, 0, 10), RangeError);
    EXPECT_THROW(build_table(ArithKind::Liouville, 1, 0), RangeError);
    EXPECT_THROW(build_table(ArithKind::Liouville, std::uint64_t{1} << 63, 10), RangeError);
    SieveOptions tiny;
    tiny.memory_budget = 1000;
    EXPECT_THROW(build_table(ArithKind::Liouville, 1, 1001, tiny), CapacityError);
}

TEST(Query, ConventionsAndBounds)
{
    const auto lam = build_table(ArithKind::Liouville, 1, 100);
    const auto mu = build_table(ArithKind::Mobius, 1, 100);
    EXPECT_EQ(query(lam, -3), 0);
    EXPECT_EQ(query(lam, 0), 0);
    EXPECT_EQ(query(lam, 8), -1);
    EXPECT_EQ(query(mu, 4), 0);
    EXPECT_THROW(query(lam, 101), RangeError);
    const auto big = build_table(ArithKind::BigOmega, 50, 10);
    EXPECT_EQ(query(big, -1), 0);
    EXPECT_THROW(query(big, 49), RangeError);
}

TEST(Primes, Dyadic)
{
    EXPECT_EQ(primes_in_dyadic(4).primes, (std::vector<std::uint64_t>{17, 19, 23, 29, 31}));
    EXPECT_EQ(primes_in_dyadic(1).primes, (std::vector<std::uint64_t>{2, 3}));
    // trial-division count over [1024, 2048)
    std::size_t expected = 0;
    for (std::uint64_t n = 1024; n < 2048; ++n) expected += oracle::is_prime(n);
    EXPECT_EQ(expected, 137u);
    EXPECT_EQ(primes_in_dyadic(10).primes.size(), expected);
    EXPECT_THROW(primes_in_dyadic(41), CapacityError);
    EXPECT_THROW(primes_in_dyadic(0), RangeError);
    // m = 40 would need roughly 300 GB of prime list
    EXPECT_THROW(primes_in_dyadic(40), CapacityError);
}

TEST(Primes, DyadicCompleteAndPrime)
{
    for (int m = 1; m <= 14; ++m) {
        const auto r = primes_in_dyadic(m);
        std::vector<std::uint64_t> expected;
        for (std::uint64_t n = std::uint64_t{1} << m; n < (std::uint64_t{2} << m); ++n)
            if (oracle::is_prime(n)) expected.push_back(n);
        EXPECT_EQ(r.primes, expected) << "m = " << m;
    }
}

TEST(Cache, HeaderIsBitExact)
{
    const auto t = build_table(ArithKind::Mobius, 7, 3);
    const auto h = encode_header(t);
    const std::vector<unsigned char> expected = {'A', 'R', 'I', 'T', 'H', 'T', 'A', 'B', 1, 0, 1, 0,
                                                 7,   0,   0,   0,   0,   0,   0,   0,   3, 0, 0, 0,
                                                 0,   0,   0,   0};
    ASSERT_EQ(h.size(), expected.size());
    for (std::size_t i = 0; i < h.size(); ++i) EXPECT_EQ(static_cast<unsigned char>(h[i]), expected[i]) << i;
}

TEST(Cache, RoundTripAndFileLayout)
{
    const auto dir = std::filesystem::temp_directory_path() / "chowla_cache_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    std::mt19937_64 rng(7);
    for (ArithKind k : kAllKinds) {
        const std::uint64_t start = 1 + rng() % 100000, len = 1 + rng() % 5000;
        const auto t = build_table(k, start, len);
        const auto path = dir / "t.bin";
        write_table(path, t);
        EXPECT_EQ(std::filesystem::file_size(path), kCacheHeaderSize + len);
        EXPECT_EQ(read_table(path), t);
    }
    // negative values are stored as two's complement bytes
    const auto lam = build_table(ArithKind::Liouville, 2, 1);
    write_table(dir / "l.bin", lam);
    std::ifstream is(dir / "l.bin", std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(is)), {});
    EXPECT_EQ(static_cast<unsigned char>(bytes.back()), 0xffu);
    std::filesystem::remove_all(dir);
}

TEST(Cache, RejectsCorruptFiles)
{
    const auto dir = std::filesystem::temp_directory_path() / "chowla_cache_bad";
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "bad.bin", std::ios::binary);
        os << "NOTATAB!";
    }
    EXPECT_THROW(read_table(dir / "bad.bin"), IoError);
    EXPECT_THROW(read_table(dir / "missing.bin"), IoError);
    std::filesystem::remove_all(dir);
}

TEST(Cache, ProviderReusesCoveringFile)
{
    const auto dir = std::filesystem::temp_directory_path() / "chowla_provider_test";
    std::filesystem::remove_all(dir);
    const ArithKind kinds[] = {ArithKind::Liouville, ArithKind::SmallOmega};
    {
        TableProvider p(dir);
        auto set = p.ensure(kinds, 2000000);
        EXPECT_GE(set.get(ArithKind::Liouville)->end(), 2000001u);
    }
    std::size_t files = 0;
    for (auto& e : std::filesystem::directory_iterator(dir)) files += e.is_regular_file();
    EXPECT_EQ(files, 2u);
    TableProvider again(dir);
    auto set = again.ensure(kinds, 1500000);
    EXPECT_EQ(set.get(ArithKind::SmallOmega)->at(1234567), oracle::trial_division(1234567).small);
    files = 0;
    for (auto& e : std::filesystem::directory_iterator(dir)) files += e.is_regular_file();
    EXPECT_EQ(files, 2u);
    std::filesystem::remove_all(dir);
}
