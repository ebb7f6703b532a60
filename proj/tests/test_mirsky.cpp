#include <gtest/gtest.h>

#include <numbers>

#include "chowla/mirsky.hpp"
#include "oracles.hpp"

using namespace chowla;

namespace {

constexpr std::uint64_t kX = 10000000;

const TableSet& mu_tables()
{
    static const TableSet set = [] {
        TableSet s;
        s.put(build_table(ArithKind::Mobius, 1, kX + 8));
        return s;
    }();
    return set;
}

// direct counts of squarefree patterns, computed once per mask
double oracle_density(unsigned mask, int length)
{
    static std::map<std::pair<unsigned, int>, double> memo;
    auto key = std::make_pair(mask, length);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    return memo[key] = oracle::squarefree_pattern_density(mask, length, kX);
}

std::vector<int> from_mask(unsigned mask, int length)
{
    std::vector<int> eps;
    for (int j = 0; j < length; ++j) eps.push_back((mask >> j) & 1u ? 1 : 0);
    return eps;
}

} // namespace

TEST(LocalCount, Examples)
{
    const int s0[] = {0};
    const int s01[] = {0, 1};
    const int s0123[] = {0, 1, 2, 3};
    EXPECT_EQ(local_count(s0, 2), 1);
    EXPECT_EQ(local_count(s01, 3), 2);
    EXPECT_EQ(local_count(s0123, 2), 4);
    for (std::uint64_t p : {2u, 3u, 5u, 7u, 101u}) EXPECT_EQ(local_count(s0123, p), 4);
    EXPECT_THROW(local_count(std::span<const int>{}, 2), DomainError);
}

TEST(AllSquarefree, Examples)
{
    const int s0[] = {0};
    const int s01[] = {0, 1};
    const auto d0 = all_squarefree_density(s0, 100000);
    EXPECT_NEAR(d0.value, 0.607927, 1e-4);
    EXPECT_NEAR(d0.value, 6.0 / (std::numbers::pi * std::numbers::pi), 1e-5);
    EXPECT_NEAR(d0.value, oracle_density(1u, 1), 1e-4);
    EXPECT_LE(d0.tail_bound, 1e-4);
    const auto d01 = all_squarefree_density(s01, 100000);
    EXPECT_NEAR(d01.value, 0.322634, 1e-3);
    EXPECT_NEAR(d01.value, oracle_density(3u, 2), 1e-3);
    const auto empty = all_squarefree_density({}, 100000);
    EXPECT_EQ(empty.value, 1.0);
    EXPECT_EQ(empty.tail_bound, 0.0);
    EXPECT_THROW(all_squarefree_density(s0, 999), DomainError);
}

TEST(AllSquarefree, MonotoneInTheShiftSet)
{
    const std::vector<std::vector<int>> chain = {{0}, {0, 1}, {0, 1, 2}, {0, 1, 2, 3}};
    double prev = 1.0;
    for (const auto& s : chain) {
        const double v = all_squarefree_density(s, 10000).value;
        EXPECT_LT(v, prev);
        prev = v;
    }
}

TEST(PatternConstant, Examples)
{
    const int all[] = {1, 1, 1, 1};
    const auto c = pattern_constant(all);
    EXPECT_EQ(c.density, 0.0);
    EXPECT_EQ(c.value, 0.0);
    EXPECT_EQ(c.r, 4);

    const int zero[] = {0};
    EXPECT_NEAR(pattern_constant(zero).value, 1.0 - 6.0 / (std::numbers::pi * std::numbers::pi), 1e-4);
    EXPECT_NEAR(pattern_constant(zero).value, oracle_density(0u, 1), 1e-3);

    const int plus_zero[] = {1, 0};
    EXPECT_NEAR(pattern_constant(plus_zero).value, 0.5 * (0.607927 - 0.322634), 1e-3);

    const int mixed[] = {1, -1};
    EXPECT_NEAR(pattern_constant(mixed).value, 0.08066, 1e-4);

    const int five[] = {1, 0, 1, 0, 1};
    EXPECT_THROW(pattern_constant(five), DomainError);
    const int bad[] = {2};
    EXPECT_THROW(pattern_constant(bad), DomainError);
}

TEST(PatternConstant, AgreesWithDirectCountsUpToLengthThree)
{
    for (int len = 1; len <= 3; ++len)
        for (unsigned mask = 0; mask < (1u << len); ++mask) {
            const auto eps = from_mask(mask, len);
            const auto c = pattern_constant(eps);
            EXPECT_NEAR(c.density, oracle_density(mask, len), 1e-3) << "mask " << mask << " len " << len;
            EXPECT_NEAR(std::ldexp(c.value, c.r), c.density, 1e-15);
        }
}

TEST(PatternConstant, InclusionExclusionSumsToOne)
{
    for (int len = 1; len <= 4; ++len) {
        double total = 0.0, tail = 0.0;
        for (unsigned mask = 0; mask < (1u << len); ++mask) {
            const auto c = pattern_constant(from_mask(mask, len));
            total += std::ldexp(c.value, c.r);
            tail += std::ldexp(c.tail_bound, c.r);
            EXPECT_GE(c.value, -1e-12);
            EXPECT_LE(c.value, 1.0);
        }
        EXPECT_NEAR(total, 1.0, tail + 1e-12) << len;
    }
}

TEST(BruteForce, Examples)
{
    const auto& t = mu_tables();
    const int all[] = {1, -1, 1, 1};
    EXPECT_EQ(brute_force_density(all, 100000, t), 0.0);
    const int plus[] = {1};
    EXPECT_NEAR(brute_force_density(plus, kX, t), 0.6079, 5e-4);
    EXPECT_EQ(brute_force_density(plus, kX, t), oracle_density(1u, 1));
    const int zz[] = {0, 0};
    const double nn = brute_force_density(zz, kX, t);
    EXPECT_NEAR(nn, 1.0 - 2 * 0.607927 + 0.322634, 1e-3);
    EXPECT_EQ(nn, oracle_density(0u, 2));
}

TEST(BruteForce, Errors)
{
    const auto& t = mu_tables();
    const int plus[] = {1};
    EXPECT_THROW(brute_force_density(plus, 0, t), DomainError);
    EXPECT_THROW(brute_force_density(plus, 100000001, t), DomainError);
    EXPECT_THROW(brute_force_density(plus, kX + 100, t), CoverageError);
}
