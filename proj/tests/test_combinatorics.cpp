#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "batchrisk/combinatorics.hpp"
#include "batchrisk/errors.hpp"
#include "oracles.hpp"

using namespace batchrisk;

TEST_CASE("binom basics") {
    CHECK(static_cast<std::uint64_t>(binom(5, 2)) == 10);
    CHECK(static_cast<std::uint64_t>(binom(7, 0)) == 1);
    CHECK(static_cast<std::uint64_t>(binom(0, 0)) == 1);
    CHECK(static_cast<std::uint64_t>(binom(10, 5)) == 252);
    CHECK_THROWS_AS(binom(3, 4), ArgumentError);
    CHECK_THROWS_AS(binom(-1, 0), ArgumentError);
}

TEST_CASE("binom matches Pascal's triangle") {
    for (int n = 0; n <= 30; ++n)
        for (int k = 0; k <= n; ++k)
            CHECK(static_cast<std::uint64_t>(binom(n, k)) == oracles::pascal_binom(n, k));
}

TEST_CASE("binom overflows beyond 128 bits") {
    CHECK_NOTHROW(binom(128, 64));  // ~2.4e37, still representable
    CHECK_THROWS_AS(binom(200, 100), OverflowError);
}

TEST_CASE("binom_within respects the cap") {
    std::uint64_t out = 0;
    CHECK(binom_within(12, 6, kEnumerationCap, out));
    CHECK(out == 924);
    CHECK_FALSE(binom_within(40, 20, kEnumerationCap, out));
}

TEST_CASE("log_binom agrees with exact binomials") {
    for (int n = 1; n <= 60; ++n)
        for (int k = 0; k <= n; ++k) {
            const double exact =
                std::log(static_cast<double>(static_cast<std::uint64_t>(binom(n, k))));
            CHECK(log_binom(n, k) == doctest::Approx(exact).epsilon(1e-12));
        }
}

TEST_CASE("colex enumeration order and coverage") {
    std::vector<std::vector<int>> seen;
    for_each_subset_colex(4, 2, [&](const std::vector<int>& s) { seen.push_back(s); });
    const std::vector<std::vector<int>> expected = {{0, 1}, {0, 2}, {1, 2},
                                                    {0, 3}, {1, 3}, {2, 3}};
    CHECK(seen == expected);

    // Coverage: every k-subset exactly once, sorted internally.
    for (int n : {1, 5, 9}) {
        for (int k = 1; k <= n; ++k) {
            std::set<std::vector<int>> unique;
            std::uint64_t count = 0;
            for_each_subset_colex(n, k, [&](const std::vector<int>& s) {
                CHECK(std::is_sorted(s.begin(), s.end()));
                unique.insert(s);
                ++count;
            });
            CHECK(count == static_cast<std::uint64_t>(binom(n, k)));
            CHECK(unique.size() == count);
        }
    }
}
