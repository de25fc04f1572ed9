#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "batchrisk/errors.hpp"

namespace batchrisk {

using Uint128 = unsigned __int128;

// Exact enumerators (subsets, multisets, loss-table columns) refuse beyond
// this many evaluations.
inline constexpr std::uint64_t kEnumerationCap = 2'000'000;

namespace detail {
inline constexpr Uint128 gcd_u128(Uint128 a, Uint128 b) {
    while (b != 0) {
        const Uint128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}
} // namespace detail

// Exact binomial coefficient in 128-bit arithmetic. Cancelling the gcd before
// each multiply keeps every intermediate equal to a prefix binomial
// C(n-k+i, i), so overflow fires only when the result itself does not fit.
inline Uint128 binom(int n, int k) {
    if (n < 0 || k < 0) throw ArgumentError("binom: negative argument");
    if (k > n)
        throw ArgumentError("binom: k=" + std::to_string(k) + " exceeds n=" + std::to_string(n));
    if (k > n - k) k = n - k;
    Uint128 result = 1;
    constexpr Uint128 kMax = ~Uint128{0};
    for (int i = 1; i <= k; ++i) {
        Uint128 factor = static_cast<Uint128>(n - k + i);
        Uint128 divisor = static_cast<Uint128>(i);
        const Uint128 g = detail::gcd_u128(factor, divisor);
        factor /= g;
        divisor /= g;
        result /= divisor;  // exact: divisor | result once gcd(factor, divisor) = 1
        if (result > kMax / factor)
            throw OverflowError("binom(" + std::to_string(n) + "," + std::to_string(k) +
                                ") exceeds 128 bits");
        result *= factor;
    }
    return result;
}

// Binomial as double when it fits the cap, used by enumeration budgets.
inline bool binom_within(int n, int k, std::uint64_t cap, std::uint64_t& out) {
    if (k > n - k) k = n - k;
    Uint128 result = 1;
    for (int i = 1; i <= k; ++i) {
        result = result * static_cast<Uint128>(n - k + i) / static_cast<Uint128>(i);
        if (result > static_cast<Uint128>(cap)) return false;
    }
    out = static_cast<std::uint64_t>(result);
    return true;
}

// ln C(n,k) via log-gamma; bound formulas need this far beyond 128-bit range.
inline double log_binom(double n, double k) {
    if (k < 0 || k > n) throw ArgumentError("log_binom: k outside [0, n]");
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Visits every k-subset of {0,..,n-1} in colexicographic order, the canonical
// column order for loss tables: {0,1}, {0,2}, {1,2}, {0,3}, ...
// The callback receives the sorted index set of the current subset.
template <typename Fn>
void for_each_subset_colex(int n, int k, Fn&& fn) {
    if (k < 0 || k > n) throw ArgumentError("subset enumeration: k outside [0, n]");
    if (k == 0) {
        fn(std::vector<int>{});
        return;
    }
    std::vector<int> subset(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) subset[static_cast<std::size_t>(i)] = i;
    for (;;) {
        fn(const_cast<const std::vector<int>&>(subset));
        // Advance: bump the lowest index that can move without colliding.
        int i = 0;
        while (i < k) {
            const int limit = (i + 1 < k) ? subset[static_cast<std::size_t>(i + 1)] : n;
            if (subset[static_cast<std::size_t>(i)] + 1 < limit) break;
            ++i;
        }
        if (i == k) return;
        ++subset[static_cast<std::size_t>(i)];
        for (int j = 0; j < i; ++j) subset[static_cast<std::size_t>(j)] = j;
    }
}

} // namespace batchrisk
