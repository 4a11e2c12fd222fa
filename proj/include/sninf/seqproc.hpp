#pragma once

#include "sninf/core.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace sninf {

/// Y_n(s, t, y) for indicator functions I{. <= y}; values(pair, y).
struct SeqProcessValues {
    std::vector<double> y_grid;
    std::vector<FractionPair> st_grid;
    Matrix values;
};

/**
 * Y_n(s,t,y) = (t - s) sqrt(n) (F_{s,t}(y) - F(y)) with F_{s,t} the empirical CDF of
 * X_{floor(ns)+1}..X_{floor(nt)} and F the caller's reference CDF at y_grid.
 * Pairs whose block is empty give a row of zeros. Uses a prefix-count table of
 * size (n+1) x |y_grid|.
 *
 * @throws DomainError unless d = 1, y_grid is sorted and the reference is a CDF on it
 */
[[nodiscard]] SeqProcessValues sequential_process(const TimeSeries& ts, std::span<const double> y_grid,
                                                  std::span<const FractionPair> st_grid,
                                                  std::span<const double> reference_cdf);

struct IdentityReport {
    std::size_t pairs_checked = 0;
    double max_violation = 0.0;  // relative to max(|lhs|, |rhs|, max |X|)
    FractionPair worst{0.0, 0.0};
};

/**
 * Checks, for the mean of each column and every pair,
 *   y_{s,t} - x = n / max(floor(nt) - floor(ns), 1) * ( (floor(nt)/n)(x_t - x) - (floor(ns)/n)(x_s - x) )
 * where y_{s,t} is the block mean (summed directly) and x_t the prefix mean. Empty
 * blocks count as zero on both sides.
 *
 * @throws IdentityFailure if the largest violation exceeds `tolerance`
 */
[[nodiscard]] IdentityReport prop1_identity_check(const TimeSeries& ts, const Vector& reference,
                                                  std::span<const FractionPair> pairs, double tolerance = 1e-12);

/// The same check over every pair (a/K, b/K), 0 <= a <= b <= K.
[[nodiscard]] IdentityReport prop1_identity_check(const TimeSeries& ts, const Vector& reference, std::size_t grid,
                                                  double tolerance = 1e-12);

struct CounterexampleRow {
    std::size_t n = 0;
    std::size_t block = 0;    // floor(n * n^{-3/4}) = floor(n^{1/4})
    std::size_t planted = 0;  // #{j >= 1 : j < n^{1/3}}
    bool fully_planted = false;
    double median = 0.0;
    double value = 0.0;        // sqrt(n) n^{-3/4} (median - 1/2)
    double closed_form = 0.0;  // n^{-1/4} (n - 1/2)
};

/**
 * Series with X_j = n for j < n^{1/3} and IID U[0,1] afterwards; evaluates the scaled
 * median deviation on the prefix block of fraction n^{-3/4}. The closed form holds
 * whenever the prefix block is fully planted.
 *
 * @throws DomainError if some n has an empty prefix block (n < 1)
 */
[[nodiscard]] std::vector<CounterexampleRow> counterexample_demo(std::span<const std::size_t> n_values,
                                                                 std::uint64_t seed = 20140101);

}  // namespace sninf
