#pragma once

#include "sninf/core.hpp"
#include "sninf/table.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace sninf {

/// Standard p-dimensional Brownian motion on the grid t_i = i/m; values.col(i) = B(i/m), col 0 = 0.
struct BrownianPath {
    std::size_t p = 1;
    std::size_t m = 2;
    Matrix values;

    /// Returns the path A * B(.) (used to witness pivotality).
    [[nodiscard]] BrownianPath transformed(const Matrix& a) const;
};

/// Cumulative sums of independent N(0, I/m) increments, deterministic in `seed`.
[[nodiscard]] BrownianPath simulate_brownian(std::size_t p, std::size_t m, std::uint64_t seed);

/// Fills `path` (already sized) from `engine`.
void simulate_brownian(BrownianPath& path, std::mt19937_64& engine);

/**
 * B(1)' [ int_0^1 (B(t) - t B(1))(B(t) - t B(1))' dt ]^{-1} B(1), integral by a
 * left Riemann sum on the path grid. nullopt signals a singular integral (redraw).
 */
[[nodiscard]] std::optional<double> limit_sn_statistic(const BrownianPath& path);

/**
 * V_{0,1}' W(H)^{-1} V_{0,1} with V_{s,t} = B(t) - B(s) and
 * W(H) = sum_i w_i (V_{s_i,t_i} - (t_i - s_i) V_{0,1})(.)'. Atom endpoints are
 * snapped to the path grid. nullopt when W(H) is singular.
 */
[[nodiscard]] std::optional<double> limit_generalized_sn(const BrownianPath& path, const DeltaMeasure& h);

/**
 * sup_r (V_{0,r} - r V_{0,1})' W_r^{-1} (V_{0,r} - r V_{0,1}) over r_grid, with W_r the
 * two-sided integral evaluated on the path grid exactly as the finite-sample V_n(k).
 * Each r is snapped to k = round(r m) in [1, m-1]; an empty r_grid means every k.
 * Singular W_r are skipped; nullopt if all are singular.
 */
[[nodiscard]] std::optional<double> limit_cp_statistic(const BrownianPath& path, std::span<const double> r_grid = {});

/**
 * G(b) = (1-b)^{-1} int_0^{1-b} I{ ||S B(1)|| <= ||S (B(b+t) - B(t) - b B(1))|| / sqrt(b) } dt,
 * S = sigma_half (empty = identity). b is snapped to l/m, l = round(b m) in [1, m-1], and the
 * integral is a left Riemann average over t = 0, 1/m, ..., 1 - b - 1/m.
 */
[[nodiscard]] double limit_fixedb_G(const BrownianPath& path, double b, const Matrix& sigma_half = {});

/// Evaluates the functional selected by `spec` on one path (nullopt = discard and redraw).
[[nodiscard]] std::optional<double> evaluate_limit(const LimitSpec& spec, const BrownianPath& path);

struct LimitSample {
    std::vector<double> values;  // replication order
    std::size_t discarded = 0;
};

/**
 * R replications of the limit functional. Replication r draws from stream
 * (r, attempt) of `seed`, so the sample is identical for any thread count.
 */
[[nodiscard]] LimitSample sample_limit(const LimitSpec& spec, std::size_t reps, std::size_t m, std::uint64_t seed);

/// 0.001, 0.002, ..., 0.999.
[[nodiscard]] std::vector<double> default_levels();

/**
 * Monte Carlo critical-value table. Quantiles use the inverse empirical CDF.
 * @throws ConfigError if reps < 10^4 or a level lies outside (0,1)
 * @throws TableError if more than 1% of draws had to be discarded
 */
[[nodiscard]] CriticalValueTable build_table(const LimitSpec& spec, std::vector<double> levels, std::size_t reps,
                                             std::size_t m, std::uint64_t seed);

}  // namespace sninf
