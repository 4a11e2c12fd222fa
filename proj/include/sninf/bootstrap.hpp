#pragma once

#include "sninf/core.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sninf {

/**
 * @brief Source of the multipliers M_1..M_n, all with mean 1 and variance 1.
 *
 * block_dependent uses M_i = 1 + l_b^{-1/2} (e_i + ... + e_{i+l_b-1}) with IID
 * standard normal e, so M_i and M_j are independent once |i - j| >= l_b.
 * block_length = 0 selects the default ceil(n^{1/3}).
 */
struct MultiplierScheme {
    enum class Kind { IidGaussian, IidRademacher, BlockDependent };
    Kind kind = Kind::IidGaussian;
    std::size_t block_length = 0;
    std::uint64_t seed = 20140101;

    /// Parses "gaussian", "rademacher", "block" or "block:L".
    [[nodiscard]] static MultiplierScheme parse(const std::string& text, std::uint64_t seed);
    [[nodiscard]] std::string to_string() const;
};

/// ceil(n^{1/3}).
[[nodiscard]] std::size_t default_multiplier_block(std::size_t n);

/// Multipliers of stream 0 of the scheme's seed.
[[nodiscard]] std::vector<double> generate_multipliers(const MultiplierScheme& scheme, std::size_t n);

/// Multipliers of an explicit stream, used for bootstrap replicate b.
[[nodiscard]] std::vector<double> generate_multipliers(const MultiplierScheme& scheme, std::size_t n,
                                                       std::uint64_t stream);

/**
 * Multiplier-weighted estimate on a block. Mean: sum M_i X_i / L. Quantile: inverse
 * of the CDF weighted by max(M_i, 0). Autocorrelation: weighted moments around the
 * weighted mean. Unit multipliers reproduce subsample_estimate exactly.
 *
 * @throws EstimatorUndefined if the block carries zero total weight or is too short
 */
[[nodiscard]] Vector bootstrap_estimate(const TimeSeries& ts, const Functional& f, const SubsampleIndex& idx,
                                        std::span<const double> multipliers);

/// Which statistic a bootstrap calibrates.
struct BootstrapTarget {
    enum class Kind { Sn, ChangePoint, FixedB };
    Kind kind = Kind::Sn;
    Vector theta0;   // Sn and FixedB
    double b = 0.1;  // FixedB
};

struct BootstrapResult {
    BootstrapTarget::Kind kind = BootstrapTarget::Kind::Sn;
    double observed = 0.0;
    std::vector<double> replicates;  // successful replicates in replicate order
    std::size_t requested = 0;
    std::size_t failed = 0;
    double pvalue = 1.0;

    /// Inverse empirical CDF of the replicates.
    [[nodiscard]] double quantile(double level) const;
};

/**
 * (1 + #{r : r >= observed}) / (B + 1). Larger values are more extreme; the
 * fixed-b statistic is the negated p-value so that small p-values count as extreme.
 */
[[nodiscard]] double bootstrap_pvalue(double observed, std::span<const double> replicates);

/**
 * B multiplier-bootstrap replicates of the target statistic, each computed from the
 * deviations theta^b - theta_hat of the same blocks the statistic uses. Sn and
 * ChangePoint replicates use the forward (and backward) deviation paths; FixedB
 * replicates compare sqrt(n)||theta^b_{1,n} - theta_{1,n}|| against
 * sqrt(l)||(theta^b - theta)_{block} - (theta^b - theta)_{1,n}||.
 *
 * @throws ConfigError if B < 100
 * @throws BootstrapUnstable if more than 5% of replicates are degenerate
 */
[[nodiscard]] BootstrapResult bootstrap_distribution(const TimeSeries& ts, const Functional& f,
                                                     const BootstrapTarget& target, const MultiplierScheme& scheme,
                                                     std::size_t B);

}  // namespace sninf
