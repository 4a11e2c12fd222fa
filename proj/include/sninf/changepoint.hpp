#pragma once

#include "sninf/core.hpp"

#include <optional>
#include <vector>

namespace sninf {

struct CpPoint {
    std::size_t k = 0;
    Vector t_stat;                // T_n(k) = (k / sqrt(n)) (theta_{1,k} - theta_{1,n})
    std::optional<double> value;  // T_n(k)' V_n(k)^{-1} T_n(k); empty when V_n(k) is singular
};

struct CpResult {
    double statistic = 0.0;
    std::size_t argmax_k = 0;
    std::vector<CpPoint> per_k;
    std::vector<std::size_t> skipped_k;
    std::size_t k_lo = 0;
    std::size_t k_hi = 0;
    bool clipped = false;
    double gamma = 0.0;
};

/**
 * V_n(k) = n^{-2} { sum_{t<=k} t^2 (theta_{1,t} - theta_{1,k})(.)'
 *                 + sum_{t>k} (n-t+1)^2 (theta_{t,n} - theta_{k+1,n})(.)' },
 * summed directly. Requires 1 <= k <= n-1.
 */
[[nodiscard]] Matrix cp_normalizer(const TimeSeries& ts, const Functional& f, std::size_t k);

/// V_n(k) for every k = 1..n-1 (element k-1), from running moment accumulators in O(n p^2).
[[nodiscard]] std::vector<Matrix> cp_normalizer_path(const TimeSeries& ts, const Functional& f);

/**
 * G_n = max_k T_n(k)' V_n(k)^{-1} T_n(k) over k = 1..n-1, or over
 * k/n in [n^{-gamma}, 1 - n^{-gamma}] when `clipped`. Singular V_n(k) are
 * skipped and listed; ties resolve to the smallest k.
 *
 * @throws DomainError if n < 4
 * @throws SingularityError if every scanned k is singular
 */
[[nodiscard]] CpResult cp_statistic(const TimeSeries& ts, const Functional& f, const InferenceConfig& config,
                                    bool clipped = false);

}  // namespace sninf
