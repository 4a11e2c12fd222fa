#pragma once

#include "sninf/core.hpp"
#include "sninf/table.hpp"

namespace sninf {

struct SnResult {
    double statistic = 0.0;
    Matrix normalizer;
    Vector theta_hat;
    Vector theta0;
    double condition_number = 0.0;
    bool clipped = false;
    double gamma = 0.0;
    std::size_t atoms_used = 0;     // generalized statistics only
    std::size_t atoms_dropped = 0;  // empty-block or clipped atoms
};

/// V_n = n^{-2} sum_j j^2 (theta_{1,j} - theta_{1,n})(...)', exact sum over the recursive estimates.
[[nodiscard]] Matrix sn_matrix(const TimeSeries& ts, const Functional& f);

/**
 * G_n = n (theta_hat - theta0)' V_n^{-1} (theta_hat - theta0).
 * @throws SingularityError if V_n is singular or cond(V_n) > 1e12
 */
[[nodiscard]] SnResult sn_statistic(const TimeSeries& ts, const Functional& f, const Vector& theta0);

/**
 * V_n(H) = sum_i w_i d_i d_i' with d_i = sqrt(n) (t_i - s_i)(theta_hat(block_i) - theta_hat_{1,n}),
 * block_i = (floor(n s_i)+1 .. floor(n t_i)). Atoms whose block is empty contribute nothing.
 * With H = DeltaMeasure::recursive(n) this is exactly V_n.
 */
[[nodiscard]] Matrix generalized_sn_matrix(const TimeSeries& ts, const Functional& f, const DeltaMeasure& h);

/// G_n(H) = n (theta_hat - theta0)' V_n(H)^{-1} (theta_hat - theta0).
[[nodiscard]] SnResult generalized_sn_statistic(const TimeSeries& ts, const Functional& f, const Vector& theta0,
                                                const DeltaMeasure& h);

/**
 * Clipped variant: only atoms with t - s > n^{-gamma} enter the normalizer, which is
 * then divided by their total mass.
 * @throws ConfigError if gamma is outside (0, 1/2) or every atom is clipped
 */
[[nodiscard]] SnResult clipped_sn_statistic(const TimeSeries& ts, const Functional& f, const Vector& theta0,
                                            const DeltaMeasure& h, double gamma);

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;
    double estimate = 0.0;
    double level = 0.0;
    double critical_value = 0.0;
    double normalizer = 0.0;
};

/// {theta0 : G_n(theta0) <= q_level} = theta_hat -/+ sqrt(q_level V_n / n) for scalar functionals.
[[nodiscard]] ConfidenceInterval sn_confidence_interval(const TimeSeries& ts, const Functional& f, double level,
                                                        const CriticalValueTable& table);

}  // namespace sninf
