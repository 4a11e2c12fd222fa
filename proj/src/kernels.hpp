#pragma once

// Shared estimator kernels for the plain and multiplier-weighted paths.
// An empty weight span means unit weights.

#include "sninf/core.hpp"
#include "sninf/estimators.hpp"

#include <optional>
#include <span>

namespace sninf::detail {

enum class Undefined { None, TooShort, ZeroVariance, ZeroWeight };

struct ScalarEstimate {
    double value = 0.0;
    Undefined reason = Undefined::None;
};

/// Smallest k >= 1 with k >= tau * total (up to 1e-12 relative slack).
[[nodiscard]] double quantile_threshold(double tau, double total);

/// Direct (two-pass) estimate of an atomic non-mean functional on x[first..last] (0-based inclusive).
[[nodiscard]] ScalarEstimate block_scalar(std::span<const double> x, std::span<const double> w, const Functional& f,
                                          std::size_t first, std::size_t last);

/// Direct estimate of any functional on a 1-based block, weighted by w when non-empty.
/// Returns the p-vector and whether it is defined; undefined components are zero.
[[nodiscard]] std::pair<Vector, Undefined> block_estimate(const TimeSeries& ts, const Functional& f,
                                                          const SubsampleIndex& idx, std::span<const double> w);

/// Prefix (reverse = false) or suffix (reverse = true) sequence of estimates.
[[nodiscard]] EstimateSequence sweep(const TimeSeries& ts, const Functional& f, std::span<const double> w,
                                     bool reverse);

}  // namespace sninf::detail
