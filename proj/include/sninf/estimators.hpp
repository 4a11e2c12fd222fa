#pragma once

#include "sninf/core.hpp"

#include <map>
#include <span>
#include <vector>

namespace sninf {

/**
 * @brief Estimates indexed by position, stored column-wise.
 *
 * values.col(i) is the p-vector for position i+1. Positions where the
 * estimator is undefined (block too short, zero variance, zero weight)
 * hold the zero vector and defined[i] == false, following the 0/0 = 0
 * convention for empty blocks.
 */
struct EstimateSequence {
    Matrix values;
    std::vector<bool> defined;

    [[nodiscard]] std::size_t size() const noexcept { return defined.size(); }
    [[nodiscard]] std::size_t undefined_count() const noexcept;
    /// Estimate at 1-based position k.
    [[nodiscard]] Vector at(std::size_t k) const { return values.col(static_cast<Eigen::Index>(k - 1)); }
};

/**
 * @brief Plug-in estimate on the block X_first..X_last.
 *
 * Mean: block average. Quantile(tau): left-continuous inverse of the block
 * empirical CDF, i.e. the ceil(tau*L)-th order statistic. Autocorrelation(h):
 * block-mean centered lag-h sum of products over the block sum of squares,
 * defined only for blocks of length >= h+2. Composite: concatenation.
 *
 * @throws DomainError for an invalid index or incompatible functional
 * @throws EstimatorUndefined if the block is too short for the lag
 * @throws SingularityError if the block has zero variance (Autocorrelation)
 */
[[nodiscard]] Vector subsample_estimate(const TimeSeries& ts, const Functional& f, const SubsampleIndex& idx);

/// theta_hat_{1,k} for k = 1..n. Mean uses prefix sums; Quantile a sorted-insert sweep.
[[nodiscard]] EstimateSequence recursive_estimates(const TimeSeries& ts, const Functional& f);

/// theta_hat_{t,n} for t = 1..n (suffix blocks).
[[nodiscard]] EstimateSequence reverse_recursive_estimates(const TimeSeries& ts, const Functional& f);

/// Estimates for an explicit list of blocks.
class EstimateGrid {
public:
    struct Entry {
        Vector value;
        bool defined = true;
    };

    EstimateGrid(Functional functional, std::size_t n) : functional_(std::move(functional)), n_(n) {}

    [[nodiscard]] const Functional& functional() const noexcept { return functional_; }
    [[nodiscard]] std::size_t n() const noexcept { return n_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    [[nodiscard]] const std::map<SubsampleIndex, Entry>& entries() const noexcept { return entries_; }

    /// Throws DomainError if the block was not requested.
    [[nodiscard]] const Entry& at(const SubsampleIndex& idx) const;

    void insert(const SubsampleIndex& idx, Entry e) { entries_.insert_or_assign(idx, std::move(e)); }

private:
    Functional functional_;
    std::size_t n_;
    std::map<SubsampleIndex, Entry> entries_;
};

/// Fills the grid for the requested blocks. Undefined blocks are stored as flagged zeros.
[[nodiscard]] EstimateGrid grid_estimates(const TimeSeries& ts, const Functional& f,
                                          std::span<const SubsampleIndex> pairs);

}  // namespace sninf
