#pragma once

#include "sninf/core.hpp"

#include <span>
#include <vector>

namespace sninf {

struct FixedBResult {
    double pvalue = 1.0;
    std::size_t count = 0;  // number of subsample norms >= the test norm
    double b = 0.0;
    std::size_t l = 0;
    std::size_t N = 0;
    double test_norm = 0.0;  // ||sqrt(n)(theta_hat - theta0)||
    std::vector<double> subsample_norms;
};

/// Block length round(b*n), at least 1. Throws DomainError unless b in (0,1].
[[nodiscard]] std::size_t fixedb_block_length(double b, std::size_t n);

/// ||sqrt(l)(theta_{j,j+l-1} - theta_{1,n})|| for j = 1..n-l+1. Mean uses prefix sums.
[[nodiscard]] std::vector<double> subsample_norms(const TimeSeries& ts, const Functional& f, std::size_t l);

/// L_{n,l}(x) = N^{-1} #{j : norm_j <= x} at each grid point.
[[nodiscard]] std::vector<double> subsampling_distribution(const TimeSeries& ts, const Functional& f, std::size_t l,
                                                           std::span<const double> x_grid);

/// p_hat_n(b) = N^{-1} #{j : ||sqrt(n)(theta_hat - theta0)|| <= norm_j}.
[[nodiscard]] FixedBResult fixedb_pvalue(const TimeSeries& ts, const Functional& f, const Vector& theta0, double b);

}  // namespace sninf
