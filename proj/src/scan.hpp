#pragma once

// Path-level kernels shared by the finite-sample statistics, their multiplier
// bootstrap replicates and the Brownian limit functionals.
//
// A forward path is a p x (n+1) matrix with column 0 = 0 and column t holding
// t*(theta_hat_{1,t} - c) (finite sample) or B(t/m) (limit). A backward path is
// p x (n+2) with column t (1 <= t <= n) holding (n-t+1)*(theta_hat_{t,n} - c)
// or B(1) - B((t-1)/m); columns 0 and n+1 are zero.

#include "sninf/core.hpp"
#include "sninf/estimators.hpp"

#include "linalg.hpp"

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace sninf::detail {

/// Columns t * (prefix estimate t - center), t = 0..n.
[[nodiscard]] Matrix forward_path(const EstimateSequence& prefix, const Vector& center);

/// Columns (n-t+1) * (suffix estimate t - center), t = 1..n, zero at 0 and n+1.
[[nodiscard]] Matrix backward_path(const EstimateSequence& suffix, const Vector& center);

/// Reusable buffers for the scan kernels.
struct ScanWorkspace {
    Matrix grams;  // p*p x (n-1), column k-1 = vec(F(k) + G(k))
    Matrix acc;
    Vector lin;
    Vector dev;
    Vector contrast;
    QuadSolver solver;
};

/// sum_{t=1}^{n} (a_t - (t/n) a_n)(a_t - (t/n) a_n)'.
void bridge_gram(const Matrix& forward, ScanWorkspace& ws, Matrix& out);

/// n * a_n' (bridge_gram)^{-1} a_n; nullopt when the Gram matrix is singular.
[[nodiscard]] std::optional<double> sn_from_path(const Matrix& forward, double scale2, ScanWorkspace& ws);

/// Unscaled forward + backward normalizer F(k) + G(k) for every k = 1..n-1, computed with
/// running moment accumulators in O(n p^2). Result lands in ws.grams.
void cp_gram_path(const Matrix& forward, const Matrix& backward, ScanWorkspace& ws);

/// F(k) + G(k) for one k by direct summation.
[[nodiscard]] Matrix cp_gram_direct(const Matrix& forward, const Matrix& backward, std::size_t k);

struct ScanPoint {
    std::size_t k = 0;
    Vector contrast;  // a_k - (k/n) a_n
    std::optional<double> value;
    double condition = 0.0;
};

struct ScanResult {
    std::vector<ScanPoint> points;  // only when requested
    std::optional<std::size_t> argmax_k;
    double maximum = 0.0;
    std::size_t skipped = 0;
};

/**
 * Scans k in [k_lo, k_hi] for n * c_k' (F(k)+G(k))^{-1} c_k with c_k = a_k - (k/n) a_n.
 * Singular k are skipped; ties go to the smallest k. An empty `ks` scans the whole range,
 * otherwise only the listed k (each within [1, n-1]).
 */
[[nodiscard]] ScanResult cp_scan(const Matrix& forward, const Matrix& backward, std::size_t k_lo, std::size_t k_hi,
                                 double scale2, bool keep_points, ScanWorkspace& ws,
                                 const std::vector<std::size_t>& ks = {});

/// [ceil(n^{1-gamma}), floor(n - n^{1-gamma})] clamped to [1, n-1]; gamma <= 0 gives the full range.
[[nodiscard]] std::pair<std::size_t, std::size_t> clipped_k_range(std::size_t n, double gamma);

}  // namespace sninf::detail
