#pragma once

#include "sninf/core.hpp"

#include <limits>
#include <optional>
#include <string>

namespace sninf::detail {

/// Relative condition-number ceiling beyond which a normalizer is treated as singular.
inline constexpr double kMaxCondition = 1e12;

struct QuadraticForm {
    double value = 0.0;
    double condition = 0.0;
};

/**
 * Evaluates x' M^{-1} x for symmetric PSD normalizers M, reusing its
 * eigen-decomposition workspace across calls of the same size.
 *
 * `scale2` is a squared magnitude of the quantities M was built from; M is
 * treated as numerically zero when its largest eigenvalue is <= 1e-20 * scale2.
 * A singular M, or one with cond(M) > kMaxCondition, yields nullopt and the
 * condition number (possibly +inf) is left in `last_condition()`.
 */
class QuadSolver {
public:
    template <typename MatT, typename VecT>
    std::optional<QuadraticForm> solve(const MatT& m, const VecT& x, double scale2) {
        const Eigen::Index p = x.size();
        if (p == 1) {
            const double v = m(0, 0);
            last_condition_ = (v > 0.0 && v > 1e-20 * scale2) ? 1.0 : kInf;
            if (last_condition_ > kMaxCondition) return std::nullopt;
            return QuadraticForm{x(0) * x(0) / v, 1.0};
        }
        sym_ = 0.5 * (m + m.transpose());
        es_.compute(sym_);
        const auto& ev = es_.eigenvalues();
        const double lo = ev.minCoeff();
        const double hi = ev.maxCoeff();
        last_condition_ = lo > 0.0 ? hi / lo : kInf;
        if (!(hi > 1e-20 * scale2)) last_condition_ = kInf;
        if (!(last_condition_ <= kMaxCondition)) return std::nullopt;
        proj_.noalias() = es_.eigenvectors().transpose() * x;
        double q = 0.0;
        for (Eigen::Index i = 0; i < p; ++i) q += proj_(i) * proj_(i) / ev(i);
        return QuadraticForm{q, last_condition_};
    }

    [[nodiscard]] double last_condition() const noexcept { return last_condition_; }

private:
    static constexpr double kInf = std::numeric_limits<double>::infinity();
    Matrix sym_;
    Vector proj_;
    Eigen::SelfAdjointEigenSolver<Matrix> es_;
    double last_condition_ = 0.0;
};

/// One-shot form of QuadSolver::solve.
[[nodiscard]] std::optional<QuadraticForm> try_quadratic_form(const Matrix& m, const Vector& x, double scale2,
                                                              double* condition = nullptr);

/// As try_quadratic_form, but throws SingularityError carrying the condition number.
[[nodiscard]] QuadraticForm quadratic_form(const Matrix& m, const Vector& x, double scale2, const std::string& what);

[[nodiscard]] double condition_number(const Matrix& m);

}  // namespace sninf::detail
