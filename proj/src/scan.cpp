#include "scan.hpp"

#include <cmath>

namespace sninf::detail {

Matrix forward_path(const EstimateSequence& prefix, const Vector& center) {
    const auto n = static_cast<Eigen::Index>(prefix.size());
    Matrix a = Matrix::Zero(prefix.values.rows(), n + 1);
    for (Eigen::Index t = 1; t <= n; ++t) a.col(t) = static_cast<double>(t) * (prefix.values.col(t - 1) - center);
    return a;
}

Matrix backward_path(const EstimateSequence& suffix, const Vector& center) {
    const auto n = static_cast<Eigen::Index>(suffix.size());
    Matrix b = Matrix::Zero(suffix.values.rows(), n + 2);
    for (Eigen::Index t = 1; t <= n; ++t)
        b.col(t) = static_cast<double>(n - t + 1) * (suffix.values.col(t - 1) - center);
    return b;
}

void bridge_gram(const Matrix& forward, ScanWorkspace& ws, Matrix& out) {
    const Eigen::Index p = forward.rows();
    const Eigen::Index n = forward.cols() - 1;
    const auto nd = static_cast<double>(n);
    out.setZero(p, p);
    ws.dev.resize(p);
    for (Eigen::Index t = 1; t <= n; ++t) {
        ws.dev = forward.col(t) - (static_cast<double>(t) / nd) * forward.col(n);
        out.noalias() += ws.dev * ws.dev.transpose();
    }
}

std::optional<double> sn_from_path(const Matrix& forward, double scale2, ScanWorkspace& ws) {
    const Eigen::Index n = forward.cols() - 1;
    bridge_gram(forward, ws, ws.acc);
    const auto q = ws.solver.solve(ws.acc, forward.col(n), scale2 * static_cast<double>(n));
    if (!q) return std::nullopt;
    return static_cast<double>(n) * q->value;
}

void cp_gram_path(const Matrix& forward, const Matrix& backward, ScanWorkspace& ws) {
    const Eigen::Index p = forward.rows();
    const Eigen::Index n = forward.cols() - 1;
    ws.grams.resize(p * p, std::max<Eigen::Index>(n - 1, 0));
    if (n < 2) return;

    // Forward: F(k) = P - (Q a_k' + a_k Q')/k + (s2/k^2) a_k a_k'
    ws.acc.setZero(p, p);
    ws.lin.setZero(p);
    double s2 = 0.0;
    for (Eigen::Index k = 1; k <= n - 1; ++k) {
        const auto a = forward.col(k);
        const auto kd = static_cast<double>(k);
        ws.acc.noalias() += a * a.transpose();
        ws.lin += kd * a;
        s2 += kd * kd;
        Eigen::Map<Matrix> F(ws.grams.col(k - 1).data(), p, p);
        F = ws.acc;
        F.noalias() -= (1.0 / kd) * ws.lin * a.transpose();
        F.noalias() -= (1.0 / kd) * a * ws.lin.transpose();
        F.noalias() += (s2 / (kd * kd)) * a * a.transpose();
    }

    // Backward: G(k) = sum_{t>k} (b_t - (u_t/U) b_{k+1})(.)', u_t = n-t+1, U = n-k
    ws.acc.setZero(p, p);
    ws.lin.setZero(p);
    double s22 = 0.0;
    for (Eigen::Index k = n - 1; k >= 1; --k) {
        const auto b = backward.col(k + 1);
        const auto u = static_cast<double>(n - k);
        ws.acc.noalias() += b * b.transpose();
        ws.lin += u * b;
        s22 += u * u;
        const double U = u;
        Eigen::Map<Matrix> G(ws.grams.col(k - 1).data(), p, p);
        G += ws.acc;
        G.noalias() -= (1.0 / U) * ws.lin * b.transpose();
        G.noalias() -= (1.0 / U) * b * ws.lin.transpose();
        G.noalias() += (s22 / (U * U)) * b * b.transpose();
    }
}

Matrix cp_gram_direct(const Matrix& forward, const Matrix& backward, std::size_t k) {
    const Eigen::Index p = forward.rows();
    const Eigen::Index n = forward.cols() - 1;
    const auto ki = static_cast<Eigen::Index>(k);
    Matrix gram = Matrix::Zero(p, p);
    const Vector ak = forward.col(ki);
    for (Eigen::Index t = 1; t <= ki; ++t) {
        const Vector dev = forward.col(t) - (static_cast<double>(t) / static_cast<double>(ki)) * ak;
        gram.noalias() += dev * dev.transpose();
    }
    const Vector bk = backward.col(ki + 1);
    const auto U = static_cast<double>(n - ki);
    for (Eigen::Index t = ki + 1; t <= n; ++t) {
        const Vector dev = backward.col(t) - (static_cast<double>(n - t + 1) / U) * bk;
        gram.noalias() += dev * dev.transpose();
    }
    return gram;
}

ScanResult cp_scan(const Matrix& forward, const Matrix& backward, std::size_t k_lo, std::size_t k_hi, double scale2,
                   bool keep_points, ScanWorkspace& ws, const std::vector<std::size_t>& ks) {
    const Eigen::Index p = forward.rows();
    const Eigen::Index n = forward.cols() - 1;
    const auto nd = static_cast<double>(n);
    cp_gram_path(forward, backward, ws);
    ws.contrast.resize(p);
    ScanResult res;

    auto visit = [&](std::size_t k) {
        const auto ki = static_cast<Eigen::Index>(k);
        ws.contrast = forward.col(ki) - (static_cast<double>(k) / nd) * forward.col(n);
        const Eigen::Map<const Matrix> gram(ws.grams.col(ki - 1).data(), p, p);
        const auto q = ws.solver.solve(gram, ws.contrast, scale2 * nd * nd);
        std::optional<double> value;
        if (q) {
            value = nd * q->value;
            if (!res.argmax_k || *value > res.maximum) {
                res.maximum = *value;
                res.argmax_k = k;
            }
        } else {
            ++res.skipped;
        }
        if (keep_points) res.points.push_back({k, ws.contrast, value, ws.solver.last_condition()});
    };

    if (ks.empty()) {
        for (std::size_t k = k_lo; k <= k_hi; ++k) visit(k);
    } else {
        for (std::size_t k : ks) visit(k);
    }
    return res;
}

std::pair<std::size_t, std::size_t> clipped_k_range(std::size_t n, double gamma) {
    if (n < 2) return {1, 0};
    if (gamma <= 0.0) return {1, n - 1};
    const double edge = std::pow(static_cast<double>(n), 1.0 - gamma);
    auto lo = static_cast<std::size_t>(std::ceil(edge - 1e-9));
    auto hi = static_cast<std::size_t>(std::floor(static_cast<double>(n) - edge + 1e-9));
    lo = std::max<std::size_t>(lo, 1);
    hi = std::min(hi, n - 1);
    return {lo, hi};
}

}  // namespace sninf::detail
