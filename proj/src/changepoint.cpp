#include "sninf/changepoint.hpp"

#include "sninf/estimators.hpp"

#include "scan.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace sninf {

namespace {

struct Paths {
    Matrix forward;
    Matrix backward;
    double scale2 = 0.0;
};

Paths build_paths(const TimeSeries& ts, const Functional& f) {
    const auto rec = recursive_estimates(ts, f);
    const auto rev = reverse_recursive_estimates(ts, f);
    const Vector center = rec.at(ts.n());
    Paths paths{detail::forward_path(rec, center), detail::backward_path(rev, center), 0.0};
    for (Eigen::Index j = 0; j < rec.values.cols(); ++j) {
        paths.scale2 = std::max(paths.scale2, rec.values.col(j).squaredNorm());
        paths.scale2 = std::max(paths.scale2, rev.values.col(j).squaredNorm());
    }
    return paths;
}

}  // namespace

Matrix cp_normalizer(const TimeSeries& ts, const Functional& f, std::size_t k) {
    const std::size_t n = ts.n();
    if (k < 1 || k + 1 > n) throw DomainError("change-point normalizer needs 1 <= k <= n-1");
    const auto paths = build_paths(ts, f);
    const double n2 = static_cast<double>(n) * static_cast<double>(n);
    return detail::cp_gram_direct(paths.forward, paths.backward, k) / n2;
}

std::vector<Matrix> cp_normalizer_path(const TimeSeries& ts, const Functional& f) {
    const std::size_t n = ts.n();
    if (n < 2) throw DomainError("change-point normalizer needs n >= 2");
    const auto paths = build_paths(ts, f);
    const double n2 = static_cast<double>(n) * static_cast<double>(n);
    detail::ScanWorkspace ws;
    detail::cp_gram_path(paths.forward, paths.backward, ws);
    const auto p = paths.forward.rows();
    std::vector<Matrix> out;
    out.reserve(n - 1);
    for (Eigen::Index k = 0; k < ws.grams.cols(); ++k) {
        Matrix g = Eigen::Map<const Matrix>(ws.grams.col(k).data(), p, p) / n2;
        out.push_back(0.5 * (g + g.transpose()));
    }
    return out;
}

CpResult cp_statistic(const TimeSeries& ts, const Functional& f, const InferenceConfig& config, bool clipped) {
    const std::size_t n = ts.n();
    if (n < 4) throw DomainError("change-point test needs n >= 4");
    if (clipped) config.validate();
    const auto paths = build_paths(ts, f);
    const auto [lo, hi] = detail::clipped_k_range(n, clipped ? config.clip_gamma : 0.0);
    if (lo > hi) throw ConfigError("clipping leaves no admissible k; lower gamma");
    detail::ScanWorkspace ws;
    const auto scan = detail::cp_scan(paths.forward, paths.backward, lo, hi, paths.scale2, true, ws);

    CpResult r;
    r.clipped = clipped;
    r.gamma = clipped ? config.clip_gamma : 0.0;
    r.k_lo = lo;
    r.k_hi = hi;
    const double root_n = std::sqrt(static_cast<double>(n));
    r.per_k.reserve(scan.points.size());
    for (const auto& pt : scan.points) {
        r.per_k.push_back({pt.k, pt.contrast / root_n, pt.value});
        if (!pt.value) r.skipped_k.push_back(pt.k);
    }
    if (!scan.argmax_k) {
        std::ostringstream os;
        os << "V_n(k) is singular for every scanned k in [" << lo << ", " << hi << "]";
        throw SingularityError(os.str(), std::numeric_limits<double>::infinity());
    }
    r.statistic = scan.maximum;
    r.argmax_k = *scan.argmax_k;
    return r;
}

}  // namespace sninf
