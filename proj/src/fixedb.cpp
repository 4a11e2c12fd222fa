#include "sninf/fixedb.hpp"

#include "sninf/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace sninf {

std::size_t fixedb_block_length(double b, std::size_t n) {
    if (!(b > 0.0 && b <= 1.0)) throw DomainError("fixed-b fraction must lie in (0,1]");
    const auto l = static_cast<std::size_t>(std::llround(b * static_cast<double>(n)));
    return std::clamp<std::size_t>(l, 1, n);
}

std::vector<double> subsample_norms(const TimeSeries& ts, const Functional& f, std::size_t l) {
    const std::size_t n = ts.n();
    if (l < 1 || l > n) throw DomainError("subsample length must satisfy 1 <= l <= n");
    const std::size_t count = n - l + 1;
    const double root_l = std::sqrt(static_cast<double>(l));
    std::vector<double> norms(count);

    if (f.kind() == Functional::Kind::Mean) {
        const std::size_t d = ts.d();
        Matrix prefix = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n + 1));
        for (std::size_t i = 0; i < n; ++i)
            prefix.col(static_cast<Eigen::Index>(i + 1)) =
                prefix.col(static_cast<Eigen::Index>(i)) + ts.values().row(static_cast<Eigen::Index>(i)).transpose();
        const Vector full = prefix.col(static_cast<Eigen::Index>(n)) / static_cast<double>(n);
        for (std::size_t j = 1; j <= count; ++j) {
            const Vector block = (prefix.col(static_cast<Eigen::Index>(j + l - 1)) -
                                  prefix.col(static_cast<Eigen::Index>(j - 1))) /
                                 static_cast<double>(l);
            norms[j - 1] = root_l * (block - full).norm();
        }
        return norms;
    }

    std::vector<SubsampleIndex> blocks{{1, n}};
    for (std::size_t j = 1; j <= count; ++j) blocks.push_back({j, j + l - 1});
    const auto grid = grid_estimates(ts, f, blocks);
    const Vector full = grid.at({1, n}).value;
    for (std::size_t j = 1; j <= count; ++j) norms[j - 1] = root_l * (grid.at({j, j + l - 1}).value - full).norm();
    return norms;
}

std::vector<double> subsampling_distribution(const TimeSeries& ts, const Functional& f, std::size_t l,
                                             std::span<const double> x_grid) {
    auto norms = subsample_norms(ts, f, l);
    std::sort(norms.begin(), norms.end());
    const auto N = static_cast<double>(norms.size());
    std::vector<double> out;
    out.reserve(x_grid.size());
    for (double x : x_grid) {
        const auto le = std::upper_bound(norms.begin(), norms.end(), x) - norms.begin();
        out.push_back(static_cast<double>(le) / N);
    }
    return out;
}

FixedBResult fixedb_pvalue(const TimeSeries& ts, const Functional& f, const Vector& theta0, double b) {
    const std::size_t n = ts.n();
    const std::size_t p = f.output_dim(ts.d());
    if (static_cast<std::size_t>(theta0.size()) != p) throw DomainError("theta0 dimension does not match p");
    FixedBResult r;
    r.b = b;
    r.l = fixedb_block_length(b, n);
    r.N = n - r.l + 1;
    r.subsample_norms = subsample_norms(ts, f, r.l);
    const Vector full = recursive_estimates(ts, f).at(n);
    r.test_norm = std::sqrt(static_cast<double>(n)) * (full - theta0).norm();
    r.count = static_cast<std::size_t>(std::count_if(r.subsample_norms.begin(), r.subsample_norms.end(),
                                                     [&](double v) { return r.test_norm <= v; }));
    r.pvalue = static_cast<double>(r.count) / static_cast<double>(r.N);
    return r;
}

}  // namespace sninf
