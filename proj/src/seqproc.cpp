#include "sninf/seqproc.hpp"

#include "sninf/errors.hpp"
#include "sninf/estimators.hpp"
#include "sninf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sninf {

namespace {

// Largest L with L^4 <= n.
std::size_t fourth_root_floor(std::size_t n) {
    auto l = static_cast<std::size_t>(std::pow(static_cast<double>(n), 0.25));
    while (l > 0 && l * l * l * l > n) --l;
    while ((l + 1) * (l + 1) * (l + 1) * (l + 1) <= n) ++l;
    return l;
}

// Largest j with j^3 < n.
std::size_t planted_count(std::size_t n) {
    auto j = static_cast<std::size_t>(std::cbrt(static_cast<double>(n)));
    while (j > 0 && j * j * j >= n) --j;
    while ((j + 1) * (j + 1) * (j + 1) < n) ++j;
    return j;
}

}  // namespace

SeqProcessValues sequential_process(const TimeSeries& ts, std::span<const double> y_grid,
                                    std::span<const FractionPair> st_grid, std::span<const double> reference_cdf) {
    if (ts.d() != 1) throw DomainError("the sequential empirical process is implemented for d = 1");
    if (reference_cdf.size() != y_grid.size()) throw DomainError("reference CDF must have one value per grid point");
    if (!std::is_sorted(y_grid.begin(), y_grid.end())) throw DomainError("y_grid must be sorted");
    for (std::size_t j = 0; j < reference_cdf.size(); ++j) {
        if (!(reference_cdf[j] >= 0.0 && reference_cdf[j] <= 1.0))
            throw DomainError("reference CDF values must lie in [0,1]");
        if (j > 0 && reference_cdf[j] < reference_cdf[j - 1])
            throw DomainError("reference CDF must be nondecreasing");
    }
    const std::size_t n = ts.n();
    const std::size_t ny = y_grid.size();
    const auto x = ts.column(0);

    // counts(j, i) = #{k <= i : X_k <= y_j}
    std::vector<std::size_t> first_y(n);
    for (std::size_t i = 0; i < n; ++i)
        first_y[i] = static_cast<std::size_t>(std::lower_bound(y_grid.begin(), y_grid.end(), x[i]) - y_grid.begin());
    std::vector<std::uint32_t> counts(ny * (n + 1), 0);
    for (std::size_t j = 0; j < ny; ++j) {
        std::uint32_t* row = counts.data() + j * (n + 1);
        for (std::size_t i = 0; i < n; ++i) row[i + 1] = row[i] + (first_y[i] <= j ? 1U : 0U);
    }

    SeqProcessValues out;
    out.y_grid.assign(y_grid.begin(), y_grid.end());
    out.st_grid.assign(st_grid.begin(), st_grid.end());
    out.values = Matrix::Zero(static_cast<Eigen::Index>(st_grid.size()), static_cast<Eigen::Index>(ny));
    const double root_n = std::sqrt(static_cast<double>(n));
    for (std::size_t r = 0; r < st_grid.size(); ++r) {
        const auto blk = fraction_to_block(st_grid[r], n);
        if (!blk) continue;
        const double scale = (st_grid[r].t - st_grid[r].s) * root_n;
        const auto len = static_cast<double>(blk->length());
        for (std::size_t j = 0; j < ny; ++j) {
            const std::uint32_t* row = counts.data() + j * (n + 1);
            const double ecdf = static_cast<double>(row[blk->last] - row[blk->first - 1]) / len;
            out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
                scale * (ecdf - reference_cdf[j]);
        }
    }
    return out;
}

IdentityReport prop1_identity_check(const TimeSeries& ts, const Vector& reference, std::span<const FractionPair> pairs,
                                    double tolerance) {
    const std::size_t n = ts.n();
    if (static_cast<std::size_t>(reference.size()) != ts.d())
        throw DomainError("reference must have one entry per column");
    const auto nd = static_cast<double>(n);
    IdentityReport report;
    for (std::size_t c = 0; c < ts.d(); ++c) {
        const auto x = ts.column(c);
        const double ref = reference(static_cast<Eigen::Index>(c));
        double xmax = 0.0;
        std::vector<double> prefix(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            prefix[i + 1] = prefix[i] + x[i];
            xmax = std::max(xmax, std::abs(x[i]));
        }
        auto prefix_mean = [&](std::size_t k) { return k == 0 ? 0.0 : prefix[k] / static_cast<double>(k); };
        for (const auto& st : pairs) {
            if (!(st.s >= 0.0 && st.s <= st.t && st.t <= 1.0)) throw DomainError("pairs need 0 <= s <= t <= 1");
            const std::size_t ks = snap_floor(st.s, n);
            const std::size_t kt = snap_floor(st.t, n);
            double lhs = 0.0;
            double rhs = 0.0;
            if (kt > ks) {
                double block = 0.0;
                for (std::size_t i = ks; i < kt; ++i) block += x[i];
                lhs = block / static_cast<double>(kt - ks) - ref;
                const double kts = static_cast<double>(kt) / nd;
                const double kss = static_cast<double>(ks) / nd;
                rhs = nd / static_cast<double>(kt - ks) * (kts * (prefix_mean(kt) - ref) - kss * (prefix_mean(ks) - ref));
            }
            const double denom = std::max({std::abs(lhs), std::abs(rhs), xmax});
            const double violation = denom > 0.0 ? std::abs(lhs - rhs) / denom : 0.0;
            if (violation > report.max_violation || report.pairs_checked == 0) {
                report.max_violation = violation;
                report.worst = st;
            }
            ++report.pairs_checked;
        }
    }
    if (report.max_violation > tolerance) {
        std::ostringstream os;
        os << "mean representation identity violated: relative error " << report.max_violation << " at (s,t) = ("
           << report.worst.s << ", " << report.worst.t << ")";
        throw IdentityFailure(os.str());
    }
    return report;
}

IdentityReport prop1_identity_check(const TimeSeries& ts, const Vector& reference, std::size_t grid,
                                    double tolerance) {
    if (grid < 1) throw DomainError("identity grid needs K >= 1");
    std::vector<FractionPair> pairs;
    const auto K = static_cast<double>(grid);
    for (std::size_t a = 0; a <= grid; ++a)
        for (std::size_t b = a; b <= grid; ++b)
            pairs.push_back({static_cast<double>(a) / K, static_cast<double>(b) / K});
    return prop1_identity_check(ts, reference, pairs, tolerance);
}

std::vector<CounterexampleRow> counterexample_demo(std::span<const std::size_t> n_values, std::uint64_t seed) {
    std::vector<CounterexampleRow> rows;
    for (std::size_t n : n_values) {
        if (n < 1) throw DomainError("counterexample needs n >= 1");
        CounterexampleRow row;
        row.n = n;
        row.block = fourth_root_floor(n);
        row.planted = planted_count(n);
        row.fully_planted = row.block <= row.planted;

        auto engine = make_engine(seed, n);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::vector<double> prefix(row.block);
        for (std::size_t j = 1; j <= row.block; ++j)
            prefix[j - 1] = j <= row.planted ? static_cast<double>(n) : unif(engine);
        const TimeSeries ts = TimeSeries::from_column(prefix);
        row.median = subsample_estimate(ts, Functional::quantile(0.5), {1, row.block})(0);

        const auto nd = static_cast<double>(n);
        row.value = std::sqrt(nd) * std::pow(nd, -0.75) * (row.median - 0.5);
        row.closed_form = std::pow(nd, -0.25) * (nd - 0.5);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace sninf
