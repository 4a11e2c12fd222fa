#include "sninf/estimators.hpp"

#include "kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sninf {

std::size_t EstimateSequence::undefined_count() const noexcept {
    return static_cast<std::size_t>(std::count(defined.begin(), defined.end(), false));
}

Vector subsample_estimate(const TimeSeries& ts, const Functional& f, const SubsampleIndex& idx) {
    auto [value, reason] = detail::block_estimate(ts, f, idx, {});
    std::ostringstream os;
    os << f.to_string() << " on block (" << idx.first << "," << idx.last << ")";
    switch (reason) {
        case detail::Undefined::None:
            return value;
        case detail::Undefined::TooShort:
            throw EstimatorUndefined(os.str() + ": block too short for the lag");
        case detail::Undefined::ZeroVariance:
            throw SingularityError(os.str() + ": zero block variance", std::numeric_limits<double>::infinity());
        case detail::Undefined::ZeroWeight:
            throw EstimatorUndefined(os.str() + ": zero total weight");
    }
    return value;
}

EstimateSequence recursive_estimates(const TimeSeries& ts, const Functional& f) {
    return detail::sweep(ts, f, {}, false);
}

EstimateSequence reverse_recursive_estimates(const TimeSeries& ts, const Functional& f) {
    return detail::sweep(ts, f, {}, true);
}

const EstimateGrid::Entry& EstimateGrid::at(const SubsampleIndex& idx) const {
    const auto it = entries_.find(idx);
    if (it == entries_.end()) throw DomainError("block not present in the estimate grid");
    return it->second;
}

namespace {

void fill_grid(const TimeSeries& ts, const Functional& f, const std::vector<SubsampleIndex>& sorted,
               Eigen::Index row0, std::map<SubsampleIndex, EstimateGrid::Entry>& out) {
    const std::size_t n = ts.n();
    auto slot = [&](const SubsampleIndex& idx) -> EstimateGrid::Entry& { return out.at(idx); };

    switch (f.kind()) {
        case Functional::Kind::Mean: {
            for (std::size_t c = 0; c < ts.d(); ++c) {
                const auto x = ts.column(c);
                std::vector<double> prefix(n + 1, 0.0);
                for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
                for (const auto& idx : sorted) {
                    slot(idx).value(row0 + static_cast<Eigen::Index>(c)) =
                        (prefix[idx.last] - prefix[idx.first - 1]) / static_cast<double>(idx.length());
                }
            }
            return;
        }
        case Functional::Kind::Quantile: {
            // Blocks sharing a start are served by one sorted-insert sweep.
            const auto x = ts.column(0);
            std::vector<double> block;
            std::size_t i = 0;
            while (i < sorted.size()) {
                const std::size_t first = sorted[i].first;
                block.clear();
                std::size_t next = first;
                for (; i < sorted.size() && sorted[i].first == first; ++i) {
                    const std::size_t last = sorted[i].last;
                    for (; next <= last; ++next) {
                        const double v = x[next - 1];
                        block.insert(std::upper_bound(block.begin(), block.end(), v), v);
                    }
                    const std::size_t len = block.size();
                    const auto k = static_cast<std::size_t>(std::max(
                        1.0, std::ceil(detail::quantile_threshold(f.tau(), static_cast<double>(len)))));
                    slot(sorted[i]).value(row0) = block[std::min(k, len) - 1];
                }
            }
            return;
        }
        case Functional::Kind::Autocorrelation: {
            const auto x = ts.column(0);
            for (const auto& idx : sorted) {
                const auto est = detail::block_scalar(x, {}, f, idx.first - 1, idx.last - 1);
                auto& e = slot(idx);
                e.value(row0) = est.value;
                if (est.reason != detail::Undefined::None) e.defined = false;
            }
            return;
        }
        case Functional::Kind::Composite: {
            Eigen::Index row = row0;
            for (const auto& child : f.children()) {
                fill_grid(ts, child, sorted, row, out);
                row += static_cast<Eigen::Index>(child.output_dim(ts.d()));
            }
            return;
        }
    }
}

}  // namespace

EstimateGrid grid_estimates(const TimeSeries& ts, const Functional& f, std::span<const SubsampleIndex> pairs) {
    const auto p = static_cast<Eigen::Index>(f.output_dim(ts.d()));
    EstimateGrid grid(f, ts.n());
    std::vector<SubsampleIndex> sorted(pairs.begin(), pairs.end());
    for (const auto& idx : sorted) check_index(idx, ts.n());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    std::map<SubsampleIndex, EstimateGrid::Entry> entries;
    for (const auto& idx : sorted) entries.emplace(idx, EstimateGrid::Entry{Vector::Zero(p), true});
    fill_grid(ts, f, sorted, 0, entries);
    for (auto& [idx, e] : entries) {
        if (!e.defined) e.value.setZero();
        grid.insert(idx, std::move(e));
    }
    return grid;
}

}  // namespace sninf
