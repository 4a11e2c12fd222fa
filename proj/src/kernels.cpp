#include "kernels.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace sninf::detail {

namespace {

constexpr double kZeroVarianceRel = 1e-24;

double weight(std::span<const double> w, std::size_t i) { return w.empty() ? 1.0 : w[i]; }

// Running sums for the lag-h autocorrelation of a growing block. Values are
// shifted by a constant to limit cancellation; the estimator is shift invariant.
struct AcfSums {
    double sw = 0, swy = 0, swyy = 0, sabs = 0;
    double sp = 0, sh1 = 0, sh2 = 0, sh0 = 0;

    void add_point(double y, double wi, double raw) {
        sw += wi;
        swy += wi * y;
        swyy += wi * y * y;
        sabs += std::abs(wi) * raw * raw;
    }

    // Lag pair (i, i+h) with weight on the left element.
    void add_pair(double yi, double yih, double wi) {
        sp += wi * yi * yih;
        sh1 += wi * yi;
        sh2 += wi * yih;
        sh0 += wi;
    }

    [[nodiscard]] ScalarEstimate value(std::size_t len, std::size_t lag) const {
        if (len < lag + 2) return {0.0, Undefined::TooShort};
        if (!(sw > 0.0)) return {0.0, Undefined::ZeroWeight};
        const double m = swy / sw;
        const double c0 = swyy - swy * m;
        if (!(c0 > kZeroVarianceRel * sabs)) return {0.0, Undefined::ZeroVariance};
        const double ch = sp - m * (sh1 + sh2) + m * m * sh0;
        return {ch / c0, Undefined::None};
    }
};

double column_mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

// One row of the sweep for an atomic non-mean functional on a univariate series.
void scalar_sweep(std::span<const double> x, std::span<const double> w, const Functional& f, bool reverse,
                  Eigen::Ref<Matrix> out, std::vector<bool>& defined) {
    const std::size_t n = x.size();
    // position(step) = 0-based index of the element added at that step
    auto position = [&](std::size_t step) { return reverse ? n - 1 - step : step; };
    // output slot for a block of the given length: prefix k -> k-1, suffix starting at t -> t-1
    auto slot = [&](std::size_t len) { return reverse ? n - len : len - 1; };

    if (f.kind() == Functional::Kind::Quantile) {
        if (w.empty()) {
            std::vector<double> sorted;
            sorted.reserve(n);
            for (std::size_t step = 0; step < n; ++step) {
                const double v = x[position(step)];
                sorted.insert(std::upper_bound(sorted.begin(), sorted.end(), v), v);
                const std::size_t len = step + 1;
                const auto k = static_cast<std::size_t>(
                    std::max(1.0, std::ceil(quantile_threshold(f.tau(), static_cast<double>(len)))));
                out(0, static_cast<Eigen::Index>(slot(len))) = sorted[std::min(k, len) - 1];
            }
            return;
        }
        std::vector<std::pair<double, double>> sorted;
        sorted.reserve(n);
        double total = 0.0;
        for (std::size_t step = 0; step < n; ++step) {
            const std::size_t pos = position(step);
            const double wi = std::max(0.0, w[pos]);
            const std::pair<double, double> item{x[pos], wi};
            sorted.insert(std::upper_bound(sorted.begin(), sorted.end(), item,
                                           [](const auto& a, const auto& b) { return a.first < b.first; }),
                          item);
            total += wi;
            const std::size_t len = step + 1;
            const auto s = static_cast<Eigen::Index>(slot(len));
            if (!(total > 0.0)) {
                out(0, s) = 0.0;
                defined[slot(len)] = false;
                continue;
            }
            const double threshold = quantile_threshold(f.tau(), total);
            double cum = 0.0;
            double value = sorted.back().first;
            for (const auto& [v, wv] : sorted) {
                cum += wv;
                if (wv > 0.0 && cum >= threshold) {
                    value = v;
                    break;
                }
            }
            out(0, s) = value;
        }
        return;
    }

    // Autocorrelation
    const std::size_t h = f.lag();
    const double shift = column_mean(x);
    AcfSums sums;
    for (std::size_t step = 0; step < n; ++step) {
        const std::size_t pos = position(step);
        sums.add_point(x[pos] - shift, weight(w, pos), x[pos]);
        if (!reverse && pos >= h) {
            const std::size_t i = pos - h;
            sums.add_pair(x[i] - shift, x[pos] - shift, weight(w, i));
        }
        if (reverse && pos + h < n) {
            sums.add_pair(x[pos] - shift, x[pos + h] - shift, weight(w, pos));
        }
        const std::size_t len = step + 1;
        const auto est = sums.value(len, h);
        out(0, static_cast<Eigen::Index>(slot(len))) = est.value;
        if (est.reason != Undefined::None) defined[slot(len)] = false;
    }
}

void mean_sweep(const TimeSeries& ts, std::span<const double> w, bool reverse, Eigen::Ref<Matrix> out) {
    const std::size_t n = ts.n();
    for (std::size_t c = 0; c < ts.d(); ++c) {
        const auto x = ts.column(c);
        double s = 0.0;
        for (std::size_t step = 0; step < n; ++step) {
            const std::size_t pos = reverse ? n - 1 - step : step;
            s += weight(w, pos) * x[pos];
            const std::size_t len = step + 1;
            const std::size_t slot = reverse ? n - len : len - 1;
            out(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(slot)) = s / static_cast<double>(len);
        }
    }
}

void sweep_into(const TimeSeries& ts, const Functional& f, std::span<const double> w, bool reverse,
                Eigen::Ref<Matrix> out, std::vector<bool>& defined) {
    switch (f.kind()) {
        case Functional::Kind::Mean:
            mean_sweep(ts, w, reverse, out);
            return;
        case Functional::Kind::Quantile:
        case Functional::Kind::Autocorrelation:
            scalar_sweep(ts.column(0), w, f, reverse, out.topRows(1), defined);
            return;
        case Functional::Kind::Composite: {
            Eigen::Index row = 0;
            for (const auto& child : f.children()) {
                const auto p = static_cast<Eigen::Index>(child.output_dim(ts.d()));
                sweep_into(ts, child, w, reverse, out.middleRows(row, p), defined);
                row += p;
            }
            return;
        }
    }
}

}  // namespace

double quantile_threshold(double tau, double total) { return tau * total * (1.0 - 1e-12); }

ScalarEstimate block_scalar(std::span<const double> x, std::span<const double> w, const Functional& f,
                            std::size_t first, std::size_t last) {
    const std::size_t len = last - first + 1;
    if (f.kind() == Functional::Kind::Quantile) {
        if (w.empty()) {
            std::vector<double> block(x.begin() + static_cast<std::ptrdiff_t>(first),
                                      x.begin() + static_cast<std::ptrdiff_t>(last) + 1);
            const auto k = static_cast<std::size_t>(
                std::max(1.0, std::ceil(quantile_threshold(f.tau(), static_cast<double>(len)))));
            const auto nth = block.begin() + static_cast<std::ptrdiff_t>(std::min(k, len) - 1);
            std::nth_element(block.begin(), nth, block.end());
            return {*nth, Undefined::None};
        }
        std::vector<std::pair<double, double>> block;
        block.reserve(len);
        double total = 0.0;
        for (std::size_t i = first; i <= last; ++i) {
            const double wi = std::max(0.0, w[i]);
            block.emplace_back(x[i], wi);
            total += wi;
        }
        if (!(total > 0.0)) return {0.0, Undefined::ZeroWeight};
        std::stable_sort(block.begin(), block.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        const double threshold = quantile_threshold(f.tau(), total);
        double cum = 0.0;
        for (const auto& [v, wv] : block) {
            cum += wv;
            if (wv > 0.0 && cum >= threshold) return {v, Undefined::None};
        }
        return {block.back().first, Undefined::None};
    }

    // Autocorrelation, two-pass
    const std::size_t h = f.lag();
    if (len < h + 2) return {0.0, Undefined::TooShort};
    double sw = 0.0, swx = 0.0, sabs = 0.0;
    for (std::size_t i = first; i <= last; ++i) {
        sw += weight(w, i);
        swx += weight(w, i) * x[i];
        sabs += std::abs(weight(w, i)) * x[i] * x[i];
    }
    if (!(sw > 0.0)) return {0.0, Undefined::ZeroWeight};
    const double m = swx / sw;
    double c0 = 0.0, ch = 0.0;
    for (std::size_t i = first; i <= last; ++i) c0 += weight(w, i) * (x[i] - m) * (x[i] - m);
    for (std::size_t i = first; i + h <= last; ++i) ch += weight(w, i) * (x[i] - m) * (x[i + h] - m);
    if (!(c0 > kZeroVarianceRel * sabs)) return {0.0, Undefined::ZeroVariance};
    return {ch / c0, Undefined::None};
}

std::pair<Vector, Undefined> block_estimate(const TimeSeries& ts, const Functional& f, const SubsampleIndex& idx,
                                            std::span<const double> w) {
    check_index(idx, ts.n());
    const std::size_t p = f.output_dim(ts.d());
    Vector out = Vector::Zero(static_cast<Eigen::Index>(p));
    const std::size_t first = idx.first - 1;
    const std::size_t last = idx.last - 1;
    switch (f.kind()) {
        case Functional::Kind::Mean:
            for (std::size_t c = 0; c < ts.d(); ++c) {
                const auto x = ts.column(c);
                double s = 0.0;
                for (std::size_t i = first; i <= last; ++i) s += weight(w, i) * x[i];
                out(static_cast<Eigen::Index>(c)) = s / static_cast<double>(idx.length());
            }
            return {out, Undefined::None};
        case Functional::Kind::Quantile:
        case Functional::Kind::Autocorrelation: {
            const auto est = block_scalar(ts.column(0), w, f, first, last);
            out(0) = est.value;
            return {out, est.reason};
        }
        case Functional::Kind::Composite: {
            Undefined reason = Undefined::None;
            Eigen::Index row = 0;
            for (const auto& child : f.children()) {
                auto [v, r] = block_estimate(ts, child, idx, w);
                out.segment(row, v.size()) = v;
                row += v.size();
                if (reason == Undefined::None) reason = r;
            }
            if (reason != Undefined::None) out.setZero();
            return {out, reason};
        }
    }
    return {out, Undefined::None};
}

EstimateSequence sweep(const TimeSeries& ts, const Functional& f, std::span<const double> w, bool reverse) {
    const std::size_t n = ts.n();
    const std::size_t p = f.output_dim(ts.d());
    if (!w.empty() && w.size() != n) throw DomainError("weight vector length must equal n");
    EstimateSequence seq{Matrix::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(n)),
                         std::vector<bool>(n, true)};
    sweep_into(ts, f, w, reverse, seq.values, seq.defined);
    for (std::size_t i = 0; i < n; ++i)
        if (!seq.defined[i]) seq.values.col(static_cast<Eigen::Index>(i)).setZero();
    return seq;
}

}  // namespace sninf::detail
