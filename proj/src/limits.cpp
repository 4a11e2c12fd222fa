#include "sninf/limits.hpp"

#include "sninf/rng.hpp"

#include "scan.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sninf {

namespace {

constexpr std::uint64_t kAttemptShift = 40;
constexpr std::size_t kMaxAttempts = 64;

std::size_t snap_to_grid(double r, std::size_t m) {
    const auto k = static_cast<long long>(std::llround(r * static_cast<double>(m)));
    return static_cast<std::size_t>(std::clamp<long long>(k, 1, static_cast<long long>(m) - 1));
}

// Per-thread evaluation state for one limit functional on a fixed grid.
class LimitEvaluator {
public:
    LimitEvaluator(const LimitSpec& spec, std::size_t m) : spec_(spec), m_(m) {
        if (spec.kind == LimitKind::GeneralizedSn) measure_.emplace(spec.delta_measure(m));
        if (spec.kind == LimitKind::FixedB) sigma_ = spec.sigma_half_or_identity();
    }

    std::optional<double> operator()(const BrownianPath& path) {
        switch (spec_.kind) {
            case LimitKind::Sn:
                return detail::sn_from_path(path.values, 0.0, ws_);
            case LimitKind::GeneralizedSn:
                return generalized(path);
            case LimitKind::ChangePoint:
                return cp(path, {});
            case LimitKind::FixedB:
                return fixedb(path, spec_.b, sigma_);
        }
        return std::nullopt;
    }

    std::optional<double> generalized(const BrownianPath& path) {
        const auto p = static_cast<Eigen::Index>(path.p);
        const auto m = static_cast<Eigen::Index>(path.m);
        const auto end = path.values.col(m);
        ws_.acc.setZero(p, p);
        ws_.dev.resize(p);
        double mass = 0.0;
        for (const auto& a : measure_->atoms()) {
            const auto lo = static_cast<Eigen::Index>(snap_floor(a.s, path.m));
            const auto hi = static_cast<Eigen::Index>(snap_floor(a.t, path.m));
            ws_.dev = path.values.col(hi) - path.values.col(lo) - (a.t - a.s) * end;
            ws_.acc.noalias() += a.w * ws_.dev * ws_.dev.transpose();
            mass += a.w;
        }
        ws_.acc /= mass;
        const auto q = ws_.solver.solve(ws_.acc, end, 0.0);
        if (!q) return std::nullopt;
        return q->value;
    }

    std::optional<double> cp(const BrownianPath& path, std::span<const double> r_grid) {
        const auto m = static_cast<Eigen::Index>(path.m);
        backward_.setZero(static_cast<Eigen::Index>(path.p), m + 2);
        for (Eigen::Index t = 1; t <= m; ++t) backward_.col(t) = path.values.col(m) - path.values.col(t - 1);
        ks_.clear();
        for (double r : r_grid) ks_.push_back(snap_to_grid(r, path.m));
        const auto scan = detail::cp_scan(path.values, backward_, 1, path.m - 1, 0.0, false, ws_, ks_);
        if (!scan.argmax_k) return std::nullopt;
        return scan.maximum;
    }

    static double fixedb(const BrownianPath& path, double b, const Matrix& sigma) {
        const std::size_t m = path.m;
        const std::size_t l = snap_to_grid(b, m);
        const double bt = static_cast<double>(l) / static_cast<double>(m);
        const double root_b = std::sqrt(bt);
        const auto& B = path.values;
        const auto mi = static_cast<Eigen::Index>(m);
        std::size_t count = 0;
        const std::size_t points = m - l;
        if (path.p == 1) {
            const double lhs = std::abs(B(0, mi));
            for (std::size_t i = 0; i < points; ++i) {
                const auto ii = static_cast<Eigen::Index>(i);
                const double inc = B(0, ii + static_cast<Eigen::Index>(l)) - B(0, ii) - bt * B(0, mi);
                if (lhs <= std::abs(inc) / root_b) ++count;
            }
        } else {
            const double lhs = (sigma * B.col(mi)).norm();
            Vector inc(static_cast<Eigen::Index>(path.p));
            for (std::size_t i = 0; i < points; ++i) {
                const auto ii = static_cast<Eigen::Index>(i);
                inc = B.col(ii + static_cast<Eigen::Index>(l)) - B.col(ii) - bt * B.col(mi);
                if (lhs <= (sigma * inc).norm() / root_b) ++count;
            }
        }
        return static_cast<double>(count) / static_cast<double>(points);
    }

private:
    const LimitSpec& spec_;
    std::size_t m_;
    std::optional<DeltaMeasure> measure_;
    Matrix sigma_;
    Matrix backward_;
    std::vector<std::size_t> ks_;
    detail::ScanWorkspace ws_;
};

void check_grid(std::size_t p, std::size_t m) {
    if (p < 1) throw ConfigError("Brownian dimension must be >= 1");
    if (m < 2) throw ConfigError("Brownian grid needs m >= 2");
}

}  // namespace

BrownianPath BrownianPath::transformed(const Matrix& a) const {
    if (a.rows() != static_cast<Eigen::Index>(p) || a.cols() != static_cast<Eigen::Index>(p)) {
        throw DomainError("transformation must be p x p");
    }
    BrownianPath out{p, m, a * values};
    return out;
}

void simulate_brownian(BrownianPath& path, std::mt19937_64& engine) {
    const auto p = static_cast<Eigen::Index>(path.p);
    const auto m = static_cast<Eigen::Index>(path.m);
    path.values.resize(p, m + 1);
    std::normal_distribution<double> step(0.0, 1.0 / std::sqrt(static_cast<double>(path.m)));
    path.values.col(0).setZero();
    for (Eigen::Index i = 1; i <= m; ++i)
        for (Eigen::Index c = 0; c < p; ++c) path.values(c, i) = path.values(c, i - 1) + step(engine);
}

BrownianPath simulate_brownian(std::size_t p, std::size_t m, std::uint64_t seed) {
    check_grid(p, m);
    BrownianPath path{p, m, {}};
    auto engine = make_engine(seed, 0);
    simulate_brownian(path, engine);
    return path;
}

std::optional<double> limit_sn_statistic(const BrownianPath& path) {
    detail::ScanWorkspace ws;
    return detail::sn_from_path(path.values, 0.0, ws);
}

std::optional<double> limit_generalized_sn(const BrownianPath& path, const DeltaMeasure& h) {
    auto spec = LimitSpec::of(LimitKind::GeneralizedSn, path.p);
    spec.measure = "atoms";
    spec.atoms = h.atoms();
    LimitEvaluator eval(spec, path.m);
    return eval.generalized(path);
}

std::optional<double> limit_cp_statistic(const BrownianPath& path, std::span<const double> r_grid) {
    for (double r : r_grid)
        if (!(r > 0.0 && r < 1.0)) throw DomainError("change-point grid points must lie in (0,1)");
    auto spec = LimitSpec::of(LimitKind::ChangePoint, path.p);
    LimitEvaluator eval(spec, path.m);
    return eval.cp(path, r_grid);
}

double limit_fixedb_G(const BrownianPath& path, double b, const Matrix& sigma_half) {
    if (!(b > 0.0 && b < 1.0)) throw DomainError("fixed-b limit needs b in (0,1)");
    const auto p = static_cast<Eigen::Index>(path.p);
    const Matrix sigma = sigma_half.size() == 0 ? Matrix::Identity(p, p) : sigma_half;
    if (sigma.rows() != p || sigma.cols() != p) throw DomainError("Sigma^{1/2} must be p x p");
    return LimitEvaluator::fixedb(path, b, sigma);
}

std::optional<double> evaluate_limit(const LimitSpec& spec, const BrownianPath& path) {
    LimitEvaluator eval(spec, path.m);
    return eval(path);
}

LimitSample sample_limit(const LimitSpec& spec, std::size_t reps, std::size_t m, std::uint64_t seed) {
    spec.validate();
    check_grid(spec.p, m);
    LimitSample out;
    out.values.assign(reps, 0.0);
    std::size_t discarded = 0;
    bool exhausted = false;
    const auto total = static_cast<long long>(reps);

#pragma omp parallel reduction(+ : discarded) reduction(|| : exhausted)
    {
        LimitEvaluator eval(spec, m);
        BrownianPath path{spec.p, m, {}};
#pragma omp for schedule(static)
        for (long long r = 0; r < total; ++r) {
            std::optional<double> value;
            for (std::uint64_t attempt = 0; attempt < kMaxAttempts && !value; ++attempt) {
                auto engine = make_engine(seed, static_cast<std::uint64_t>(r) | (attempt << kAttemptShift));
                simulate_brownian(path, engine);
                value = eval(path);
                if (!value) ++discarded;
            }
            if (value) {
                out.values[static_cast<std::size_t>(r)] = *value;
            } else {
                exhausted = true;
            }
        }
    }
    if (exhausted) throw TableError("limit functional singular on every redraw; increase the grid size");
    out.discarded = discarded;
    return out;
}

std::vector<double> default_levels() {
    std::vector<double> levels;
    levels.reserve(999);
    for (int i = 1; i <= 999; ++i) levels.push_back(static_cast<double>(i) / 1000.0);
    return levels;
}

CriticalValueTable build_table(const LimitSpec& spec, std::vector<double> levels, std::size_t reps, std::size_t m,
                               std::uint64_t seed) {
    if (reps < 10000) throw ConfigError("critical-value tables need at least 10^4 replications");
    if (levels.empty()) throw ConfigError("no quantile levels requested");
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (double a : levels)
        if (!(a > 0.0 && a < 1.0)) throw ConfigError("quantile levels must lie in (0,1)");

    auto sample = sample_limit(spec, reps, m, seed);
    if (static_cast<double>(sample.discarded) > 0.01 * static_cast<double>(reps)) {
        std::ostringstream os;
        os << sample.discarded << " of " << reps << " draws were singular (> 1%); increase the grid size m";
        throw TableError(os.str());
    }
    std::sort(sample.values.begin(), sample.values.end());

    CriticalValueTable table;
    table.spec = spec;
    if (spec.kind == LimitKind::FixedB) table.spec.sigma_half = spec.sigma_half_or_identity();
    table.levels = levels;
    table.reps = reps;
    table.grid = m;
    table.seed = seed;
    table.discarded = sample.discarded;
    const auto R = static_cast<double>(reps);
    for (double a : levels) {
        auto k = static_cast<std::size_t>(std::ceil(a * R * (1.0 - 1e-12)));
        k = std::clamp<std::size_t>(k, 1, reps);
        table.values.push_back(sample.values[k - 1]);
    }
    return table;
}

}  // namespace sninf
