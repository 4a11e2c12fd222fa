#include "sninf/bootstrap.hpp"

#include "sninf/changepoint.hpp"
#include "sninf/errors.hpp"
#include "sninf/estimators.hpp"
#include "sninf/fixedb.hpp"
#include "sninf/rng.hpp"
#include "sninf/selfnorm.hpp"

#include "kernels.hpp"
#include "scan.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

namespace sninf {

namespace {

constexpr double kMaxFailedShare = 0.05;

bool has_mean_part(const Functional& f) {
    if (f.kind() == Functional::Kind::Mean) return true;
    if (f.kind() == Functional::Kind::Composite)
        return std::any_of(f.children().begin(), f.children().end(), has_mean_part);
    return false;
}

// Deviation path t * (theta^b_t - theta_t); positions where the replicate is undefined contribute zero.
void deviation_path(const EstimateSequence& plain, const EstimateSequence& boot, bool backward, Matrix& out) {
    const auto n = static_cast<Eigen::Index>(plain.size());
    out.setZero(plain.values.rows(), backward ? n + 2 : n + 1);
    for (Eigen::Index t = 1; t <= n; ++t) {
        const auto i = static_cast<std::size_t>(t - 1);
        if (!boot.defined[i] || !plain.defined[i]) continue;
        const double scale = backward ? static_cast<double>(n - t + 1) : static_cast<double>(t);
        out.col(t) = scale * (boot.values.col(t - 1) - plain.values.col(t - 1));
    }
}

double max_sq_norm(const Matrix& cols) {
    double m = 0.0;
    for (Eigen::Index j = 0; j < cols.cols(); ++j) m = std::max(m, cols.col(j).squaredNorm());
    return m;
}

// Estimates of the N overlapping blocks of length l plus the full sample (last column).
struct BlockEstimates {
    Matrix values;
    std::vector<bool> defined;
};

BlockEstimates overlapping_blocks(const TimeSeries& ts, const Functional& f, std::size_t l,
                                  std::span<const double> w) {
    const std::size_t n = ts.n();
    const std::size_t N = n - l + 1;
    const auto p = static_cast<Eigen::Index>(f.output_dim(ts.d()));
    BlockEstimates out{Matrix::Zero(p, static_cast<Eigen::Index>(N + 1)), std::vector<bool>(N + 1, true)};
    if (f.kind() == Functional::Kind::Mean) {
        std::vector<double> prefix(n + 1);
        for (std::size_t c = 0; c < ts.d(); ++c) {
            const auto x = ts.column(c);
            prefix[0] = 0.0;
            for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + (w.empty() ? 1.0 : w[i]) * x[i];
            const auto r = static_cast<Eigen::Index>(c);
            for (std::size_t j = 0; j < N; ++j)
                out.values(r, static_cast<Eigen::Index>(j)) = (prefix[j + l] - prefix[j]) / static_cast<double>(l);
            out.values(r, static_cast<Eigen::Index>(N)) = prefix[n] / static_cast<double>(n);
        }
        return out;
    }
    for (std::size_t j = 0; j <= N; ++j) {
        const SubsampleIndex idx = j < N ? SubsampleIndex{j + 1, j + l} : SubsampleIndex{1, n};
        auto [v, reason] = detail::block_estimate(ts, f, idx, w);
        out.values.col(static_cast<Eigen::Index>(j)) = v;
        out.defined[j] = reason == detail::Undefined::None;
    }
    return out;
}

class ReplicateEngine {
public:
    ReplicateEngine(const TimeSeries& ts, const Functional& f, const BootstrapTarget& target)
        : ts_(ts), f_(f), target_(target) {
        const std::size_t n = ts.n();
        switch (target.kind) {
            case BootstrapTarget::Kind::Sn:
                prefix_ = recursive_estimates(ts, f);
                scale2_ = max_sq_norm(prefix_.values);
                break;
            case BootstrapTarget::Kind::ChangePoint:
                prefix_ = recursive_estimates(ts, f);
                suffix_ = reverse_recursive_estimates(ts, f);
                scale2_ = std::max(max_sq_norm(prefix_.values), max_sq_norm(suffix_.values));
                break;
            case BootstrapTarget::Kind::FixedB:
                l_ = fixedb_block_length(target.b, n);
                blocks_ = overlapping_blocks(ts, f, l_, {});
                break;
        }
    }

    std::optional<double> operator()(std::span<const double> m) {
        switch (target_.kind) {
            case BootstrapTarget::Kind::Sn: {
                const auto boot = detail::sweep(ts_, f_, m, false);
                deviation_path(prefix_, boot, false, forward_);
                return detail::sn_from_path(forward_, scale2_, ws_);
            }
            case BootstrapTarget::Kind::ChangePoint: {
                const auto fwd = detail::sweep(ts_, f_, m, false);
                const auto bwd = detail::sweep(ts_, f_, m, true);
                deviation_path(prefix_, fwd, false, forward_);
                deviation_path(suffix_, bwd, true, backward_);
                const auto scan = detail::cp_scan(forward_, backward_, 1, ts_.n() - 1, scale2_, false, ws_);
                if (!scan.argmax_k) return std::nullopt;
                return scan.maximum;
            }
            case BootstrapTarget::Kind::FixedB:
                return fixedb(m);
        }
        return std::nullopt;
    }

private:
    std::optional<double> fixedb(std::span<const double> m) {
        const auto boot = overlapping_blocks(ts_, f_, l_, m);
        const auto N = static_cast<Eigen::Index>(blocks_.defined.size() - 1);
        if (!boot.defined[static_cast<std::size_t>(N)] || !blocks_.defined[static_cast<std::size_t>(N)])
            return std::nullopt;
        const Vector full = boot.values.col(N) - blocks_.values.col(N);
        const double lhs = std::sqrt(static_cast<double>(ts_.n())) * full.norm();
        const double root_l = std::sqrt(static_cast<double>(l_));
        std::size_t count = 0;
        for (Eigen::Index j = 0; j < N; ++j) {
            const auto i = static_cast<std::size_t>(j);
            const bool ok = boot.defined[i] && blocks_.defined[i];
            const double rhs =
                ok ? root_l * (boot.values.col(j) - blocks_.values.col(j) - full).norm() : root_l * full.norm();
            if (lhs <= rhs) ++count;
        }
        return -(static_cast<double>(count) / static_cast<double>(N));
    }

    const TimeSeries& ts_;
    const Functional& f_;
    const BootstrapTarget& target_;
    EstimateSequence prefix_;
    EstimateSequence suffix_;
    BlockEstimates blocks_;
    std::size_t l_ = 0;
    double scale2_ = 0.0;
    Matrix forward_;
    Matrix backward_;
    detail::ScanWorkspace ws_;
};

double observed_statistic(const TimeSeries& ts, const Functional& f, const BootstrapTarget& target) {
    switch (target.kind) {
        case BootstrapTarget::Kind::Sn:
            return sn_statistic(ts, f, target.theta0).statistic;
        case BootstrapTarget::Kind::ChangePoint:
            return cp_statistic(ts, f, InferenceConfig{}, false).statistic;
        case BootstrapTarget::Kind::FixedB:
            return -fixedb_pvalue(ts, f, target.theta0, target.b).pvalue;
    }
    return 0.0;
}

}  // namespace

MultiplierScheme MultiplierScheme::parse(const std::string& text, std::uint64_t seed) {
    MultiplierScheme s;
    s.seed = seed;
    if (text == "gaussian") {
        s.kind = Kind::IidGaussian;
    } else if (text == "rademacher") {
        s.kind = Kind::IidRademacher;
    } else if (text == "block") {
        s.kind = Kind::BlockDependent;
    } else if (text.rfind("block:", 0) == 0) {
        s.kind = Kind::BlockDependent;
        const std::string arg = text.substr(6);
        std::size_t used = 0;
        long v = 0;
        try {
            v = std::stol(arg, &used);
        } catch (const std::logic_error&) {
            used = 0;
        }
        if (used != arg.size() || v < 1) throw ConfigError("block multipliers need a length >= 1, got '" + arg + "'");
        s.block_length = static_cast<std::size_t>(v);
    } else {
        throw ConfigError("unknown multiplier scheme '" + text + "' (use gaussian, rademacher, block or block:L)");
    }
    return s;
}

std::string MultiplierScheme::to_string() const {
    switch (kind) {
        case Kind::IidGaussian:
            return "gaussian";
        case Kind::IidRademacher:
            return "rademacher";
        case Kind::BlockDependent:
            return block_length == 0 ? "block" : "block:" + std::to_string(block_length);
    }
    return "gaussian";
}

std::size_t default_multiplier_block(std::size_t n) {
    auto l = static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(n))));
    while (l > 1 && (l - 1) * (l - 1) * (l - 1) >= n) --l;
    while (l * l * l < n) ++l;
    return std::max<std::size_t>(l, 1);
}

std::vector<double> generate_multipliers(const MultiplierScheme& scheme, std::size_t n, std::uint64_t stream) {
    if (n < 1) throw DomainError("need at least one multiplier");
    auto engine = make_engine(scheme.seed, stream);
    std::vector<double> m(n);
    switch (scheme.kind) {
        case MultiplierScheme::Kind::IidGaussian: {
            std::normal_distribution<double> z;
            for (auto& v : m) v = 1.0 + z(engine);
            break;
        }
        case MultiplierScheme::Kind::IidRademacher: {
            std::bernoulli_distribution coin;
            for (auto& v : m) v = coin(engine) ? 2.0 : 0.0;
            break;
        }
        case MultiplierScheme::Kind::BlockDependent: {
            const std::size_t lb = scheme.block_length == 0 ? default_multiplier_block(n) : scheme.block_length;
            std::normal_distribution<double> z;
            std::vector<double> e(n + lb - 1);
            for (auto& v : e) v = z(engine);
            const double scale = 1.0 / std::sqrt(static_cast<double>(lb));
            double window = 0.0;
            for (std::size_t j = 0; j < lb; ++j) window += e[j];
            for (std::size_t i = 0; i < n; ++i) {
                if (i > 0) {
                    window += e[i + lb - 1] - e[i - 1];
                }
                m[i] = 1.0 + scale * window;
            }
            break;
        }
    }
    return m;
}

std::vector<double> generate_multipliers(const MultiplierScheme& scheme, std::size_t n) {
    return generate_multipliers(scheme, n, 0);
}

Vector bootstrap_estimate(const TimeSeries& ts, const Functional& f, const SubsampleIndex& idx,
                          std::span<const double> multipliers) {
    if (multipliers.size() != ts.n()) {
        std::ostringstream os;
        os << "expected " << ts.n() << " multipliers, got " << multipliers.size();
        throw DomainError(os.str());
    }
    check_index(idx, ts.n());
    if (has_mean_part(f)) {
        double total = 0.0;
        for (std::size_t i = idx.first - 1; i < idx.last; ++i) total += multipliers[i];
        if (total == 0.0) throw EstimatorUndefined("degenerate block: multipliers sum to zero");
    }
    auto [v, reason] = detail::block_estimate(ts, f, idx, multipliers);
    switch (reason) {
        case detail::Undefined::None:
            return v;
        case detail::Undefined::TooShort:
            throw EstimatorUndefined("block too short for the autocorrelation lag");
        case detail::Undefined::ZeroVariance:
            throw EstimatorUndefined("degenerate block: zero weighted variance");
        case detail::Undefined::ZeroWeight:
            throw EstimatorUndefined("degenerate block: zero total multiplier weight");
    }
    return v;
}

double BootstrapResult::quantile(double level) const {
    if (replicates.empty()) throw ConfigError("no bootstrap replicates");
    if (!(level > 0.0 && level < 1.0)) throw DomainError("quantile level must lie in (0,1)");
    std::vector<double> sorted = replicates;
    std::sort(sorted.begin(), sorted.end());
    const auto L = static_cast<double>(sorted.size());
    auto k = static_cast<std::size_t>(std::max(1.0, std::ceil(level * L * (1.0 - 1e-12))));
    return sorted[std::min(k, sorted.size()) - 1];
}

double bootstrap_pvalue(double observed, std::span<const double> replicates) {
    const auto extreme = std::count_if(replicates.begin(), replicates.end(), [&](double r) { return r >= observed; });
    return (1.0 + static_cast<double>(extreme)) / (static_cast<double>(replicates.size()) + 1.0);
}

BootstrapResult bootstrap_distribution(const TimeSeries& ts, const Functional& f, const BootstrapTarget& target,
                                       const MultiplierScheme& scheme, std::size_t B) {
    if (B < 100) throw ConfigError("the bootstrap needs at least 100 replicates");
    if (target.kind == BootstrapTarget::Kind::ChangePoint && ts.n() < 4)
        throw DomainError("change-point bootstrap needs n >= 4");
    if (target.kind == BootstrapTarget::Kind::Sn && ts.n() < 2) throw DomainError("SN bootstrap needs n >= 2");

    BootstrapResult out;
    out.kind = target.kind;
    out.requested = B;
    out.observed = observed_statistic(ts, f, target);

    std::vector<std::optional<double>> values(B);
    const auto total = static_cast<long long>(B);
#pragma omp parallel
    {
        ReplicateEngine engine(ts, f, target);
#pragma omp for schedule(static)
        for (long long r = 0; r < total; ++r) {
            const auto m = generate_multipliers(scheme, ts.n(), static_cast<std::uint64_t>(r) + 1);
            values[static_cast<std::size_t>(r)] = engine(m);
        }
    }
    for (const auto& v : values) {
        if (v) {
            out.replicates.push_back(*v);
        } else {
            ++out.failed;
        }
    }
    if (static_cast<double>(out.failed) > kMaxFailedShare * static_cast<double>(B)) {
        std::ostringstream os;
        os << out.failed << " of " << B << " bootstrap replicates were degenerate (> 5%)";
        throw BootstrapUnstable(os.str());
    }
    out.pvalue = bootstrap_pvalue(out.observed, out.replicates);
    return out;
}

}  // namespace sninf
