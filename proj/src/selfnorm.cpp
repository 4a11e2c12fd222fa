#include "sninf/selfnorm.hpp"

#include "sninf/estimators.hpp"

#include "linalg.hpp"

#include <cmath>
#include <sstream>

namespace sninf {

namespace {

void check_theta0(const Vector& theta0, std::size_t p) {
    if (static_cast<std::size_t>(theta0.size()) != p) {
        std::ostringstream os;
        os << "theta0 has dimension " << theta0.size() << " but the functional has p = " << p;
        throw DomainError(os.str());
    }
}

double max_sq_norm(const Matrix& cols) {
    double m = 0.0;
    for (Eigen::Index j = 0; j < cols.cols(); ++j) m = std::max(m, cols.col(j).squaredNorm());
    return m;
}

struct GeneralizedParts {
    Matrix normalizer;
    Vector theta_hat;
    double scale2 = 0.0;
    std::size_t used = 0;
    std::size_t dropped = 0;
};

// Weighted sum of d_i d_i' over the retained atoms, divided by their mass.
// gamma <= 0 retains every atom (empty blocks still contribute zero).
GeneralizedParts generalized_parts(const TimeSeries& ts, const Functional& f, const DeltaMeasure& h, double gamma) {
    const std::size_t n = ts.n();
    const auto p = static_cast<Eigen::Index>(f.output_dim(ts.d()));
    const double cutoff = gamma > 0.0 ? std::pow(static_cast<double>(n), -gamma) : -1.0;

    std::vector<std::optional<SubsampleIndex>> blocks;
    std::vector<SubsampleIndex> wanted{SubsampleIndex{1, n}};
    blocks.reserve(h.size());
    for (const auto& a : h.atoms()) {
        auto blk = fraction_to_block({a.s, a.t}, n);
        blocks.push_back(blk);
        if (blk) wanted.push_back(*blk);
    }
    const auto grid = grid_estimates(ts, f, wanted);

    GeneralizedParts parts;
    parts.theta_hat = grid.at({1, n}).value;
    parts.normalizer = Matrix::Zero(p, p);
    parts.scale2 = parts.theta_hat.squaredNorm();
    const double root_n = std::sqrt(static_cast<double>(n));
    double mass = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const auto& a = h.atoms()[i];
        const double len = a.t - a.s;
        if (gamma > 0.0 && !(len > cutoff)) {
            ++parts.dropped;
            continue;
        }
        mass += a.w;
        if (!blocks[i]) {
            ++parts.dropped;
            continue;
        }
        const Vector& est = grid.at(*blocks[i]).value;
        parts.scale2 = std::max(parts.scale2, est.squaredNorm());
        const Vector d = root_n * len * (est - parts.theta_hat);
        parts.normalizer.noalias() += a.w * (d * d.transpose());
        ++parts.used;
    }
    if (!(mass > 0.0)) {
        std::ostringstream os;
        os << "every atom of H has t - s <= n^{-gamma} = " << cutoff << "; lower gamma or add longer blocks";
        throw ConfigError(os.str());
    }
    parts.normalizer /= mass;
    parts.scale2 *= static_cast<double>(n);
    return parts;
}

SnResult finish(const TimeSeries& ts, GeneralizedParts parts, const Vector& theta0, bool clipped, double gamma) {
    const std::size_t n = ts.n();
    SnResult r;
    const Vector diff = parts.theta_hat - theta0;
    const auto q = detail::quadratic_form(parts.normalizer, diff, parts.scale2,
                                          "generalized normalizer V_n(H); add more atoms to H");
    r.statistic = static_cast<double>(n) * q.value;
    r.condition_number = q.condition;
    r.normalizer = std::move(parts.normalizer);
    r.theta_hat = std::move(parts.theta_hat);
    r.theta0 = theta0;
    r.clipped = clipped;
    r.gamma = gamma;
    r.atoms_used = parts.used;
    r.atoms_dropped = parts.dropped;
    return r;
}

}  // namespace

Matrix sn_matrix(const TimeSeries& ts, const Functional& f) {
    const std::size_t n = ts.n();
    if (n < 2) throw DomainError("self-normalizer needs n >= 2");
    const auto rec = recursive_estimates(ts, f);
    const Vector full = rec.at(n);
    const Eigen::Index p = full.size();
    Matrix v = Matrix::Zero(p, p);
    for (std::size_t j = 1; j <= n; ++j) {
        const Vector dev = static_cast<double>(j) * (rec.at(j) - full);
        v.noalias() += dev * dev.transpose();
    }
    return v / (static_cast<double>(n) * static_cast<double>(n));
}

SnResult sn_statistic(const TimeSeries& ts, const Functional& f, const Vector& theta0) {
    const std::size_t n = ts.n();
    const std::size_t p = f.output_dim(ts.d());
    check_theta0(theta0, p);
    const auto rec = recursive_estimates(ts, f);
    SnResult r;
    r.normalizer = sn_matrix(ts, f);
    r.theta_hat = rec.at(n);
    r.theta0 = theta0;
    const Vector diff = r.theta_hat - theta0;
    const auto q = detail::quadratic_form(r.normalizer, diff, max_sq_norm(rec.values), "self-normalizer V_n");
    r.statistic = static_cast<double>(n) * q.value;
    r.condition_number = q.condition;
    return r;
}

Matrix generalized_sn_matrix(const TimeSeries& ts, const Functional& f, const DeltaMeasure& h) {
    return generalized_parts(ts, f, h, 0.0).normalizer;
}

SnResult generalized_sn_statistic(const TimeSeries& ts, const Functional& f, const Vector& theta0,
                                  const DeltaMeasure& h) {
    check_theta0(theta0, f.output_dim(ts.d()));
    return finish(ts, generalized_parts(ts, f, h, 0.0), theta0, false, 0.0);
}

SnResult clipped_sn_statistic(const TimeSeries& ts, const Functional& f, const Vector& theta0, const DeltaMeasure& h,
                              double gamma) {
    InferenceConfig{gamma}.validate();
    check_theta0(theta0, f.output_dim(ts.d()));
    return finish(ts, generalized_parts(ts, f, h, gamma), theta0, true, gamma);
}

ConfidenceInterval sn_confidence_interval(const TimeSeries& ts, const Functional& f, double level,
                                          const CriticalValueTable& table) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0,1)");
    if (f.output_dim(ts.d()) != 1) throw DomainError("confidence intervals need a scalar functional (p = 1)");
    table.require_compatible(LimitSpec::of(LimitKind::Sn, 1));
    ConfidenceInterval ci;
    ci.level = level;
    ci.critical_value = table.quantile(level);
    ci.normalizer = sn_matrix(ts, f)(0, 0);
    ci.estimate = recursive_estimates(ts, f).at(ts.n())(0);
    const double half = std::sqrt(ci.critical_value * ci.normalizer / static_cast<double>(ts.n()));
    ci.lower = ci.estimate - half;
    ci.upper = ci.estimate + half;
    return ci;
}

}  // namespace sninf
