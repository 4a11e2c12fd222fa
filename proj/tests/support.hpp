#pragma once

// Data generators and naive O(n^2) reference implementations used as oracles.

#include "sninf/core.hpp"
#include "sninf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace sninf::test {

inline std::vector<double> iid_normal(std::size_t n, std::uint64_t seed, double mu = 0.0) {
    auto engine = make_engine(seed, 7);
    std::normal_distribution<double> z(mu, 1.0);
    std::vector<double> x(n);
    for (auto& v : x) v = z(engine);
    return x;
}

inline std::vector<double> iid_uniform(std::size_t n, std::uint64_t seed) {
    auto engine = make_engine(seed, 11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> x(n);
    for (auto& v : x) v = u(engine);
    return x;
}

inline std::vector<double> ar1(std::size_t n, double phi, std::uint64_t seed) {
    auto e = iid_normal(n + 200, seed);
    std::vector<double> x(n);
    double prev = 0.0;
    for (std::size_t i = 0; i < n + 200; ++i) {
        prev = phi * prev + e[i];
        if (i >= 200) x[i - 200] = prev;
    }
    return x;
}

inline TimeSeries normal_series(std::size_t n, std::size_t d, std::uint64_t seed) {
    Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t c = 0; c < d; ++c) {
        const auto x = iid_normal(n, seed * 31 + c);
        for (std::size_t i = 0; i < n; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = x[i];
    }
    return TimeSeries(m);
}

inline TimeSeries series(const std::vector<double>& x) { return TimeSeries::from_column(x); }

// ---- naive block estimators --------------------------------------------

inline std::vector<double> block_of(const TimeSeries& ts, std::size_t c, std::size_t j, std::size_t k) {
    std::vector<double> b;
    for (std::size_t i = j; i <= k; ++i) b.push_back(ts.values()(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(c)));
    return b;
}

inline double naive_mean(const std::vector<double>& b) {
    double s = 0.0;
    for (double v : b) s += v;
    return s / static_cast<double>(b.size());
}

// ceil(tau L)-th order statistic by full sort.
inline double naive_quantile(std::vector<double> b, double tau) {
    std::sort(b.begin(), b.end());
    std::size_t k = 1;
    while (static_cast<double>(k) < tau * static_cast<double>(b.size()) * (1.0 - 1e-12)) ++k;
    return b[std::min(k, b.size()) - 1];
}

inline double naive_acf(const std::vector<double>& b, std::size_t h) {
    const double m = naive_mean(b);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) den += (b[i] - m) * (b[i] - m);
    for (std::size_t i = 0; i + h < b.size(); ++i) num += (b[i] - m) * (b[i + h] - m);
    return num / den;
}

inline Vector naive_estimate(const TimeSeries& ts, const Functional& f, std::size_t j, std::size_t k) {
    switch (f.kind()) {
        case Functional::Kind::Mean: {
            Vector v(static_cast<Eigen::Index>(ts.d()));
            for (std::size_t c = 0; c < ts.d(); ++c) v(static_cast<Eigen::Index>(c)) = naive_mean(block_of(ts, c, j, k));
            return v;
        }
        case Functional::Kind::Quantile:
            return Vector::Constant(1, naive_quantile(block_of(ts, 0, j, k), f.tau()));
        case Functional::Kind::Autocorrelation:
            if (k - j + 1 < f.lag() + 2) return Vector::Zero(1);
            return Vector::Constant(1, naive_acf(block_of(ts, 0, j, k), f.lag()));
        case Functional::Kind::Composite: {
            // an undefined part makes the whole block estimate a flagged zero
            std::vector<double> parts;
            for (const auto& c : f.children()) {
                if (c.kind() == Functional::Kind::Autocorrelation && k - j + 1 < c.lag() + 2)
                    return Vector::Zero(static_cast<Eigen::Index>(f.output_dim(ts.d())));
            }
            for (const auto& c : f.children()) {
                const Vector v = naive_estimate(ts, c, j, k);
                parts.insert(parts.end(), v.data(), v.data() + v.size());
            }
            return Eigen::Map<Vector>(parts.data(), static_cast<Eigen::Index>(parts.size()));
        }
    }
    return {};
}

inline Matrix naive_sn_matrix(const TimeSeries& ts, const Functional& f) {
    const std::size_t n = ts.n();
    const Vector full = naive_estimate(ts, f, 1, n);
    Matrix v = Matrix::Zero(full.size(), full.size());
    for (std::size_t j = 1; j <= n; ++j) {
        const Vector d = static_cast<double>(j) * (naive_estimate(ts, f, 1, j) - full);
        v += d * d.transpose();
    }
    return v / static_cast<double>(n * n);
}

inline Matrix naive_cp_normalizer(const TimeSeries& ts, const Functional& f, std::size_t k) {
    const std::size_t n = ts.n();
    const Vector left = naive_estimate(ts, f, 1, k);
    const Vector right = naive_estimate(ts, f, k + 1, n);
    Matrix v = Matrix::Zero(left.size(), left.size());
    for (std::size_t t = 1; t <= k; ++t) {
        const Vector d = static_cast<double>(t) * (naive_estimate(ts, f, 1, t) - left);
        v += d * d.transpose();
    }
    for (std::size_t t = k + 1; t <= n; ++t) {
        const Vector d = static_cast<double>(n - t + 1) * (naive_estimate(ts, f, t, n) - right);
        v += d * d.transpose();
    }
    return v / static_cast<double>(n * n);
}

inline double naive_cp_value(const TimeSeries& ts, const Functional& f, std::size_t k) {
    const std::size_t n = ts.n();
    const Vector tk = static_cast<double>(k) / std::sqrt(static_cast<double>(n)) *
                      (naive_estimate(ts, f, 1, k) - naive_estimate(ts, f, 1, n));
    const Matrix v = naive_cp_normalizer(ts, f, k);
    return tk.dot(v.ldlt().solve(tk));
}

inline std::vector<double> naive_subsample_norms(const TimeSeries& ts, const Functional& f, std::size_t l) {
    const std::size_t n = ts.n();
    const Vector full = naive_estimate(ts, f, 1, n);
    std::vector<double> out;
    for (std::size_t j = 1; j + l - 1 <= n; ++j)
        out.push_back(std::sqrt(static_cast<double>(l)) * (naive_estimate(ts, f, j, j + l - 1) - full).norm());
    return out;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline double rel_diff(double a, double b) {
    const double s = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / s;
}

inline Matrix random_invertible(std::size_t p, std::uint64_t seed) {
    auto engine = make_engine(seed, 99);
    std::normal_distribution<double> z;
    Matrix a(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    while (true) {
        for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = z(engine);
        Eigen::JacobiSVD<Matrix> svd(a);
        const auto& sv = svd.singularValues();
        if (sv(sv.size() - 1) > 0.2 * sv(0)) return a;
    }
}

}  // namespace sninf::test
