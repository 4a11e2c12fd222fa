#include "doctest.h"

#include "sninf/bootstrap.hpp"
#include "sninf/changepoint.hpp"
#include "sninf/estimators.hpp"
#include "sninf/fixedb.hpp"
#include "sninf/limits.hpp"
#include "sninf/selfnorm.hpp"

#include "support.hpp"

using namespace sninf;
using namespace sninf::test;

namespace {

double lag_autocorr(const std::vector<double>& m, std::size_t h) {
    double mu = 0.0;
    for (double v : m) mu += v;
    mu /= static_cast<double>(m.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) den += (m[i] - mu) * (m[i] - mu);
    for (std::size_t i = 0; i + h < m.size(); ++i) num += (m[i] - mu) * (m[i + h] - mu);
    return num / den;
}

}  // namespace

TEST_CASE("multiplier schemes") {
    MultiplierScheme rad{MultiplierScheme::Kind::IidRademacher, 0, 3};
    for (double v : generate_multipliers(rad, 1000)) CHECK((v == 0.0 || v == 2.0));

    const std::size_t n = 1000000;
    for (auto kind : {MultiplierScheme::Kind::IidGaussian, MultiplierScheme::Kind::IidRademacher,
                      MultiplierScheme::Kind::BlockDependent}) {
        MultiplierScheme s{kind, 5, 11};
        const auto m = generate_multipliers(s, n);
        double mean = 0.0, var = 0.0;
        for (double v : m) mean += v;
        mean /= static_cast<double>(n);
        for (double v : m) var += (v - mean) * (v - mean);
        var /= static_cast<double>(n - 1);
        CHECK(std::abs(mean - 1.0) <= 0.005 * (kind == MultiplierScheme::Kind::BlockDependent ? 3.0 : 1.0));
        CHECK(std::abs(var - 1.0) <= 0.01);
    }

    MultiplierScheme block{MultiplierScheme::Kind::BlockDependent, 4, 17};
    const auto m = generate_multipliers(block, n);
    CHECK(std::abs(lag_autocorr(m, 5)) <= 0.01);
    CHECK(std::abs(lag_autocorr(m, 1) - 0.75) <= 0.01);

    CHECK(generate_multipliers(block, 100) == generate_multipliers(block, 100));
    CHECK(default_multiplier_block(1000) == 10);
    CHECK(default_multiplier_block(1001) == 11);
    CHECK(MultiplierScheme::parse("block:7", 1).block_length == 7);
    CHECK(MultiplierScheme::parse("rademacher", 1).kind == MultiplierScheme::Kind::IidRademacher);
    CHECK_THROWS_AS((void)MultiplierScheme::parse("block:0", 1), ConfigError);
    CHECK_THROWS_AS((void)MultiplierScheme::parse("poisson", 1), ConfigError);
}

TEST_CASE("bootstrap estimates") {
    const auto ts = series(iid_normal(200, 4));
    const std::vector<double> ones(200, 1.0);
    for (const auto& f : {Functional::mean(), Functional::quantile(0.3), Functional::autocorrelation(2),
                          Functional::parse("mean+quantile:0.5")}) {
        for (SubsampleIndex idx : {SubsampleIndex{1, 200}, SubsampleIndex{17, 90}, SubsampleIndex{150, 160}})
            CHECK(bootstrap_estimate(ts, f, idx, ones) == subsample_estimate(ts, f, idx));
    }

    std::vector<double> even(200);
    for (std::size_t i = 0; i < 200; ++i) even[i] = (i + 1) % 2 == 0 ? 2.0 : 0.0;
    const auto x = iid_normal(200, 4);
    double s = 0.0;
    for (std::size_t i = 1; i < 200; i += 2) s += x[i];
    CHECK(bootstrap_estimate(ts, Functional::mean(), {1, 200}, even)(0) == doctest::Approx(s / 100.0).epsilon(1e-14));

    MultiplierScheme g{MultiplierScheme::Kind::IidGaussian, 0, 8};
    const auto m = generate_multipliers(g, 200);
    double naive = 0.0;
    for (std::size_t i = 30; i < 120; ++i) naive += m[i] * x[i];
    CHECK(std::abs(bootstrap_estimate(ts, Functional::mean(), {31, 120}, m)(0) - naive / 90.0) <= 1e-12);

    // weighted quantile clamps negative multipliers
    const auto small = series({3.0, 1.0, 2.0, 4.0});
    CHECK(bootstrap_estimate(small, Functional::quantile(0.5), {1, 4}, std::vector<double>{-1.0, 1.0, 1.0, 1.0})(0) ==
          2.0);
    CHECK(bootstrap_estimate(small, Functional::quantile(0.5), {1, 4}, std::vector<double>{0.0, 3.0, 1.0, 0.0})(0) ==
          1.0);

    const std::vector<double> zeros(4, 0.0);
    CHECK_THROWS_AS((void)bootstrap_estimate(small, Functional::mean(), {1, 4}, zeros), EstimatorUndefined);
    CHECK_THROWS_AS((void)bootstrap_estimate(small, Functional::quantile(0.5), {1, 4}, zeros), EstimatorUndefined);
    CHECK_THROWS_AS((void)bootstrap_estimate(small, Functional::mean(), {1, 4}, std::vector<double>(3, 1.0)),
                    DomainError);
}

TEST_CASE("bootstrap p-value convention") {
    CHECK(bootstrap_pvalue(5.0, std::vector<double>{1.0}) == 0.5);
    CHECK(bootstrap_pvalue(0.0, std::vector<double>{0.0, 1.0, 2.0}) == 1.0);
    CHECK(bootstrap_pvalue(10.0, std::vector<double>(99, 1.0)) == 0.01);
}

TEST_CASE("bootstrap distribution basics") {
    const auto ts = series(iid_normal(300, 6));
    const auto f = Functional::mean();
    const Vector theta_hat = recursive_estimates(ts, f).at(300);
    MultiplierScheme g{MultiplierScheme::Kind::IidGaussian, 0, 1};

    BootstrapTarget at_hat{BootstrapTarget::Kind::Sn, theta_hat, 0.1};
    const auto zero = bootstrap_distribution(ts, f, at_hat, g, 200);
    CHECK(zero.observed == 0.0);
    CHECK(zero.pvalue == 1.0);
    CHECK(zero.replicates.size() == 200);

    BootstrapTarget sn{BootstrapTarget::Kind::Sn, Vector::Zero(1), 0.1};
    const auto a = bootstrap_distribution(ts, f, sn, g, 200);
    const auto b = bootstrap_distribution(ts, f, sn, g, 200);
    CHECK(a.replicates == b.replicates);
    CHECK(a.pvalue > 0.0);
    CHECK(a.pvalue <= 1.0);
    CHECK(a.observed == sn_statistic(ts, f, Vector::Zero(1)).statistic);

    BootstrapTarget cp{BootstrapTarget::Kind::ChangePoint, {}, 0.1};
    const auto c = bootstrap_distribution(ts, f, cp, MultiplierScheme{MultiplierScheme::Kind::BlockDependent, 0, 2}, 100);
    CHECK(c.observed == cp_statistic(ts, f, InferenceConfig{}).statistic);
    CHECK(c.failed == 0);

    BootstrapTarget fb{BootstrapTarget::Kind::FixedB, Vector::Zero(1), 0.1};
    const auto d = bootstrap_distribution(ts, f, fb, g, 100);
    CHECK(-d.observed == fixedb_pvalue(ts, f, Vector::Zero(1), 0.1).pvalue);
    for (double r : d.replicates) CHECK((r <= 0.0 && r >= -1.0));

    CHECK_THROWS_AS((void)bootstrap_distribution(ts, f, sn, g, 99), ConfigError);
    const auto q = bootstrap_distribution(ts, Functional::quantile(0.5), BootstrapTarget{BootstrapTarget::Kind::Sn, Vector::Zero(1), 0.1},
                                          MultiplierScheme{MultiplierScheme::Kind::IidRademacher, 0, 3}, 100);
    CHECK(q.failed <= 5);
}

TEST_CASE("identity multipliers reproduce the plain statistics") {
    const auto ts = series(iid_normal(50, 2));
    const std::vector<double> ones(50, 1.0);
    for (std::size_t k = 1; k <= 50; k += 7) {
        CHECK(bootstrap_estimate(ts, Functional::mean(), {1, k}, ones) ==
              subsample_estimate(ts, Functional::mean(), {1, k}));
        CHECK(bootstrap_estimate(ts, Functional::quantile(0.2), {k, 50}, ones) ==
              subsample_estimate(ts, Functional::quantile(0.2), {k, 50}));
    }
}

TEST_CASE("bootstrap quantile tracks the limit quantile") {
    const auto table = build_table(LimitSpec::of(LimitKind::Sn, 1), {0.95}, 100000, 1000, 31);
    const auto ts = series(iid_normal(500, 12));
    const auto res = bootstrap_distribution(ts, Functional::mean(), BootstrapTarget{BootstrapTarget::Kind::Sn, Vector::Zero(1), 0.1},
                                            MultiplierScheme{MultiplierScheme::Kind::IidGaussian, 0, 5}, 2000);
    MESSAGE("bootstrap 95%: " << res.quantile(0.95) << ", limit " << table.quantile(0.95));
    CHECK(rel_diff(res.quantile(0.95), table.quantile(0.95)) <= 0.10);
}
