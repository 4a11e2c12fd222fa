#include "doctest.h"

#include "sninf/changepoint.hpp"
#include "sninf/limits.hpp"

#include "support.hpp"

#include <filesystem>
#include <fstream>

using namespace sninf;
using namespace sninf::test;

namespace {

double empirical_quantile(std::vector<double> v, double level) {
    std::sort(v.begin(), v.end());
    auto k = static_cast<std::size_t>(std::ceil(level * static_cast<double>(v.size()) * (1.0 - 1e-12)));
    return v[std::max<std::size_t>(k, 1) - 1];
}

}  // namespace

TEST_CASE("Brownian paths") {
    const auto path = simulate_brownian(2, 50, 3);
    CHECK(path.values.rows() == 2);
    CHECK(path.values.cols() == 51);
    CHECK(path.values.col(0).isZero());
    CHECK(simulate_brownian(2, 50, 3).values == path.values);
    CHECK_FALSE(simulate_brownian(2, 50, 4).values == path.values);
    CHECK_THROWS_AS((void)simulate_brownian(0, 50, 1), ConfigError);
    CHECK_THROWS_AS((void)simulate_brownian(1, 1, 1), ConfigError);
}

TEST_CASE("Brownian moments") {
    const std::size_t R = 100000;
    double s1 = 0.0, s11 = 0.0, s3 = 0.0, s7 = 0.0, s37 = 0.0;
    BrownianPath path{1, 10, {}};
    for (std::size_t r = 0; r < R; ++r) {
        auto engine = make_engine(77, r);
        simulate_brownian(path, engine);
        const double b1 = path.values(0, 10), b3 = path.values(0, 3), b7 = path.values(0, 7);
        s1 += b1;
        s11 += b1 * b1;
        s3 += b3;
        s7 += b7;
        s37 += b3 * b7;
    }
    const double n = static_cast<double>(R);
    CHECK(std::abs(s11 / n - (s1 / n) * (s1 / n) - 1.0) <= 0.02);
    CHECK(std::abs(s37 / n - (s3 / n) * (s7 / n) - 0.3) <= 0.02);
}

TEST_CASE("SN limit functional") {
    auto path = simulate_brownian(1, 200, 5);
    for (Eigen::Index i = 0; i <= 200; ++i) path.values(0, i) -= static_cast<double>(i) / 200.0 * path.values(0, 200);
    CHECK(*limit_sn_statistic(path) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("limit functionals are invariant under conjugation") {
    for (std::size_t p = 1; p <= 3; ++p) {
        for (std::uint64_t rep = 0; rep < 10; ++rep) {
            const auto path = simulate_brownian(p, 300, 100 * p + rep);
            const auto moved = path.transformed(random_invertible(p, 1000 * p + rep));
            CHECK(rel_diff(*limit_sn_statistic(path), *limit_sn_statistic(moved)) <= 1e-10);
            const auto h = DeltaMeasure::grid(7);
            CHECK(rel_diff(*limit_generalized_sn(path, h), *limit_generalized_sn(moved, h)) <= 1e-10);
            CHECK(rel_diff(*limit_cp_statistic(path), *limit_cp_statistic(moved)) <= 1e-10);
        }
    }
}

TEST_CASE("generalized limit") {
    const auto path = simulate_brownian(1, 1000, 8);
    CHECK_FALSE(limit_generalized_sn(path, DeltaMeasure({{0.0, 1.0, 1.0}})).has_value());
    const double rec = *limit_generalized_sn(path, DeltaMeasure::recursive(1000));
    CHECK(rel_diff(rec, *limit_sn_statistic(path)) <= 0.01);
}

TEST_CASE("change-point limit over sub-grids") {
    const auto path = simulate_brownian(2, 400, 12);
    const std::vector<double> half{0.5};
    const std::vector<double> some{0.25, 0.5, 0.75};
    const double a = *limit_cp_statistic(path, half);
    const double b = *limit_cp_statistic(path, some);
    const double c = *limit_cp_statistic(path);
    CHECK(a <= b);
    CHECK(b <= c);
    CHECK_THROWS_AS((void)limit_cp_statistic(path, std::vector<double>{1.0}), DomainError);
}

TEST_CASE("fixed-b limit") {
    const auto path = simulate_brownian(1, 100, 3);
    const double edge = limit_fixedb_G(path, 0.995, {});
    CHECK((edge == 0.0 || edge == 1.0));
    const double g = limit_fixedb_G(path, 0.1);
    CHECK(g >= 0.0);
    CHECK(g <= 1.0);
    CHECK(limit_fixedb_G(path, 0.1, Matrix::Constant(1, 1, 3.7)) == g);
    const auto p2 = simulate_brownian(2, 100, 3);
    Matrix s(2, 2);
    s << 1.0, 0.3, 0.0, 2.0;
    const double v = limit_fixedb_G(p2, 0.2, s);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK_THROWS_AS((void)limit_fixedb_G(path, 1.0), DomainError);
}

TEST_CASE("SN limit quantile is stable across disjoint seeds") {
    const auto spec = LimitSpec::of(LimitKind::Sn, 1);
    const auto a = build_table(spec, {0.5, 0.9, 0.95, 0.99}, 200000, 1000, 1);
    const auto b = build_table(spec, {0.5, 0.9, 0.95, 0.99}, 200000, 1000, 2);
    CHECK(rel_diff(a.quantile(0.95), b.quantile(0.95)) <= 0.01);
    CHECK(a.values[0] < a.values[1]);
    CHECK(a.values[1] < a.values[2]);
    CHECK(a.values[2] < a.values[3]);
}

TEST_CASE("change-point limit matches the finite-sample statistic") {
    const auto table = build_table(LimitSpec::of(LimitKind::ChangePoint, 1), {0.95}, 200000, 2000, 3);
    std::vector<double> stats;
    for (std::uint64_t rep = 0; rep < 2000; ++rep)
        stats.push_back(cp_statistic(series(iid_normal(2000, 300000 + rep)), Functional::mean(), InferenceConfig{})
                            .statistic);
    const double finite = empirical_quantile(stats, 0.95);
    MESSAGE("cp 95%: limit " << table.quantile(0.95) << ", n = 2000 " << finite);
    CHECK(rel_diff(table.quantile(0.95), finite) <= 0.05);
}

TEST_CASE("table builds are deterministic and converge in m") {
    const auto spec = LimitSpec::of(LimitKind::Sn, 1);
    const auto a = build_table(spec, default_levels(), 10000, 200, 9);
    const auto b = build_table(spec, default_levels(), 10000, 200, 9);
    CHECK(a.serialize() == b.serialize());
    CHECK(a.levels.size() == 999);
    CHECK(std::is_sorted(a.values.begin(), a.values.end()));

    const auto coarse = build_table(spec, {0.95}, 100000, 1000, 5);
    const auto fine = build_table(spec, {0.95}, 100000, 2000, 5);
    CHECK(rel_diff(coarse.quantile(0.95), fine.quantile(0.95)) < 0.02);

    CHECK_THROWS_AS((void)build_table(spec, {0.95}, 9999, 100, 1), ConfigError);
    CHECK_THROWS_AS((void)build_table(spec, {1.0}, 10000, 100, 1), ConfigError);
    auto bad = LimitSpec::of(LimitKind::GeneralizedSn, 1);
    bad.measure = "atoms";
    bad.atoms = {{0.0, 1.0, 1.0}};
    CHECK_THROWS_AS((void)build_table(bad, {0.95}, 10000, 100, 1), TableError);
}

TEST_CASE("table persistence and lookup") {
    auto spec = LimitSpec::of(LimitKind::FixedB, 1);
    spec.b = 0.2;
    const auto table = build_table(spec, default_levels(), 10000, 100, 4);
    const auto dir = std::filesystem::temp_directory_path() / "sninf_table_test";
    std::filesystem::create_directories(dir);
    const auto file = dir / "g.json";
    table.save(file);
    CHECK(std::distance(std::filesystem::directory_iterator(dir), std::filesystem::directory_iterator{}) == 1);
    const auto back = CriticalValueTable::load(file);
    CHECK(back.serialize() == table.serialize());
    CHECK_NOTHROW(back.require_compatible(spec));
    auto other = spec;
    other.b = 0.1;
    CHECK_THROWS_AS(back.require_compatible(other), TableError);
    CHECK_THROWS_AS(back.require_compatible(LimitSpec::of(LimitKind::FixedB, 2)), TableError);
    CHECK_THROWS_AS(back.require_compatible(LimitSpec::of(LimitKind::Sn, 1)), TableError);
    CHECK_THROWS_AS((void)CriticalValueTable::load(dir / "missing.json"), TableError);
    {
        std::ofstream out(dir / "bad.json");
        out << "{\"format\": \"something\"}";
    }
    CHECK_THROWS_AS((void)CriticalValueTable::load(dir / "bad.json"), TableError);
    std::filesystem::remove_all(dir);

    const auto sn = build_table(LimitSpec::of(LimitKind::Sn, 1), {0.1, 0.5, 0.9}, 10000, 100, 4);
    CHECK(sn.quantile(0.5) == sn.values[1]);
    CHECK(sn.quantile(0.7) == doctest::Approx(0.5 * (sn.values[1] + sn.values[2])));
    CHECK_THROWS_AS((void)sn.quantile(0.95), TableError);
    CHECK(sn.cdf(sn.values[1]).value == doctest::Approx(0.5));
    CHECK(sn.upper_tail(1e9).bound == TableProbability::Bound::AtMost);
    CHECK(sn.upper_tail(1e9).value == doctest::Approx(0.1));
    CHECK(sn.upper_tail(-1.0).bound == TableProbability::Bound::AtLeast);

    auto broken = sn;
    broken.values[2] = broken.values[0] - 1.0;
    CHECK_THROWS_AS(broken.validate(), TableError);
    broken = sn;
    broken.reps = 0;
    CHECK_THROWS_AS(broken.validate(), TableError);
}
