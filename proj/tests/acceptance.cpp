// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "sninf/bootstrap.hpp"
#include "sninf/changepoint.hpp"
#include "sninf/cli.hpp"
#include "sninf/estimators.hpp"
#include "sninf/fixedb.hpp"
#include "sninf/limits.hpp"
#include "sninf/selfnorm.hpp"
#include "sninf/seqproc.hpp"

#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

using namespace sninf;
using namespace sninf::test;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

double rel_matrix(const Matrix& a, const Matrix& b) {
    const double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

std::size_t uniform_index(std::mt19937_64& engine, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(engine);
}

// Tables shared by the calibration criteria, built once.
constexpr std::size_t kTableReps = 200000;
constexpr std::size_t kTableGrid = 1000;

const CriticalValueTable& sn_table() {
    static const auto table =
        build_table(LimitSpec::of(LimitKind::Sn, 1), default_levels(), kTableReps, kTableGrid, 20140101);
    return table;
}

const CriticalValueTable& cp_table() {
    static const auto table =
        build_table(LimitSpec::of(LimitKind::ChangePoint, 1), default_levels(), kTableReps, kTableGrid, 20140102);
    return table;
}

Verdict identity() {
    const auto t0 = Clock::now();
    auto engine = make_engine(1, 0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    std::size_t checked = 0, expected = 0;
    for (std::size_t rep = 0; rep < 50; ++rep) {
        const std::size_t n = uniform_index(engine, 2, 2000);
        const std::size_t d = uniform_index(engine, 1, 3);
        const auto ts = normal_series(n, d, 100 + rep);
        std::vector<FractionPair> pairs;
        pairs.reserve(10000);
        for (std::size_t i = 0; i < 10000; ++i) {
            const double a = u(engine), b = u(engine);
            pairs.push_back({std::min(a, b), std::max(a, b)});
        }
        const Vector reference = Vector::Constant(static_cast<Eigen::Index>(d), u(engine) - 0.5);
        const auto report = prop1_identity_check(ts, reference, pairs, 1.0);
        worst = std::max(worst, report.max_violation);
        checked += report.pairs_checked;
        expected += pairs.size() * d;  // one check per column
    }
    const double elapsed = seconds_since(t0);
    return {worst <= 1e-12 && checked == expected && elapsed < 10.0,
            fmt("max violation %.3g over %zu pairs, %.2f s", worst, checked, elapsed)};
}

Verdict conjugation() {
    const auto t0 = Clock::now();
    const std::size_t m = 200;
    const auto grid = DeltaMeasure::grid(10).atoms();
    DeltaMeasure h(std::vector<DeltaMeasure::Atom>(grid.begin(), grid.end()));
    double worst = 0.0;
    std::size_t trials = 0;
    for (std::size_t p = 1; p <= 3; ++p) {
        for (std::size_t rep = 0; rep < 100; ++rep) {
            const auto path = simulate_brownian(p, m, 1000 * p + rep);
            const auto moved = path.transformed(random_invertible(p, 7000 * p + rep));
            const std::array<std::pair<std::optional<double>, std::optional<double>>, 3> pairs{{
                {limit_sn_statistic(path), limit_sn_statistic(moved)},
                {limit_generalized_sn(path, h), limit_generalized_sn(moved, h)},
                {limit_cp_statistic(path), limit_cp_statistic(moved)},
            }};
            for (const auto& [a, b] : pairs) {
                if (a.has_value() != b.has_value()) return {false, "definedness changed under conjugation"};
                if (a) worst = std::max(worst, rel(*a, *b));
                ++trials;
            }
        }
    }
    const double elapsed = seconds_since(t0);
    return {worst <= 1e-10 && elapsed < 30.0,
            fmt("max relative change %.3g over %zu conjugations, %.2f s", worst, trials, elapsed)};
}

Verdict specialization() {
    const std::array<Functional, 4> functionals{Functional::mean(), Functional::quantile(0.3),
                                                Functional::autocorrelation(1),
                                                Functional::composite({Functional::mean(), Functional::quantile(0.5)})};
    auto engine = make_engine(3, 0);
    double worst = 0.0;
    for (std::size_t rep = 0; rep < 20; ++rep) {
        const std::size_t n = uniform_index(engine, 20, 400);
        const auto& f = functionals[rep % functionals.size()];
        const auto ts = series(ar1(n, 0.4, 300 + rep));
        worst = std::max(worst, rel_matrix(generalized_sn_matrix(ts, f, DeltaMeasure::recursive(n)), sn_matrix(ts, f)));
    }
    // n^{-gamma} = 0.061 lies below every atom length of grid(4), so nothing is clipped
    const std::size_t n = 500;
    const auto ts = series(iid_normal(n, 42));
    const auto h = DeltaMeasure::grid(4);
    const Vector theta0 = Vector::Zero(1);
    const auto plain = generalized_sn_statistic(ts, Functional::mean(), theta0, h);
    const auto clipped = clipped_sn_statistic(ts, Functional::mean(), theta0, h, 0.45);
    // a shift at the midpoint keeps the maximizing k inside the clipped range
    InferenceConfig config;
    config.clip_gamma = 0.45;
    auto x = iid_normal(n, 43);
    for (std::size_t i = n / 2; i < n; ++i) x[i] += 1.0;
    const auto cp_plain = cp_statistic(series(x), Functional::mean(), config, false);
    const auto cp_clipped = cp_statistic(series(x), Functional::mean(), config, true);
    const bool exact = plain.statistic == clipped.statistic && cp_plain.statistic == cp_clipped.statistic &&
                       cp_plain.argmax_k == cp_clipped.argmax_k;
    return {worst <= 1e-12 && exact,
            fmt("max recursive-H difference %.3g; non-binding clipping %s", worst, exact ? "identical" : "differs")};
}

Verdict counterexample() {
    const std::vector<std::size_t> ns{16, 256, 4096, 65536};
    const auto rows = counterexample_demo(ns);
    bool exact = true, increasing = true;
    std::string values;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double expected = std::pow(static_cast<double>(ns[i]), -0.25) * (static_cast<double>(ns[i]) - 0.5);
        exact = exact && rows[i].value == expected;
        if (i > 0) increasing = increasing && rows[i].value > rows[i - 1].value;
        values += fmt("%s%g", i ? ", " : "", rows[i].value);
    }
    return {exact && increasing && rows.size() == ns.size(), "values " + values};
}

Verdict sn_size() {
    const auto t0 = Clock::now();
    const double crit = sn_table().quantile(0.95);
    const Vector theta0 = Vector::Zero(1);
    std::size_t rejections = 0;
    for (std::size_t rep = 0; rep < 2000; ++rep) {
        const auto stat = sn_statistic(series(iid_normal(500, 50000 + rep)), Functional::mean(), theta0).statistic;
        rejections += stat > crit ? 1 : 0;
    }
    const double rate = static_cast<double>(rejections) / 2000.0;
    const double elapsed = seconds_since(t0);
    return {rate >= 0.03 && rate <= 0.07 && elapsed < 300.0,
            fmt("rejection rate %.4f (critical value %.3f), %.1f s", rate, crit, elapsed)};
}

Verdict cp_size_power() {
    const auto t0 = Clock::now();
    const double crit = cp_table().quantile(0.95);
    const InferenceConfig config;
    const std::array<double, 3> shifts{0.0, 0.5, 1.0};
    std::array<double, 3> power{};
    for (std::size_t s = 0; s < shifts.size(); ++s) {
        std::size_t rejections = 0;
        for (std::size_t rep = 0; rep < 2000; ++rep) {
            auto x = iid_normal(500, 60000 + rep);
            for (std::size_t i = 250; i < 500; ++i) x[i] += shifts[s];
            rejections += cp_statistic(series(x), Functional::mean(), config).statistic > crit ? 1 : 0;
        }
        power[s] = static_cast<double>(rejections) / 2000.0;
    }
    const double elapsed = seconds_since(t0);
    const bool pass = power[0] >= 0.03 && power[0] <= 0.07 && power[0] < power[1] && power[1] < power[2] &&
                      power[2] >= 0.8 && elapsed < 600.0;
    return {pass, fmt("size %.4f, power %.4f / %.4f at shifts 0.5 / 1.0, %.1f s", power[0], power[1], power[2],
                      elapsed)};
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double worst = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        worst = std::max(worst, std::abs(static_cast<double>(i) / static_cast<double>(a.size()) -
                                         static_cast<double>(j) / static_cast<double>(b.size())));
    }
    return worst;
}

Verdict fixedb_match() {
    const auto t0 = Clock::now();
    auto spec = LimitSpec::of(LimitKind::FixedB, 1);
    spec.b = 0.1;
    const auto limit = sample_limit(spec, 100000, 1000, 20140103);
    std::vector<double> pvalues;
    pvalues.reserve(1000);
    const Vector theta0 = Vector::Zero(1);
    for (std::size_t rep = 0; rep < 1000; ++rep) {
        pvalues.push_back(fixedb_pvalue(series(iid_normal(1000, 70000 + rep)), Functional::mean(), theta0, 0.1).pvalue);
    }
    const double ks = ks_two_sample(pvalues, limit.values);
    return {ks <= 0.05, fmt("KS distance %.4f, %.1f s", ks, seconds_since(t0))};
}

Verdict bootstrap_consistency() {
    const auto t0 = Clock::now();
    const double table_q = sn_table().quantile(0.95);
    BootstrapTarget target;
    target.kind = BootstrapTarget::Kind::Sn;
    target.theta0 = Vector::Zero(1);
    double sum = 0.0;
    for (std::size_t rep = 0; rep < 50; ++rep) {
        MultiplierScheme scheme;
        scheme.kind = MultiplierScheme::Kind::IidGaussian;
        scheme.seed = 80000 + rep;
        const auto result =
            bootstrap_distribution(series(iid_normal(500, 90000 + rep)), Functional::mean(), target, scheme, 500);
        sum += result.quantile(0.95);
    }
    const double mean_q = sum / 50.0;
    const double gap = std::abs(mean_q - table_q) / table_q;
    return {gap <= 0.10, fmt("mean bootstrap quantile %.3f vs table %.3f (%.1f%%), %.1f s", mean_q, table_q,
                             100.0 * gap, seconds_since(t0))};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Verdict determinism() {
    const auto dir = std::filesystem::temp_directory_path() / "sninf_acceptance";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const auto file = [&](const std::string& name) { return (dir / name).string(); };
    {
        std::ofstream out(file("x.csv"));
        out.precision(17);
        for (double v : ar1(300, 0.3, 5)) out << v << '\n';
    }
    const std::vector<std::vector<std::string>> commands{
        {"simulate-limits", "--kind", "sn", "--reps", "2000", "--grid", "200", "--seed", "1", "--out", "@"},
        {"simulate-limits", "--kind", "gsn", "--H", "grid:6", "--reps", "2000", "--grid", "200", "--seed", "2"},
        {"simulate-limits", "--kind", "cp", "--reps", "2000", "--grid", "200", "--seed", "3"},
        {"simulate-limits", "--kind", "fixedb", "--b", "0.2", "--reps", "2000", "--grid", "200", "--seed", "4"},
        {"build-table", "--kind", "sn", "--reps", "10000", "--grid", "200", "--seed", "5", "--out", "@"},
        {"build-table", "--kind", "cp", "--reps", "10000", "--grid", "200", "--seed", "6", "--out", "@"},
        {"bootstrap", "--input", file("x.csv"), "--kind", "sn", "--theta0", "0", "--reps", "200", "--seed", "7"},
        {"bootstrap", "--input", file("x.csv"), "--kind", "cp", "--reps", "200", "--multipliers", "rademacher",
         "--seed", "8"},
        {"bootstrap", "--input", file("x.csv"), "--kind", "fixedb", "--theta0", "0", "--b", "0.1", "--reps", "200",
         "--multipliers", "block", "--seed", "9"},
        {"check-identity", "--n", "500", "--grid", "40", "--seed", "10"},
        {"demo-counterexample", "--n", "16,256"},
    };
    std::size_t compared = 0;
    for (std::size_t c = 0; c < commands.size(); ++c) {
        std::array<std::string, 2> reports, files;
        for (std::size_t run = 0; run < 2; ++run) {
            auto args = commands[c];
            const auto target = file(fmt("out_%zu_%zu", c, run));
            bool writes = false;
            for (auto& a : args) {
                if (a == "@") {
                    a = target;
                    writes = true;
                }
            }
            const auto outcome = cli::run_command(args);
            if (outcome.exit_code != cli::kOk) {
                return {false, args[0] + " failed: " + outcome.err};
            }
            reports[run] = outcome.out;
            // the output path differs between runs by design
            for (auto at = reports[run].find(target); at != std::string::npos; at = reports[run].find(target)) {
                reports[run].replace(at, target.size(), "@");
            }
            if (writes) files[run] = slurp(target);
        }
        if (reports[0] != reports[1] || files[0] != files[1]) return {false, "mismatch for " + commands[c][0]};
        ++compared;
    }
    std::filesystem::remove_all(dir);
    return {true, fmt("%zu randomized commands reproduced byte-for-byte", compared)};
}

Verdict oracle_equivalence() {
    auto engine = make_engine(11, 0);
    const std::array<Functional, 4> functionals{Functional::mean(), Functional::quantile(0.7),
                                                Functional::autocorrelation(2),
                                                Functional::composite({Functional::mean(), Functional::autocorrelation(1)})};
    double worst = 0.0;
    for (std::size_t rep = 0; rep < 40; ++rep) {
        const std::size_t n = uniform_index(engine, 8, 300);
        const auto& f = functionals[rep % functionals.size()];
        const auto ts = series(ar1(n, 0.5, 400 + rep));

        std::vector<SubsampleIndex> pairs;
        for (std::size_t i = 0; i < 200; ++i) {
            std::size_t a = uniform_index(engine, 1, n), b = uniform_index(engine, 1, n);
            pairs.push_back({std::min(a, b), std::max(a, b)});
        }
        const auto grid = grid_estimates(ts, f, pairs);
        for (const auto& idx : pairs) {
            worst = std::max(worst, rel_matrix(grid.at(idx).value, naive_estimate(ts, f, idx.first, idx.last)));
        }
        const auto forward = recursive_estimates(ts, f);
        const auto backward = reverse_recursive_estimates(ts, f);
        for (std::size_t k = 1; k <= n; ++k) {
            worst = std::max(worst, rel_matrix(forward.at(k), naive_estimate(ts, f, 1, k)));
            worst = std::max(worst, rel_matrix(backward.at(k), naive_estimate(ts, f, k, n)));
        }
        worst = std::max(worst, rel_matrix(sn_matrix(ts, f), naive_sn_matrix(ts, f)));
        const auto path = cp_normalizer_path(ts, f);
        for (std::size_t k = 1; k < n; ++k) {
            worst = std::max(worst, rel_matrix(path[k - 1], naive_cp_normalizer(ts, f, k)));
        }
        const std::size_t l = uniform_index(engine, 1, n);
        const auto fast = subsample_norms(ts, f, l);
        const auto slow = naive_subsample_norms(ts, f, l);
        if (fast.size() != slow.size()) return {false, "subsample norm count differs"};
        for (std::size_t j = 0; j < fast.size(); ++j) worst = std::max(worst, rel(fast[j], slow[j]));
    }
    return {worst <= 1e-12, fmt("max relative difference %.3g over 40 inputs", worst)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"subsample identity", identity},
        {"pivotality under conjugation", conjugation},
        {"specialization", specialization},
        {"median counterexample", counterexample},
        {"SN size", sn_size},
        {"change-point size and power", cp_size_power},
        {"fixed-b distribution", fixedb_match},
        {"bootstrap consistency", bootstrap_consistency},
        {"determinism", determinism},
        {"fast paths vs naive oracles", oracle_equivalence},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failures += v.pass ? 0 : 1;
        std::printf("%s criterion %zu (%s): %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    v.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
