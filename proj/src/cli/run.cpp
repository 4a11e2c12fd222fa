#include "sninf/cli.hpp"

#include "sninf/bootstrap.hpp"
#include "sninf/changepoint.hpp"
#include "sninf/fixedb.hpp"
#include "sninf/limits.hpp"
#include "sninf/rng.hpp"
#include "sninf/selfnorm.hpp"
#include "sninf/seqproc.hpp"
#include "sninf/table.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>

namespace sninf::cli {

namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

struct Options {
    std::string input;
    std::string functional = "mean";
    std::string theta0;
    std::string h = "recursive";
    std::string table;
    std::string multipliers = "gaussian";
    std::string out;
    std::string kind;
    std::string n_list = "16,256,4096,65536";
    std::string sigma_half;
    double b = 0.1;
    std::optional<double> gamma;
    double level = 0.95;
    std::uint64_t seed = InferenceConfig{}.rng_seed;
    std::optional<std::size_t> reps;
    std::size_t grid = 1000;
    std::size_t p = 1;
    std::size_t n = 1000;
    std::size_t identity_grid = 100;
    bool timings = false;
};

// Report under construction plus the bookkeeping shared by every command.
struct Report {
    Json doc;
    Json warnings = Json::array();
    Json timings = Json::object();
    Clock::time_point started = Clock::now();

    void lap(const std::string& name) {
        const auto now = Clock::now();
        timings[name] = std::chrono::duration<double, std::milli>(now - started).count();
        started = now;
    }
};

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::logic_error&) {
            used = 0;
        }
        while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
        if (item.empty() || used != item.size() || !std::isfinite(v))
            throw ConfigError(flag + ": '" + item + "' is not a finite number");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError(flag + " is empty");
    return out;
}

Vector parse_vector(const std::string& text, std::size_t p, const std::string& flag) {
    const auto values = parse_list(text, flag);
    if (values.size() != p) {
        std::ostringstream os;
        os << flag << " has " << values.size() << " entries but the functional has dimension p = " << p;
        throw ConfigError(os.str());
    }
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(p));
}

Json to_json(const Vector& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Json to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(to_json(Vector(m.row(i).transpose())));
    return rows;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

std::string bound_name(TableProbability::Bound b) {
    switch (b) {
        case TableProbability::Bound::Interpolated:
            return "interpolated";
        case TableProbability::Bound::AtMost:
            return "at_most";
        case TableProbability::Bound::AtLeast:
            return "at_least";
    }
    return "interpolated";
}

void put_probability(Json& doc, const std::string& key, const TableProbability& prob, Report& report) {
    doc[key] = prob.value;
    doc[key + "_bound"] = bound_name(prob.bound);
    if (prob.bound != TableProbability::Bound::Interpolated)
        report.warnings.push_back(key + " lies beyond the tabulated levels; reported value is a bound");
}

struct Loaded {
    CsvData data;
    Functional f;
    std::size_t p;
};

Loaded load_input(const Options& o, Report& report) {
    auto data = ingest_csv(o.input);
    auto f = Functional::parse(o.functional);
    const std::size_t p = f.output_dim(data.series.d());
    Json input;
    input["path"] = o.input;
    input["rows"] = data.series.n();
    input["columns"] = data.series.d();
    input["header"] = !data.header.empty();
    input["fnv1a64"] = hex64(data.checksum);
    report.doc["input"] = std::move(input);
    report.doc["functional"] = f.to_string();
    report.doc["p"] = p;
    report.lap("ingest");
    return {std::move(data), std::move(f), p};
}

CriticalValueTable load_table(const Options& o, const LimitSpec& wanted, Report& report) {
    if (o.table.empty()) {
        throw TableError("a critical-value table is required (--table); create one with `sninf build-table --kind " +
                         to_string(wanted.kind) + " --p " + std::to_string(wanted.p) + " --out <file>`");
    }
    auto table = CriticalValueTable::load(o.table);
    table.require_compatible(wanted);
    Json prov;
    prov["path"] = o.table;
    prov["functional_id"] = to_string(table.spec.kind);
    prov["p"] = table.spec.p;
    prov["params"] = Json::parse(table.spec.params_text());
    prov["reps"] = table.reps;
    prov["grid"] = table.grid;
    prov["seed"] = table.seed;
    prov["discarded"] = table.discarded;
    prov["version"] = table.version;
    report.doc["table"] = std::move(prov);
    return table;
}

void add_critical(Json& doc, const CriticalValueTable& table, double statistic, double level) {
    const double crit = table.quantile(level);
    doc["level"] = level;
    doc["critical_value"] = crit;
    doc["reject"] = statistic > crit;
}

// Measure spec from --H: "recursive", "grid:K", or a CSV file of (s, t, w) rows.
LimitSpec measure_spec(const Options& o, std::size_t p, Report& report) {
    auto spec = LimitSpec::of(LimitKind::GeneralizedSn, p);
    if (o.h == "recursive" || o.h.rfind("grid:", 0) == 0) {
        spec.measure = o.h;
        return spec;
    }
    const auto atoms = ingest_csv(o.h);
    if (atoms.series.d() != 3) throw ConfigError("--H file must have three columns s,t,w");
    std::vector<DeltaMeasure::Atom> list;
    double total = 0.0;
    for (Eigen::Index i = 0; i < atoms.series.values().rows(); ++i) {
        const auto& v = atoms.series.values();
        list.push_back({v(i, 0), v(i, 1), v(i, 2)});
        total += v(i, 2);
    }
    const auto measure = DeltaMeasure::normalized(list);
    if (std::abs(total - 1.0) > 1e-9) report.warnings.push_back("atom weights rescaled to total mass one");
    spec.measure = "atoms";
    spec.atoms = measure.atoms();
    return spec;
}

LimitKind limit_kind(const std::string& text) {
    if (text == "sn") return LimitKind::Sn;
    if (text == "gsn") return LimitKind::GeneralizedSn;
    if (text == "cp") return LimitKind::ChangePoint;
    if (text == "fixedb") return LimitKind::FixedB;
    return parse_limit_kind(text);
}

LimitSpec limit_spec(const Options& o, Report& report) {
    if (o.kind.empty()) throw ConfigError("--kind is required (sn, gsn, cp or fixedb)");
    const LimitKind kind = limit_kind(o.kind);
    LimitSpec spec = kind == LimitKind::GeneralizedSn ? measure_spec(o, o.p, report) : LimitSpec::of(kind, o.p);
    if (kind == LimitKind::FixedB) {
        spec.b = o.b;
        if (!o.sigma_half.empty()) {
            const auto v = parse_list(o.sigma_half, "--sigma-half");
            if (v.size() != o.p * o.p) throw ConfigError("--sigma-half needs p*p entries (row-major)");
            const auto pi = static_cast<Eigen::Index>(o.p);
            spec.sigma_half = Eigen::Map<const Eigen::Matrix<double, -1, -1, Eigen::RowMajor>>(v.data(), pi, pi);
        } else if (o.p > 1) {
            report.warnings.push_back("Sigma^{1/2} defaults to the identity; G(b) is not pivotal for p > 1");
        }
    }
    spec.validate();
    return spec;
}

Json spec_json(const LimitSpec& spec) {
    Json j;
    j["functional_id"] = to_string(spec.kind);
    j["p"] = spec.p;
    j["params"] = Json::parse(spec.params_text());
    return j;
}

// ---- commands -----------------------------------------------------------

void cmd_sn_test(const Options& o, Report& r) {
    auto in = load_input(o, r);
    const Vector theta0 = parse_vector(o.theta0, in.p, "--theta0");
    const auto table = load_table(o, LimitSpec::of(LimitKind::Sn, in.p), r);
    const auto res = sn_statistic(in.data.series, in.f, theta0);
    r.lap("statistic");
    Json out;
    out["statistic"] = res.statistic;
    out["theta_hat"] = to_json(res.theta_hat);
    out["theta0"] = to_json(theta0);
    out["normalizer"] = to_json(res.normalizer);
    out["condition_number"] = res.condition_number;
    put_probability(out, "pvalue", table.upper_tail(res.statistic), r);
    add_critical(out, table, res.statistic, o.level);
    r.doc["result"] = std::move(out);
}

void cmd_sn_ci(const Options& o, Report& r) {
    auto in = load_input(o, r);
    const auto table = load_table(o, LimitSpec::of(LimitKind::Sn, in.p), r);
    const auto ci = sn_confidence_interval(in.data.series, in.f, o.level, table);
    r.lap("interval");
    Json out;
    out["level"] = ci.level;
    out["estimate"] = ci.estimate;
    out["lower"] = ci.lower;
    out["upper"] = ci.upper;
    out["critical_value"] = ci.critical_value;
    out["normalizer"] = ci.normalizer;
    r.doc["result"] = std::move(out);
}

void cmd_gsn_test(const Options& o, Report& r) {
    auto in = load_input(o, r);
    const Vector theta0 = parse_vector(o.theta0, in.p, "--theta0");
    const auto spec = measure_spec(o, in.p, r);
    const auto table = load_table(o, spec, r);
    const auto h = spec.delta_measure(in.data.series.n());
    const auto res = o.gamma ? clipped_sn_statistic(in.data.series, in.f, theta0, h, *o.gamma)
                             : generalized_sn_statistic(in.data.series, in.f, theta0, h);
    r.lap("statistic");
    Json out;
    out["measure"] = spec.measure;
    out["atoms"] = h.size();
    out["atoms_used"] = res.atoms_used;
    out["atoms_dropped"] = res.atoms_dropped;
    if (res.clipped) out["gamma"] = res.gamma;
    out["statistic"] = res.statistic;
    out["theta_hat"] = to_json(res.theta_hat);
    out["theta0"] = to_json(theta0);
    out["normalizer"] = to_json(res.normalizer);
    out["condition_number"] = res.condition_number;
    put_probability(out, "pvalue", table.upper_tail(res.statistic), r);
    add_critical(out, table, res.statistic, o.level);
    if (res.atoms_dropped > 0)
        r.warnings.push_back(std::to_string(res.atoms_dropped) + " atoms contributed nothing (empty or clipped blocks)");
    r.doc["result"] = std::move(out);
}

void cmd_cp_test(const Options& o, Report& r) {
    auto in = load_input(o, r);
    const auto table = load_table(o, LimitSpec::of(LimitKind::ChangePoint, in.p), r);
    InferenceConfig config;
    if (o.gamma) config.clip_gamma = *o.gamma;
    const auto res = cp_statistic(in.data.series, in.f, config, o.gamma.has_value());
    r.lap("scan");
    const auto n = static_cast<double>(in.data.series.n());
    Json out;
    out["statistic"] = res.statistic;
    out["argmax_k"] = res.argmax_k;
    out["argmax_fraction"] = static_cast<double>(res.argmax_k) / n;
    out["k_lo"] = res.k_lo;
    out["k_hi"] = res.k_hi;
    out["clipped"] = res.clipped;
    if (res.clipped) out["gamma"] = res.gamma;
    out["skipped_k"] = res.skipped_k;
    put_probability(out, "pvalue", table.upper_tail(res.statistic), r);
    add_critical(out, table, res.statistic, o.level);
    if (!res.skipped_k.empty())
        r.warnings.push_back(std::to_string(res.skipped_k.size()) + " split points skipped (singular normalizer)");
    if (res.clipped)
        r.warnings.push_back("clipped scan referred to the unrestricted limit table; the test is conservative");
    r.doc["result"] = std::move(out);
}

void cmd_fixedb(const Options& o, Report& r) {
    auto in = load_input(o, r);
    const Vector theta0 = parse_vector(o.theta0, in.p, "--theta0");
    const auto res = fixedb_pvalue(in.data.series, in.f, theta0, o.b);
    r.lap("subsampling");
    Json out;
    out["b"] = res.b;
    out["l"] = res.l;
    out["N"] = res.N;
    out["test_norm"] = res.test_norm;
    out["count"] = res.count;
    out["pvalue"] = res.pvalue;
    if (!o.table.empty()) {
        auto spec = LimitSpec::of(LimitKind::FixedB, in.p);
        spec.b = o.b;
        if (!o.sigma_half.empty()) {
            Options so = o;
            so.p = in.p;
            so.kind = "fixedb";
            spec = limit_spec(so, r);
        }
        const auto table = load_table(o, spec, r);
        // Small p_hat is extreme, so the calibrated p-value is P(G(b) <= p_hat).
        put_probability(out, "calibrated_pvalue", table.cdf(res.pvalue), r);
    }
    r.doc["result"] = std::move(out);
}

void cmd_bootstrap(const Options& o, Report& r) {
    auto in = load_input(o, r);
    BootstrapTarget target;
    if (o.kind == "sn" || o.kind.empty()) {
        target.kind = BootstrapTarget::Kind::Sn;
    } else if (o.kind == "cp") {
        target.kind = BootstrapTarget::Kind::ChangePoint;
    } else if (o.kind == "fixedb") {
        target.kind = BootstrapTarget::Kind::FixedB;
        target.b = o.b;
    } else {
        throw ConfigError("bootstrap --kind must be sn, cp or fixedb");
    }
    if (target.kind != BootstrapTarget::Kind::ChangePoint) {
        if (o.theta0.empty()) throw ConfigError("--theta0 is required for this bootstrap kind");
        target.theta0 = parse_vector(o.theta0, in.p, "--theta0");
    }
    const auto scheme = MultiplierScheme::parse(o.multipliers, o.seed);
    const std::size_t B = o.reps.value_or(1000);
    const auto res = bootstrap_distribution(in.data.series, in.f, target, scheme, B);
    r.lap("bootstrap");

    Json prov;
    prov["multipliers"] = scheme.to_string();
    if (scheme.kind == MultiplierScheme::Kind::BlockDependent)
        prov["block_length"] =
            scheme.block_length ? scheme.block_length : default_multiplier_block(in.data.series.n());
    prov["seed"] = o.seed;
    prov["replicates"] = B;
    r.doc["bootstrap"] = std::move(prov);

    Json out;
    out["kind"] = o.kind.empty() ? "sn" : o.kind;
    if (target.kind == BootstrapTarget::Kind::FixedB) {
        out["b"] = o.b;
        out["fixedb_pvalue"] = -res.observed;
    } else {
        out["statistic"] = res.observed;
    }
    out["pvalue"] = res.pvalue;
    out["successful"] = res.replicates.size();
    out["failed"] = res.failed;
    Json q = Json::array();
    if (target.kind == BootstrapTarget::Kind::FixedB) {
        // lower quantiles of the replicate p-values
        BootstrapResult flipped = res;
        for (auto& v : flipped.replicates) v = -v;
        for (double level : {0.01, 0.05, 0.1}) q.push_back({{"level", level}, {"value", flipped.quantile(level)}});
    } else {
        for (double level : {0.9, 0.95, 0.99}) q.push_back({{"level", level}, {"value", res.quantile(level)}});
    }
    out["replicate_quantiles"] = std::move(q);
    if (res.failed > 0) r.warnings.push_back(std::to_string(res.failed) + " degenerate replicates discarded");
    r.doc["result"] = std::move(out);
}

void cmd_simulate(const Options& o, Report& r) {
    const auto spec = limit_spec(o, r);
    const std::size_t reps = o.reps.value_or(10000);
    auto sample = sample_limit(spec, reps, o.grid, o.seed);
    r.lap("simulation");
    r.doc["limit"] = spec_json(spec);
    r.doc["reps"] = reps;
    r.doc["grid"] = o.grid;
    r.doc["seed"] = o.seed;
    if (!o.out.empty()) {
        std::ofstream file(o.out, std::ios::binary);
        if (!file) throw ConfigError("cannot write '" + o.out + "'");
        file << std::setprecision(17);
        for (double v : sample.values) file << v << '\n';
        r.doc["values_file"] = o.out;
    }
    std::vector<double> sorted = sample.values;
    std::sort(sorted.begin(), sorted.end());
    double mean = 0.0;
    for (double v : sorted) mean += v;
    mean /= static_cast<double>(sorted.size());
    double var = 0.0;
    for (double v : sorted) var += (v - mean) * (v - mean);
    var /= static_cast<double>(std::max<std::size_t>(sorted.size() - 1, 1));
    Json out;
    out["mean"] = mean;
    out["sd"] = std::sqrt(var);
    Json q = Json::array();
    for (double level : {0.5, 0.9, 0.95, 0.99}) {
        auto k = static_cast<std::size_t>(std::ceil(level * static_cast<double>(sorted.size()) * (1.0 - 1e-12)));
        k = std::clamp<std::size_t>(k, 1, sorted.size());
        q.push_back({{"level", level}, {"value", sorted[k - 1]}});
    }
    out["quantiles"] = std::move(q);
    out["discarded"] = sample.discarded;
    if (sample.discarded > 0) r.warnings.push_back(std::to_string(sample.discarded) + " singular draws redrawn");
    r.doc["result"] = std::move(out);
}

void cmd_build_table(const Options& o, Report& r) {
    if (o.out.empty()) throw ConfigError("--out is required for build-table");
    const auto spec = limit_spec(o, r);
    const std::size_t reps = o.reps.value_or(100000);
    const auto table = build_table(spec, default_levels(), reps, o.grid, o.seed);
    r.lap("simulation");
    table.save(o.out);
    r.lap("write");
    r.doc["limit"] = spec_json(spec);
    Json out;
    out["path"] = o.out;
    out["reps"] = table.reps;
    out["grid"] = table.grid;
    out["seed"] = table.seed;
    out["discarded"] = table.discarded;
    out["version"] = table.version;
    Json q = Json::array();
    for (double level : {0.9, 0.95, 0.99}) q.push_back({{"level", level}, {"value", table.quantile(level)}});
    out["quantiles"] = std::move(q);
    r.doc["result"] = std::move(out);
}

void cmd_demo(const Options& o, Report& r) {
    std::vector<std::size_t> ns;
    for (double v : parse_list(o.n_list, "--n")) {
        if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("--n values must be positive integers");
        ns.push_back(static_cast<std::size_t>(v));
    }
    const auto rows = counterexample_demo(ns, o.seed);
    r.lap("demo");
    r.doc["seed"] = o.seed;
    Json out = Json::array();
    for (const auto& row : rows) {
        Json j;
        j["n"] = row.n;
        j["block"] = row.block;
        j["planted"] = row.planted;
        j["fully_planted"] = row.fully_planted;
        j["median"] = row.median;
        j["value"] = row.value;
        if (row.fully_planted) {
            j["closed_form"] = row.closed_form;
        } else {
            r.warnings.push_back("n = " + std::to_string(row.n) +
                                 ": prefix block mixes planted and uniform points; closed form not applicable");
        }
        out.push_back(std::move(j));
    }
    r.doc["result"] = std::move(out);
}

void cmd_check_identity(const Options& o, Report& r) {
    std::optional<TimeSeries> ts;
    if (!o.input.empty()) {
        auto data = ingest_csv(o.input);
        Json input;
        input["path"] = o.input;
        input["rows"] = data.series.n();
        input["columns"] = data.series.d();
        input["fnv1a64"] = hex64(data.checksum);
        r.doc["input"] = std::move(input);
        ts.emplace(data.series);
    } else {
        if (o.n < 1) throw ConfigError("--n must be >= 1");
        auto engine = make_engine(o.seed, 0);
        std::normal_distribution<double> z;
        std::vector<double> x(o.n);
        for (auto& v : x) v = z(engine);
        ts.emplace(TimeSeries::from_column(x));
        r.doc["input"] = {{"generated", "iid_normal"}, {"rows", o.n}, {"seed", o.seed}};
    }
    const Vector reference =
        o.theta0.empty() ? Vector::Zero(static_cast<Eigen::Index>(ts->d())) : parse_vector(o.theta0, ts->d(), "--theta0");
    const std::size_t k = o.identity_grid;
    const auto rep = prop1_identity_check(*ts, reference, k);
    r.lap("check");
    Json out;
    out["grid"] = k;
    out["pairs_checked"] = rep.pairs_checked;
    out["max_violation"] = rep.max_violation;
    out["worst_pair"] = {rep.worst.s, rep.worst.t};
    out["passed"] = true;
    r.doc["result"] = std::move(out);
}

struct Command {
    const char* name;
    const char* help;
    void (*run)(const Options&, Report&);
    std::vector<std::string> flags;
};

const std::vector<Command>& commands() {
    static const std::vector<Command> list = {
        {"sn-test", "self-normalized test of H0: theta = theta0", cmd_sn_test,
         {"input", "functional", "theta0", "table", "level"}},
        {"sn-ci", "self-normalized confidence interval (scalar functionals)", cmd_sn_ci,
         {"input", "functional", "table", "level"}},
        {"gsn-test", "generalized self-normalized test over a measure H", cmd_gsn_test,
         {"input", "functional", "theta0", "table", "H", "gamma", "level"}},
        {"cp-test", "self-normalized change-point test", cmd_cp_test,
         {"input", "functional", "table", "gamma", "level"}},
        {"fixedb-pvalue", "fixed-b subsampling p-value", cmd_fixedb,
         {"input", "functional", "theta0", "b", "table", "sigma-half"}},
        {"bootstrap", "multiplier bootstrap calibration", cmd_bootstrap,
         {"input", "functional", "theta0", "kind", "b", "multipliers", "seed", "reps"}},
        {"simulate-limits", "Monte Carlo draws of a limit functional", cmd_simulate,
         {"kind", "p", "H", "b", "sigma-half", "reps", "grid", "seed", "out"}},
        {"build-table", "build and save a critical-value table", cmd_build_table,
         {"kind", "p", "H", "b", "sigma-half", "reps", "grid", "seed", "out"}},
        {"demo-counterexample", "median counterexample with planted outliers", cmd_demo, {"n", "seed"}},
        {"check-identity", "verify the block-mean representation identity", cmd_check_identity,
         {"input-optional", "theta0", "identity-grid", "length", "seed"}},
    };
    return list;
}

void add_flag(CLI::App& sub, const std::string& flag, Options& o) {
    if (flag == "input") sub.add_option("--input", o.input, "CSV file (one column per coordinate)")->required();
    if (flag == "input-optional") sub.add_option("--input", o.input, "CSV file (default: generated N(0,1) series)");
    if (flag == "functional") sub.add_option("--functional", o.functional, "mean | quantile:tau | acf:h, '+'-joined");
    if (flag == "theta0") sub.add_option("--theta0", o.theta0, "hypothesized value, comma-separated");
    if (flag == "table") sub.add_option("--table", o.table, "critical-value table file");
    if (flag == "level") sub.add_option("--level", o.level, "confidence level / 1 - nominal size");
    if (flag == "H") sub.add_option("--H", o.h, "recursive | grid:K | CSV file of s,t,w atoms");
    if (flag == "gamma") sub.add_option("--gamma", o.gamma, "clip blocks of fractional length <= n^-gamma");
    if (flag == "b") sub.add_option("--b", o.b, "subsample fraction b = l/n");
    if (flag == "sigma-half") sub.add_option("--sigma-half", o.sigma_half, "Sigma^{1/2}, p*p row-major values");
    if (flag == "kind") sub.add_option("--kind", o.kind, "statistic or limit functional");
    if (flag == "multipliers") sub.add_option("--multipliers", o.multipliers, "gaussian | rademacher | block[:l]");
    if (flag == "seed") sub.add_option("--seed", o.seed, "random seed");
    if (flag == "reps") sub.add_option("--reps", o.reps, "replications");
    if (flag == "grid") sub.add_option("--grid", o.grid, "Brownian grid size m, or identity grid K");
    if (flag == "p") sub.add_option("--p", o.p, "dimension of the limit");
    if (flag == "out") sub.add_option("--out", o.out, "output file");
    if (flag == "n") sub.add_option("--n", o.n_list, "comma-separated sample sizes");
    if (flag == "length") sub.add_option("--n", o.n, "series length when no --input is given");
    if (flag == "identity-grid") sub.add_option("--grid", o.identity_grid, "pairs (a/K, b/K) on a K grid");
}

int exit_code_for(const std::exception_ptr& e, std::string& message) {
    try {
        std::rethrow_exception(e);
    } catch (const IngestError& ex) {
        message = std::string("input error: ") + ex.what();
        return kIngest;
    } catch (const SingularityError& ex) {
        std::ostringstream os;
        os << "singular normalizer: " << ex.what() << " (condition number " << ex.condition_number() << ")";
        message = os.str();
        return kSingular;
    } catch (const EstimatorUndefined& ex) {
        message = std::string("estimator undefined: ") + ex.what();
        return kSingular;
    } catch (const TableError& ex) {
        message = std::string("table error: ") + ex.what();
        return kTable;
    } catch (const BootstrapUnstable& ex) {
        message = std::string("bootstrap unstable: ") + ex.what();
        return kBootstrap;
    } catch (const ConfigError& ex) {
        message = std::string("configuration error: ") + ex.what();
        return kConfig;
    } catch (const DomainError& ex) {
        message = std::string("configuration error: ") + ex.what();
        return kConfig;
    } catch (const std::exception& ex) {
        message = std::string("error: ") + ex.what();
        return kInternal;
    }
}

}  // namespace

CommandOutcome run_command(const std::vector<std::string>& args) {
    CommandOutcome outcome;
    Options o;
    CLI::App app{"Self-normalized inference for time series", "sninf"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersionTag);
    for (const auto& cmd : commands()) {
        auto* sub = app.add_subcommand(cmd.name, cmd.help);
        for (const auto& flag : cmd.flags) add_flag(*sub, flag, o);
        sub->add_flag("--timings", o.timings, "include wall-clock timings in the report");
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    std::ostringstream out, err;
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        outcome.out = out.str();
        outcome.err = err.str();
        outcome.exit_code = code == 0 ? kOk : kUsage;
        return outcome;
    }

    const Command* chosen = nullptr;
    for (const auto& cmd : commands())
        if (app.got_subcommand(cmd.name)) chosen = &cmd;

    Report report;
    report.doc["command"] = chosen->name;
    report.doc["arguments"] = args;
    report.doc["version"] = kVersionTag;
    try {
        chosen->run(o, report);
    } catch (...) {
        std::string message;
        outcome.exit_code = exit_code_for(std::current_exception(), message);
        outcome.err = "sninf " + std::string(chosen->name) + ": " + message + "\n";
        return outcome;
    }
    report.doc["warnings"] = report.warnings;
    if (o.timings) report.doc["timings_ms"] = report.timings;
    outcome.out = report.doc.dump(2) + "\n";
    return outcome;
}

}  // namespace sninf::cli
