#include "sninf/table.hpp"

#include "json.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sninf {

using nlohmann::json;

namespace {

constexpr const char* kFormatTag = "sninf-critical-values";

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (static_cast<Eigen::Index>(j.at(i).size()) != cols) throw TableError("ragged matrix in table params");
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
    }
    return m;
}

json params_json(const LimitSpec& spec) {
    json params = json::object();
    switch (spec.kind) {
        case LimitKind::Sn:
        case LimitKind::ChangePoint:
            break;
        case LimitKind::GeneralizedSn:
            params["measure"] = spec.measure;
            if (spec.measure == "atoms") {
                json atoms = json::array();
                for (const auto& a : spec.atoms) atoms.push_back({a.s, a.t, a.w});
                params["atoms"] = std::move(atoms);
            }
            break;
        case LimitKind::FixedB:
            params["b"] = spec.b;
            params["sigma_half"] = matrix_to_json(spec.sigma_half_or_identity());
            break;
    }
    return params;
}

}  // namespace

std::string to_string(LimitKind kind) {
    switch (kind) {
        case LimitKind::Sn:
            return "sn_limit";
        case LimitKind::GeneralizedSn:
            return "generalized_sn_limit";
        case LimitKind::ChangePoint:
            return "cp_limit";
        case LimitKind::FixedB:
            return "fixedb_limit";
    }
    return "unknown";
}

LimitKind parse_limit_kind(const std::string& id) {
    for (auto k : {LimitKind::Sn, LimitKind::GeneralizedSn, LimitKind::ChangePoint, LimitKind::FixedB})
        if (to_string(k) == id) return k;
    throw ConfigError("unknown limit functional '" + id + "'");
}

DeltaMeasure LimitSpec::delta_measure(std::size_t m) const {
    if (measure == "recursive") return DeltaMeasure::recursive(m);
    if (measure == "atoms") return DeltaMeasure::normalized(atoms);
    if (measure.rfind("grid:", 0) == 0) {
        const std::string arg = measure.substr(5);
        std::size_t used = 0;
        long k = 0;
        try {
            k = std::stol(arg, &used);
        } catch (const std::logic_error&) {
            used = 0;
        }
        if (used != arg.size() || k < 1) throw ConfigError("bad measure specification '" + measure + "'");
        return DeltaMeasure::grid(static_cast<std::size_t>(k));
    }
    throw ConfigError("bad measure specification '" + measure + "'");
}

Matrix LimitSpec::sigma_half_or_identity() const {
    if (sigma_half.size() == 0) return Matrix::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    return sigma_half;
}

std::string LimitSpec::params_text() const { return params_json(*this).dump(); }

void LimitSpec::validate() const {
    if (p < 1) throw ConfigError("limit dimension p must be >= 1");
    if (kind == LimitKind::FixedB) {
        if (!(b > 0.0 && b < 1.0)) throw ConfigError("fixed-b limit needs b in (0,1)");
        const Matrix s = sigma_half_or_identity();
        if (s.rows() != static_cast<Eigen::Index>(p) || s.cols() != static_cast<Eigen::Index>(p)) {
            throw ConfigError("Sigma^{1/2} must be p x p");
        }
    }
    if (kind == LimitKind::GeneralizedSn) (void)delta_measure(2);
}

double CriticalValueTable::quantile(double level) const {
    if (levels.empty()) throw TableError("table has no quantiles");
    if (level < levels.front() - 1e-12 || level > levels.back() + 1e-12) {
        std::ostringstream os;
        os << "level " << level << " outside the tabulated range [" << levels.front() << ", " << levels.back()
           << "]";
        throw TableError(os.str());
    }
    const auto it = std::lower_bound(levels.begin(), levels.end(), level - 1e-12);
    const auto i = static_cast<std::size_t>(it - levels.begin());
    if (std::abs(levels[i] - level) <= 1e-12 || i == 0) return values[i];
    const double w = (level - levels[i - 1]) / (levels[i] - levels[i - 1]);
    return values[i - 1] + w * (values[i] - values[i - 1]);
}

TableProbability CriticalValueTable::cdf(double x) const {
    if (levels.empty()) throw TableError("table has no quantiles");
    if (x < values.front()) return {levels.front(), TableProbability::Bound::AtMost};
    // last tabulated point with value <= x
    const auto it = std::upper_bound(values.begin(), values.end(), x);
    const auto i = static_cast<std::size_t>(it - values.begin()) - 1;
    if (i + 1 == values.size()) return {levels.back(), TableProbability::Bound::AtLeast};
    const double lo = values[i];
    const double hi = values[i + 1];
    const double w = hi > lo ? (x - lo) / (hi - lo) : 0.0;
    return {levels[i] + w * (levels[i + 1] - levels[i]), TableProbability::Bound::Interpolated};
}

TableProbability CriticalValueTable::upper_tail(double x) const {
    const auto c = cdf(x);
    TableProbability p{1.0 - c.value, TableProbability::Bound::Interpolated};
    if (c.bound == TableProbability::Bound::AtMost) p.bound = TableProbability::Bound::AtLeast;
    if (c.bound == TableProbability::Bound::AtLeast) p.bound = TableProbability::Bound::AtMost;
    return p;
}

void CriticalValueTable::require_compatible(const LimitSpec& requested) const {
    if (spec.kind != requested.kind) {
        throw TableError("table tabulates " + to_string(spec.kind) + " but " + to_string(requested.kind) +
                         " is required");
    }
    if (spec.p != requested.p) {
        throw TableError("table dimension p = " + std::to_string(spec.p) + " does not match p = " +
                         std::to_string(requested.p));
    }
    if (spec.params_text() != requested.params_text()) {
        throw TableError("table parameters " + spec.params_text() + " do not match " + requested.params_text());
    }
}

void CriticalValueTable::validate() const {
    if (reps == 0 || grid == 0 || version.empty()) throw TableError("table metadata incomplete");
    if (levels.empty() || levels.size() != values.size()) throw TableError("table quantiles malformed");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i] > 0.0 && levels[i] < 1.0)) throw TableError("table level outside (0,1)");
        if (!std::isfinite(values[i])) throw TableError("table value not finite");
        if (i && (levels[i] <= levels[i - 1] || values[i] < values[i - 1])) {
            throw TableError("table levels must increase and values must not decrease");
        }
    }
    spec.validate();
}

std::string CriticalValueTable::serialize() const {
    json doc;
    doc["format"] = kFormatTag;
    doc["version"] = version;
    doc["functional_id"] = to_string(spec.kind);
    doc["p"] = spec.p;
    doc["params"] = params_json(spec);
    doc["reps"] = reps;
    doc["grid"] = grid;
    doc["seed"] = seed;
    doc["discarded"] = discarded;
    json q = json::array();
    for (std::size_t i = 0; i < levels.size(); ++i) q.push_back({{"level", levels[i]}, {"value", values[i]}});
    doc["quantiles"] = std::move(q);
    return doc.dump(2) + "\n";
}

CriticalValueTable CriticalValueTable::parse(const std::string& text) {
    CriticalValueTable t;
    try {
        const json doc = json::parse(text);
        if (doc.at("format").get<std::string>() != kFormatTag) throw TableError("not a critical-value table");
        t.version = doc.at("version").get<std::string>();
        t.spec.kind = parse_limit_kind(doc.at("functional_id").get<std::string>());
        t.spec.p = doc.at("p").get<std::size_t>();
        const json& params = doc.at("params");
        if (t.spec.kind == LimitKind::GeneralizedSn) {
            t.spec.measure = params.at("measure").get<std::string>();
            if (t.spec.measure == "atoms") {
                for (const auto& a : params.at("atoms"))
                    t.spec.atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()});
            }
        }
        if (t.spec.kind == LimitKind::FixedB) {
            t.spec.b = params.at("b").get<double>();
            t.spec.sigma_half = matrix_from_json(params.at("sigma_half"));
        }
        t.reps = doc.at("reps").get<std::size_t>();
        t.grid = doc.at("grid").get<std::size_t>();
        t.seed = doc.at("seed").get<std::uint64_t>();
        t.discarded = doc.at("discarded").get<std::size_t>();
        for (const auto& q : doc.at("quantiles")) {
            t.levels.push_back(q.at("level").get<double>());
            t.values.push_back(q.at("value").get<double>());
        }
    } catch (const json::exception& e) {
        throw TableError(std::string("malformed table: ") + e.what());
    } catch (const ConfigError& e) {
        throw TableError(std::string("malformed table: ") + e.what());
    }
    t.validate();
    return t;
}

void CriticalValueTable::save(const std::filesystem::path& path) const {
    validate();
    static int counter = 0;
    std::filesystem::path tmp = path;
    tmp += ".tmp-" + std::to_string(::getpid()) + "-" + std::to_string(counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw TableError("cannot write " + tmp.string());
        out << serialize();
        out.flush();
        if (!out) throw TableError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw TableError("cannot move table into place at " + path.string() + ": " + ec.message());
    }
}

CriticalValueTable CriticalValueTable::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw TableError("critical-value table '" + path.string() +
                         "' not found; create it with `sninf build-table --out " + path.string() + " ...`");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

}  // namespace sninf
