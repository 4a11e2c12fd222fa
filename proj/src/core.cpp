#include "sninf/core.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace sninf {

TimeSeries::TimeSeries(Matrix values) : values_(std::move(values)) {
    if (values_.rows() < 1 || values_.cols() < 1) {
        throw DomainError("time series needs n >= 1 and d >= 1");
    }
    if (!values_.allFinite()) {
        throw DomainError("time series contains NaN or Inf");
    }
}

TimeSeries TimeSeries::from_column(std::span<const double> x) {
    Matrix m(static_cast<Eigen::Index>(x.size()), 1);
    for (std::size_t i = 0; i < x.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = x[i];
    return TimeSeries(std::move(m));
}

std::span<const double> TimeSeries::column(std::size_t c) const {
    if (c >= d()) throw DomainError("column index out of range");
    return {values_.col(static_cast<Eigen::Index>(c)).data(), n()};
}

TimeSeries TimeSeries::affine(double a, double c) const {
    Matrix m = (a * values_.array() + c).matrix();
    return TimeSeries(std::move(m));
}

Functional Functional::mean() {
    Functional f;
    f.kind_ = Kind::Mean;
    return f;
}

Functional Functional::quantile(double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw DomainError("quantile level must lie in (0,1)");
    Functional f;
    f.kind_ = Kind::Quantile;
    f.tau_ = tau;
    return f;
}

Functional Functional::autocorrelation(std::size_t lag) {
    if (lag < 1) throw DomainError("autocorrelation lag must be >= 1");
    Functional f;
    f.kind_ = Kind::Autocorrelation;
    f.lag_ = lag;
    return f;
}

Functional Functional::composite(std::vector<Functional> children) {
    if (children.empty()) throw DomainError("composite functional needs at least one child");
    Functional f;
    f.kind_ = Kind::Composite;
    f.children_ = std::move(children);
    return f;
}

namespace {

Functional parse_atom(const std::string& s) {
    if (s == "mean") return Functional::mean();
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw DomainError("unknown functional '" + s + "'");
    const std::string head = s.substr(0, colon);
    const std::string arg = s.substr(colon + 1);
    try {
        std::size_t used = 0;
        if (head == "quantile") {
            const double tau = std::stod(arg, &used);
            if (used != arg.size()) throw std::invalid_argument(arg);
            return Functional::quantile(tau);
        }
        if (head == "acf") {
            const long lag = std::stol(arg, &used);
            if (used != arg.size() || lag < 1) throw std::invalid_argument(arg);
            return Functional::autocorrelation(static_cast<std::size_t>(lag));
        }
    } catch (const std::logic_error&) {
        throw DomainError("bad functional argument in '" + s + "'");
    }
    throw DomainError("unknown functional '" + s + "'");
}

}  // namespace

Functional Functional::parse(const std::string& text) {
    std::vector<Functional> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, '+')) parts.push_back(parse_atom(item));
    if (parts.empty()) throw DomainError("empty functional specification");
    if (parts.size() == 1) return parts.front();
    return composite(std::move(parts));
}

std::size_t Functional::output_dim(std::size_t d) const {
    switch (kind_) {
        case Kind::Mean:
            return d;
        case Kind::Quantile:
        case Kind::Autocorrelation:
            if (d != 1) throw DomainError(to_string() + " requires univariate data (d = 1)");
            return 1;
        case Kind::Composite:
            return std::accumulate(children_.begin(), children_.end(), std::size_t{0},
                                   [d](std::size_t acc, const Functional& c) { return acc + c.output_dim(d); });
    }
    return 0;
}

bool Functional::is_mean_type() const noexcept {
    if (kind_ == Kind::Mean) return true;
    if (kind_ != Kind::Composite) return false;
    for (const auto& c : children_)
        if (!c.is_mean_type()) return false;
    return true;
}

std::string Functional::to_string() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::Mean:
            os << "mean";
            break;
        case Kind::Quantile:
            os << "quantile:" << tau_;
            break;
        case Kind::Autocorrelation:
            os << "acf:" << lag_;
            break;
        case Kind::Composite:
            for (std::size_t i = 0; i < children_.size(); ++i) {
                if (i) os << '+';
                os << children_[i].to_string();
            }
            break;
    }
    return os.str();
}

void check_index(const SubsampleIndex& idx, std::size_t n) {
    if (idx.first < 1 || idx.first > idx.last || idx.last > n) {
        std::ostringstream os;
        os << "subsample index (" << idx.first << "," << idx.last << ") invalid for n = " << n;
        throw DomainError(os.str());
    }
}

FractionPair index_to_fraction(const SubsampleIndex& idx, std::size_t n) {
    check_index(idx, n);
    const auto nd = static_cast<double>(n);
    return {static_cast<double>(idx.first - 1) / nd, static_cast<double>(idx.last) / nd};
}

std::size_t snap_floor(double u, std::size_t n) {
    const double v = u * static_cast<double>(n);
    const double r = std::round(v);
    if (std::abs(v - r) <= 1e-9 * std::max(1.0, std::abs(v))) return static_cast<std::size_t>(r);
    return static_cast<std::size_t>(std::floor(v));
}

std::optional<SubsampleIndex> fraction_to_block(const FractionPair& st, std::size_t n) {
    if (!(st.s >= 0.0 && st.s <= st.t && st.t <= 1.0)) {
        throw DomainError("fraction pair must satisfy 0 <= s <= t <= 1");
    }
    const std::size_t lo = snap_floor(st.s, n);
    const std::size_t hi = snap_floor(st.t, n);
    if (hi <= lo) return std::nullopt;
    return SubsampleIndex{lo + 1, hi};
}

namespace {

void check_atoms(const std::vector<DeltaMeasure::Atom>& atoms) {
    if (atoms.empty()) throw DomainError("measure needs at least one atom");
    for (const auto& a : atoms) {
        if (!(a.s >= 0.0 && a.s <= a.t && a.t <= 1.0)) {
            throw DomainError("atom outside the triangle 0 <= s <= t <= 1");
        }
        if (!(a.w > 0.0) || !std::isfinite(a.w)) throw DomainError("atom weights must be positive");
    }
}

}  // namespace

DeltaMeasure::DeltaMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    check_atoms(atoms_);
    double total = 0.0;
    for (const auto& a : atoms_) total += a.w;
    if (std::abs(total - 1.0) > 1e-9) throw DomainError("atom weights must sum to one");
    for (auto& a : atoms_) a.w /= total;
}

DeltaMeasure DeltaMeasure::normalized(std::vector<Atom> atoms) {
    check_atoms(atoms);
    double total = 0.0;
    for (const auto& a : atoms) total += a.w;
    for (auto& a : atoms) a.w /= total;
    return DeltaMeasure(std::move(atoms));
}

DeltaMeasure DeltaMeasure::recursive(std::size_t n) {
    if (n < 1) throw DomainError("recursive measure needs n >= 1");
    std::vector<Atom> atoms;
    atoms.reserve(n);
    const auto nd = static_cast<double>(n);
    for (std::size_t j = 1; j <= n; ++j) atoms.push_back({0.0, static_cast<double>(j) / nd, 1.0 / nd});
    return normalized(std::move(atoms));
}

DeltaMeasure DeltaMeasure::grid(std::size_t k) {
    if (k < 1) throw DomainError("grid measure needs K >= 1");
    std::vector<Atom> atoms;
    const auto kd = static_cast<double>(k);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b <= k; ++b)
            atoms.push_back({static_cast<double>(a) / kd, static_cast<double>(b) / kd, 1.0});
    return normalized(std::move(atoms));
}

void InferenceConfig::validate() const {
    if (!(clip_gamma > 0.0 && clip_gamma < 0.5)) throw ConfigError("clip gamma must lie in (0, 1/2)");
}

}  // namespace sninf
