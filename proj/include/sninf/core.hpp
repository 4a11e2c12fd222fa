#pragma once

#include "sninf/errors.hpp"

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sninf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/**
 * @brief An n x d sample X_1..X_n of a stationary series, row i = X_{i+1}.
 *
 * Immutable after construction. Every entry is finite.
 */
class TimeSeries {
public:
    explicit TimeSeries(Matrix values);

    static TimeSeries from_column(std::span<const double> x);

    [[nodiscard]] std::size_t n() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    [[nodiscard]] std::size_t d() const noexcept { return static_cast<std::size_t>(values_.cols()); }
    [[nodiscard]] const Matrix& values() const noexcept { return values_; }

    /// Contiguous view of one coordinate over time.
    [[nodiscard]] std::span<const double> column(std::size_t c) const;

    /// Applies x -> a*x + c to every entry.
    [[nodiscard]] TimeSeries affine(double a, double c) const;

private:
    Matrix values_;
};

/**
 * @brief Plug-in functional phi mapping a contiguous block to a vector in R^p.
 *
 * Mean works for any d (p = d). Quantile and Autocorrelation need d = 1 and
 * give p = 1. A Composite concatenates its children.
 */
class Functional {
public:
    enum class Kind { Mean, Quantile, Autocorrelation, Composite };

    static Functional mean();
    static Functional quantile(double tau);
    static Functional autocorrelation(std::size_t lag);
    static Functional composite(std::vector<Functional> children);

    /// Parses "mean", "quantile:0.5", "acf:1", or '+'-joined composites such as "mean+acf:2".
    static Functional parse(const std::string& text);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] double tau() const noexcept { return tau_; }
    [[nodiscard]] std::size_t lag() const noexcept { return lag_; }
    [[nodiscard]] const std::vector<Functional>& children() const noexcept { return children_; }

    /// Output dimension p for observations of dimension d. Throws DomainError if incompatible.
    [[nodiscard]] std::size_t output_dim(std::size_t d) const;

    /// True for Mean and composites built only from Mean.
    [[nodiscard]] bool is_mean_type() const noexcept;

    [[nodiscard]] std::string to_string() const;

private:
    Functional() = default;

    Kind kind_ = Kind::Mean;
    double tau_ = 0.5;
    std::size_t lag_ = 1;
    std::vector<Functional> children_;
};

/// 1-based inclusive block X_first..X_last.
struct SubsampleIndex {
    std::size_t first = 1;
    std::size_t last = 1;

    [[nodiscard]] std::size_t length() const noexcept { return last - first + 1; }

    auto operator<=>(const SubsampleIndex&) const = default;
};

/// Fractional endpoints (s,t) in the triangle 0 <= s <= t <= 1.
struct FractionPair {
    double s = 0.0;
    double t = 1.0;
};

/// Throws DomainError unless 1 <= first <= last <= n.
void check_index(const SubsampleIndex& idx, std::size_t n);

/// (j,k) -> ((j-1)/n, k/n).
[[nodiscard]] FractionPair index_to_fraction(const SubsampleIndex& idx, std::size_t n);

/// floor(n*u), snapping values within rounding noise of an integer onto it.
[[nodiscard]] std::size_t snap_floor(double u, std::size_t n);

/// Block X_{floor(ns)+1}..X_{floor(nt)}; nullopt when it is empty.
[[nodiscard]] std::optional<SubsampleIndex> fraction_to_block(const FractionPair& st, std::size_t n);

/**
 * @brief Discrete probability measure on the triangle, given as weighted atoms.
 */
class DeltaMeasure {
public:
    struct Atom {
        double s;
        double t;
        double w;
    };

    /// Requires 0 <= s <= t <= 1, w > 0 and weights summing to 1 within 1e-9.
    explicit DeltaMeasure(std::vector<Atom> atoms);

    /// Accepts arbitrary positive weights and rescales them to total mass one.
    static DeltaMeasure normalized(std::vector<Atom> atoms);

    /// Atoms (0, j/n), j = 1..n, each with weight 1/n.
    static DeltaMeasure recursive(std::size_t n);

    /// Uniform atoms on {(a/K, b/K) : 0 <= a < b <= K}.
    static DeltaMeasure grid(std::size_t k);

    [[nodiscard]] const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    [[nodiscard]] std::size_t size() const noexcept { return atoms_.size(); }

private:
    std::vector<Atom> atoms_;
};

struct InferenceConfig {
    double clip_gamma = 0.1;
    std::uint64_t rng_seed = 20140101;

    /// Throws ConfigError if clip_gamma is outside (0, 1/2).
    void validate() const;
};

}  // namespace sninf
