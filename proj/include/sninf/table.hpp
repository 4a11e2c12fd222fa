#pragma once

#include "sninf/core.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sninf {

inline constexpr const char* kVersionTag = "sninf 1.0.0";

/// Which Brownian limit functional a table tabulates.
enum class LimitKind { Sn, GeneralizedSn, ChangePoint, FixedB };

[[nodiscard]] std::string to_string(LimitKind kind);
[[nodiscard]] LimitKind parse_limit_kind(const std::string& id);

/**
 * @brief Identity of a limit functional: kind, dimension and parameters.
 *
 * GeneralizedSn carries the measure specification ("recursive", "grid:K" or
 * "atoms" with an explicit list); FixedB carries b and Sigma^{1/2}.
 */
struct LimitSpec {
    LimitKind kind = LimitKind::Sn;
    std::size_t p = 1;
    std::string measure = "recursive";
    std::vector<DeltaMeasure::Atom> atoms;
    double b = 0.1;
    Matrix sigma_half;  // empty means identity

    [[nodiscard]] static LimitSpec of(LimitKind kind, std::size_t p) {
        LimitSpec spec;
        spec.kind = kind;
        spec.p = p;
        return spec;
    }

    /// The measure on the path grid of size m implied by `measure`/`atoms`.
    [[nodiscard]] DeltaMeasure delta_measure(std::size_t m) const;

    /// Sigma^{1/2}, defaulting to the p x p identity.
    [[nodiscard]] Matrix sigma_half_or_identity() const;

    /// Canonical JSON text of the parameters, used for compatibility checks.
    [[nodiscard]] std::string params_text() const;

    void validate() const;
};

/// Right tail probability read off a table, with a flag when it lies beyond the tabulated levels.
struct TableProbability {
    double value = 0.0;
    enum class Bound { Interpolated, AtMost, AtLeast } bound = Bound::Interpolated;
};

/**
 * @brief Monte Carlo quantiles of a limit functional with provenance.
 *
 * Tables are immutable once written; save() writes to a temporary file and
 * renames it into place.
 */
struct CriticalValueTable {
    LimitSpec spec;
    std::vector<double> levels;
    std::vector<double> values;
    std::size_t reps = 0;
    std::size_t grid = 0;
    std::uint64_t seed = 0;
    std::size_t discarded = 0;
    std::string version = kVersionTag;

    /// Quantile at `level`, linearly interpolated between tabulated levels.
    [[nodiscard]] double quantile(double level) const;

    /// Distribution function at x interpolated between tabulated points (right-continuous on ties).
    [[nodiscard]] TableProbability cdf(double x) const;

    /// 1 - cdf(x), the p-value of a right-tailed test.
    [[nodiscard]] TableProbability upper_tail(double x) const;

    /// Throws TableError unless the table was built for `requested`.
    void require_compatible(const LimitSpec& requested) const;

    /// Throws TableError if metadata is incomplete or quantiles decrease.
    void validate() const;

    [[nodiscard]] std::string serialize() const;
    [[nodiscard]] static CriticalValueTable parse(const std::string& text);

    void save(const std::filesystem::path& path) const;
    [[nodiscard]] static CriticalValueTable load(const std::filesystem::path& path);
};

}  // namespace sninf
