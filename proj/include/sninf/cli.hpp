#pragma once

#include "sninf/core.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sninf::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kUsage = 64,
    kIngest = 65,
    kConfig = 66,
    kSingular = 67,
    kTable = 68,
    kBootstrap = 69,
    kInternal = 70,
};

struct CsvOptions {
    char delimiter = ',';
};

/// Parsed CSV with a digest of the raw bytes.
struct CsvData {
    TimeSeries series;
    std::vector<std::string> header;  // empty when the file has no header row
    std::uint64_t checksum = 0;       // FNV-1a 64 of the file contents
};

/// FNV-1a 64-bit hash.
[[nodiscard]] std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/**
 * Parses comma-separated numeric text. A first row with any non-numeric cell is
 * taken as a header; blank lines are ignored.
 *
 * @throws IngestError for empty input, ragged rows, non-numeric or non-finite cells
 */
[[nodiscard]] CsvData parse_csv(const std::string& text, const CsvOptions& options = {});

/// Reads and parses a CSV file.
[[nodiscard]] CsvData ingest_csv(const std::filesystem::path& path, const CsvOptions& options = {});

struct CommandOutcome {
    int exit_code = kOk;
    std::string out;  // report for stdout
    std::string err;  // diagnostics for stderr
};

/// Runs one subcommand; `args` excludes the program name.
[[nodiscard]] CommandOutcome run_command(const std::vector<std::string>& args);

}  // namespace sninf::cli
