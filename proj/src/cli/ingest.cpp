#include "sninf/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sninf::cli {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return cells;
}

bool parse_number(std::string_view cell, double& out) {
    if (cell.empty()) return false;
    if (cell.front() == '+') cell.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    return ec == std::errc() && ptr == cell.data() + cell.size();
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

CsvData parse_csv(const std::string& text, const CsvOptions& options) {
    std::vector<std::string> header;
    std::vector<double> cells;
    std::size_t width = 0;
    std::size_t rows = 0;
    std::size_t line_no = 0;
    bool first = true;

    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto parts = split(line, options.delimiter);
        std::vector<double> row(parts.size());
        std::size_t bad = parts.size();
        for (std::size_t c = 0; c < parts.size(); ++c) {
            if (!parse_number(parts[c], row[c])) {
                bad = c;
                break;
            }
        }
        if (first) {
            first = false;
            width = parts.size();
            if (bad < parts.size()) {
                for (auto p : parts) header.emplace_back(p);
                continue;
            }
        }
        if (parts.size() != width) {
            std::ostringstream os;
            os << "line " << line_no << ": expected " << width << " columns, found " << parts.size();
            throw IngestError(os.str(), line_no);
        }
        if (bad < parts.size()) {
            std::ostringstream os;
            os << "line " << line_no << ", column " << bad + 1 << ": '" << parts[bad] << "' is not a number";
            throw IngestError(os.str(), line_no);
        }
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (!std::isfinite(row[c])) {
                std::ostringstream os;
                os << "line " << line_no << ", column " << c + 1 << ": non-finite value '" << parts[c] << "'";
                throw IngestError(os.str(), line_no);
            }
        }
        cells.insert(cells.end(), row.begin(), row.end());
        ++rows;
    }
    if (rows == 0) throw IngestError("input contains no data rows", line_no);

    Matrix values(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < width; ++c)
            values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cells[r * width + c];
    return CsvData{TimeSeries(std::move(values)), std::move(header), fnv1a64(text)};
}

CsvData ingest_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open '" + path.string() + "'", 0);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str(), options);
}

}  // namespace sninf::cli
