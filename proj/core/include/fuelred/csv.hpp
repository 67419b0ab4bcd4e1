#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fuelred::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line per row

    [[nodiscard]] std::optional<std::size_t> column(std::string_view name) const;
};

// Reads a comma-separated file. Blank lines and lines starting with '#' are
// skipped; the first remaining line is the header. Throws IoError when the
// file cannot be opened.
Table read_file(const std::filesystem::path& path);
Table parse(std::string_view text);

std::vector<std::string> split(std::string_view line);

// Strict parse of a full field; nullopt on trailing garbage or empty input.
std::optional<double> to_double(std::string_view field);
std::optional<long> to_long(std::string_view field);

// Shortest round-trip decimal representation.
std::string format(double value);

}  // namespace fuelred::csv
