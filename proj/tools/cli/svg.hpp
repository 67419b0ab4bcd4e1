#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fuelred::cli {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Static SVG line chart with axes, tick labels and a legend. Output is a
/// pure function of the inputs.
std::string render_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                              std::span<const Series> series);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace fuelred::cli
