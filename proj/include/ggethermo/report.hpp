#pragma once

// Deterministic report emission: fixed-precision CSV tables with unit-labeled
// columns, JSON run reports embedding the resolved config, and atomic file
// writes so a failed run never leaves partial artifacts.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace ggethermo {

// 17 significant digits, enough to round-trip any double exactly.
std::string format_value(double value);

// Column labels carry their unit in brackets, e.g. "dF_b[nat]".
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add_row(std::vector<double> row);
    std::string render() const;  // '\n' line endings, '.' decimal separator
};

// Write via a temporary file in the same directory plus rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// Standard report envelope: resolved config echo, totals with a units map,
// and the invariant checks that were evaluated during the run.
struct RunReport {
    nlohmann::json config;
    nlohmann::json totals = nlohmann::json::object();
    nlohmann::json units = nlohmann::json::object();
    nlohmann::json checks = nlohmann::json::object();

    void add_total(const std::string& key, double value, const std::string& unit);
    void add_check(const std::string& key, bool passed);
    nlohmann::json to_json() const;
};

}  // namespace ggethermo
