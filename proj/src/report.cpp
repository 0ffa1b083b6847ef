#include "ggethermo/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "ggethermo/errors.hpp"

namespace ggethermo {

std::string format_value(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void CsvTable::add_row(std::vector<double> row) {
    if (row.size() != columns.size()) {
        throw InvariantError("csv row width does not match the header");
    }
    rows.push_back(std::move(row));
}

std::string CsvTable::render() const {
    std::string out;
    for (size_t j = 0; j < columns.size(); ++j) {
        if (j) out += ',';
        out += columns[j];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (size_t j = 0; j < row.size(); ++j) {
            if (j) out += ',';
            out += format_value(row[j]);
        }
        out += '\n';
    }
    return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path& target = path;
    const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ResourceError("cannot open '" + tmp.string() + "' for writing");
        }
        out << content;
        out.flush();
        if (!out) {
            throw ResourceError("short write to '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw ResourceError("cannot move report into place: " + ec.message());
    }
}

void RunReport::add_total(const std::string& key, double value, const std::string& unit) {
    totals[key] = value;
    units[key] = unit;
}

void RunReport::add_check(const std::string& key, bool passed) {
    checks[key] = passed;
}

nlohmann::json RunReport::to_json() const {
    return nlohmann::json{{"config", config},
                          {"totals", totals},
                          {"units", units},
                          {"checks", checks}};
}

}  // namespace ggethermo
