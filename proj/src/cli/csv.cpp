#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "qhj/cli.hpp"
#include "qhj/errors.hpp"

namespace qhj::cli {

const std::vector<double>& CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return columns[i];
    throw ArgumentError("no column '" + name + "'");
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    if (table.header.size() != table.columns.size()) throw ArgumentError("csv: header and columns differ");
    const std::size_t rows = table.rows();
    for (const auto& c : table.columns)
        if (c.size() != rows) throw ArgumentError("csv: ragged columns");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot write " + path.string());
    for (std::size_t j = 0; j < table.header.size(); ++j) out << (j ? "," : "") << table.header[j];
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < table.columns.size(); ++j) {
            if (j) out << ',';
            const double v = table.columns[j][i];
            if (std::isnan(v)) continue;
            std::snprintf(buf, sizeof buf, "%.12g", v);
            out << buf;
        }
        out << '\n';
    }
    if (!out) throw ArgumentError("failed writing " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open " + path.string());
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw ArgumentError("empty csv " + path.string());
    {
        std::istringstream h(line);
        std::string name;
        while (std::getline(h, name, ',')) t.header.push_back(name);
    }
    t.columns.resize(t.header.size());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t pos = 0;
        while (true) {
            const auto comma = line.find(',', pos);
            cells.push_back(line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (cells.size() != t.header.size()) throw ArgumentError("csv row with wrong field count in " + path.string());
        for (std::size_t j = 0; j < cells.size(); ++j)
            t.columns[j].push_back(cells[j].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(cells[j]));
    }
    return t;
}

}  // namespace qhj::cli
