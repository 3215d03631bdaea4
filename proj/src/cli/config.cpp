#include <cmath>
#include <sstream>

#include "qhj/cli.hpp"
#include "qhj/errors.hpp"

namespace qhj::cli {

namespace {

double to_number(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ArgumentError("cannot read " + what + " from '" + s + "'");
    }
    if (used != s.size()) throw ArgumentError("cannot read " + what + " from '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) {
        const auto a = item.find_first_not_of(" \t");
        const auto b = item.find_last_not_of(" \t");
        parts.push_back(a == std::string::npos ? std::string{} : item.substr(a, b - a + 1));
    }
    return parts;
}

}  // namespace

GridSpec parse_grid(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw ArgumentError("grid must look like a:b:N, got '" + text + "'");
    GridSpec g;
    g.x_min = to_number(parts[0], "grid start");
    g.x_max = to_number(parts[1], "grid end");
    const double count = to_number(parts[2], "grid count");
    if (!(count >= 2) || count != std::floor(count)) throw ArgumentError("grid count must be a whole number");
    g.count = static_cast<std::size_t>(count);
    return g;
}

void parse_emit(const std::string& text, bool& csv, bool& svg) {
    csv = false;
    svg = false;
    for (const auto& p : split(text, ',')) {
        if (p == "csv")
            csv = true;
        else if (p == "svg")
            svg = true;
        else
            throw ArgumentError("unknown --emit format '" + p + "'");
    }
    if (!csv && !svg) throw ArgumentError("--emit selects no output format");
}

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& p : split(text, ',')) {
        if (p.empty()) continue;
        out.push_back(to_number(p, "list entry"));
    }
    return out;
}

void RunConfig::validate() const {
    units().validate();
    if (potential != "harmonic" && potential != "morse" && potential != "tabulated")
        throw ArgumentError("--potential must be harmonic, morse or tabulated");
    if (n < 0) throw ArgumentError("--n must be non-negative");
    if (potential == "tabulated" && table.empty()) throw ArgumentError("tabulated potential needs --table");
    if (grid) {
        if (!(grid->x_min < grid->x_max)) throw ArgumentError("grid needs a < b");
        if (grid->count < 101 || grid->count % 2 == 0) throw ArgumentError("grid count must be odd and at least 101");
    }
    if (w0 && !(*w0 > 0.0)) throw ArgumentError("--w0 must be positive");
}

Potential RunConfig::make_potential() const {
    if (potential == "harmonic") return Potential::harmonic(omega, mass);
    if (potential == "morse") return Potential::morse(depth, range);
    return load_tabulated(table);
}

GridSpec RunConfig::grid_or_default() const {
    if (grid) return *grid;
    if (potential == "morse") return GridSpec{-2.0, 8.0, 2001};
    if (potential == "tabulated") {
        const auto [lo, hi] = make_potential().domain();
        return GridSpec{lo, hi, 2001};
    }
    return GridSpec{-6.0, 6.0, 2001};
}

}  // namespace qhj::cli
