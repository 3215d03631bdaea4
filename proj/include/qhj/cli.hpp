#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qhj/numerics.hpp"
#include "qhj/potentials.hpp"

namespace qhj::cli {

enum class Method { family, polar, both };

struct RunConfig {
    std::string potential = "harmonic";
    double omega = 1.0;
    double depth = 10.0;
    double range = 1.0;
    double mass = 1.0;
    double hbar = 1.0;
    int n = 2;
    std::optional<GridSpec> grid;      // default depends on the potential
    std::optional<double> energy;      // overrides the analytic level
    std::optional<double> w0;          // left amplitude of the family member
    Method method = Method::family;
    std::filesystem::path out = ".";
    bool csv = true;
    bool svg = false;
    std::filesystem::path table;
    std::vector<double> hbar_list{1.0, 0.5, 0.25, 0.1};
    std::vector<int> which{1, 2, 3, 4};

    void validate() const;
    UnitsConfig units() const { return {hbar, mass}; }
    Potential make_potential() const;
    GridSpec grid_or_default() const;
};

// `a:b:N`
GridSpec parse_grid(const std::string& text);
// `csv`, `svg`, `csv,svg`
void parse_emit(const std::string& text, bool& csv, bool& svg);
std::vector<double> parse_number_list(const std::string& text);

// Plain column-oriented CSV; NaN is written as an empty field.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
    const std::vector<double>& column(const std::string& name) const;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

// One polyline per series on shared axes, with tick labels; NaN breaks a line.
std::string render_svg(const std::string& title, const CsvTable& table);

int cmd_solve(const RunConfig& config, std::ostream& log);
int cmd_figures(const RunConfig& config, std::ostream& log);
int cmd_sweep_hbar(const RunConfig& config, std::ostream& log);
int cmd_poles(const RunConfig& config, std::ostream& log);

// Entry point: subcommands solve | figures | sweep-hbar | poles. Returns the
// process exit code (0 ok, 2 bad input, 3 not an eigenvalue, 4 solver failure).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qhj::cli
