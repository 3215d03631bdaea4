#pragma once

// Reference solutions of -hbar^2/2m psi'' + V psi = E psi by Numerov's method.

#include <cstddef>
#include <span>
#include <vector>

#include "qhj/potentials.hpp"

namespace qhj {

struct OracleSolution {
    std::vector<double> grid;
    std::vector<double> psi;        // normalized, positive in the right tail
    double energy = 0.0;
    double tail_mismatch = 0.0;     // |jump|
    double jump = 0.0;              // psi'/psi of the left sweep minus that of the right one at the match node
    std::size_t match_index = 0;
};

// Two inward sweeps started from WKB tail values at the grid ends, glued at
// an antinode near the middle of the allowed region. The grid must be uniform
// and should reach well into both forbidden regions.
OracleSolution numerov_solve(const Potential& potential, const UnitsConfig& units, double energy,
                             std::span<const double> grid);

}  // namespace qhj
