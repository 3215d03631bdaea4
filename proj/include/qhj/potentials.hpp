#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <utility>
#include <variant>
#include <vector>

namespace qhj {

// Global constants entering every equation.
struct UnitsConfig {
    double hbar = 1.0;
    double mass = 1.0;

    void validate() const;
};

// V(x) = 1/2 m omega^2 x^2
struct Harmonic {
    double omega = 1.0;
    double mass = 1.0;
};

// V(x) = D (1 - exp(-a x))^2
struct Morse {
    double depth = 10.0;
    double range = 1.0;
};

// Natural cubic spline through (x_i, V_i); x strictly increasing, >= 3 points.
class Tabulated {
public:
    Tabulated(std::vector<double> x, std::vector<double> v);

    double value(double x) const;
    double derivative(double x) const;
    const std::vector<double>& x() const { return x_; }
    const std::vector<double>& v() const { return v_; }

private:
    struct Spline;
    std::vector<double> x_;
    std::vector<double> v_;
    std::shared_ptr<const Spline> spline_;
};

enum class PotentialKind { harmonic, morse, tabulated };

class Potential {
public:
    using Model = std::variant<Harmonic, Morse, Tabulated>;

    explicit Potential(Model model);

    static Potential harmonic(double omega = 1.0, double mass = 1.0);
    static Potential morse(double depth = 10.0, double range = 1.0);
    static Potential tabulated(std::vector<double> x, std::vector<double> v);

    double value(double x) const;
    double derivative(double x) const;

    PotentialKind kind() const;
    const Model& model() const { return model_; }

    // Interval on which value() is defined.
    std::pair<double, double> domain() const;
    // Abscissa of the potential minimum (0 for the analytic models).
    double minimum_location() const;
    double minimum_value() const;

private:
    Model model_;
};

// Two-column `x V` text, `#` starts a comment.
Potential read_tabulated(std::istream& in);
Potential load_tabulated(const std::filesystem::path& path);

struct EnergyLevel {
    int n = 0;
    double energy = 0.0;
};

struct TurningPoints {
    double left = 0.0;
    double right = 0.0;
};

// Number of Morse bound states, n = 0 .. count-1.
int morse_bound_state_count(const Morse& morse, const UnitsConfig& units);

EnergyLevel eigenenergy(const Potential& potential, const UnitsConfig& units, int n);

TurningPoints turning_points(const Potential& potential, double energy);

// Normalized closed-form eigenfunction, positive as x -> +infinity.
double analytic_eigenfunction(const Potential& potential, const UnitsConfig& units, int n, double x);

}  // namespace qhj
