#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>

#include <CLI11.hpp>

#include "qhj/classical.hpp"
#include "qhj/cli.hpp"
#include "qhj/errors.hpp"
#include "qhj/milne.hpp"
#include "qhj/oracle.hpp"
#include "qhj/polar.hpp"

namespace qhj::cli {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

struct Problem {
    Potential potential;
    UnitsConfig units;
    double energy = 0.0;
    GridSpec grid;
};

Problem setup(const RunConfig& c) {
    c.validate();
    Problem p{c.make_potential(), c.units(), 0.0, c.grid_or_default()};
    p.energy = c.energy ? *c.energy : eigenenergy(p.potential, p.units, c.n).energy;
    return p;
}

FamilyOptions family_options(const RunConfig& c) {
    FamilyOptions o;
    if (c.w0) o.allowed.member = LeftAmplitude{*c.w0};
    return o;
}

// Reference psi on xs: closed form when the level is analytic, Numerov otherwise.
std::vector<double> oracle_psi(const RunConfig& c, const Problem& p, const std::vector<double>& xs) {
    std::vector<double> out(xs.size());
    if (!c.energy && p.potential.kind() != PotentialKind::tabulated) {
        for (std::size_t i = 0; i < xs.size(); ++i) out[i] = analytic_eigenfunction(p.potential, p.units, c.n, xs[i]);
        return out;
    }
    const auto uniform = p.grid.nodes();
    const auto sol = numerov_solve(p.potential, p.units, p.energy, uniform);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const std::size_t lo = window_start(uniform, xs[i], 6);
        out[i] = lagrange_eval(std::span(uniform).subspan(lo, 6), std::span(sol.psi).subspan(lo, 6), xs[i]);
    }
    return out;
}

void emit(const RunConfig& c, const std::string& name, const CsvTable& table, std::ostream& log) {
    std::error_code ec;
    std::filesystem::create_directories(c.out, ec);
    if (ec) throw ArgumentError("cannot create output directory " + c.out.string());
    if (c.csv) {
        write_csv(c.out / (name + ".csv"), table);
        log << "wrote " << (c.out / (name + ".csv")).string() << " (" << table.rows() << " rows)\n";
    }
    if (c.svg) {
        std::ofstream svg(c.out / (name + ".svg"), std::ios::binary);
        if (!svg) throw ArgumentError("cannot write " + (c.out / (name + ".svg")).string());
        svg << render_svg(name, table);
    }
}

QmfTrace polar_trace(const Problem& p, const std::vector<double>& xs) {
    return moebius_integrate_qmf_two_sided(p.potential, p.units, p.energy, xs);
}

}  // namespace

int cmd_solve(const RunConfig& c, std::ostream& log) {
    const auto p = setup(c);
    const auto tp = turning_points(p.potential, p.energy);
    const auto uniform = p.grid.nodes();
    const auto snapped = snap_grid(uniform, tp.left, tp.right);
    const auto& xs = snapped.x;
    const std::size_t n = xs.size();

    CsvTable t;
    t.header = {"x", "V", "psi", "psi_oracle", "X", "Xp", "Y", "pL_im"};
    t.columns.assign(8, std::vector<double>(n, nan));
    t.columns[0] = xs;
    for (std::size_t i = 0; i < n; ++i) t.columns[1][i] = p.potential.value(xs[i]);
    t.columns[3] = oracle_psi(c, p, xs);

    if (c.method != Method::polar) {
        const auto sol = solve_family(p.potential, p.units, p.energy, p.grid, family_options(c));
        t.columns[2] = sol.wave.psi;
        for (std::size_t k = 0; k < sol.action.grid.size(); ++k) {
            t.columns[4][snapped.left + k] = sol.action.real_action[k];
            t.columns[5][snapped.left + k] = sol.action.real_momentum[k];
            t.columns[6][snapped.left + k] = sol.action.imag_action[k];
        }
        log << "family: E = " << p.energy << ", X(x_right) = " << sol.action.real_action.back()
            << ", turning-point mismatch " << std::max(sol.wave.left_mismatch, sol.wave.right_mismatch) << '\n';
    }
    if (c.method != Method::family) {
        const auto trace = polar_trace(p, xs);
        for (std::size_t i = 0; i < n; ++i)
            if (trace.regular[i]) t.columns[7][i] = trace.p_l[i].imag();
        if (c.method == Method::polar) {
            std::vector<double> est;
            for (const auto& pole : trace.poles) est.push_back(pole.x0);
            t.columns[2] = reconstruct_psi_antithetic(trace, est).psi;
        }
        log << "polar: " << trace.poles.size() << " poles\n";
    }
    emit(c, "solution", t, log);
    return 0;
}

int cmd_figures(const RunConfig& c, std::ostream& log) {
    for (int w : c.which)
        if (w < 1 || w > 4) throw ArgumentError("figure index must be 1..4, got " + std::to_string(w));
    for (int w : c.which) {
        RunConfig fc = c;
        fc.n = 2;
        fc.energy.reset();
        fc.potential = w == 4 ? "morse" : "harmonic";
        if (c.potential != fc.potential) fc.grid.reset();
        const auto p = setup(fc);
        const auto sol = solve_family(p.potential, p.units, p.energy, p.grid, family_options(fc));
        const auto& a = sol.action;
        CsvTable t;
        if (w <= 3) {
            const auto cl = classical_action(p.potential, p.units, p.energy, a.grid);
            if (w == 1) {
                t.header = {"x", "X", "W0"};
                t.columns = {a.grid, a.real_action, cl.w0};
            } else if (w == 2) {
                t.header = {"x", "Xp", "pC"};
                t.columns = {a.grid, a.real_momentum, cl.p_c};
            } else {
                const std::size_t m = a.grid.size();
                std::vector<double> env(m), phase(m), prod(m);
                for (std::size_t i = 0; i < m; ++i) {
                    env[i] = sol.wave.amplitude / std::sqrt(a.real_momentum[i]);
                    phase[i] = std::sin(a.real_action[i] / a.hbar + std::numbers::pi / 4.0);
                    prod[i] = env[i] * phase[i];
                }
                t.header = {"x", "envelope", "phase_factor", "product"};
                t.columns = {a.grid, env, phase, prod};
            }
        } else {
            const auto& wf = sol.wave;
            const std::size_t m = wf.grid.size();
            std::vector<double> y1(m, nan), y3(m, nan), x(m, nan);
            for (std::size_t i = 0; i <= wf.left_index; ++i) y1[i] = sol.left.y[wf.left_index - i];
            for (std::size_t i = wf.right_index; i < m; ++i) y3[i] = sol.right.y[i - wf.right_index];
            for (std::size_t i = wf.left_index; i <= wf.right_index; ++i) x[i] = a.real_action[i - wf.left_index];
            t.header = {"x", "Y1", "Y3", "X", "psi"};
            t.columns = {wf.grid, y1, y3, x, wf.psi};
        }
        emit(c, "fig" + std::to_string(w), t, log);
    }
    return 0;
}

int cmd_sweep_hbar(const RunConfig& c, std::ostream& log) {
    if (c.hbar_list.empty()) throw ArgumentError("--hbar-list is empty");
    for (std::size_t i = 0; i < c.hbar_list.size(); ++i) {
        if (!(c.hbar_list[i] > 0.0)) throw ArgumentError("hbar values must be positive");
        if (i > 0 && !(c.hbar_list[i] < c.hbar_list[i - 1])) throw ArgumentError("--hbar-list must be decreasing");
    }
    c.validate();
    const auto potential = c.make_potential();
    const auto rows =
        classical_limit_sweep(potential, c.units(), c.n, c.hbar_list, c.grid ? c.grid->count : 2001);
    CsvTable t;
    t.header = {"hbar", "sup_Xp_minus_pc", "sup_Yp"};
    t.columns.resize(3);
    for (const auto& r : rows) {
        t.columns[0].push_back(r.hbar);
        t.columns[1].push_back(r.sup_momentum_gap);
        t.columns[2].push_back(r.sup_imag_momentum);
        log << "hbar = " << r.hbar << ": n = " << r.n << ", E = " << r.energy << '\n';
    }
    emit(c, "sweep", t, log);
    return 0;
}

int cmd_poles(const RunConfig& c, std::ostream& log) {
    const auto p = setup(c);
    const auto trace = polar_trace(p, p.grid.nodes());
    CsvTable t;
    t.header = {"x0", "residue_re", "residue_im"};
    t.columns.resize(3);
    for (const auto& pole : trace.poles) {
        t.columns[0].push_back(pole.x0);
        t.columns[1].push_back(pole.residue.real());
        t.columns[2].push_back(pole.residue.imag());
    }
    emit(c, "poles", t, log);
    return 0;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bound states from the quantum Hamilton-Jacobi equation", "qhj"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value file; command-line flags take precedence");
    app.allow_config_extras(CLI::config_extras_mode::error);

    RunConfig c;
    std::string grid, emit_text = "csv", method = "family", hbar_list, which, table, out_dir = ".";
    app.add_option("--potential", c.potential, "harmonic | morse | tabulated");
    app.add_option("--omega", c.omega, "harmonic angular frequency");
    app.add_option("--D", c.depth, "Morse well depth");
    app.add_option("--a", c.range, "Morse range parameter");
    app.add_option("--mass", c.mass);
    app.add_option("--hbar", c.hbar);
    app.add_option("--n", c.n, "quantum number");
    app.add_option("--energy", c.energy, "energy to use instead of the analytic level");
    app.add_option("--w0", c.w0, "left amplitude of the family member (default: balanced member)");
    app.add_option("--grid", grid, "a:b:N");
    app.add_option("--method", method, "family | polar | both");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--emit", emit_text, "csv[,svg]");
    app.add_option("--table", table, "two-column x V file for --potential tabulated");
    app.add_option("--hbar-list", hbar_list, "comma-separated decreasing hbar values (sweep-hbar)");
    app.add_option("--which", which, "comma-separated figure indices (figures)");

    auto* solve = app.add_subcommand("solve", "solve one state and write solution.csv");
    auto* figures = app.add_subcommand("figures", "write fig1..fig4 data");
    auto* sweep = app.add_subcommand("sweep-hbar", "classical-limit sweep, writes sweep.csv");
    auto* poles = app.add_subcommand("poles", "QMF poles and residues, writes poles.csv");
    for (auto* s : {solve, figures, sweep, poles}) s->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (!grid.empty()) c.grid = parse_grid(grid);
        parse_emit(emit_text, c.csv, c.svg);
        if (method == "family")
            c.method = Method::family;
        else if (method == "polar")
            c.method = Method::polar;
        else if (method == "both")
            c.method = Method::both;
        else
            throw ArgumentError("--method must be family, polar or both");
        if (app.count("--hbar-list")) c.hbar_list = parse_number_list(hbar_list);
        if (app.count("--which")) {
            c.which.clear();
            for (double v : parse_number_list(which)) {
                if (v != std::floor(v)) throw ArgumentError("figure index must be an integer");
                c.which.push_back(static_cast<int>(v));
            }
            if (c.which.empty()) throw ArgumentError("--which is empty");
        }
        c.table = table;
        c.out = out_dir;

        if (*solve) return cmd_solve(c, out);
        if (*figures) return cmd_figures(c, out);
        if (*sweep) return cmd_sweep_hbar(c, out);
        return cmd_poles(c, out);
    } catch (const NotEigenvalueError& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << '\n';
        return 4;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "unexpected failure: " << e.what() << '\n';
        return 4;
    }
}

}  // namespace qhj::cli
