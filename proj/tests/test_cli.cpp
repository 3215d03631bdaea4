#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qhj/cli.hpp"
#include "qhj/milne.hpp"
#include "support.hpp"

using namespace qhj;
using namespace qhj::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("qhj-test-" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "qhj");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("solve writes one row per grid point") {
    TempDir dir;
    const auto r = invoke({"solve", "--potential", "harmonic", "--n", "2", "--grid", "-6:6:2001", "--out",
                           dir.path.string()});
    REQUIRE(r.code == 0);
    const auto t = read_csv(dir.path / "solution.csv");
    CHECK(t.rows() == 2001);
    CHECK(t.header == std::vector<std::string>{"x", "V", "psi", "psi_oracle", "X", "Xp", "Y", "pL_im"});
    CHECK(test::max_abs_diff(t.column("psi"), t.column("psi_oracle")) <= 1e-6);
    CHECK(std::isnan(t.column("pL_im")[1000]));
    CHECK(std::isnan(t.column("X")[0]));
    CHECK(t.column("X")[1000] > 0.0);
}

TEST_CASE("CSV text format") {
    TempDir dir;
    REQUIRE(invoke({"solve", "--n", "0", "--grid", "-5:5:101", "--out", dir.path.string()}).code == 0);
    std::ifstream in(dir.path / "solution.csv", std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), {});
    CHECK(text.rfind("x,V,psi,psi_oracle,X,Xp,Y,pL_im\n", 0) == 0);
    CHECK(text.find('\r') == std::string::npos);
    CHECK(text.find(",,") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 102);
}

TEST_CASE("solve with both methods fills every column") {
    TempDir dir;
    REQUIRE(invoke({"solve", "--method", "both", "--out", dir.path.string()}).code == 0);
    const auto t = read_csv(dir.path / "solution.csv");
    CHECK(t.column("pL_im")[1700] == doctest::Approx(t.column("x")[1700] - 4 * t.column("x")[1700] /
                                                         (2 * std::pow(t.column("x")[1700], 2) - 1))
                                         .epsilon(1e-6));
    REQUIRE(invoke({"solve", "--method", "polar", "--out", dir.path.string()}).code == 0);
    const auto p = read_csv(dir.path / "solution.csv");
    CHECK(test::max_abs_diff(p.column("psi"), p.column("psi_oracle")) <= 1e-4);
}

TEST_CASE("Morse solve and unbound level") {
    TempDir dir;
    CHECK(invoke({"solve", "--potential", "morse", "--D", "10", "--a", "1", "--n", "2", "--out",
                  dir.path.string()})
              .code == 0);
    const auto t = read_csv(dir.path / "solution.csv");
    CHECK(test::max_abs_diff(t.column("psi"), t.column("psi_oracle")) <= 1e-5);
    const auto r = invoke({"solve", "--potential", "morse", "--D", "10", "--a", "1", "--n", "9", "--out",
                           dir.path.string()});
    CHECK(r.code == 2);
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("exit codes") {
    TempDir dir;
    const auto out = dir.path.string();
    CHECK(invoke({"solve", "--energy", "2.6", "--out", out}).code == 3);
    CHECK(invoke({"solve", "--grid", "-6:6:2000", "--out", out}).code == 2);
    CHECK(invoke({"solve", "--grid", "-6:6:51", "--out", out}).code == 2);
    CHECK(invoke({"solve", "--grid", "-1:1:201", "--out", out}).code == 2);
    CHECK(invoke({"solve", "--method", "magic", "--out", out}).code == 2);
    CHECK(invoke({"solve", "--potential", "tabulated", "--out", out}).code == 2);
    CHECK(invoke({"solve", "--bogus"}).code == 2);
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"figures", "--which", "5", "--out", out}).code == 2);
    CHECK(invoke({"sweep-hbar", "--hbar-list", "0.5,1", "--out", out}).code == 2);
    CHECK(invoke({"poles", "--hbar", "0.01", "--grid", "-6:6:101", "--n", "50", "--out", out}).code == 4);
}

TEST_CASE("tabulated potential from a file") {
    TempDir dir;
    const auto table = dir.path / "v.txt";
    {
        std::ofstream f(table);
        f << "# harmonic samples\n";
        for (int i = 0; i <= 400; ++i) {
            const double x = -8 + 0.04 * i;
            f << x << ' ' << 0.5 * x * x << '\n';
        }
    }
    const auto r = invoke({"solve", "--potential", "tabulated", "--table", table.string(), "--energy", "1.5",
                           "--grid", "-7:7:2001", "--out", dir.path.string()});
    REQUIRE(r.code == 0);
    const auto t = read_csv(dir.path / "solution.csv");
    CHECK(test::max_abs_diff(t.column("psi"), t.column("psi_oracle")) <= 1e-6);
}

TEST_CASE("figures") {
    TempDir dir;
    REQUIRE(invoke({"figures", "--emit", "csv,svg", "--out", dir.path.string()}).code == 0);
    for (int w = 1; w <= 4; ++w) {
        CHECK(fs::exists(dir.path / ("fig" + std::to_string(w) + ".csv")));
        const auto svg = dir.path / ("fig" + std::to_string(w) + ".svg");
        REQUIRE(fs::exists(svg));
        std::ifstream in(svg);
        std::string text((std::istreambuf_iterator<char>(in)), {});
        CHECK(text.find("<svg") != std::string::npos);
        CHECK(text.find("<path") != std::string::npos);
    }
    const auto f1 = read_csv(dir.path / "fig1.csv");
    CHECK(f1.header == std::vector<std::string>{"x", "X", "W0"});
    CHECK(f1.column("X").front() == 0.0);
    CHECK(f1.column("W0").front() == 0.0);

    const auto f2 = read_csv(dir.path / "fig2.csv");
    CHECK(f2.column("Xp").front() > 0.0);
    CHECK(f2.column("Xp").back() > 0.0);
    CHECK(f2.column("pC").front() == doctest::Approx(0.0).scale(1.0));
    CHECK(f2.column("pC").back() == doctest::Approx(0.0).scale(1.0));

    const auto f3 = read_csv(dir.path / "fig3.csv");
    for (std::size_t i = 0; i < f3.rows(); ++i)
        CHECK(std::abs(f3.column("product")[i] - f3.column("envelope")[i] * f3.column("phase_factor")[i]) <=
              1e-11 * (1 + std::abs(f3.column("product")[i])));

    const auto f4 = read_csv(dir.path / "fig4.csv");
    CHECK(f4.header == std::vector<std::string>{"x", "Y1", "Y3", "X", "psi"});
    CHECK(f4.rows() == 2001);
}

TEST_CASE("selected figures only") {
    TempDir dir;
    REQUIRE(invoke({"figures", "--which", "2,4", "--out", dir.path.string()}).code == 0);
    CHECK_FALSE(fs::exists(dir.path / "fig1.csv"));
    CHECK(fs::exists(dir.path / "fig2.csv"));
    CHECK(fs::exists(dir.path / "fig4.csv"));
    CHECK_FALSE(fs::exists(dir.path / "fig4.svg"));
}

TEST_CASE("sweep") {
    TempDir dir;
    REQUIRE(invoke({"sweep-hbar", "--hbar-list", "1,0.5,0.25,0.1", "--out", dir.path.string()}).code == 0);
    const auto t = read_csv(dir.path / "sweep.csv");
    REQUIRE(t.rows() == 4);
    const auto& gap = t.column("sup_Xp_minus_pc");
    const auto& yp = t.column("sup_Yp");
    const auto& hb = t.column("hbar");
    for (std::size_t k = 0; k < 4; ++k) {
        if (k > 0) CHECK(gap[k] < gap[k - 1]);
        CHECK(yp[k] / hb[k] <= 0.55);
    }
    CHECK(gap[0] == doctest::Approx(0.161525983869).epsilon(1e-9));
}

TEST_CASE("poles") {
    TempDir dir;
    REQUIRE(invoke({"poles", "--n", "2", "--method", "polar", "--out", dir.path.string()}).code == 0);
    auto t = read_csv(dir.path / "poles.csv");
    CHECK(t.header == std::vector<std::string>{"x0", "residue_re", "residue_im"});
    REQUIRE(t.rows() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(std::abs(std::abs(t.column("x0")[k]) - 0.7071068) < 0.006);
        CHECK(std::abs(t.column("residue_im")[k] + 1.0) <= 1e-6);
        CHECK(std::abs(t.column("residue_re")[k]) <= 1e-6);
    }
    REQUIRE(invoke({"poles", "--n", "0", "--out", dir.path.string()}).code == 0);
    t = read_csv(dir.path / "poles.csv");
    CHECK(t.rows() == 0);
}

TEST_CASE("CSV round trip reproduces in-memory values") {
    TempDir dir;
    REQUIRE(invoke({"solve", "--n", "1", "--out", dir.path.string()}).code == 0);
    const auto t = read_csv(dir.path / "solution.csv");
    const auto v = Potential::harmonic();
    const auto sol = solve_family(v, test::unit, 1.5, GridSpec{-6, 6, 2001});
    const auto& psi = t.column("psi");
    REQUIRE(psi.size() == sol.wave.psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i)
        CHECK(std::abs(psi[i] - sol.wave.psi[i]) <= 1e-11 * std::max(1e-300, std::abs(sol.wave.psi[i])) + 1e-300);
    std::vector<double> sq;
    for (double p : psi) sq.push_back(p * p);
    CHECK(simpson(t.column("x"), sq) == doctest::Approx(1.0).epsilon(1e-8));

    CsvTable u;
    u.header = {"a", "b"};
    u.columns = {{1.0, std::nan(""), -2.5e-7}, {0.1, 2.0, 3.0}};
    write_csv(dir.path / "u.csv", u);
    const auto back = read_csv(dir.path / "u.csv");
    CHECK(back.header == u.header);
    CHECK(back.column("a")[0] == 1.0);
    CHECK(std::isnan(back.column("a")[1]));
    CHECK(back.column("a")[2] == -2.5e-7);
    CHECK_THROWS_AS(back.column("c"), ArgumentError);
}

TEST_CASE("config file with flags winning") {
    TempDir dir;
    const auto cfg = dir.path / "run.cfg";
    {
        std::ofstream f(cfg);
        f << "potential=morse\nn=1\ngrid=-2:8:1001\n";
    }
    REQUIRE(invoke({"solve", "--config", cfg.string(), "--n", "0", "--out", dir.path.string()}).code == 0);
    const auto t = read_csv(dir.path / "solution.csv");
    CHECK(t.rows() == 1001);
    const auto ref = test::analytic_samples(Potential::morse(), test::unit, 0, t.column("x"));
    CHECK(test::max_abs_diff(t.column("psi"), ref) <= 1e-5);
    {
        std::ofstream f(cfg);
        f << "colour=blue\n";
    }
    CHECK(invoke({"solve", "--config", cfg.string(), "--out", dir.path.string()}).code == 2);
}

TEST_CASE("config parsing helpers") {
    const auto g = parse_grid("-6:6:2001");
    CHECK(g.x_min == -6.0);
    CHECK(g.x_max == 6.0);
    CHECK(g.count == 2001);
    CHECK_THROWS_AS(parse_grid("1:2"), ArgumentError);
    CHECK_THROWS_AS(parse_grid("a:b:c"), ArgumentError);
    bool csv = false;
    bool svg = false;
    parse_emit("csv,svg", csv, svg);
    CHECK(csv);
    CHECK(svg);
    parse_emit("svg", csv, svg);
    CHECK_FALSE(csv);
    CHECK_THROWS_AS(parse_emit("png", csv, svg), ArgumentError);
    CHECK(parse_number_list("1, 0.5,0.25") == std::vector<double>{1.0, 0.5, 0.25});
    RunConfig c;
    CHECK(c.grid_or_default().count == 2001);
    c.potential = "morse";
    CHECK(c.grid_or_default().x_min == -2.0);
}
