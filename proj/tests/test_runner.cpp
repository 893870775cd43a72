#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <doctest.h>

#include "insulopt/errors.hpp"
#include "insulopt/runner.hpp"

using namespace insulopt;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "insulopt_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("parse_domain: all kinds and failure modes") {
    DomainSpec sq = parse_domain("square 16");
    CHECK(sq.kind == DomainSpec::Kind::square);
    CHECK(sq.n == 16);

    DomainSpec disc = parse_domain("disc 1.5 4");
    CHECK(disc.kind == DomainSpec::Kind::disc);
    CHECK(disc.radius == 1.5);
    CHECK(disc.n == 4);

    DomainSpec two = parse_domain("two-discs:1:0.5:0.5:3");
    CHECK(two.kind == DomainSpec::Kind::two_discs);
    CHECK(two.r1 == 1.0);
    CHECK(two.gap == 0.5);

    DomainSpec file = parse_domain("mesh some/path.mesh");
    CHECK(file.kind == DomainSpec::Kind::file);
    CHECK(file.path == "some/path.mesh");

    CHECK_THROWS_AS(parse_domain(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_domain("hexagon 3"), std::invalid_argument);
    CHECK_THROWS_AS(parse_domain("square"), std::invalid_argument);
    CHECK_THROWS_AS(parse_domain("disc 1"), std::invalid_argument);
}

TEST_CASE("parse_m_grid: geometric ranges and literal lists") {
    auto g = parse_m_grid("1:8:4");
    REQUIRE(g.size() == 4);
    CHECK(g[0] == doctest::Approx(1.0));
    CHECK(g[1] == doctest::Approx(2.0));
    CHECK(g[2] == doctest::Approx(4.0));
    CHECK(g[3] == 8.0);

    auto lst = parse_m_grid("0.5,1.5,2");
    REQUIRE(lst.size() == 3);
    CHECK(lst[1] == 1.5);

    auto single = parse_m_grid("2:8:1");
    REQUIRE(single.size() == 1);

    CHECK_THROWS_AS(parse_m_grid(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_m_grid("1:2:0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_m_grid("-1:2:3"), std::invalid_argument);
}

TEST_CASE("config files: sections, comments, overrides, validation messages") {
    fs::path dir = temp_dir("config");
    fs::path cfg = dir / "run.cfg";
    {
        std::ofstream out(cfg);
        out << "# a comment\n[domain]\ndomain = disc 1 2\n\n[problem]\nmode = energy\nk = 2\nm = "
               "0.5   # inline comment\nout = "
            << (dir / "out").string() << "\n";
    }
    auto kv = read_key_value_file(cfg.string());
    RunConfig config = config_from_map(kv);
    CHECK(config.mode == RunMode::energy);
    CHECK(config.k == 2.0);
    CHECK(config.m == 0.5);
    CHECK(config.domain.kind == DomainSpec::Kind::disc);
    config.validate();

    // m must be positive, with that exact message.
    kv["m"] = "-1";
    try {
        config_from_map(kv).validate();
        FAIL("expected std::invalid_argument");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()) == "m must be positive");
    }

    kv["m"] = "1";
    kv["nonsense_key"] = "1";
    CHECK_THROWS_AS(config_from_map(kv), std::invalid_argument);

    fs::path bad = dir / "bad.cfg";
    {
        std::ofstream out(bad);
        out << "mode = energy\nthis line has no equals sign\n";
    }
    try {
        read_key_value_file(bad.string());
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("export_vtk: structure, geometry-only files, NaN rejection") {
    Mesh2D mesh = generate_square(1); // 4 points, 2 triangles
    fs::path dir = temp_dir("vtk");

    fs::path with_field = dir / "field.vtk";
    export_vtk(mesh, {{"u", ScalarField{1.0, 2.0, 3.0, 4.0}}}, with_field.string());
    std::string text = slurp(with_field);
    CHECK(text.find("POINTS 4 double") != std::string::npos);
    CHECK(text.find("CELLS 2 8") != std::string::npos);
    CHECK(text.find("CELL_TYPES 2") != std::string::npos);
    CHECK(text.find("\n5\n5\n") != std::string::npos);
    CHECK(text.find("SCALARS u double 1") != std::string::npos);

    fs::path geom = dir / "geom.vtk";
    export_vtk(mesh, {}, geom.string());
    CHECK(slurp(geom).find("POINT_DATA") == std::string::npos);

    ScalarField bad{1.0, std::nan(""), 3.0, 4.0};
    CHECK_THROWS_AS(export_vtk(mesh, {{"u", bad}}, (dir / "bad.vtk").string()),
                    std::invalid_argument);
    CHECK_THROWS_AS(export_vtk(mesh, {{"u", ScalarField{1.0}}}, (dir / "short.vtk").string()),
                    std::invalid_argument);
}

TEST_CASE("run: energy mode writes the full output set") {
    fs::path dir = temp_dir("run_energy");
    RunConfig config;
    config.domain_text = "disc 1 3";
    config.domain = parse_domain(config.domain_text);
    config.mode = RunMode::energy;
    config.out_dir = (dir / "out").string();
    int status = run(config);
    CHECK(status == 0);
    CHECK(fs::exists(fs::path(config.out_dir) / "summary.txt"));
    CHECK(fs::exists(fs::path(config.out_dir) / "fields.vtk"));
    CHECK(fs::exists(fs::path(config.out_dir) / "boundary.csv"));
    CHECK(fs::exists(fs::path(config.out_dir) / "manifest.txt"));

    std::string summary = slurp(fs::path(config.out_dir) / "summary.txt");
    CHECK(summary.find("energy = ") != std::string::npos);
    CHECK(summary.find("max_error_vs_radial = ") != std::string::npos);
}

TEST_CASE("run: boundary.csv arclength is strictly increasing and closes each loop") {
    fs::path dir = temp_dir("run_csv");
    RunConfig config;
    config.domain_text = "two-discs 1 0.5 0.5 3";
    config.domain = parse_domain(config.domain_text);
    config.mode = RunMode::energy;
    config.out_dir = (dir / "out").string();
    REQUIRE(run(config) == 0);

    Mesh2D mesh = generate_two_discs(1.0, 0.5, 0.5, 3);
    BoundaryTrace trace(mesh);

    std::ifstream in(fs::path(config.out_dir) / "boundary.csv");
    std::string line;
    std::getline(in, line); // header
    CHECK(line == "component,arclength,x,y,u,h");
    int prev_component = -1;
    double prev_arclength = 0.0, last_arclength = 0.0;
    int rows = 0;
    std::vector<double> loop_ends;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');
        int comp = std::stoi(tok);
        std::getline(ss, tok, ',');
        double s = std::stod(tok);
        if (comp == prev_component) {
            CHECK(s > prev_arclength);
        } else if (prev_component >= 0) {
            loop_ends.push_back(last_arclength);
        }
        prev_component = comp;
        prev_arclength = s;
        last_arclength = s;
        ++rows;
    }
    loop_ends.push_back(last_arclength);
    REQUIRE(loop_ends.size() == 2);
    CHECK(std::abs(loop_ends[0] - trace.component_perimeter(0)) < 1e-10);
    CHECK(std::abs(loop_ends[1] - trace.component_perimeter(1)) < 1e-10);
    CHECK(rows == trace.size() + 2); // one closing row per component
}

TEST_CASE("run: identical configs give bit-identical outputs; manifests replay") {
    fs::path dir = temp_dir("run_repeat");
    RunConfig config;
    config.domain_text = "disc 1 3";
    config.domain = parse_domain(config.domain_text);
    config.mode = RunMode::eigen;
    config.m = 1.0;
    config.restarts = 2;
    config.tol = 1e-7;
    config.seed = 42;

    config.out_dir = (dir / "a").string();
    REQUIRE(run(config) == 0);
    config.out_dir = (dir / "b").string();
    REQUIRE(run(config) == 0);

    CHECK(slurp(dir / "a" / "boundary.csv") == slurp(dir / "b" / "boundary.csv"));
    CHECK(slurp(dir / "a" / "fields.vtk") == slurp(dir / "b" / "fields.vtk"));
    CHECK(slurp(dir / "a" / "summary.txt") == slurp(dir / "b" / "summary.txt"));

    // Replay from the manifest alone reproduces the summary bit for bit.
    auto kv = read_key_value_file((dir / "a" / "manifest.txt").string());
    kv["out"] = (dir / "replay").string();
    RunConfig replay = config_from_map(kv);
    REQUIRE(run(replay) == 0);
    CHECK(slurp(dir / "replay" / "summary.txt") == slurp(dir / "a" / "summary.txt"));
}

TEST_CASE("run: two-component mode requires the matching domain") {
    RunConfig config;
    config.domain_text = "square 4";
    config.domain = parse_domain(config.domain_text);
    config.mode = RunMode::two_component;
    config.out_dir = (temp_dir("run_mismatch") / "out").string();
    CHECK_THROWS_AS(run(config), std::invalid_argument);
}

TEST_CASE("run: solver non-convergence returns 2 and flags the manifest") {
    fs::path dir = temp_dir("run_partial");
    RunConfig config;
    config.domain_text = "disc 1 3";
    config.domain = parse_domain(config.domain_text);
    config.mode = RunMode::eigen;
    config.tol = 1e-15;   // unreachable within one outer iteration
    config.max_outer = 1;
    config.restarts = 2;
    config.out_dir = (dir / "out").string();
    CHECK(run(config) == 2);
    std::string manifest = slurp(fs::path(config.out_dir) / "manifest.txt");
    CHECK(manifest.find("status = partial") != std::string::npos);
    std::string summary = slurp(fs::path(config.out_dir) / "summary.txt");
    CHECK(summary.find("error = ") != std::string::npos);
}

#ifdef INSULATE_BIN
TEST_CASE("insulate binary: validation failures exit with code 1") {
    fs::path dir = temp_dir("cli_exit");
    fs::path log = dir / "stderr.txt";
    std::string cmd = std::string("\"") + INSULATE_BIN + "\" --mode energy --domain 'disc 1 2' " +
                      "--m -1 --out " + (dir / "out").string() + " 2> " + log.string();
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    CHECK(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 1);
    CHECK(slurp(log).find("m must be positive") != std::string::npos);

    // A good run exits 0.
    std::string ok_cmd = std::string("\"") + INSULATE_BIN + "\" --mode energy --domain 'disc 1 2' " +
                         "--m 1 --out " + (dir / "ok").string() + " > /dev/null";
    int ok_status = std::system(ok_cmd.c_str());
    REQUIRE(ok_status != -1);
    CHECK(WEXITSTATUS(ok_status) == 0);
}
#endif
