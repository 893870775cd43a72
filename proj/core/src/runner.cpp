#include "insulopt/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "insulopt/analysis.hpp"
#include "insulopt/eigen.hpp"
#include "insulopt/energy.hpp"
#include "insulopt/errors.hpp"

namespace insulopt {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> tokenize(const std::string& text) {
    std::string normalized = text;
    for (char& c : normalized)
        if (c == ':' || c == ',') c = ' ';
    std::istringstream ss(normalized);
    std::vector<std::string> tokens;
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
    return tokens;
}

double to_double(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument(what + ": cannot parse number '" + s + "'");
    }
    if (pos != s.size()) throw std::invalid_argument(what + ": cannot parse number '" + s + "'");
    return v;
}

long to_long(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    long v = 0;
    try {
        v = std::stol(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument(what + ": cannot parse integer '" + s + "'");
    }
    if (pos != s.size()) throw std::invalid_argument(what + ": cannot parse integer '" + s + "'");
    return v;
}

} // namespace

DomainSpec parse_domain(const std::string& text) {
    auto tokens = tokenize(text);
    if (tokens.empty()) throw std::invalid_argument("empty domain specification");
    DomainSpec spec;
    const std::string& kind = tokens[0];
    if (kind == "square") {
        if (tokens.size() != 2) throw std::invalid_argument("domain: expected 'square n'");
        spec.kind = DomainSpec::Kind::square;
        spec.n = static_cast<int>(to_long(tokens[1], "domain"));
    } else if (kind == "disc") {
        if (tokens.size() != 3) throw std::invalid_argument("domain: expected 'disc R n'");
        spec.kind = DomainSpec::Kind::disc;
        spec.radius = to_double(tokens[1], "domain");
        spec.n = static_cast<int>(to_long(tokens[2], "domain"));
    } else if (kind == "two-discs" || kind == "two_discs") {
        if (tokens.size() != 5)
            throw std::invalid_argument("domain: expected 'two-discs R1 R2 gap n'");
        spec.kind = DomainSpec::Kind::two_discs;
        spec.r1 = to_double(tokens[1], "domain");
        spec.r2 = to_double(tokens[2], "domain");
        spec.gap = to_double(tokens[3], "domain");
        spec.n = static_cast<int>(to_long(tokens[4], "domain"));
    } else if (kind == "mesh") {
        if (tokens.size() != 2) throw std::invalid_argument("domain: expected 'mesh PATH'");
        spec.kind = DomainSpec::Kind::file;
        spec.path = tokens[1];
    } else {
        throw std::invalid_argument("unknown domain kind '" + kind + "'");
    }
    return spec;
}

std::vector<double> parse_m_grid(const std::string& text) {
    if (text.find(':') != std::string::npos) {
        auto tokens = tokenize(text);
        if (tokens.size() != 3)
            throw std::invalid_argument("m-grid: expected 'a:b:steps' or a comma list");
        double a = to_double(tokens[0], "m-grid");
        double b = to_double(tokens[1], "m-grid");
        long steps = to_long(tokens[2], "m-grid");
        if (a <= 0.0 || b <= 0.0) throw std::invalid_argument("m-grid endpoints must be positive");
        if (steps < 1) throw std::invalid_argument("m-grid needs at least one step");
        std::vector<double> grid;
        if (steps == 1) {
            grid.push_back(a);
            return grid;
        }
        // Geometric spacing from a to b inclusive.
        double ratio = std::pow(b / a, 1.0 / (steps - 1));
        for (long i = 0; i < steps; ++i) grid.push_back(a * std::pow(ratio, (double)i));
        grid.back() = b;
        return grid;
    }
    std::vector<double> grid;
    for (const auto& tok : tokenize(text)) grid.push_back(to_double(tok, "m-grid"));
    if (grid.empty()) throw std::invalid_argument("empty m-grid");
    return grid;
}

void RunConfig::validate() const {
    if (k <= 0.0) throw std::invalid_argument("k must be positive");
    if (m <= 0.0) throw std::invalid_argument("m must be positive");
    if (tol <= 0.0) throw std::invalid_argument("tol must be positive");
    if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
    if (max_outer < 1) throw std::invalid_argument("max_outer must be >= 1");
    if (refine < 0) throw std::invalid_argument("refine must be >= 0");
    if (out_dir.empty()) throw std::invalid_argument("output directory must be set");
    switch (domain.kind) {
        case DomainSpec::Kind::square:
            if (domain.n < 1) throw std::invalid_argument("square subdivisions must be >= 1");
            break;
        case DomainSpec::Kind::disc:
            if (domain.radius <= 0.0) throw std::invalid_argument("disc radius must be positive");
            if (domain.n < 1) throw std::invalid_argument("disc level must be >= 1");
            break;
        case DomainSpec::Kind::two_discs:
            if (domain.r1 <= 0.0 || domain.r2 <= 0.0)
                throw std::invalid_argument("disc radii must be positive");
            if (domain.gap <= 0.0) throw std::invalid_argument("two-disc gap must be positive");
            if (domain.n < 1) throw std::invalid_argument("disc level must be >= 1");
            break;
        case DomainSpec::Kind::file:
            if (domain.path.empty()) throw std::invalid_argument("mesh path must be set");
            break;
    }
    if (mode == RunMode::threshold) {
        if (!(m_lo > 0.0) || !(m_hi > m_lo))
            throw std::invalid_argument("threshold bracket must satisfy 0 < m_lo < m_hi");
        if (bracket_tol <= 0.0) throw std::invalid_argument("bracket_tol must be positive");
    }
    if ((mode == RunMode::sweep || mode == RunMode::concentration) && m_grid.empty())
        throw std::invalid_argument("m-grid must be set for sweep and concentration modes");
    for (double g : m_grid)
        if (g <= 0.0) throw std::invalid_argument("m-grid entries must be positive");
    if (sweep_kind != "eigen" && sweep_kind != "energy")
        throw std::invalid_argument("sweep kind must be 'eigen' or 'energy'");
}

std::map<std::string, std::string> read_key_value_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    std::map<std::string, std::string> kv;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        auto first = raw.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto last = raw.find_last_not_of(" \t\r");
        std::string line = raw.substr(first, last - first + 1);
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError("unterminated section header", line_no);
            continue; // sections are structural only
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t");
            auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", line_no);
        kv[key] = value;
    }
    return kv;
}

namespace {

RunMode parse_mode(const std::string& text) {
    if (text == "energy") return RunMode::energy;
    if (text == "eigen") return RunMode::eigen;
    if (text == "threshold") return RunMode::threshold;
    if (text == "sweep") return RunMode::sweep;
    if (text == "concentration") return RunMode::concentration;
    if (text == "two-component" || text == "two_component") return RunMode::two_component;
    throw std::invalid_argument("unknown mode '" + text + "'");
}

std::string mode_name(RunMode mode) {
    switch (mode) {
        case RunMode::energy: return "energy";
        case RunMode::eigen: return "eigen";
        case RunMode::threshold: return "threshold";
        case RunMode::sweep: return "sweep";
        case RunMode::concentration: return "concentration";
        case RunMode::two_component: return "two-component";
    }
    return "?";
}

} // namespace

RunConfig config_from_map(const std::map<std::string, std::string>& kv) {
    RunConfig config;
    auto get = [&](const char* key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    for (const auto& [key, value] : kv) {
        static const char* known[] = {"domain",  "refine", "mode",        "k",        "m",
                                      "m_grid",  "f_const", "tol",        "restarts", "max_outer",
                                      "seed",    "m_lo",   "m_hi",        "bracket_tol",
                                      "sweep_kind", "out", "tool_version", "status"};
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw std::invalid_argument("unknown config key '" + key + "'");
        (void)value;
    }
    if (auto* v = get("domain")) {
        config.domain_text = *v;
        config.domain = parse_domain(*v);
    }
    if (auto* v = get("refine")) config.refine = (int)to_long(*v, "refine");
    if (auto* v = get("mode")) config.mode = parse_mode(*v);
    if (auto* v = get("k")) config.k = to_double(*v, "k");
    if (auto* v = get("m")) config.m = to_double(*v, "m");
    if (auto* v = get("m_grid")) {
        config.m_grid_text = *v;
        config.m_grid = parse_m_grid(*v);
    }
    if (auto* v = get("f_const")) config.f_const = to_double(*v, "f_const");
    if (auto* v = get("tol")) config.tol = to_double(*v, "tol");
    if (auto* v = get("restarts")) config.restarts = (int)to_long(*v, "restarts");
    if (auto* v = get("max_outer")) config.max_outer = (int)to_long(*v, "max_outer");
    if (auto* v = get("seed")) config.seed = (std::uint64_t)to_long(*v, "seed");
    if (auto* v = get("m_lo")) config.m_lo = to_double(*v, "m_lo");
    if (auto* v = get("m_hi")) config.m_hi = to_double(*v, "m_hi");
    if (auto* v = get("bracket_tol")) config.bracket_tol = to_double(*v, "bracket_tol");
    if (auto* v = get("sweep_kind")) config.sweep_kind = *v;
    if (auto* v = get("out")) config.out_dir = *v;
    return config;
}

namespace {

Mesh2D build_mesh(const RunConfig& config) {
    Mesh2D mesh;
    switch (config.domain.kind) {
        case DomainSpec::Kind::square: mesh = generate_square(config.domain.n); break;
        case DomainSpec::Kind::disc:
            mesh = generate_disc(config.domain.radius, config.domain.n);
            break;
        case DomainSpec::Kind::two_discs:
            mesh = generate_two_discs(config.domain.r1, config.domain.r2, config.domain.gap,
                                      config.domain.n);
            break;
        case DomainSpec::Kind::file: mesh = load_mesh(config.domain.path); break;
    }
    for (int i = 0; i < config.refine; ++i) mesh = refine(mesh);
    return mesh;
}

void write_manifest(const RunConfig& config, const std::string& status) {
    std::ofstream out(fs::path(config.out_dir) / "manifest.txt");
    out << "# insulopt run manifest (valid as --config input)\n";
    out << "tool_version = " << kToolVersion << "\n";
    out << "[domain]\n";
    out << "domain = " << config.domain_text << "\n";
    out << "refine = " << config.refine << "\n";
    out << "[problem]\n";
    out << "mode = " << mode_name(config.mode) << "\n";
    out << "k = " << fmt17(config.k) << "\n";
    out << "m = " << fmt17(config.m) << "\n";
    if (!config.m_grid_text.empty()) out << "m_grid = " << config.m_grid_text << "\n";
    out << "f_const = " << fmt17(config.f_const) << "\n";
    out << "[solver]\n";
    out << "tol = " << fmt17(config.tol) << "\n";
    out << "restarts = " << config.restarts << "\n";
    out << "max_outer = " << config.max_outer << "\n";
    out << "seed = " << config.seed << "\n";
    if (config.mode == RunMode::threshold) {
        out << "[threshold]\n";
        out << "m_lo = " << fmt17(config.m_lo) << "\n";
        out << "m_hi = " << fmt17(config.m_hi) << "\n";
        out << "bracket_tol = " << fmt17(config.bracket_tol) << "\n";
    }
    if (config.mode == RunMode::sweep) {
        out << "sweep_kind = " << config.sweep_kind << "\n";
    }
    out << "[output]\n";
    out << "out = " << config.out_dir << "\n";
    out << "status = " << status << "\n";
}

void write_boundary_csv(const fs::path& dir, const Mesh2D& mesh, const BoundaryTrace& trace,
                        const ScalarField& u, const std::vector<double>& h) {
    std::ofstream out(dir / "boundary.csv");
    out << "component,arclength,x,y,u,h\n";
    for (int c = 0; c < trace.component_count(); ++c) {
        auto [begin, end] = trace.component_range(c);
        auto row = [&](int i, double s) {
            const Vec2& p = mesh.vertices()[trace.vertex(i)];
            out << trace.component(i) << "," << fmt17(s) << "," << fmt17(p.x) << "," << fmt17(p.y)
                << "," << fmt17(u[trace.vertex(i)]) << "," << fmt17(h[i]) << "\n";
        };
        for (int i = begin; i < end; ++i) row(i, trace.arclength(i));
        // Close the loop: repeat the first vertex at arclength = perimeter.
        row(begin, trace.component_perimeter(trace.component(begin)));
    }
}

ScalarField boundary_field_to_full(const Mesh2D& mesh, const BoundaryTrace& trace,
                                   const std::vector<double>& boundary_values) {
    ScalarField full(mesh.vertex_count(), 0.0);
    for (int i = 0; i < trace.size(); ++i) full[trace.vertex(i)] = boundary_values[i];
    return full;
}

struct SummaryWriter {
    std::ostringstream text;
    void line(const std::string& s) { text << s << "\n"; }
    void kv(const std::string& key, const std::string& value) { text << key << " = " << value << "\n"; }
    void kv(const std::string& key, double value) { kv(key, fmt17(value)); }
    void kv(const std::string& key, int value) { kv(key, std::to_string(value)); }
};

} // namespace

int run(const RunConfig& config) {
    config.validate();

    Mesh2D mesh = build_mesh(config);
    BoundaryTrace trace(mesh);
    fs::create_directories(config.out_dir);
    const fs::path dir(config.out_dir);

    SummaryWriter summary;
    summary.line("# insulopt summary");
    summary.kv("tool_version", std::string(kToolVersion));
    summary.kv("mode", mode_name(config.mode));
    summary.kv("domain", config.domain_text);
    summary.kv("refine", config.refine);
    summary.kv("vertices", mesh.vertex_count());
    summary.kv("triangles", mesh.triangle_count());
    summary.kv("components", mesh.component_count());
    summary.kv("mesh_area", mesh.area());
    summary.kv("mesh_perimeter", mesh.perimeter());
    summary.kv("k", config.k);

    int status = 0;
    std::string status_text = "ok";
    try {
        switch (config.mode) {
            case RunMode::energy: {
                ScalarField f(mesh.vertex_count(), config.f_const);
                EnergySolveOptions opt;
                opt.tol = config.tol;
                opt.max_outer = config.max_outer;
                EnergyReport rep = minimize_reduced(mesh, trace, config.k, config.m, f, opt);
                if (!rep.converged) throw SolverError("energy minimization did not converge");
                summary.kv("m", config.m);
                summary.kv("energy", rep.energy);
                summary.kv("iterations", rep.iterations);
                summary.kv("final_energy_change", rep.final_energy_change);
                summary.kv("degenerate_boundary", rep.degenerate_boundary ? 1 : 0);
                summary.kv("thickness_cv",
                           weighted_cv(trace, rep.h, 0, trace.size()));
                if (config.domain.kind == DomainSpec::Kind::disc) {
                    // Nodal comparison against the radial closed form.
                    double err = 0.0;
                    for (int v = 0; v < mesh.vertex_count(); ++v) {
                        double r = std::min(norm(mesh.vertices()[v]), config.domain.radius);
                        double ref = radial_reference(config.domain.radius, 2, config.k, config.m,
                                                      r) *
                                     config.f_const;
                        err = std::max(err, std::abs(rep.u[v] - ref));
                    }
                    summary.kv("max_error_vs_radial", err);
                    summary.kv("radial_center_value",
                               radial_reference(config.domain.radius, 2, config.k, config.m, 0.0) *
                                   config.f_const);
                }
                export_vtk(mesh,
                           {{"u", rep.u}, {"h", boundary_field_to_full(mesh, trace, rep.h)}},
                           (dir / "fields.vtk").string());
                write_boundary_csv(dir, mesh, trace, rep.u, rep.h);
                break;
            }
            case RunMode::eigen: {
                EigenSolveOptions opt;
                opt.tol = config.tol;
                opt.max_outer = config.max_outer;
                opt.restarts = config.restarts;
                opt.seed = config.seed;
                EigenReport rep = minimize_auxiliary(mesh, trace, config.k, config.m, opt);
                if (!rep.converged) throw SolverError("eigen minimization did not converge");
                summary.kv("m", config.m);
                summary.kv("lambda", rep.lambda);
                summary.kv("best_restart", rep.best_restart);
                summary.kv("iterations", rep.iterations);
                summary.kv("symmetry_metric", rep.symmetry_metric);
                summary.kv("degenerate_boundary", rep.degenerate_boundary ? 1 : 0);
                for (std::size_t r = 0; r < rep.restart_lambdas.size(); ++r)
                    summary.kv("restart_" + std::to_string(r) + "_lambda",
                               rep.restart_lambdas[r]);
                export_vtk(mesh,
                           {{"u", rep.u}, {"h", boundary_field_to_full(mesh, trace, rep.h)}},
                           (dir / "fields.vtk").string());
                write_boundary_csv(dir, mesh, trace, rep.u, rep.h);
                break;
            }
            case RunMode::threshold: {
                EigenSolveOptions opt;
                opt.tol = config.tol;
                opt.max_outer = config.max_outer;
                opt.restarts = config.restarts;
                opt.seed = config.seed;
                ThresholdResult result = threshold_m0(mesh, trace, config.k, config.m_lo,
                                                      config.m_hi, config.bracket_tol, opt);
                std::ofstream csv(dir / "threshold.csv");
                csv << "probe,m,lambda,side\n";
                for (std::size_t i = 0; i < result.samples.size(); ++i) {
                    auto [pm, pl] = result.samples[i];
                    csv << i << "," << fmt17(pm) << "," << fmt17(pl) << ","
                        << (pl > result.lambda_ref ? "above" : "below") << "\n";
                }
                summary.kv("Lambda", result.lambda_ref);
                summary.kv("m0", result.m0);
                summary.kv("bracket_lo", result.m_lo);
                summary.kv("bracket_hi", result.m_hi);
                summary.kv("probes", (int)result.samples.size());
                if (!result.converged)
                    throw SolverError("threshold search aborted: " + result.message);
                break;
            }
            case RunMode::sweep: {
                std::vector<double> grid = config.m_grid;
                std::sort(grid.begin(), grid.end());
                ScalarField f(mesh.vertex_count(), config.f_const);
                EigenSolveOptions eig_opt;
                eig_opt.tol = config.tol;
                eig_opt.max_outer = config.max_outer;
                eig_opt.restarts = config.restarts;
                eig_opt.seed = config.seed;
                EnergySolveOptions energy_opt;
                energy_opt.tol = config.tol;
                energy_opt.max_outer = config.max_outer;
                SweepMode mode = config.sweep_kind == "energy" ? SweepMode::energy
                                                               : SweepMode::eigenvalue;
                SweepTable table = sweep(mesh, trace, config.k, grid, mode, f, eig_opt,
                                         energy_opt);
                std::ofstream csv(dir / "sweep.csv");
                csv << "m,value,symmetry,iterations,best_restart,valid\n";
                bool all_ok = true;
                for (const auto& row : table.rows) {
                    csv << fmt17(row.m) << "," << fmt17(row.value) << "," << fmt17(row.symmetry)
                        << "," << row.iterations << "," << row.best_restart << ","
                        << (row.valid ? 1 : 0) << "\n";
                    all_ok = all_ok && row.valid;
                }
                summary.kv("sweep_kind", config.sweep_kind);
                summary.kv("rows", (int)table.rows.size());
                if (!all_ok) throw SolverError("sweep contains failed rows; see sweep.csv");
                break;
            }
            case RunMode::concentration: {
                std::vector<double> grid = config.m_grid;
                std::sort(grid.begin(), grid.end(), std::greater<>());
                ScalarField f(mesh.vertex_count(), config.f_const);
                EnergySolveOptions opt;
                opt.tol = config.tol;
                opt.max_outer = config.max_outer;
                auto rows = concentration_profile(mesh, trace, config.k, f, grid, {}, 0.1, opt);
                std::ofstream csv(dir / "concentration.csv");
                csv << "m,near_fraction,cv,iterations\n";
                for (const auto& row : rows)
                    csv << fmt17(row.m) << "," << fmt17(row.near_fraction) << ","
                        << fmt17(row.cv) << "," << row.iterations << "\n";
                summary.kv("rows", (int)rows.size());
                if (!rows.empty()) {
                    summary.kv("smallest_m", rows.back().m);
                    summary.kv("smallest_m_near_fraction", rows.back().near_fraction);
                }
                break;
            }
            case RunMode::two_component: {
                if (config.domain.kind != DomainSpec::Kind::two_discs)
                    throw std::invalid_argument("two-component mode requires a two-discs domain");
                EnergySolveOptions opt;
                opt.tol = config.tol;
                opt.max_outer = config.max_outer;
                TwoComponentResult result = two_component_concentration(
                    config.domain.r1, config.domain.r2, config.domain.gap, config.k, config.m,
                    config.domain.n, opt);
                summary.kv("m", config.m);
                summary.kv("energy", result.report.energy);
                summary.kv("iterations", result.report.iterations);
                for (std::size_t c = 0; c < result.mass_fraction.size(); ++c) {
                    summary.kv("mass_fraction_" + std::to_string(c), result.mass_fraction[c]);
                    summary.kv("thickness_cv_" + std::to_string(c), result.thickness_cv[c]);
                }
                BoundaryTrace two_trace(result.mesh);
                export_vtk(result.mesh,
                           {{"u", result.report.u},
                            {"h", boundary_field_to_full(result.mesh, two_trace,
                                                         result.report.h)}},
                           (dir / "fields.vtk").string());
                write_boundary_csv(dir, result.mesh, two_trace, result.report.u,
                                   result.report.h);
                break;
            }
        }
    } catch (const SolverError& e) {
        summary.kv("error", std::string(e.what()));
        status = 2;
        status_text = "partial";
    }

    std::ofstream out(dir / "summary.txt");
    out << summary.text.str();
    write_manifest(config, status_text);
    return status;
}

} // namespace insulopt
