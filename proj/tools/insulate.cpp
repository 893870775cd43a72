// insulate — optimal-insulation studies on 2D domains.
//
// Everything is driven by a flat key=value config; command-line flags override
// file values. See README for the config keys and output file schemas.

#include <cstdint>
#include <exception>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "insulopt/errors.hpp"
#include "insulopt/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"insulate — thin-insulation optimization in the Robin limit"};
    app.set_version_flag("--version", std::string(insulopt::kToolVersion));

    std::string config_path, mode, domain, m_grid, sweep_kind, out_dir;
    double k = 0, m = 0, f_const = 0, tol = 0, m_lo = 0, m_hi = 0, bracket_tol = 0;
    std::int64_t restarts = 0, seed = 0, refine = 0, max_outer = 0;

    auto* config_opt = app.add_option("--config", config_path, "key=value config file");
    auto* mode_opt = app.add_option("--mode", mode,
                                    "energy | eigen | threshold | sweep | concentration | "
                                    "two-component");
    auto* domain_opt = app.add_option(
        "--domain", domain, "'square n' | 'disc R n' | 'two-discs R1 R2 gap n' | 'mesh PATH'");
    auto* k_opt = app.add_option("--k", k, "Robin ratio (insulator eps/delta)");
    auto* m_opt = app.add_option("--m", m, "total insulator mass");
    auto* m_grid_opt = app.add_option("--m-grid", m_grid, "'a:b:steps' (geometric) or 'x,y,z'");
    auto* f_opt = app.add_option("--f-const", f_const, "constant heat source value");
    auto* tol_opt = app.add_option("--tol", tol, "outer convergence tolerance");
    auto* restarts_opt = app.add_option("--restarts", restarts, "eigen restarts");
    auto* max_outer_opt = app.add_option("--max-outer", max_outer, "outer iteration cap");
    auto* seed_opt = app.add_option("--seed", seed, "seed for randomized restarts");
    auto* out_opt = app.add_option("--out", out_dir, "output directory");
    auto* refine_opt = app.add_option("--refine", refine, "extra uniform refinements");
    auto* m_lo_opt = app.add_option("--m-lo", m_lo, "threshold bracket lower end");
    auto* m_hi_opt = app.add_option("--m-hi", m_hi, "threshold bracket upper end");
    auto* btol_opt = app.add_option("--bracket-tol", bracket_tol, "threshold bracket width");
    auto* sweep_kind_opt = app.add_option("--sweep-kind", sweep_kind, "sweep: eigen | energy");

    CLI11_PARSE(app, argc, argv);

    try {
        std::map<std::string, std::string> kv;
        if (*config_opt) kv = insulopt::read_key_value_file(config_path);
        auto put = [&kv](const CLI::Option* opt, const std::string& key, const std::string& val) {
            if (opt->count() > 0) kv[key] = val;
        };
        put(mode_opt, "mode", mode);
        put(domain_opt, "domain", domain);
        put(k_opt, "k", insulopt::fmt17(k));
        put(m_opt, "m", insulopt::fmt17(m));
        put(m_grid_opt, "m_grid", m_grid);
        put(f_opt, "f_const", insulopt::fmt17(f_const));
        put(tol_opt, "tol", insulopt::fmt17(tol));
        put(restarts_opt, "restarts", std::to_string(restarts));
        put(max_outer_opt, "max_outer", std::to_string(max_outer));
        put(seed_opt, "seed", std::to_string(seed));
        put(out_opt, "out", out_dir);
        put(refine_opt, "refine", std::to_string(refine));
        put(m_lo_opt, "m_lo", insulopt::fmt17(m_lo));
        put(m_hi_opt, "m_hi", insulopt::fmt17(m_hi));
        put(btol_opt, "bracket_tol", insulopt::fmt17(bracket_tol));
        put(sweep_kind_opt, "sweep_kind", sweep_kind);

        insulopt::RunConfig config = insulopt::config_from_map(kv);
        int status = insulopt::run(config);
        if (status == 0)
            std::cout << "done; outputs in " << config.out_dir << "\n";
        else
            std::cerr << "solver did not converge; partial outputs in " << config.out_dir
                      << " (see summary.txt)\n";
        return status;
    } catch (const insulopt::SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
