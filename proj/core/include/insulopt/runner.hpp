#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "insulopt/fem.hpp"
#include "insulopt/mesh.hpp"

namespace insulopt {

inline constexpr const char* kToolVersion = "0.1.0";

enum class RunMode { energy, eigen, threshold, sweep, concentration, two_component };

struct DomainSpec {
    enum class Kind { square, disc, two_discs, file } kind = Kind::square;
    int n = 1;            // subdivisions (square) or refinement level (discs)
    double radius = 1.0;  // disc
    double r1 = 1.0, r2 = 0.5, gap = 0.5; // two discs
    std::string path;     // mesh file
};

// Parses "square n", "disc R n", "two-discs R1 R2 gap n" or "mesh PATH"
// (tokens split on spaces, ':' or ','). Throws std::invalid_argument.
DomainSpec parse_domain(const std::string& text);

struct RunConfig {
    DomainSpec domain;
    std::string domain_text = "square 16";
    int refine = 0;
    RunMode mode = RunMode::energy;
    double k = 1.0;
    double m = 1.0;
    std::vector<double> m_grid; // sweep / concentration masses
    std::string m_grid_text;
    double f_const = 1.0;
    double tol = 1e-8;
    int restarts = 4;
    int max_outer = 500;
    std::uint64_t seed = 0;
    double m_lo = 0.5, m_hi = 4.0, bracket_tol = 0.02; // threshold mode
    std::string sweep_kind = "eigen";                   // sweep mode: eigen | energy
    std::string out_dir = "out";

    // Throws std::invalid_argument on the first violated constraint.
    void validate() const;
};

// Flat key=value config file; '[section]' headers are structural only and
// '#' starts a comment. Keys match the CLI flag names.
std::map<std::string, std::string> read_key_value_file(const std::string& path);
RunConfig config_from_map(const std::map<std::string, std::string>& kv);

// "a:b:steps" -> geometric grid from a to b inclusive; "x,y,z" -> literal list.
std::vector<double> parse_m_grid(const std::string& text);

// Executes one study and writes summary.txt, fields.vtk, boundary.csv,
// mode-specific CSV tables and manifest.txt into config.out_dir.
// Returns 0 on success, 2 on solver non-convergence (partial outputs are
// flagged in the manifest). Configuration errors throw before anything runs.
int run(const RunConfig& config);

// Legacy ASCII VTK unstructured grid with per-point scalar fields.
// Rejects fields with non-finite entries or wrong length.
void export_vtk(const Mesh2D& mesh,
                const std::vector<std::pair<std::string, ScalarField>>& fields,
                const std::string& path);

// 17-significant-digit formatting used by every text output.
std::string fmt17(double v);

} // namespace insulopt
