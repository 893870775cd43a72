#pragma once

#include <string>
#include <vector>

#include "insulopt/eigen.hpp"
#include "insulopt/energy.hpp"
#include "insulopt/fem.hpp"
#include "insulopt/mesh.hpp"

namespace insulopt {

// Returned by symmetry_metric when the boundary trace vanishes.
inline constexpr double kDegenerateSymmetry = 1e30;

// Weighted coefficient of variation (std/mean) of |u| over the boundary
// vertices; the radiality metric. Requires a single boundary component.
double symmetry_metric(const Mesh2D& mesh, const BoundaryTrace& trace, const ScalarField& u);

struct ThresholdResult {
    double m0 = 0.0;
    double m_lo = 0.0, m_hi = 0.0; // final bracket, lambda(m_lo) > Lambda > lambda(m_hi)
    double lambda_ref = 0.0;       // first nonzero Neumann eigenvalue used
    std::vector<std::pair<double, double>> samples; // (m, lambda_m) probes, in probe order
    bool converged = false;
    std::string message; // set when a probe failed and the search aborted
};

// Bisection for the mass threshold where lambda_m crosses the first nonzero
// Neumann eigenvalue. The initial bracket is validated by probing both ends;
// an invalid bracket throws std::invalid_argument with the measured values.
// Probe failures abort and return the partial table with converged = false.
ThresholdResult threshold_m0(const Mesh2D& mesh, const BoundaryTrace& trace, double k, double m_lo,
                             double m_hi, double bracket_tol,
                             const EigenSolveOptions& opt = {});

// Interval analogue built on lambda_1d; its bracket validation always fails
// (lambda_m stays below the Neumann value in one dimension).
ThresholdResult threshold_m0_interval(double k, double L, int n, double m_lo, double m_hi,
                                      double bracket_tol);

enum class SweepMode { eigenvalue, energy };

struct SweepRow {
    double m = 0.0;
    double value = 0.0;    // lambda_m or reduced energy
    double symmetry = 0.0; // CV of the boundary trace of u
    int iterations = 0;
    int best_restart = 0;  // always 0 in energy mode
    bool valid = false;
    std::string error;
};

struct SweepTable {
    SweepMode mode = SweepMode::eigenvalue;
    std::vector<SweepRow> rows;
};

// One optimization per grid mass; per-row failures are recorded, not thrown.
// f is only used in energy mode.
SweepTable sweep(const Mesh2D& mesh, const BoundaryTrace& trace, double k,
                 const std::vector<double>& m_grid, SweepMode mode, const ScalarField& f,
                 const EigenSolveOptions& eig_opt = {}, const EnergySolveOptions& energy_opt = {});

struct TwoComponentResult {
    std::vector<double> mass_fraction; // insulator mass per component / m
    std::vector<double> thickness_cv;  // CV of h per component
    EnergyReport report;
    Mesh2D mesh;
};

// Energy optimization on two disjoint discs with f = 1; reports how the
// optimal insulator mass splits between the components.
TwoComponentResult two_component_concentration(double r1, double r2, double gap, double k,
                                               double m, int level,
                                               const EnergySolveOptions& opt = {});

// Boundary flux of the Dirichlet solution of -Laplace(u) = f, recovered from
// the assembly residual: flux_i = (K u - b)_i / w_i at boundary vertices
// (trace order). Conserves total flux: sum_i flux_i w_i = -integral(f).
std::vector<double> dirichlet_normal_derivative(const Mesh2D& mesh, const BoundaryTrace& trace,
                                                const ScalarField& f, double cg_tol = 1e-12);

// Dirichlet solution itself (zero trace), full-length field.
ScalarField solve_dirichlet(const Mesh2D& mesh, const ScalarField& f, double cg_tol = 1e-12);

struct ConcentrationRow {
    double m = 0.0;
    std::vector<double> profile;  // h_m / m per boundary vertex, trace order
    double near_fraction = 0.0;   // lumped profile mass within `radius` of the centers
    double cv = 0.0;              // CV of the profile
    int iterations = 0;
};

// Optimal-thickness profiles h_m/m for a decreasing list of masses, with the
// fraction of mass near the flux-minimizing boundary points. When `centers`
// is empty they are taken from dirichlet_normal_derivative minima (greedy,
// separated by 2.5x radius).
std::vector<ConcentrationRow> concentration_profile(const Mesh2D& mesh, const BoundaryTrace& trace,
                                                    double k, const ScalarField& f,
                                                    const std::vector<double>& m_list,
                                                    std::vector<Vec2> centers = {},
                                                    double radius = 0.1,
                                                    const EnergySolveOptions& opt = {});

} // namespace insulopt
