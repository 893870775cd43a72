#pragma once

#include <vector>

#include "insulopt/fem.hpp"
#include "insulopt/mesh.hpp"
#include "insulopt/sparse.hpp"

namespace insulopt {

struct EnergySolveOptions {
    double tol = 1e-10;      // relative energy change between outer iterations
    int max_outer = 500;
    double floor_rel = 1e-8; // thickness floor, relative to uniform thickness
    double cg_tol = 1e-12;
    int cg_max_iter = 50000;
};

struct EnergyReport {
    double energy = 0.0; // reduced energy F(u) at the last iterate
    ScalarField u;
    std::vector<double> h;                 // optimal thickness, trace order
    double h_mass = 0.0;
    int iterations = 0;                    // outer iterations performed
    double final_energy_change = 0.0;      // last relative energy change
    std::vector<double> energy_trace;      // F per outer iteration
    bool converged = false;
    bool degenerate_boundary = false;      // boundary trace of u vanished
};

// Fixed-thickness Robin solve: (K + B_h) u = b with b the load of f.
ScalarField solve_robin(const Mesh2D& mesh, const BoundaryTrace& trace, const ThicknessField& h,
                        RobinConfig robin, const ScalarField& f, double cg_tol = 1e-12,
                        int cg_max_iter = 50000);

// 1/2 u'Ku + 1/2 u'B_h u - b'u.
double energy_value(const Mesh2D& mesh, const BoundaryTrace& trace, const ThicknessField& h,
                    RobinConfig robin, const ScalarField& f, const ScalarField& u);

// Reduced energy F(u) = 1/2 u'Ku + (1/(2km)) (sum_i w_i|u_i|)^2 - b'u,
// evaluated from preassembled stiffness and load.
double reduced_energy(const SymmetricSparseMatrix& stiffness, const Vector& load,
                      const BoundaryTrace& trace, double k, double m, const ScalarField& u);

// Alternating minimization of the reduced convex problem: exact thickness
// update h = m|u| / integral(|u|) alternated with Robin solves. The energy
// trace is nonincreasing; convergence is by relative energy change.
EnergyReport minimize_reduced(const Mesh2D& mesh, const BoundaryTrace& trace, double k, double m,
                              const ScalarField& f, const EnergySolveOptions& opt = {});

// Closed-form optimal temperature of the ball B_R with f = 1:
// u(r) = (R^2 - r^2) / (2d) + k*m / (d^2 * omega_d * R^(d-2)),
// omega_d the volume of the d-dimensional unit ball, d in {1, 2, 3}.
double radial_reference(double R, int d, double k, double m, double r);

} // namespace insulopt
