#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "insulopt/fem.hpp"
#include "insulopt/mesh.hpp"
#include "insulopt/sparse.hpp"

namespace insulopt {

struct EigenSolveOptions {
    double tol = 1e-9;        // relative eigenvalue change between outer iterations
    int max_outer = 300;
    int restarts = 4;
    std::uint64_t seed = 0;
    double floor_rel = 1e-8;
    double eig_tol = 1e-9;    // inner linear eigensolver residual tolerance
    int eig_max_iter = 2000;
};

struct EigenReport {
    double lambda = 0.0;   // value of the auxiliary objective at the reported u
    ScalarField u;         // nonnegative, u'Mu = 1
    std::vector<double> h; // thickness recovered from u, trace order
    double h_mass = 0.0;
    int best_restart = 0;
    std::vector<double> restart_lambdas;   // per restart; NaN marks a failed run
    double symmetry_metric = 0.0;          // weighted CV of |u| on the boundary
    int iterations = 0;                    // outer iterations of the best run
    std::vector<double> objective_trace;   // auxiliary objective, best run
    bool converged = false;
    bool degenerate_boundary = false;      // minimizer has vanishing boundary trace
};

// Smallest eigenpair of (K + B_h) v = lambda M v. The eigenvector is
// M-normalized with nonnegative M-weighted mean.
std::pair<double, ScalarField> robin_eig(const Mesh2D& mesh, const BoundaryTrace& trace,
                                         const ThicknessField& h, RobinConfig robin,
                                         double tol = 1e-9, const ScalarField* warm = nullptr);

// Alternating minimization of the auxiliary eigenvalue problem
//   min u'Ku + (1/(km)) (sum w|u|)^2  subject to u'Mu = 1
// with multiple starts: constant, low angular modes on circular boundaries,
// and seeded random fields. Returns the run with the smallest objective.
EigenReport minimize_auxiliary(const Mesh2D& mesh, const BoundaryTrace& trace, double k, double m,
                               const EigenSolveOptions& opt = {});

// First nonzero Neumann eigenvalue (stiffness/mass pencil deflated against
// constants). Rejects meshes with more than one component.
double neumann_lambda(const Mesh2D& mesh, double tol = 1e-9);

// First Dirichlet eigenvalue (pencil restricted to interior vertices).
double dirichlet_lambda(const Mesh2D& mesh, double tol = 1e-9);

// Linear Robin eigenvalue on the interval (0, L) with prescribed endpoint
// thicknesses h0, hL (n grid points).
double lambda_1d_fixed(double k, double h0, double hL, double L, int n);

// Auxiliary problem on the interval (0, L): boundary term
// (1/(km)) (|u(0)| + |u(L)|)^2, insulator mass split between the endpoints by
// the same alternating scheme.
double lambda_1d(double k, double m, double L, int n, double tol = 1e-10, int max_outer = 300);

} // namespace insulopt
