// Test-side oracles, independent of the library's solution paths.
#pragma once

#include <cstdint>
#include <vector>

#include "insulopt/mesh.hpp"

namespace oracles {

// Bessel functions of the first kind by power series (x in [0, 12]).
double bessel_j0(double x);
double bessel_j1(double x);

// First positive root of J0 (Dirichlet disc eigenvalue = root^2).
double bessel_j0_first_root();
// First positive root of J1' (Neumann disc eigenvalue = root^2).
double bessel_j1prime_first_root();

// Exact integral of |p| over the mesh boundary for the P1 interpolant p of u
// (edge-wise closed form, splitting edges at sign changes).
double boundary_abs_integral_edgewise(const insulopt::Mesh2D& mesh,
                                      const std::vector<double>& u);

// Dense SPD solve (Cholesky), for small reference systems.
std::vector<double> dense_spd_solve(std::vector<std::vector<double>> a, std::vector<double> b);

// Projected-gradient minimization of sum_i w_i s_i^2 / h_i over
// { h_i >= floor, sum_i w_i h_i = m }. Independent check of the closed-form
// thickness update.
std::vector<double> simplex_quadratic_oracle(const std::vector<double>& weights,
                                             const std::vector<double>& scores, double mass,
                                             double floor_value, int iterations = 40000);

double simplex_objective(const std::vector<double>& weights, const std::vector<double>& scores,
                         const std::vector<double>& h);

// Deterministic uniform variate in [0, 1).
double uniform01(std::uint64_t& state);

} // namespace oracles
