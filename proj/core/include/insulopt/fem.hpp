#pragma once

#include <vector>

#include "insulopt/mesh.hpp"
#include "insulopt/sparse.hpp"

namespace insulopt {

// Per-mesh-vertex real values (u, f, ...).
using ScalarField = std::vector<double>;

// Asymptotic conductivity ratio of the thin insulating layer.
struct RobinConfig {
    double k = 1.0;
};

// Exact minimizer of sum_i w_i * scores_i^2 / h_i over the floored simplex
// { h_i >= floor_value, sum_i w_i h_i = mass } (water-filling over the active
// set). With an inactive floor this is h_i = mass*scores_i / sum_j w_j scores_j.
// scores must be nonnegative; returns the uniform field when all scores vanish.
std::vector<double> waterfill_simplex(const std::vector<double>& weights,
                                      const std::vector<double>& scores, double mass,
                                      double floor_value);

// Nonnegative insulator thickness per boundary vertex (trace order) with a
// prescribed total boundary mass sum_i w_i h_i = m.
class ThicknessField {
public:
    static ThicknessField uniform(const BoundaryTrace& trace, double mass);
    // Takes ownership of explicit per-vertex values; mass is computed from them.
    static ThicknessField from_values(const BoundaryTrace& trace, std::vector<double> values);
    // h_i = m*|u_i| / sum_j w_j |u_j|, floored at floor_rel * m / perimeter
    // (mass-preserving water-filling). boundary_u holds the trace values of u.
    static ThicknessField proportional_to(const BoundaryTrace& trace,
                                          const std::vector<double>& boundary_u, double mass,
                                          double floor_rel = 1e-8);

    const std::vector<double>& values() const { return values_; }
    double value(int i) const { return values_[i]; }
    double mass() const { return mass_; }
    int size() const { return static_cast<int>(values_.size()); }

private:
    ThicknessField(std::vector<double> values, double mass)
        : values_(std::move(values)), mass_(mass) {}

    std::vector<double> values_;
    double mass_ = 0.0;
};

// P1 discrete forms of the Robin-limit functional.
SymmetricSparseMatrix assemble_stiffness(const Mesh2D& mesh);
SymmetricSparseMatrix assemble_mass(const Mesh2D& mesh);

// Lumped boundary operator: diagonal entries w_i / (k * h_i) at boundary
// vertices, zero elsewhere. Rejects h_i = 0.
SymmetricSparseMatrix assemble_robin_boundary(const Mesh2D& mesh, const BoundaryTrace& trace,
                                              const ThicknessField& h, RobinConfig robin);

// Consistent P1 load vector b_i = integral of f * phi_i.
Vector assemble_load(const Mesh2D& mesh, const ScalarField& f);

// Lumped boundary integral of |u|: sum_i w_i |u_i|.
double boundary_abs_integral(const BoundaryTrace& trace, const ScalarField& u);

// Weighted coefficient of variation (std/mean) of |values| over the trace
// index range [begin, end); values are in trace order. Returns a large
// sentinel (1e30) when the mean is below 1e-14 of the value scale.
double weighted_cv(const BoundaryTrace& trace, const std::vector<double>& values, int begin,
                   int end);

} // namespace insulopt
