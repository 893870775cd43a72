#include "insulopt/energy.hpp"

#include <cmath>
#include <stdexcept>

#include "insulopt/errors.hpp"

namespace insulopt {

ScalarField solve_robin(const Mesh2D& mesh, const BoundaryTrace& trace, const ThicknessField& h,
                        RobinConfig robin, const ScalarField& f, double cg_tol, int cg_max_iter) {
    SymmetricSparseMatrix K = assemble_stiffness(mesh);
    SymmetricSparseMatrix B = assemble_robin_boundary(mesh, trace, h, robin);
    SymmetricSparseMatrix A = SymmetricSparseMatrix::weighted_sum(K, 1.0, B, 1.0);
    Vector b = assemble_load(mesh, f);
    return cg_solve(A, b, cg_tol, cg_max_iter);
}

double energy_value(const Mesh2D& mesh, const BoundaryTrace& trace, const ThicknessField& h,
                    RobinConfig robin, const ScalarField& f, const ScalarField& u) {
    SymmetricSparseMatrix K = assemble_stiffness(mesh);
    SymmetricSparseMatrix B = assemble_robin_boundary(mesh, trace, h, robin);
    Vector b = assemble_load(mesh, f);
    return 0.5 * K.quadratic_form(u) + 0.5 * B.quadratic_form(u) - dot(b, u);
}

double reduced_energy(const SymmetricSparseMatrix& stiffness, const Vector& load,
                      const BoundaryTrace& trace, double k, double m, const ScalarField& u) {
    double abs_trace = boundary_abs_integral(trace, u);
    return 0.5 * stiffness.quadratic_form(u) + abs_trace * abs_trace / (2.0 * k * m) -
           dot(load, u);
}

EnergyReport minimize_reduced(const Mesh2D& mesh, const BoundaryTrace& trace, double k, double m,
                              const ScalarField& f, const EnergySolveOptions& opt) {
    if (m <= 0.0) throw std::invalid_argument("m must be positive");
    if (k <= 0.0) throw std::invalid_argument("k must be positive");
    if (opt.tol <= 0.0) throw std::invalid_argument("tolerance must be positive");

    const SymmetricSparseMatrix K = assemble_stiffness(mesh);
    const Vector b = assemble_load(mesh, f);
    const RobinConfig robin{k};

    EnergyReport report;
    ThicknessField h = ThicknessField::uniform(trace, m);
    ScalarField u(mesh.vertex_count(), 0.0);

    double energy_prev = 0.0;
    for (int it = 0; it < opt.max_outer; ++it) {
        SymmetricSparseMatrix B = assemble_robin_boundary(mesh, trace, h, robin);
        SymmetricSparseMatrix A = SymmetricSparseMatrix::weighted_sum(K, 1.0, B, 1.0);
        u = cg_solve(A, b, opt.cg_tol, opt.cg_max_iter, it == 0 ? nullptr : &u);

        double energy = reduced_energy(K, b, trace, k, m, u);
        report.energy_trace.push_back(energy);
        report.iterations = it + 1;
        report.final_energy_change =
            it == 0 ? 0.0 : std::abs(energy - energy_prev) / std::max(std::abs(energy), 1e-300);

        double abs_trace = boundary_abs_integral(trace, u);
        double u_scale = 0.0;
        for (double v : u) u_scale = std::max(u_scale, std::abs(v));
        if (abs_trace <= 1e-14 * std::max(1.0, u_scale) * trace.perimeter()) {
            // Trace-free minimizer: the thickness distribution is irrelevant.
            report.degenerate_boundary = true;
            report.converged = true;
            report.energy = energy;
            break;
        }

        h = ThicknessField::proportional_to(trace, trace.gather(u), m, opt.floor_rel);
        report.energy = energy;
        if (it > 0 && report.final_energy_change < opt.tol) {
            report.converged = true;
            break;
        }
        energy_prev = energy;
    }

    report.u = std::move(u);
    report.h = h.values();
    report.h_mass = h.mass();
    return report;
}

double radial_reference(double R, int d, double k, double m, double r) {
    if (R <= 0.0) throw std::invalid_argument("radius must be positive");
    if (d < 1 || d > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
    if (k <= 0.0) throw std::invalid_argument("k must be positive");
    if (m <= 0.0) throw std::invalid_argument("m must be positive");
    if (r < 0.0 || r > R) throw std::invalid_argument("radius r must lie in [0, R]");
    const double omega[3] = {2.0, M_PI, 4.0 * M_PI / 3.0};
    return (R * R - r * r) / (2.0 * d) +
           k * m / (d * d * omega[d - 1] * std::pow(R, d - 2));
}

} // namespace insulopt
