#include "insulopt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "insulopt/errors.hpp"

namespace insulopt {

double symmetry_metric(const Mesh2D& mesh, const BoundaryTrace& trace, const ScalarField& u) {
    if (mesh.component_count() != 1)
        throw std::invalid_argument(
            "symmetry_metric requires a single boundary component; use per-component ranges");
    return weighted_cv(trace, trace.gather(u), 0, trace.size());
}

ThresholdResult threshold_m0(const Mesh2D& mesh, const BoundaryTrace& trace, double k, double m_lo,
                             double m_hi, double bracket_tol, const EigenSolveOptions& opt) {
    if (!(m_lo > 0.0) || !(m_hi > m_lo))
        throw std::invalid_argument("threshold bracket must satisfy 0 < m_lo < m_hi");
    if (bracket_tol <= 0.0) throw std::invalid_argument("bracket tolerance must be positive");

    ThresholdResult result;
    result.lambda_ref = neumann_lambda(mesh, opt.eig_tol);

    auto probe = [&](double m) {
        double lambda = minimize_auxiliary(mesh, trace, k, m, opt).lambda;
        result.samples.emplace_back(m, lambda);
        return lambda;
    };

    double lambda_lo = 0.0, lambda_hi = 0.0;
    try {
        lambda_lo = probe(m_lo);
        lambda_hi = probe(m_hi);
    } catch (const SolverError& e) {
        result.message = std::string("bracket validation failed: ") + e.what();
        return result;
    }
    if (!(lambda_lo > result.lambda_ref) || !(lambda_hi < result.lambda_ref)) {
        std::ostringstream msg;
        msg << "invalid bracket: need lambda(m_lo) > Lambda > lambda(m_hi), measured lambda("
            << m_lo << ") = " << lambda_lo << ", Lambda = " << result.lambda_ref << ", lambda("
            << m_hi << ") = " << lambda_hi;
        throw std::invalid_argument(msg.str());
    }

    while (m_hi - m_lo > bracket_tol) {
        double mid = 0.5 * (m_lo + m_hi);
        double lambda_mid = 0.0;
        try {
            lambda_mid = probe(mid);
        } catch (const SolverError& e) {
            result.m_lo = m_lo;
            result.m_hi = m_hi;
            result.m0 = 0.5 * (m_lo + m_hi);
            result.message = std::string("probe at m = ") + std::to_string(mid) +
                             " failed: " + e.what();
            return result;
        }
        if (lambda_mid > result.lambda_ref)
            m_lo = mid;
        else
            m_hi = mid;
    }

    result.m_lo = m_lo;
    result.m_hi = m_hi;
    result.m0 = 0.5 * (m_lo + m_hi);
    result.converged = true;
    return result;
}

ThresholdResult threshold_m0_interval(double k, double L, int n, double m_lo, double m_hi,
                                      double bracket_tol) {
    if (!(m_lo > 0.0) || !(m_hi > m_lo))
        throw std::invalid_argument("threshold bracket must satisfy 0 < m_lo < m_hi");
    if (bracket_tol <= 0.0) throw std::invalid_argument("bracket tolerance must be positive");

    // Discrete first nonzero Neumann eigenvalue of the interval.
    ThresholdResult result;
    {
        std::vector<Triplet> ks, ms;
        double dx = L / (n - 1);
        for (int e = 0; e + 1 < n; ++e) {
            ks.push_back({e, e, 1.0 / dx});
            ks.push_back({e + 1, e + 1, 1.0 / dx});
            ks.push_back({e, e + 1, -1.0 / dx});
            ks.push_back({e + 1, e, -1.0 / dx});
            ms.push_back({e, e, dx / 3.0});
            ms.push_back({e + 1, e + 1, dx / 3.0});
            ms.push_back({e, e + 1, dx / 6.0});
            ms.push_back({e + 1, e, dx / 6.0});
        }
        auto K = SymmetricSparseMatrix::from_triplets(n, std::move(ks));
        auto M = SymmetricSparseMatrix::from_triplets(n, std::move(ms));
        std::vector<Vector> deflation{Vector(n, 1.0)};
        result.lambda_ref = eig_smallest(K, M, deflation).value;
    }

    double lambda_lo = lambda_1d(k, m_lo, L, n);
    double lambda_hi = lambda_1d(k, m_hi, L, n);
    result.samples.emplace_back(m_lo, lambda_lo);
    result.samples.emplace_back(m_hi, lambda_hi);
    if (!(lambda_lo > result.lambda_ref) || !(lambda_hi < result.lambda_ref)) {
        std::ostringstream msg;
        msg << "invalid bracket: need lambda(m_lo) > Lambda > lambda(m_hi), measured lambda("
            << m_lo << ") = " << lambda_lo << ", Lambda = " << result.lambda_ref << ", lambda("
            << m_hi << ") = " << lambda_hi;
        throw std::invalid_argument(msg.str());
    }

    while (m_hi - m_lo > bracket_tol) {
        double mid = 0.5 * (m_lo + m_hi);
        double lambda_mid = lambda_1d(k, mid, L, n);
        result.samples.emplace_back(mid, lambda_mid);
        if (lambda_mid > result.lambda_ref)
            m_lo = mid;
        else
            m_hi = mid;
    }
    result.m_lo = m_lo;
    result.m_hi = m_hi;
    result.m0 = 0.5 * (m_lo + m_hi);
    result.converged = true;
    return result;
}

SweepTable sweep(const Mesh2D& mesh, const BoundaryTrace& trace, double k,
                 const std::vector<double>& m_grid, SweepMode mode, const ScalarField& f,
                 const EigenSolveOptions& eig_opt, const EnergySolveOptions& energy_opt) {
    for (std::size_t i = 0; i < m_grid.size(); ++i) {
        if (m_grid[i] <= 0.0) throw std::invalid_argument("sweep masses must be positive");
        if (i > 0 && m_grid[i] <= m_grid[i - 1])
            throw std::invalid_argument("sweep masses must be strictly increasing");
    }

    SweepTable table;
    table.mode = mode;
    for (double m : m_grid) {
        SweepRow row;
        row.m = m;
        try {
            if (mode == SweepMode::eigenvalue) {
                EigenReport rep = minimize_auxiliary(mesh, trace, k, m, eig_opt);
                row.value = rep.lambda;
                row.symmetry = rep.symmetry_metric;
                row.iterations = rep.iterations;
                row.best_restart = rep.best_restart;
                row.valid = rep.converged;
                if (!rep.converged) row.error = "not converged";
            } else {
                EnergyReport rep = minimize_reduced(mesh, trace, k, m, f, energy_opt);
                row.value = rep.energy;
                row.symmetry = weighted_cv(trace, trace.gather(rep.u), 0, trace.size());
                row.iterations = rep.iterations;
                row.valid = rep.converged;
                if (!rep.converged) row.error = "not converged";
            }
        } catch (const std::exception& e) {
            row.valid = false;
            row.error = e.what();
        }
        table.rows.push_back(std::move(row));
    }

    // A rising eigenvalue column means a restart missed the global minimum.
    if (mode == SweepMode::eigenvalue) {
        for (std::size_t i = 1; i < table.rows.size(); ++i) {
            SweepRow& prev = table.rows[i - 1];
            SweepRow& cur = table.rows[i];
            if (prev.valid && cur.valid &&
                cur.value > prev.value + 1e-9 * std::max(1.0, std::abs(prev.value))) {
                cur.valid = false;
                cur.error = "monotonicity violation: lambda rose from the previous mass";
            }
        }
    }
    return table;
}

TwoComponentResult two_component_concentration(double r1, double r2, double gap, double k,
                                               double m, int level,
                                               const EnergySolveOptions& opt) {
    TwoComponentResult result;
    result.mesh = generate_two_discs(r1, r2, gap, level);
    BoundaryTrace trace(result.mesh);
    ScalarField f(result.mesh.vertex_count(), 1.0);
    result.report = minimize_reduced(result.mesh, trace, k, m, f, opt);

    result.mass_fraction.assign(trace.component_count(), 0.0);
    result.thickness_cv.assign(trace.component_count(), 0.0);
    for (int c = 0; c < trace.component_count(); ++c) {
        auto [begin, end] = trace.component_range(c);
        double mass = 0.0;
        for (int i = begin; i < end; ++i) mass += trace.weight(i) * result.report.h[i];
        result.mass_fraction[c] = mass / result.report.h_mass;
        result.thickness_cv[c] = weighted_cv(trace, result.report.h, begin, end);
    }
    return result;
}

ScalarField solve_dirichlet(const Mesh2D& mesh, const ScalarField& f, double cg_tol) {
    SymmetricSparseMatrix K = assemble_stiffness(mesh);
    Vector b = assemble_load(mesh, f);

    std::vector<char> on_boundary(mesh.vertex_count(), 0);
    for (const auto& e : mesh.boundary_edges()) {
        on_boundary[e.a] = 1;
        on_boundary[e.b] = 1;
    }
    std::vector<int> interior;
    for (int v = 0; v < mesh.vertex_count(); ++v)
        if (!on_boundary[v]) interior.push_back(v);
    if (interior.empty()) throw std::invalid_argument("mesh has no interior vertices");

    Vector b_interior(interior.size());
    for (std::size_t i = 0; i < interior.size(); ++i) b_interior[i] = b[interior[i]];
    Vector u_interior = cg_solve(K.restrict_to(interior), b_interior, cg_tol);

    ScalarField u(mesh.vertex_count(), 0.0);
    for (std::size_t i = 0; i < interior.size(); ++i) u[interior[i]] = u_interior[i];
    return u;
}

std::vector<double> dirichlet_normal_derivative(const Mesh2D& mesh, const BoundaryTrace& trace,
                                                const ScalarField& f, double cg_tol) {
    ScalarField u = solve_dirichlet(mesh, f, cg_tol);
    SymmetricSparseMatrix K = assemble_stiffness(mesh);
    Vector b = assemble_load(mesh, f);
    Vector residual = K * u;
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= b[i];

    std::vector<double> flux(trace.size());
    for (int i = 0; i < trace.size(); ++i)
        flux[i] = residual[trace.vertex(i)] / trace.weight(i);
    return flux;
}

namespace {

// Greedy extraction of well-separated minimizers of the boundary flux.
std::vector<Vec2> flux_minimum_centers(const Mesh2D& mesh, const BoundaryTrace& trace,
                                       const std::vector<double>& flux, double separation) {
    std::vector<int> order(trace.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return flux[a] < flux[b]; });

    double f_min = flux[order.front()];
    double f_max = flux[order.back()];
    double cut = f_min + 0.1 * (f_max - f_min);

    std::vector<Vec2> centers;
    for (int i : order) {
        if (flux[i] > cut) break;
        Vec2 p = mesh.vertices()[trace.vertex(i)];
        bool close = false;
        for (const Vec2& c : centers) close = close || norm(p - c) < separation;
        if (!close) centers.push_back(p);
    }
    return centers;
}

} // namespace

std::vector<ConcentrationRow> concentration_profile(const Mesh2D& mesh, const BoundaryTrace& trace,
                                                    double k, const ScalarField& f,
                                                    const std::vector<double>& m_list,
                                                    std::vector<Vec2> centers, double radius,
                                                    const EnergySolveOptions& opt) {
    for (std::size_t i = 0; i < m_list.size(); ++i) {
        if (m_list[i] <= 0.0) throw std::invalid_argument("concentration masses must be positive");
        if (i > 0 && m_list[i] >= m_list[i - 1])
            throw std::invalid_argument("concentration masses must be strictly decreasing");
    }
    if (centers.empty()) {
        std::vector<double> flux = dirichlet_normal_derivative(mesh, trace, f);
        centers = flux_minimum_centers(mesh, trace, flux, 2.5 * radius);
    }

    std::vector<ConcentrationRow> rows;
    for (double m : m_list) {
        EnergyReport rep = minimize_reduced(mesh, trace, k, m, f, opt);
        ConcentrationRow row;
        row.m = m;
        row.iterations = rep.iterations;
        row.profile.resize(trace.size());
        for (int i = 0; i < trace.size(); ++i) row.profile[i] = rep.h[i] / m;
        row.cv = weighted_cv(trace, row.profile, 0, trace.size());
        double near = 0.0;
        for (int i = 0; i < trace.size(); ++i) {
            Vec2 p = mesh.vertices()[trace.vertex(i)];
            bool in_range = false;
            for (const Vec2& c : centers) in_range = in_range || norm(p - c) <= radius;
            if (in_range) near += trace.weight(i) * row.profile[i];
        }
        row.near_fraction = near;
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace insulopt
