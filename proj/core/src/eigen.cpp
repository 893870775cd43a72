#include "insulopt/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "insulopt/errors.hpp"

namespace insulopt {

namespace {

double uniform01(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z = z ^ (z >> 31);
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

void m_normalize(const SymmetricSparseMatrix& M, Vector& v) {
    double n = std::sqrt(M.quadratic_form(v));
    if (!(n > 0.0)) throw SolverError("cannot normalize a zero field");
    for (double& e : v) e /= n;
}

// Auxiliary objective u'Ku + (1/(km)) (sum w|u|)^2 for an M-normalized u.
double auxiliary_objective(const SymmetricSparseMatrix& K, const BoundaryTrace& trace, double k,
                           double m, const Vector& u) {
    double bt = boundary_abs_integral(trace, u);
    return K.quadratic_form(u) + bt * bt / (k * m);
}

std::vector<int> interior_vertices(const Mesh2D& mesh) {
    std::vector<char> on_boundary(mesh.vertex_count(), 0);
    for (const auto& e : mesh.boundary_edges()) {
        on_boundary[e.a] = 1;
        on_boundary[e.b] = 1;
    }
    std::vector<int> interior;
    for (int v = 0; v < mesh.vertex_count(); ++v)
        if (!on_boundary[v]) interior.push_back(v);
    return interior;
}

// Dirichlet ground state scattered back to the full vertex set.
std::pair<double, Vector> dirichlet_pair(const Mesh2D& mesh, const SymmetricSparseMatrix& K,
                                         const SymmetricSparseMatrix& M, double tol) {
    std::vector<int> interior = interior_vertices(mesh);
    if (interior.empty()) throw std::invalid_argument("mesh has no interior vertices");
    EigOptions opt;
    opt.tol = tol;
    EigPair pair = eig_smallest(K.restrict_to(interior), M.restrict_to(interior), {}, opt);
    Vector full(mesh.vertex_count(), 0.0);
    for (std::size_t i = 0; i < interior.size(); ++i) full[interior[i]] = pair.vector[i];
    return {pair.value, std::move(full)};
}

struct RestartOutcome {
    double lambda = std::numeric_limits<double>::quiet_NaN();
    Vector u;
    int iterations = 0;
    std::vector<double> trace_values;
    double cv = 0.0;
    bool degenerate = false;
    bool ok = false;
};

} // namespace

std::pair<double, ScalarField> robin_eig(const Mesh2D& mesh, const BoundaryTrace& trace,
                                         const ThicknessField& h, RobinConfig robin, double tol,
                                         const ScalarField* warm) {
    SymmetricSparseMatrix K = assemble_stiffness(mesh);
    SymmetricSparseMatrix B = assemble_robin_boundary(mesh, trace, h, robin);
    SymmetricSparseMatrix A = SymmetricSparseMatrix::weighted_sum(K, 1.0, B, 1.0);
    SymmetricSparseMatrix M = assemble_mass(mesh);
    EigOptions opt;
    opt.tol = tol;
    opt.initial = warm;
    EigPair pair = eig_smallest(A, M, {}, opt);
    // Fix the sign: nonnegative M-weighted mean.
    Vector ones(mesh.vertex_count(), 1.0);
    if (dot(M * pair.vector, ones) < 0.0)
        for (double& v : pair.vector) v = -v;
    return {pair.value, std::move(pair.vector)};
}

EigenReport minimize_auxiliary(const Mesh2D& mesh, const BoundaryTrace& trace, double k, double m,
                               const EigenSolveOptions& opt) {
    if (m <= 0.0) throw std::invalid_argument("m must be positive");
    if (k <= 0.0) throw std::invalid_argument("k must be positive");
    if (opt.restarts < 1) throw std::invalid_argument("restarts must be >= 1");

    const SymmetricSparseMatrix K = assemble_stiffness(mesh);
    const SymmetricSparseMatrix M = assemble_mass(mesh);
    const RobinConfig robin{k};
    const int nv = mesh.vertex_count();
    const bool disc_like = !mesh.circles().empty();

    // Angle of a vertex about its component's circle center (disc-like only).
    std::vector<const BoundaryCircle*> circle_of(mesh.component_count(), nullptr);
    for (const auto& c : mesh.circles()) circle_of[c.component] = &c;
    auto angular_start = [&](int mode) {
        Vector u(nv, 1.0);
        for (int v = 0; v < nv; ++v) {
            const BoundaryCircle* c = circle_of[mesh.component_of_vertex()[v]];
            Vec2 center = c ? c->center : Vec2{0.0, 0.0};
            double theta = std::atan2(mesh.vertices()[v].y - center.y,
                                      mesh.vertices()[v].x - center.x);
            u[v] += std::cos(mode * theta);
        }
        return u;
    };

    auto make_start = [&](int r) {
        if (r == 0) return Vector(nv, 1.0);
        if (disc_like && (r == 1 || r == 2)) return angular_start(r);
        Vector u(nv, 1.0);
        std::uint64_t state = opt.seed * 0x100000001b3ull + 0x9e37u + r;
        for (double& e : u) e += 2.0 * uniform01(state) - 1.0;
        return u;
    };

    auto run_restart = [&](int r) {
        RestartOutcome out;
        Vector u = make_start(r);
        m_normalize(M, u);

        double lambda_prev = 0.0;
        double objective_prev = auxiliary_objective(K, trace, k, m, u);
        out.trace_values.push_back(objective_prev);

        for (int it = 0; it < opt.max_outer; ++it) {
            std::vector<double> bu = trace.gather(u);
            double abs_trace = 0.0;
            for (int i = 0; i < trace.size(); ++i)
                abs_trace += trace.weight(i) * std::abs(bu[i]);
            double u_scale = 0.0;
            for (double v : u) u_scale = std::max(u_scale, std::abs(v));
            if (abs_trace <= 1e-14 * std::max(1.0, u_scale) * trace.perimeter()) {
                auto [lam, vec] = dirichlet_pair(mesh, K, M, opt.eig_tol);
                out.u = std::move(vec);
                out.lambda = lam;
                out.degenerate = true;
                out.iterations = it + 1;
                out.ok = true;
                break;
            }

            ThicknessField h = ThicknessField::proportional_to(trace, bu, m, opt.floor_rel);
            SymmetricSparseMatrix A = SymmetricSparseMatrix::weighted_sum(
                K, 1.0, assemble_robin_boundary(mesh, trace, h, robin), 1.0);
            EigOptions eopt;
            eopt.tol = opt.eig_tol;
            eopt.max_iter = opt.eig_max_iter;
            eopt.initial = &u;
            eopt.seed = opt.seed + 77777u * (r + 1);
            EigPair pair = eig_smallest(A, M, {}, eopt);

            Vector v = std::move(pair.vector);
            Vector ones(nv, 1.0);
            if (dot(M * v, ones) < 0.0)
                for (double& e : v) e = -e;

            // Nodal absolute value can only raise the stiffness term; keep the
            // signed eigenfunction when it does (the boundary term is unchanged).
            Vector w(nv);
            for (int i = 0; i < nv; ++i) w[i] = std::abs(v[i]);
            m_normalize(M, w);
            if (K.quadratic_form(w) <= K.quadratic_form(v) * (1.0 + 1e-14))
                u = std::move(w);
            else
                u = std::move(v);

            double objective = auxiliary_objective(K, trace, k, m, u);
            out.trace_values.push_back(objective);
            out.iterations = it + 1;

            double change = std::abs(pair.value - lambda_prev) /
                            std::max(std::abs(pair.value), 1e-300);
            if (it > 0 && change < opt.tol) {
                out.ok = true;
                break;
            }
            lambda_prev = pair.value;
        }

        if (!out.degenerate) {
            // Report the nonnegative representative and its exact objective.
            out.u = u;
            for (double& e : out.u) e = std::abs(e);
            m_normalize(M, out.u);
            out.lambda = auxiliary_objective(K, trace, k, m, out.u);
        }
        out.cv = weighted_cv(trace, trace.gather(out.u), 0, trace.size());
        return out;
    };

    EigenReport report;
    report.restart_lambdas.assign(opt.restarts, std::numeric_limits<double>::quiet_NaN());
    std::vector<RestartOutcome> outcomes(opt.restarts);
    std::string first_error;
    for (int r = 0; r < opt.restarts; ++r) {
        try {
            outcomes[r] = run_restart(r);
            if (outcomes[r].ok) report.restart_lambdas[r] = outcomes[r].lambda;
        } catch (const SolverError& e) {
            if (first_error.empty()) first_error = e.what();
        }
    }
    bool any_ok = false;
    for (const auto& o : outcomes) any_ok = any_ok || o.ok;
    if (!any_ok)
        throw SolverError("minimize_auxiliary: every restart failed" +
                          (first_error.empty() ? std::string(" to converge")
                                               : "; first error: " + first_error));

    int best = -1;
    for (int r = 0; r < opt.restarts; ++r) {
        if (!outcomes[r].ok) continue;
        if (best < 0) {
            best = r;
            continue;
        }
        double tie = 1e-10 * std::max(1.0, std::abs(outcomes[best].lambda));
        if (outcomes[r].lambda < outcomes[best].lambda - tie)
            best = r;
        else if (std::abs(outcomes[r].lambda - outcomes[best].lambda) <= tie &&
                 outcomes[r].cv < outcomes[best].cv)
            best = r;
    }

    RestartOutcome& chosen = outcomes[best];
    report.lambda = chosen.lambda;
    report.u = std::move(chosen.u);
    report.best_restart = best;
    report.symmetry_metric = chosen.cv;
    report.iterations = chosen.iterations;
    report.objective_trace = std::move(chosen.trace_values);
    report.converged = chosen.ok;
    report.degenerate_boundary = chosen.degenerate;

    if (chosen.degenerate) {
        // Any admissible thickness is optimal; report the uniform one.
        ThicknessField h = ThicknessField::uniform(trace, m);
        report.h = h.values();
        report.h_mass = h.mass();
    } else {
        ThicknessField h =
            ThicknessField::proportional_to(trace, trace.gather(report.u), m, opt.floor_rel);
        report.h = h.values();
        report.h_mass = h.mass();
    }
    return report;
}

double neumann_lambda(const Mesh2D& mesh, double tol) {
    if (mesh.component_count() != 1)
        throw std::invalid_argument(
            "neumann_lambda requires a connected mesh (disconnected domains have Lambda = 0)");
    SymmetricSparseMatrix K = assemble_stiffness(mesh);
    SymmetricSparseMatrix M = assemble_mass(mesh);
    Vector ones(mesh.vertex_count(), 1.0);
    EigOptions opt;
    opt.tol = tol;
    std::vector<Vector> deflation{ones};
    return eig_smallest(K, M, deflation, opt).value;
}

double dirichlet_lambda(const Mesh2D& mesh, double tol) {
    SymmetricSparseMatrix K = assemble_stiffness(mesh);
    SymmetricSparseMatrix M = assemble_mass(mesh);
    return dirichlet_pair(mesh, K, M, tol).first;
}

namespace {

// P1 matrices on the interval (0, L).
std::pair<SymmetricSparseMatrix, SymmetricSparseMatrix> interval_pencil(double L, int n) {
    double dx = L / (n - 1);
    std::vector<Triplet> ks, ms;
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
    return {SymmetricSparseMatrix::from_triplets(n, std::move(ks)),
            SymmetricSparseMatrix::from_triplets(n, std::move(ms))};
}

} // namespace

double lambda_1d_fixed(double k, double h0, double hL, double L, int n) {
    if (L <= 0.0) throw std::invalid_argument("interval length must be positive");
    if (n < 10) throw std::invalid_argument("need at least 10 grid points");
    if (k <= 0.0 || h0 <= 0.0 || hL <= 0.0)
        throw std::invalid_argument("k and endpoint thicknesses must be positive");
    auto [K, M] = interval_pencil(L, n);
    Vector diag(n, 0.0);
    diag[0] = 1.0 / (k * h0);
    diag[n - 1] = 1.0 / (k * hL);
    SymmetricSparseMatrix A =
        SymmetricSparseMatrix::weighted_sum(K, 1.0, SymmetricSparseMatrix::diagonal(diag), 1.0);
    return eig_smallest(A, M, {}).value;
}

double lambda_1d(double k, double m, double L, int n, double tol, int max_outer) {
    if (L <= 0.0) throw std::invalid_argument("interval length must be positive");
    if (n < 10) throw std::invalid_argument("need at least 10 grid points");
    if (k <= 0.0) throw std::invalid_argument("k must be positive");
    if (m <= 0.0) throw std::invalid_argument("m must be positive");

    auto [K, M] = interval_pencil(L, n);
    const std::vector<double> weights{1.0, 1.0};
    const double floor_value = 1e-8 * m / 2.0;

    Vector u(n, 1.0);
    m_normalize(M, u);
    double lambda_prev = 0.0;
    double lambda = 0.0;
    for (int it = 0; it < max_outer; ++it) {
        std::vector<double> h = waterfill_simplex(
            weights, {std::abs(u.front()), std::abs(u.back())}, m, floor_value);
        Vector diag(n, 0.0);
        diag[0] = 1.0 / (k * h[0]);
        diag[n - 1] = 1.0 / (k * h[1]);
        SymmetricSparseMatrix A = SymmetricSparseMatrix::weighted_sum(
            K, 1.0, SymmetricSparseMatrix::diagonal(diag), 1.0);
        EigOptions opt;
        opt.initial = &u;
        EigPair pair = eig_smallest(A, M, {}, opt);
        u = std::move(pair.vector);
        lambda = pair.value;
        if (it > 0 &&
            std::abs(lambda - lambda_prev) <= tol * std::max(std::abs(lambda), 1e-300))
            break;
        lambda_prev = lambda;
    }
    // Objective of the final iterate: u'Ku + (1/(km)) (|u(0)| + |u(L)|)^2.
    double bt = std::abs(u.front()) + std::abs(u.back());
    return K.quadratic_form(u) + bt * bt / (k * m);
}

} // namespace insulopt
