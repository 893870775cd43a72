#include "insulopt/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace insulopt {

std::vector<double> waterfill_simplex(const std::vector<double>& weights,
                                      const std::vector<double>& scores, double mass,
                                      double floor_value) {
    const std::size_t n = weights.size();
    if (scores.size() != n) throw std::invalid_argument("waterfill_simplex: size mismatch");
    if (mass <= 0.0) throw std::invalid_argument("waterfill_simplex: mass must be positive");
    if (floor_value < 0.0) throw std::invalid_argument("waterfill_simplex: negative floor");

    double total_weight = 0.0, total_score = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (scores[i] < 0.0) throw std::invalid_argument("waterfill_simplex: negative score");
        total_weight += weights[i];
        total_score += weights[i] * scores[i];
    }
    if (floor_value * total_weight >= mass)
        throw std::invalid_argument("waterfill_simplex: floor exceeds the mass budget");

    std::vector<double> h(n, floor_value);
    if (total_score <= 0.0) {
        // All scores vanish: the objective is indifferent, return uniform.
        for (std::size_t i = 0; i < n; ++i) h[i] = mass / total_weight;
        return h;
    }

    // h_i = max(floor, scores_i / mu); shrink the active set until stable.
    std::vector<char> active(n, 1);
    for (;;) {
        double active_score = 0.0, floored_weight = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (active[i])
                active_score += weights[i] * scores[i];
            else
                floored_weight += weights[i];
        }
        double mu = active_score / (mass - floor_value * floored_weight);
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (active[i] && scores[i] / mu < floor_value) {
                active[i] = 0;
                changed = true;
            }
        }
        if (!changed) {
            for (std::size_t i = 0; i < n; ++i)
                h[i] = active[i] ? scores[i] / mu : floor_value;
            return h;
        }
    }
}

ThicknessField ThicknessField::uniform(const BoundaryTrace& trace, double mass) {
    if (mass <= 0.0) throw std::invalid_argument("thickness mass must be positive");
    return ThicknessField(std::vector<double>(trace.size(), mass / trace.perimeter()), mass);
}

ThicknessField ThicknessField::from_values(const BoundaryTrace& trace,
                                           std::vector<double> values) {
    if ((int)values.size() != trace.size())
        throw std::invalid_argument("thickness values must match the boundary trace");
    double mass = 0.0;
    for (int i = 0; i < trace.size(); ++i) {
        if (values[i] < 0.0) throw std::invalid_argument("thickness must be nonnegative");
        mass += trace.weight(i) * values[i];
    }
    return ThicknessField(std::move(values), mass);
}

ThicknessField ThicknessField::proportional_to(const BoundaryTrace& trace,
                                               const std::vector<double>& boundary_u, double mass,
                                               double floor_rel) {
    if ((int)boundary_u.size() != trace.size())
        throw std::invalid_argument("boundary trace values must match the trace");
    if (mass <= 0.0) throw std::invalid_argument("thickness mass must be positive");
    std::vector<double> scores(boundary_u.size());
    for (std::size_t i = 0; i < boundary_u.size(); ++i) scores[i] = std::abs(boundary_u[i]);
    double floor_value = floor_rel * mass / trace.perimeter();
    auto h = waterfill_simplex(trace.weights(), scores, mass, floor_value);
    return ThicknessField(std::move(h), mass);
}

SymmetricSparseMatrix assemble_stiffness(const Mesh2D& mesh) {
    std::vector<Triplet> entries;
    entries.reserve(9 * mesh.triangle_count());
    const auto& vx = mesh.vertices();
    for (const auto& t : mesh.triangles()) {
        Vec2 p0 = vx[t[0]], p1 = vx[t[1]], p2 = vx[t[2]];
        double twoA = cross(p1 - p0, p2 - p0);
        double area = 0.5 * twoA;
        // Constant P1 gradients: grad phi_i = (b_i, c_i) / (2A).
        double b[3] = {p1.y - p2.y, p2.y - p0.y, p0.y - p1.y};
        double c[3] = {p2.x - p1.x, p0.x - p2.x, p1.x - p0.x};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                entries.push_back(
                    {t[i], t[j], (b[i] * b[j] + c[i] * c[j]) / (4.0 * area)});
    }
    return SymmetricSparseMatrix::from_triplets(mesh.vertex_count(), std::move(entries));
}

SymmetricSparseMatrix assemble_mass(const Mesh2D& mesh) {
    std::vector<Triplet> entries;
    entries.reserve(9 * mesh.triangle_count());
    for (int ti = 0; ti < mesh.triangle_count(); ++ti) {
        const auto& t = mesh.triangles()[ti];
        double area = mesh.triangle_area(ti);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                entries.push_back({t[i], t[j], area / (i == j ? 6.0 : 12.0)});
    }
    return SymmetricSparseMatrix::from_triplets(mesh.vertex_count(), std::move(entries));
}

SymmetricSparseMatrix assemble_robin_boundary(const Mesh2D& mesh, const BoundaryTrace& trace,
                                              const ThicknessField& h, RobinConfig robin) {
    if (robin.k <= 0.0) throw std::invalid_argument("Robin ratio k must be positive");
    if (h.size() != trace.size())
        throw std::invalid_argument("thickness field does not match the boundary trace");
    Vector diag(mesh.vertex_count(), 0.0);
    for (int i = 0; i < trace.size(); ++i) {
        if (h.value(i) <= 0.0)
            throw std::invalid_argument("thickness must be strictly positive on the boundary");
        diag[trace.vertex(i)] = trace.weight(i) / (robin.k * h.value(i));
    }
    return SymmetricSparseMatrix::diagonal(std::move(diag));
}

Vector assemble_load(const Mesh2D& mesh, const ScalarField& f) {
    if ((int)f.size() != mesh.vertex_count())
        throw std::invalid_argument("load field length must match the vertex count");
    Vector b(mesh.vertex_count(), 0.0);
    for (int ti = 0; ti < mesh.triangle_count(); ++ti) {
        const auto& t = mesh.triangles()[ti];
        double area = mesh.triangle_area(ti);
        for (int i = 0; i < 3; ++i) {
            double s = 2.0 * f[t[i]] + f[t[(i + 1) % 3]] + f[t[(i + 2) % 3]];
            b[t[i]] += area * s / 12.0;
        }
    }
    return b;
}

double boundary_abs_integral(const BoundaryTrace& trace, const ScalarField& u) {
    if ((int)u.size() != trace.mesh_vertex_count())
        throw std::invalid_argument("field length does not match the mesh vertex count");
    double s = 0.0;
    for (int i = 0; i < trace.size(); ++i) s += trace.weight(i) * std::abs(u[trace.vertex(i)]);
    return s;
}

double weighted_cv(const BoundaryTrace& trace, const std::vector<double>& values, int begin,
                   int end) {
    double w_sum = 0.0, mean = 0.0, scale = 0.0;
    for (int i = begin; i < end; ++i) {
        w_sum += trace.weight(i);
        mean += trace.weight(i) * std::abs(values[i]);
        scale = std::max(scale, std::abs(values[i]));
    }
    mean /= w_sum;
    if (mean <= 1e-14 * std::max(scale, 1.0)) return 1e30;
    double var = 0.0;
    for (int i = begin; i < end; ++i) {
        double d = std::abs(values[i]) - mean;
        var += trace.weight(i) * d * d;
    }
    return std::sqrt(var / w_sum) / mean;
}

} // namespace insulopt
