#include "insulopt/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "insulopt/errors.hpp"

namespace insulopt {

namespace {

double signed_area(Vec2 a, Vec2 b, Vec2 c) { return 0.5 * cross(b - a, c - a); }

// Union-find over vertex indices.
class DisjointSets {
public:
    explicit DisjointSets(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    int find(int v) {
        while (parent_[v] != v) {
            parent_[v] = parent_[parent_[v]];
            v = parent_[v];
        }
        return v;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<int> parent_;
};

} // namespace

double Mesh2D::triangle_area(int t) const {
    const auto& tri = triangles_[t];
    return signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
}

double Mesh2D::area() const {
    double a = 0.0;
    for (int t = 0; t < triangle_count(); ++t) a += triangle_area(t);
    return a;
}

double Mesh2D::perimeter() const {
    double p = 0.0;
    for (const auto& e : boundary_edges_) p += norm(vertices_[e.b] - vertices_[e.a]);
    return p;
}

Mesh2D Mesh2D::from_data(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
                         std::vector<BoundaryCircle> circles) {
    Mesh2D mesh;
    mesh.vertices_ = std::move(vertices);
    mesh.triangles_ = std::move(triangles);
    mesh.circles_ = std::move(circles);
    mesh.finalize();
    return mesh;
}

void Mesh2D::finalize() {
    const int nv = vertex_count();
    if (nv < 3 || triangles_.empty()) throw MeshError("mesh needs at least one triangle");

    std::vector<char> used(nv, 0);
    for (int t = 0; t < triangle_count(); ++t) {
        for (int v : triangles_[t]) {
            if (v < 0 || v >= nv)
                throw MeshError("triangle " + std::to_string(t) + " references vertex " +
                                std::to_string(v) + " out of range");
            used[v] = 1;
        }
        if (triangle_area(t) <= 0.0)
            throw MeshError("triangle " + std::to_string(t) + " has nonpositive area");
    }
    for (int v = 0; v < nv; ++v)
        if (!used[v]) throw MeshError("vertex " + std::to_string(v) + " belongs to no triangle");

    // Boundary edges: directed edges of CCW triangles whose reverse never occurs.
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& tri : triangles_) {
        for (int e = 0; e < 3; ++e) {
            int a = tri[e], b = tri[(e + 1) % 3];
            auto key = std::minmax(a, b);
            edge_count[{key.first, key.second}] += 1;
        }
    }

    // Connected components via shared vertices.
    DisjointSets sets(nv);
    for (const auto& tri : triangles_) {
        sets.unite(tri[0], tri[1]);
        sets.unite(tri[0], tri[2]);
    }
    component_of_vertex_.assign(nv, -1);
    std::map<int, int> root_to_component;
    for (int v = 0; v < nv; ++v) {
        int root = sets.find(v);
        auto [it, inserted] = root_to_component.try_emplace(root, (int)root_to_component.size());
        component_of_vertex_[v] = it->second;
    }
    component_count_ = static_cast<int>(root_to_component.size());

    boundary_edges_.clear();
    std::vector<int> boundary_degree(nv, 0);
    for (const auto& tri : triangles_) {
        for (int e = 0; e < 3; ++e) {
            int a = tri[e], b = tri[(e + 1) % 3];
            auto key = std::minmax(a, b);
            if (edge_count[{key.first, key.second}] == 1) {
                Vec2 d = vertices_[b] - vertices_[a];
                double len = norm(d);
                if (len <= 0.0) throw MeshError("degenerate boundary edge");
                // Interior on the left of a -> b; outward normal is the right normal.
                BoundaryEdge be{a, b, component_of_vertex_[a], Vec2{d.y / len, -d.x / len}};
                boundary_edges_.push_back(be);
                boundary_degree[a] += 1;
                boundary_degree[b] += 1;
            } else if (edge_count[{key.first, key.second}] > 2) {
                throw MeshError("non-manifold edge shared by more than two triangles");
            }
        }
    }
    if (boundary_edges_.empty()) throw MeshError("mesh has no boundary");
    for (int v = 0; v < nv; ++v)
        if (boundary_degree[v] != 0 && boundary_degree[v] != 2)
            throw MeshError("boundary is not a set of closed loops at vertex " +
                            std::to_string(v));

    for (const auto& c : circles_)
        if (c.component < 0 || c.component >= component_count_ || c.radius <= 0.0)
            throw MeshError("invalid boundary circle metadata");
}

BoundaryTrace::BoundaryTrace(const Mesh2D& mesh) : mesh_vertex_count_(mesh.vertex_count()) {
    const auto& edges = mesh.boundary_edges();
    std::map<int, std::pair<int, double>> next; // vertex -> (successor, edge length)
    for (const auto& e : edges) {
        double len = norm(mesh.vertices()[e.b] - mesh.vertices()[e.a]);
        next[e.a] = {e.b, len};
    }

    // Loops keyed by component id, each starting at its smallest vertex.
    std::map<int, int> loop_start; // component -> smallest boundary vertex
    for (const auto& e : edges) {
        auto it = loop_start.find(e.component);
        if (it == loop_start.end() || e.a < it->second) loop_start[e.component] = e.a;
    }

    perimeter_.assign(loop_start.size(), 0.0);
    for (const auto& [comp, start] : loop_start) {
        int begin = size();
        int v = start;
        double s = 0.0;
        do {
            auto [succ, len] = next.at(v);
            vertex_.push_back(v);
            component_.push_back(comp);
            arclength_.push_back(s);
            s += len;
            v = succ;
        } while (v != start);
        ranges_.emplace_back(begin, size());
        perimeter_[comp] = s;
        total_perimeter_ += s;

        // Lumped weight: half the sum of the two adjacent edge lengths.
        int count = size() - begin;
        for (int i = 0; i < count; ++i) {
            int cur = vertex_[begin + i];
            int prev = vertex_[begin + (i + count - 1) % count];
            weight_.push_back(0.5 * (next.at(prev).second + next.at(cur).second));
        }
    }
}

std::vector<double> BoundaryTrace::gather(const std::vector<double>& full) const {
    if ((int)full.size() != mesh_vertex_count_)
        throw std::invalid_argument("field length does not match the mesh vertex count");
    std::vector<double> out(vertex_.size());
    for (std::size_t i = 0; i < vertex_.size(); ++i) out[i] = full[vertex_[i]];
    return out;
}

Mesh2D generate_square(int n) {
    if (n < 1) throw std::invalid_argument("square subdivisions must be >= 1");
    const int stride = n + 1;
    std::vector<Vec2> vertices;
    vertices.reserve(stride * stride);
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});

    std::vector<std::array<int, 3>> triangles;
    triangles.reserve(2 * n * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            int v00 = j * stride + i;
            int v10 = v00 + 1;
            int v01 = v00 + stride;
            int v11 = v01 + 1;
            triangles.push_back({v00, v10, v11});
            triangles.push_back({v00, v11, v01});
        }
    }
    return Mesh2D::from_data(std::move(vertices), std::move(triangles));
}

namespace {

// Base hexagon: center plus six boundary vertices on the circle.
Mesh2D disc_level1(Vec2 center, double radius) {
    std::vector<Vec2> vertices{center};
    for (int i = 0; i < 6; ++i) {
        double theta = 2.0 * M_PI * i / 6.0;
        vertices.push_back({center.x + radius * std::cos(theta),
                            center.y + radius * std::sin(theta)});
    }
    std::vector<std::array<int, 3>> triangles;
    for (int i = 0; i < 6; ++i) triangles.push_back({0, 1 + i, 1 + (i + 1) % 6});
    return Mesh2D::from_data(std::move(vertices), std::move(triangles),
                             {BoundaryCircle{center, radius, 0}});
}

} // namespace

Mesh2D generate_disc(double radius, int level) {
    if (radius <= 0.0) throw std::invalid_argument("disc radius must be positive");
    if (level < 1) throw std::invalid_argument("disc level must be >= 1");
    Mesh2D mesh = disc_level1({0.0, 0.0}, radius);
    for (int l = 1; l < level; ++l) mesh = refine(mesh);
    return mesh;
}

Mesh2D generate_two_discs(double r1, double r2, double gap, int level) {
    if (r1 <= 0.0 || r2 <= 0.0) throw std::invalid_argument("disc radii must be positive");
    if (gap <= 0.0) throw std::invalid_argument("two-disc gap must be positive (discs overlap)");
    Mesh2D a = generate_disc(r1, level);
    Mesh2D b = generate_disc(r2, level);
    Vec2 shift{r1 + gap + r2, 0.0};

    std::vector<Vec2> vertices = a.vertices();
    std::vector<std::array<int, 3>> triangles = a.triangles();
    const int offset = a.vertex_count();
    for (const auto& v : b.vertices()) vertices.push_back(v + shift);
    for (const auto& t : b.triangles())
        triangles.push_back({t[0] + offset, t[1] + offset, t[2] + offset});

    std::vector<BoundaryCircle> circles{BoundaryCircle{{0.0, 0.0}, r1, 0},
                                        BoundaryCircle{shift, r2, 1}};
    return Mesh2D::from_data(std::move(vertices), std::move(triangles), std::move(circles));
}

Mesh2D refine(const Mesh2D& mesh) {
    const auto& old_vertices = mesh.vertices();
    std::vector<Vec2> vertices = old_vertices;
    std::map<std::pair<int, int>, int> midpoint; // undirected edge -> new vertex

    // Circle metadata per component for boundary projection.
    std::vector<const BoundaryCircle*> circle_of(mesh.component_count(), nullptr);
    for (const auto& c : mesh.circles()) circle_of[c.component] = &c;
    std::map<std::pair<int, int>, int> boundary_component;
    for (const auto& e : mesh.boundary_edges()) {
        auto key = std::minmax(e.a, e.b);
        boundary_component[{key.first, key.second}] = e.component;
    }

    auto midpoint_index = [&](int a, int b) {
        auto key = std::minmax(a, b);
        auto it = midpoint.find({key.first, key.second});
        if (it != midpoint.end()) return it->second;
        Vec2 p = 0.5 * (old_vertices[a] + old_vertices[b]);
        auto bc = boundary_component.find({key.first, key.second});
        if (bc != boundary_component.end() && circle_of[bc->second] != nullptr) {
            const BoundaryCircle& c = *circle_of[bc->second];
            Vec2 d = p - c.center;
            double len = norm(d);
            if (len > 0.0) p = c.center + (c.radius / len) * d;
        }
        int idx = static_cast<int>(vertices.size());
        vertices.push_back(p);
        midpoint[{key.first, key.second}] = idx;
        return idx;
    };

    std::vector<std::array<int, 3>> triangles;
    triangles.reserve(4 * mesh.triangle_count());
    for (const auto& t : mesh.triangles()) {
        int m01 = midpoint_index(t[0], t[1]);
        int m12 = midpoint_index(t[1], t[2]);
        int m20 = midpoint_index(t[2], t[0]);
        triangles.push_back({t[0], m01, m20});
        triangles.push_back({m01, t[1], m12});
        triangles.push_back({m20, m12, t[2]});
        triangles.push_back({m01, m12, m20});
    }
    return Mesh2D::from_data(std::move(vertices), std::move(triangles), mesh.circles());
}

} // namespace insulopt
