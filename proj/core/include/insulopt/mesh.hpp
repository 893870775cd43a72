#pragma once

#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace insulopt {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

// Oriented boundary edge: (a -> b) runs counterclockwise around the domain,
// so the interior lies on its left and `normal` points outward.
struct BoundaryEdge {
    int a = -1;
    int b = -1;
    int component = -1;
    Vec2 normal;
};

// Generator metadata for circular boundary components. refine() projects new
// boundary midpoints of such components back onto the circle.
struct BoundaryCircle {
    Vec2 center;
    double radius = 0.0;
    int component = -1;
};

// Conforming triangulation of a plane domain. Immutable after construction;
// all derived data (boundary edges, components) is built and validated once.
class Mesh2D {
public:
    Mesh2D() = default;

    // Validates: positive triangle areas, vertex indices in range, every
    // vertex used, boundary edges form closed loops. Throws MeshError.
    static Mesh2D from_data(std::vector<Vec2> vertices,
                            std::vector<std::array<int, 3>> triangles,
                            std::vector<BoundaryCircle> circles = {});

    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
    const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }
    const std::vector<int>& component_of_vertex() const { return component_of_vertex_; }
    const std::vector<BoundaryCircle>& circles() const { return circles_; }

    int vertex_count() const { return static_cast<int>(vertices_.size()); }
    int triangle_count() const { return static_cast<int>(triangles_.size()); }
    int component_count() const { return component_count_; }

    double triangle_area(int t) const;
    double area() const;
    double perimeter() const;

private:
    void finalize();

    std::vector<Vec2> vertices_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<BoundaryEdge> boundary_edges_;
    std::vector<int> component_of_vertex_;
    std::vector<BoundaryCircle> circles_;
    int component_count_ = 0;
};

// Boundary vertices in loop order (components ascending, each loop starting
// at its smallest vertex index and walking counterclockwise), with the lumped
// arclength weight of each vertex: half the sum of its two edge lengths.
class BoundaryTrace {
public:
    explicit BoundaryTrace(const Mesh2D& mesh);

    int size() const { return static_cast<int>(vertex_.size()); }
    int vertex(int i) const { return vertex_[i]; }
    double weight(int i) const { return weight_[i]; }
    int component(int i) const { return component_[i]; }
    // Cumulative arclength from the loop start to vertex i (first vertex: 0).
    double arclength(int i) const { return arclength_[i]; }

    int component_count() const { return static_cast<int>(ranges_.size()); }
    // Half-open index range [begin, end) of a component's vertices.
    std::pair<int, int> component_range(int c) const { return ranges_[c]; }

    double perimeter() const { return total_perimeter_; }
    double component_perimeter(int c) const { return perimeter_[c]; }
    int mesh_vertex_count() const { return mesh_vertex_count_; }

    const std::vector<int>& vertices() const { return vertex_; }
    const std::vector<double>& weights() const { return weight_; }

    // Values of a per-mesh-vertex field at the boundary vertices, trace order.
    std::vector<double> gather(const std::vector<double>& full) const;

private:
    std::vector<int> vertex_;
    std::vector<double> weight_;
    std::vector<int> component_;
    std::vector<double> arclength_;
    std::vector<std::pair<int, int>> ranges_;
    std::vector<double> perimeter_;
    double total_perimeter_ = 0.0;
    int mesh_vertex_count_ = 0;
};

// Benchmark domains.
Mesh2D generate_square(int n);
Mesh2D generate_disc(double radius, int level);
Mesh2D generate_two_discs(double r1, double r2, double gap, int level);

// Uniform red refinement (each triangle into 4 similar children); boundary
// midpoints of components with circle metadata are projected to the circle.
Mesh2D refine(const Mesh2D& mesh);

// Plain-text mesh file, sections VERTICES / TRIANGLES / BOUNDARY, '#' comments.
// Coordinates are written with 17 significant digits (lossless round trip).
void save_mesh(const Mesh2D& mesh, const std::string& path);
Mesh2D load_mesh(const std::string& path);

} // namespace insulopt
