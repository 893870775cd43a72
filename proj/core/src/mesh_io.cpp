#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>

#include "insulopt/errors.hpp"
#include "insulopt/mesh.hpp"

namespace insulopt {

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct LineReader {
    std::istream& in;
    int line_no = 0;

    // Next non-empty line with comments stripped; false at EOF.
    bool next(std::string& out) {
        std::string raw;
        while (std::getline(in, raw)) {
            ++line_no;
            auto hash = raw.find('#');
            if (hash != std::string::npos) raw.erase(hash);
            auto is_space = [](unsigned char c) { return std::isspace(c); };
            if (std::all_of(raw.begin(), raw.end(), is_space)) continue;
            out = raw;
            return true;
        }
        return false;
    }
};

[[noreturn]] void fail(const LineReader& r, const std::string& what) {
    throw ParseError(what, r.line_no);
}

int expect_section(LineReader& r, const std::string& name) {
    std::string line;
    if (!r.next(line)) fail(r, "expected section " + name);
    std::istringstream ss(line);
    std::string word;
    long count = -1;
    ss >> word >> count;
    std::string rest;
    if (word != name || count < 0 || (ss >> rest))
        fail(r, "expected '" + name + " <count>', got '" + line + "'");
    return static_cast<int>(count);
}

} // namespace

void save_mesh(const Mesh2D& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "# insulopt mesh\n";
    out << "VERTICES " << mesh.vertex_count() << "\n";
    for (const auto& v : mesh.vertices()) out << g17(v.x) << " " << g17(v.y) << "\n";
    out << "TRIANGLES " << mesh.triangle_count() << "\n";
    for (const auto& t : mesh.triangles()) out << t[0] << " " << t[1] << " " << t[2] << "\n";
    out << "BOUNDARY " << mesh.boundary_edges().size() << "\n";
    for (const auto& e : mesh.boundary_edges())
        out << e.a << " " << e.b << " " << e.component << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

Mesh2D load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    LineReader reader{in};
    std::string line;

    const int nv = expect_section(reader, "VERTICES");
    std::vector<Vec2> vertices;
    vertices.reserve(nv);
    for (int i = 0; i < nv; ++i) {
        if (!reader.next(line)) fail(reader, "unexpected end of file in VERTICES");
        std::istringstream ss(line);
        Vec2 v;
        std::string rest;
        if (!(ss >> v.x >> v.y) || (ss >> rest)) fail(reader, "malformed vertex record");
        vertices.push_back(v);
    }

    const int nt = expect_section(reader, "TRIANGLES");
    std::vector<std::array<int, 3>> triangles;
    triangles.reserve(nt);
    for (int i = 0; i < nt; ++i) {
        if (!reader.next(line)) fail(reader, "unexpected end of file in TRIANGLES");
        std::istringstream ss(line);
        std::array<int, 3> t{};
        std::string rest;
        if (!(ss >> t[0] >> t[1] >> t[2]) || (ss >> rest)) fail(reader, "malformed triangle record");
        for (int v : t)
            if (v < 0 || v >= nv)
                fail(reader, "triangle references vertex " + std::to_string(v) +
                                 " outside [0, " + std::to_string(nv) + ")");
        triangles.push_back(t);
    }

    const int nb = expect_section(reader, "BOUNDARY");
    std::set<std::tuple<int, int, int>> declared;
    for (int i = 0; i < nb; ++i) {
        if (!reader.next(line)) fail(reader, "unexpected end of file in BOUNDARY");
        std::istringstream ss(line);
        int a = 0, b = 0, comp = 0;
        std::string rest;
        if (!(ss >> a >> b >> comp) || (ss >> rest)) fail(reader, "malformed boundary record");
        if (a < 0 || a >= nv || b < 0 || b >= nv)
            fail(reader, "boundary edge references vertex outside [0, " + std::to_string(nv) + ")");
        declared.insert({a, b, comp});
    }
    if (reader.next(line)) fail(reader, "trailing content after BOUNDARY section");

    Mesh2D mesh = Mesh2D::from_data(std::move(vertices), std::move(triangles));

    std::set<std::tuple<int, int, int>> computed;
    for (const auto& e : mesh.boundary_edges()) computed.insert({e.a, e.b, e.component});
    if (computed != declared)
        throw MeshError("declared BOUNDARY section disagrees with the mesh connectivity");
    return mesh;
}

} // namespace insulopt
