#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "insulopt/runner.hpp"

namespace insulopt {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void export_vtk(const Mesh2D& mesh,
                const std::vector<std::pair<std::string, ScalarField>>& fields,
                const std::string& path) {
    for (const auto& [name, values] : fields) {
        if ((int)values.size() != mesh.vertex_count())
            throw std::invalid_argument("field '" + name + "' length does not match the mesh");
        for (double v : values)
            if (!std::isfinite(v))
                throw std::invalid_argument("field '" + name + "' contains a non-finite value");
    }

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "# vtk DataFile Version 3.0\n";
    out << "insulopt fields\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.vertex_count() << " double\n";
    for (const auto& v : mesh.vertices())
        out << fmt17(v.x) << " " << fmt17(v.y) << " 0\n";
    out << "CELLS " << mesh.triangle_count() << " " << 4 * mesh.triangle_count() << "\n";
    for (const auto& t : mesh.triangles()) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    out << "CELL_TYPES " << mesh.triangle_count() << "\n";
    for (int t = 0; t < mesh.triangle_count(); ++t) out << "5\n";
    if (!fields.empty()) {
        out << "POINT_DATA " << mesh.vertex_count() << "\n";
        for (const auto& [name, values] : fields) {
            out << "SCALARS " << name << " double 1\n";
            out << "LOOKUP_TABLE default\n";
            for (double v : values) out << fmt17(v) << "\n";
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace insulopt
