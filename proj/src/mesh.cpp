#include "dfs/mesh.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace dfs::render {

namespace {

[[noreturn]] void parse_error(int line, const std::string& msg) {
    throw std::runtime_error("obj: line " + std::to_string(line) + ": " + msg);
}

double face_area2(const TriangleMesh& m, const std::array<int, 3>& f) {
    Vec3 e1 = m.vertices[f[1]] - m.vertices[f[0]];
    Vec3 e2 = m.vertices[f[2]] - m.vertices[f[0]];
    Vec3 c = cross(e1, e2);
    return dot(c, c);
}

void drop_degenerate_faces(TriangleMesh& mesh) {
    std::vector<std::array<int, 3>> kept;
    kept.reserve(mesh.faces.size());
    for (const auto& f : mesh.faces)
        if (face_area2(mesh, f) > 1e-24) kept.push_back(f);
    mesh.faces = std::move(kept);
}

}  // namespace

void compute_normals(TriangleMesh& mesh) {
    mesh.normals.assign(mesh.vertices.size(), Vec3{});
    for (const auto& f : mesh.faces) {
        Vec3 e1 = mesh.vertices[f[1]] - mesh.vertices[f[0]];
        Vec3 e2 = mesh.vertices[f[2]] - mesh.vertices[f[0]];
        Vec3 n = cross(e1, e2);  // magnitude is twice the area, which weights the average
        for (int i : f) mesh.normals[i] = mesh.normals[i] + n;
    }
    for (auto& n : mesh.normals) {
        double len = norm(n);
        n = len > 0.0 ? n * (1.0 / len) : Vec3{0, 0, 1};
    }
}

TriangleMesh load_obj(const std::string& text) {
    TriangleMesh mesh;
    std::istringstream stream(text);
    std::string line;
    int lineno = 0;
    while (std::getline(stream, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z)) parse_error(lineno, "malformed vertex");
            mesh.vertices.push_back({x, y, z});
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ls >> tok) {
                // take the vertex index before the first '/'
                std::size_t slash = tok.find('/');
                std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
                int i;
                try {
                    std::size_t used;
                    i = std::stoi(head, &used);
                    if (used != head.size()) throw std::invalid_argument("");
                } catch (const std::exception&) {
                    parse_error(lineno, "malformed face index '" + tok + "'");
                }
                int n = static_cast<int>(mesh.vertices.size());
                int resolved = i > 0 ? i - 1 : n + i;  // negative indices are relative
                if (i == 0 || resolved < 0 || resolved >= n)
                    parse_error(lineno, "face index " + std::to_string(i) + " out of range");
                idx.push_back(resolved);
            }
            if (idx.size() < 3) parse_error(lineno, "face needs at least 3 vertices");
            for (std::size_t k = 1; k + 1 < idx.size(); ++k)
                mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
        }
        // everything else (vn, vt, o, g, s, mtllib, usemtl, ...) is ignored
    }
    drop_degenerate_faces(mesh);
    compute_normals(mesh);
    return mesh;
}

TriangleMesh load_obj_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return load_obj(ss.str());
}

TriangleMesh make_cube(double size) {
    if (size <= 0) throw std::invalid_argument("cube: size must be positive");
    double s = size / 2.0;
    TriangleMesh m;
    for (int i = 0; i < 8; ++i)
        m.vertices.push_back({(i & 1) ? s : -s, (i & 2) ? s : -s, (i & 4) ? s : -s});
    // outward-wound quads, split into triangles
    const int quads[6][4] = {
        {0, 2, 3, 1},  // -z
        {4, 5, 7, 6},  // +z
        {0, 1, 5, 4},  // -y
        {2, 6, 7, 3},  // +y
        {0, 4, 6, 2},  // -x
        {1, 3, 7, 5},  // +x
    };
    for (const auto& q : quads) {
        m.faces.push_back({q[0], q[1], q[2]});
        m.faces.push_back({q[0], q[2], q[3]});
    }
    compute_normals(m);
    return m;
}

TriangleMesh make_icosphere(int subdiv, double size) {
    if (subdiv < 0 || subdiv > 4) throw std::invalid_argument("icosphere: subdiv must be in [0,4]");
    if (size <= 0) throw std::invalid_argument("icosphere: size must be positive");
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    TriangleMesh m;
    const double raw[12][3] = {{-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
                               {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
                               {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
    double radius = size / 2.0;
    for (const auto& v : raw) {
        Vec3 p{v[0], v[1], v[2]};
        m.vertices.push_back(normalized(p) * radius);
    }
    m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
               {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
               {3, 8, 9},   {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
    for (int level = 0; level < subdiv; ++level) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            Vec3 p = normalized(m.vertices[a] + m.vertices[b]) * radius;
            m.vertices.push_back(p);
            int idx = static_cast<int>(m.vertices.size()) - 1;
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(m.faces.size() * 4);
        for (const auto& f : m.faces) {
            int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        m.faces = std::move(next);
    }
    compute_normals(m);
    return m;
}

TriangleMesh make_cylinder(int segments, double size) {
    if (segments < 3) throw std::invalid_argument("cylinder: segments must be >= 3");
    if (size <= 0) throw std::invalid_argument("cylinder: size must be positive");
    double r = size / 2.0, h = size / 2.0;
    TriangleMesh m;
    for (int ring = 0; ring < 2; ++ring) {
        double z = ring ? h : -h;
        for (int i = 0; i < segments; ++i) {
            double a = 2.0 * M_PI * i / segments;
            m.vertices.push_back({r * std::cos(a), r * std::sin(a), z});
        }
    }
    int bottom_center = static_cast<int>(m.vertices.size());
    m.vertices.push_back({0, 0, -h});
    int top_center = bottom_center + 1;
    m.vertices.push_back({0, 0, h});
    for (int i = 0; i < segments; ++i) {
        int j = (i + 1) % segments;
        int b0 = i, b1 = j, t0 = segments + i, t1 = segments + j;
        m.faces.push_back({b0, b1, t1});  // side
        m.faces.push_back({b0, t1, t0});
        m.faces.push_back({bottom_center, b1, b0});  // caps face outward
        m.faces.push_back({top_center, t0, t1});
    }
    compute_normals(m);
    return m;
}

TriangleMesh make_primitive(const std::string& kind, int param, double size) {
    if (kind == "cube") return make_cube(size);
    if (kind == "icosphere") return make_icosphere(param, size);
    if (kind == "cylinder") return make_cylinder(param, size);
    throw std::invalid_argument("unknown primitive kind '" + kind + "'");
}

TriangleMesh translated(TriangleMesh mesh, const Vec3& offset) {
    for (auto& v : mesh.vertices) v = v + offset;
    return mesh;
}

TriangleMesh merge(const TriangleMesh& a, const TriangleMesh& b) {
    TriangleMesh m = a;
    int off = static_cast<int>(a.vertices.size());
    m.vertices.insert(m.vertices.end(), b.vertices.begin(), b.vertices.end());
    for (const auto& f : b.faces) m.faces.push_back({f[0] + off, f[1] + off, f[2] + off});
    compute_normals(m);
    return m;
}

}  // namespace dfs::render
