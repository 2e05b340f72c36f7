#include "qc3d/mesh.hpp"

#include "qc3d/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace qc3d {

namespace {

double signed_volume(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3) {
    return dot(cross(p1 - p0, p2 - p0), p3 - p0) / 6.0;
}

}  // namespace

TetMesh TetMesh::build(std::vector<Vec3> vertices, std::vector<std::array<int, 4>> tets,
                       std::vector<int>* repaired) {
    TetMesh mesh;
    mesh.vertices_ = std::move(vertices);
    mesh.tets_ = std::move(tets);

    const int n = mesh.vertex_count();
    const int m = mesh.tet_count();
    if (n < 4) throw Error(ErrorCode::invalid_argument, "mesh needs at least 4 vertices");
    if (m < 1) throw Error(ErrorCode::invalid_argument, "mesh needs at least 1 tetrahedron");

    mesh.bbox_min_ = mesh.bbox_max_ = mesh.vertices_[0];
    for (const Vec3& p : mesh.vertices_) {
        for (int a = 0; a < 3; ++a) {
            mesh.bbox_min_[a] = std::min(mesh.bbox_min_[a], p[a]);
            mesh.bbox_max_[a] = std::max(mesh.bbox_max_[a], p[a]);
        }
    }
    const double diag = mesh.bbox_diagonal();
    // Everything downstream divides by det(X) = 6 Vol(T); treat slivers below
    // this volume as corrupt input rather than letting them poison the solves.
    const double vol_tol = 1e-14 * diag * diag * diag;

    mesh.volume_.resize(static_cast<std::size_t>(m));
    mesh.face_area_.resize(static_cast<std::size_t>(m));
    mesh.face_normal_.resize(static_cast<std::size_t>(m));
    mesh.incident_.assign(static_cast<std::size_t>(n), {});

    for (int t = 0; t < m; ++t) {
        auto& tet = mesh.tets_[static_cast<std::size_t>(t)];
        int distinct[4];
        std::copy(tet.begin(), tet.end(), distinct);
        std::sort(distinct, distinct + 4);
        for (int k = 0; k < 4; ++k) {
            if (tet[static_cast<std::size_t>(k)] < 0 || tet[static_cast<std::size_t>(k)] >= n)
                throw Error(ErrorCode::invalid_argument,
                            "tet " + std::to_string(t) + ": vertex index " +
                                std::to_string(tet[static_cast<std::size_t>(k)]) + " out of range [0, " +
                                std::to_string(n) + ")");
            if (k > 0 && distinct[k] == distinct[k - 1])
                throw Error(ErrorCode::invalid_argument,
                            "tet " + std::to_string(t) + ": repeated vertex index " + std::to_string(distinct[k]));
        }

        double vol = signed_volume(mesh.vertices_[static_cast<std::size_t>(tet[0])],
                                   mesh.vertices_[static_cast<std::size_t>(tet[1])],
                                   mesh.vertices_[static_cast<std::size_t>(tet[2])],
                                   mesh.vertices_[static_cast<std::size_t>(tet[3])]);
        if (vol < 0.0) {
            std::swap(tet[1], tet[2]);  // transposition flips the orientation
            vol = -vol;
            if (repaired) repaired->push_back(t);
        }
        if (vol <= vol_tol)
            throw Error(ErrorCode::invalid_argument,
                        "tet " + std::to_string(t) + ": degenerate (|volume| = " + format_double(vol) +
                            " <= " + format_double(vol_tol) + ")");
        mesh.volume_[static_cast<std::size_t>(t)] = vol;

        // Outward face normals. For local vertex k the opposite face is the
        // remaining triple ordered so that the cross product points away from
        // p_k (even permutations of (0,1,2,3) starting at k).
        static const int kFace[4][3] = {{1, 2, 3}, {0, 3, 2}, {3, 0, 1}, {2, 1, 0}};
        for (int k = 0; k < 4; ++k) {
            const Vec3& a = mesh.vertices_[static_cast<std::size_t>(tet[static_cast<std::size_t>(kFace[k][0])])];
            const Vec3& b = mesh.vertices_[static_cast<std::size_t>(tet[static_cast<std::size_t>(kFace[k][1])])];
            const Vec3& c = mesh.vertices_[static_cast<std::size_t>(tet[static_cast<std::size_t>(kFace[k][2])])];
            const Vec3 nrm = cross(b - a, c - a);
            const double len = norm(nrm);
            mesh.face_area_[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)] = 0.5 * len;
            mesh.face_normal_[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)] = nrm / len;
        }

        for (int k = 0; k < 4; ++k) mesh.incident_[static_cast<std::size_t>(tet[static_cast<std::size_t>(k)])].push_back(t);
    }

    for (int i = 0; i < n; ++i)
        if (mesh.incident_[static_cast<std::size_t>(i)].empty())
            throw Error(ErrorCode::invalid_argument,
                        "vertex " + std::to_string(i) + " belongs to no tetrahedron");
    return mesh;
}

double TetMesh::total_volume() const {
    double s = 0;
    for (double v : volume_) s += v;
    return s;
}

Mat3 TetMesh::edge_matrix(int t) const {
    const auto& T = tets_[static_cast<std::size_t>(t)];
    const Vec3& p0 = vertices_[static_cast<std::size_t>(T[0])];
    return Mat3::from_columns(vertices_[static_cast<std::size_t>(T[1])] - p0,
                              vertices_[static_cast<std::size_t>(T[2])] - p0,
                              vertices_[static_cast<std::size_t>(T[3])] - p0);
}

std::vector<int> TetMesh::vertices_on_plane(int axis, double value, double tol) const {
    if (axis < 0 || axis > 2) throw Error(ErrorCode::invalid_argument, "plane axis must be 0, 1 or 2");
    std::vector<int> out;
    for (int i = 0; i < vertex_count(); ++i)
        if (std::abs(vertices_[static_cast<std::size_t>(i)][axis] - value) <= tol) out.push_back(i);
    return out;
}

namespace {

struct FaceKeyHash {
    std::size_t operator()(const std::array<int, 3>& f) const {
        return static_cast<std::size_t>(fnv1a64(f.data(), sizeof(int) * 3));
    }
};

}  // namespace

std::vector<std::array<int, 3>> TetMesh::boundary_faces() const {
    std::unordered_map<std::array<int, 3>, int, FaceKeyHash> count;
    count.reserve(tets_.size() * 4);
    for (const auto& T : tets_) {
        static const int kFace[4][3] = {{1, 2, 3}, {0, 3, 2}, {3, 0, 1}, {2, 1, 0}};
        for (const auto& f : kFace) {
            std::array<int, 3> key = {T[static_cast<std::size_t>(f[0])], T[static_cast<std::size_t>(f[1])],
                                      T[static_cast<std::size_t>(f[2])]};
            std::sort(key.begin(), key.end());
            ++count[key];
        }
    }
    std::vector<std::array<int, 3>> faces;
    for (const auto& [key, c] : count)
        if (c == 1) faces.push_back(key);
    std::sort(faces.begin(), faces.end());
    return faces;
}

std::vector<int> TetMesh::boundary_vertex_set() const {
    std::vector<char> on_boundary(static_cast<std::size_t>(vertex_count()), 0);
    for (const auto& f : boundary_faces())
        for (int v : f) on_boundary[static_cast<std::size_t>(v)] = 1;
    std::vector<int> out;
    for (int i = 0; i < vertex_count(); ++i)
        if (on_boundary[static_cast<std::size_t>(i)]) out.push_back(i);
    return out;
}

std::uint64_t TetMesh::content_hash() const {
    std::uint64_t h = fnv1a64("qc3d-mesh", 9);
    const std::uint64_t n = static_cast<std::uint64_t>(vertex_count());
    const std::uint64_t m = static_cast<std::uint64_t>(tet_count());
    h = fnv1a64(&n, sizeof n, h);
    h = fnv1a64(&m, sizeof m, h);
    h = fnv1a64(vertices_.data(), vertices_.size() * sizeof(Vec3), h);
    h = fnv1a64(tets_.data(), tets_.size() * sizeof(std::array<int, 4>), h);
    return h;
}

Mapping::Mapping(std::shared_ptr<const TetMesh> m, std::vector<Vec3> img)
    : mesh(std::move(m)), images(std::move(img)) {
    if (!mesh) throw Error(ErrorCode::invalid_argument, "mapping requires a mesh");
    if (images.size() != static_cast<std::size_t>(mesh->vertex_count()))
        throw Error(ErrorCode::invalid_argument,
                    "mapping has " + std::to_string(images.size()) + " images for " +
                        std::to_string(mesh->vertex_count()) + " vertices");
}

Mat3 Mapping::jacobian(int t) const {
    const auto& T = mesh->tet(t);
    const Vec3& s0 = images[static_cast<std::size_t>(T[0])];
    const Mat3 Y = Mat3::from_columns(images[static_cast<std::size_t>(T[1])] - s0,
                                      images[static_cast<std::size_t>(T[2])] - s0,
                                      images[static_cast<std::size_t>(T[3])] - s0);
    return Y * inverse(mesh->edge_matrix(t));
}

std::vector<int> Mapping::folded_tets() const {
    std::vector<int> folded;
    for (int t = 0; t < mesh->tet_count(); ++t)
        if (jacobian(t).det() <= 0.0) folded.push_back(t);
    return folded;
}

Mapping Mapping::identity(std::shared_ptr<const TetMesh> m) {
    std::vector<Vec3> img = m->vertices();
    return Mapping(std::move(m), std::move(img));
}

// --- tetgen parsing ---------------------------------------------------------

namespace {

struct LineReader {
    std::ifstream in;
    std::string path;
    long line_no = 0;

    explicit LineReader(const std::string& p) : in(p), path(p) {
        if (!in) throw Error(ErrorCode::io, "cannot open '" + p + "'");
    }

    // Next non-empty line with comments stripped, tokenized. false on EOF.
    bool next_tokens(std::vector<std::string>& tokens) {
        std::string line;
        while (std::getline(in, line)) {
            ++line_no;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            tokens.clear();
            std::istringstream ss(line);
            std::string tok;
            while (ss >> tok) tokens.push_back(tok);
            if (!tokens.empty()) return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::parse, path + ":" + std::to_string(line_no) + ": " + what);
    }
};

long parse_long(const LineReader& r, const std::string& tok) {
    long v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw Error(ErrorCode::parse, r.path + ":" + std::to_string(r.line_no) + ": expected integer, got '" + tok + "'");
    return v;
}

double parse_double(const LineReader& r, const std::string& tok) {
    double v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw Error(ErrorCode::parse, r.path + ":" + std::to_string(r.line_no) + ": expected number, got '" + tok + "'");
    return v;
}

}  // namespace

std::vector<Vec3> load_node_points(const std::string& path) {
    LineReader r(path);
    std::vector<std::string> tok;
    if (!r.next_tokens(tok)) r.fail("missing header");
    if (tok.size() < 2) r.fail("node header needs at least '<count> <dim>'");
    const long n = parse_long(r, tok[0]);
    const long dim = parse_long(r, tok[1]);
    if (n <= 0) r.fail("node count must be positive");
    if (dim != 3) r.fail("only 3D node files are supported (dim = " + tok[1] + ")");

    std::vector<Vec3> points;
    points.reserve(static_cast<std::size_t>(n));
    long base = 0;
    for (long i = 0; i < n; ++i) {
        if (!r.next_tokens(tok)) r.fail("unexpected end of file: expected " + std::to_string(n) + " node lines");
        if (tok.size() < 4) r.fail("node line needs '<index> x y z'");
        const long idx = parse_long(r, tok[0]);
        if (i == 0) {
            if (idx != 0 && idx != 1) r.fail("first node index must be 0 or 1, got " + tok[0]);
            base = idx;
        } else if (idx != base + i) {
            r.fail("node indices must be consecutive: expected " + std::to_string(base + i) + ", got " + tok[0]);
        }
        points.push_back({parse_double(r, tok[1]), parse_double(r, tok[2]), parse_double(r, tok[3])});
    }
    return points;
}

namespace {

std::vector<std::array<int, 4>> load_ele(const std::string& path, long vertex_count) {
    LineReader r(path);
    std::vector<std::string> tok;
    if (!r.next_tokens(tok)) r.fail("missing header");
    if (tok.size() < 2) r.fail("ele header needs at least '<count> <nodes-per-tet>'");
    const long m = parse_long(r, tok[0]);
    const long per = parse_long(r, tok[1]);
    if (m <= 0) r.fail("tet count must be positive");
    if (per != 4) r.fail("only linear tets are supported (nodes per tet = " + tok[1] + ")");

    std::vector<std::array<int, 4>> tets;
    tets.reserve(static_cast<std::size_t>(m));
    long base = 0;
    for (long i = 0; i < m; ++i) {
        if (!r.next_tokens(tok)) r.fail("unexpected end of file: expected " + std::to_string(m) + " tet lines");
        if (tok.size() < 5) r.fail("ele line needs '<index> i1 i2 i3 i4'");
        const long idx = parse_long(r, tok[0]);
        if (i == 0) {
            if (idx != 0 && idx != 1) r.fail("first tet index must be 0 or 1, got " + tok[0]);
            base = idx;
        } else if (idx != base + i) {
            r.fail("tet indices must be consecutive: expected " + std::to_string(base + i) + ", got " + tok[0]);
        }
        std::array<int, 4> T;
        for (int k = 0; k < 4; ++k) {
            const long v = parse_long(r, tok[static_cast<std::size_t>(k) + 1]) - base;
            if (v < 0 || v >= vertex_count)
                r.fail("vertex reference " + tok[static_cast<std::size_t>(k) + 1] + " out of range [" +
                       std::to_string(base) + ", " + std::to_string(vertex_count - 1 + base) + "]");
            T[static_cast<std::size_t>(k)] = static_cast<int>(v);
        }
        tets.push_back(T);
    }
    return tets;
}

}  // namespace

TetMesh load_tetgen(const std::string& node_path, const std::string& ele_path, std::vector<int>* repaired) {
    std::vector<Vec3> points = load_node_points(node_path);
    std::vector<std::array<int, 4>> tets = load_ele(ele_path, static_cast<long>(points.size()));
    return TetMesh::build(std::move(points), std::move(tets), repaired);
}

Mapping load_mapping(std::shared_ptr<const TetMesh> mesh, const std::string& node_path) {
    std::vector<Vec3> images = load_node_points(node_path);
    if (images.size() != static_cast<std::size_t>(mesh->vertex_count()))
        throw Error(ErrorCode::invalid_argument,
                    "'" + node_path + "' has " + std::to_string(images.size()) + " points but the mesh has " +
                        std::to_string(mesh->vertex_count()) + " vertices");
    return Mapping(std::move(mesh), std::move(images));
}

void save_node(const std::string& path, std::span<const Vec3> points) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
    out << points.size() << " 3 0 0\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        out << (i + 1) << ' ' << format_double(points[i].x) << ' ' << format_double(points[i].y) << ' '
            << format_double(points[i].z) << '\n';
    }
    if (!out) throw Error(ErrorCode::io, "write failed for '" + path + "'");
}

void save_ele(const std::string& path, std::span<const std::array<int, 4>> tets) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
    out << tets.size() << " 4 0\n";
    for (std::size_t i = 0; i < tets.size(); ++i) {
        out << (i + 1);
        for (int k = 0; k < 4; ++k) out << ' ' << (tets[i][static_cast<std::size_t>(k)] + 1);
        out << '\n';
    }
    if (!out) throw Error(ErrorCode::io, "write failed for '" + path + "'");
}

// --- JSON container ---------------------------------------------------------

void save_mesh_json(const std::string& path, const TetMesh& mesh, const std::vector<Vec3>* images,
                    const std::string& metadata_json) {
    nlohmann::ordered_json j;
    j["format"] = "qc3d-mesh";
    j["version"] = 1;
    j["metadata"] = nlohmann::json::parse(metadata_json);
    auto& verts = j["vertices"] = nlohmann::ordered_json::array();
    for (const Vec3& p : mesh.vertices()) verts.push_back({p.x, p.y, p.z});
    auto& tets = j["tets"] = nlohmann::ordered_json::array();
    for (const auto& T : mesh.tets()) tets.push_back({T[0], T[1], T[2], T[3]});
    if (images) {
        if (images->size() != static_cast<std::size_t>(mesh.vertex_count()))
            throw Error(ErrorCode::invalid_argument, "image count does not match the mesh");
        auto& img = j["images"] = nlohmann::ordered_json::array();
        for (const Vec3& p : *images) img.push_back({p.x, p.y, p.z});
    }
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
    out << j.dump() << '\n';
    if (!out) throw Error(ErrorCode::io, "write failed for '" + path + "'");
}

TetMesh load_mesh_json(const std::string& path, std::vector<Vec3>* images, std::string* metadata_json) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::parse, path + ": " + e.what());
    }
    if (j.value("format", "") != "qc3d-mesh")
        throw Error(ErrorCode::parse, path + ": not a qc3d-mesh container");
    std::vector<Vec3> verts;
    for (const auto& p : j.at("vertices"))
        verts.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
    std::vector<std::array<int, 4>> tets;
    for (const auto& T : j.at("tets"))
        tets.push_back({T.at(0).get<int>(), T.at(1).get<int>(), T.at(2).get<int>(), T.at(3).get<int>()});
    if (images) {
        images->clear();
        if (j.contains("images"))
            for (const auto& p : j["images"])
                images->push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
    }
    if (metadata_json) *metadata_json = j.value("metadata", nlohmann::json::object()).dump();
    return TetMesh::build(std::move(verts), std::move(tets));
}

}  // namespace qc3d
