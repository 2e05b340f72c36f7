#include "support/fixtures.hpp"

#include <cmath>
#include <unistd.h>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fixtures {

using qc3d::Mapping;
using qc3d::Mat3;
using qc3d::Rng;
using qc3d::TetMesh;
using qc3d::Vec3;

std::shared_ptr<const TetMesh> reference_tet() {
    return std::make_shared<TetMesh>(TetMesh::build(
        {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{{0, 1, 2, 3}}}));
}

std::shared_ptr<const TetMesh> regular_tet() {
    // Unit edge length: scale the (1,1,0)-style embedding by 1/sqrt(2).
    const double s = 1.0 / std::sqrt(2.0);
    return std::make_shared<TetMesh>(TetMesh::build(
        {{s, s, 0}, {s, 0, s}, {0, s, s}, {0, 0, 0}}, {{{0, 1, 2, 3}}}));
}

std::shared_ptr<const TetMesh> two_tets() {
    return std::make_shared<TetMesh>(TetMesh::build(
        {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0.4, 0.4, -2.0}},
        {{{0, 1, 2, 3}, {0, 2, 1, 4}}}));
}

std::shared_ptr<const TetMesh> cube_mesh(int n) {
    if (n < 1) throw std::invalid_argument("cube_mesh: n must be >= 1");
    const int s = n + 1;
    std::vector<Vec3> verts(static_cast<std::size_t>(s) * s * s);
    auto vid = [s](int x, int y, int z) { return (x * s + y) * s + z; };
    for (int x = 0; x < s; ++x)
        for (int y = 0; y < s; ++y)
            for (int z = 0; z < s; ++z)
                verts[static_cast<std::size_t>(vid(x, y, z))] = {static_cast<double>(x) / n,
                                                                 static_cast<double>(y) / n,
                                                                 static_cast<double>(z) / n};

    // Kuhn split: six tets around the main diagonal of each cell.
    static const int kPerm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    std::vector<std::array<int, 4>> tets;
    tets.reserve(static_cast<std::size_t>(n) * n * n * 6);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            for (int z = 0; z < n; ++z) {
                for (const auto& perm : kPerm) {
                    int c[3] = {x, y, z};
                    std::array<int, 4> tet;
                    tet[0] = vid(c[0], c[1], c[2]);
                    for (int step = 0; step < 3; ++step) {
                        ++c[perm[step]];
                        tet[static_cast<std::size_t>(step) + 1] = vid(c[0], c[1], c[2]);
                    }
                    tets.push_back(tet);
                }
            }
    return std::make_shared<TetMesh>(TetMesh::build(std::move(verts), std::move(tets)));
}

Mapping smooth_cube_deformation(std::shared_ptr<const TetMesh> mesh, double amplitude, int variant) {
    const double pi = M_PI;
    auto displacement = [variant, pi](const Vec3& p) -> Vec3 {
        const double x = p.x, y = p.y, z = p.z;
        switch (variant % 3) {
            case 0:
                return {std::sin(pi * x) * std::cos(pi * y),
                        std::sin(pi * y) * std::cos(pi * z),
                        std::sin(pi * z) * std::cos(pi * x)};
            case 1:
                return {std::sin(pi * x) * (0.6 * std::cos(pi * z) + 0.4 * std::cos(2 * pi * y)),
                        std::sin(pi * y) * (0.5 * std::cos(2 * pi * z) - 0.5 * std::cos(pi * x)),
                        std::sin(pi * z) * (0.7 * std::cos(pi * y) + 0.3 * std::cos(2 * pi * x))};
            default:
                return {std::sin(pi * x) * (std::sin(pi * y) * std::sin(pi * z) + 0.5 * std::cos(2 * pi * z)),
                        -0.8 * std::sin(pi * y) * std::cos(pi * x) * std::cos(pi * z),
                        0.9 * std::sin(pi * z) * (std::cos(2 * pi * y) - 0.2)};
        }
    };

    double amp = amplitude;
    for (int attempt = 0; attempt < 12; ++attempt) {
        std::vector<Vec3> images(mesh->vertices().size());
        for (std::size_t i = 0; i < images.size(); ++i)
            images[i] = mesh->vertices()[i] + displacement(mesh->vertices()[i]) * amp;
        Mapping map(mesh, std::move(images));
        if (map.folded_tets().empty()) return map;
        amp *= 0.5;
    }
    throw std::runtime_error("smooth_cube_deformation: could not reach a fold-free amplitude");
}

std::shared_ptr<const TetMesh> random_tet(Rng& rng) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<Vec3> pts(4);
        for (Vec3& p : pts) p = {rng.next_double(), rng.next_double(), rng.next_double()};
        const double vol = dot(cross(pts[1] - pts[0], pts[2] - pts[0]), pts[3] - pts[0]) / 6.0;
        if (std::abs(vol) < 1e-3) continue;
        std::array<int, 4> tet = {0, 1, 2, 3};
        if (vol < 0) std::swap(tet[1], tet[2]);
        return std::make_shared<TetMesh>(TetMesh::build(std::move(pts), {tet}));
    }
    throw std::runtime_error("random_tet: rejection sampling failed");
}

Mat3 random_rotation(Rng& rng) {
    // Compose rotations about the axes with random angles.
    const double ax = rng.next_double(-M_PI, M_PI);
    const double ay = rng.next_double(-M_PI / 2, M_PI / 2);
    const double az = rng.next_double(-M_PI, M_PI);
    return qc3d::rot_z(az) * qc3d::rot_y(ay) * qc3d::rot_x(ax);
}

Mat3 random_well_conditioned(Rng& rng) {
    const Mat3 u = random_rotation(rng);
    const Mat3 v = random_rotation(rng);
    const Mat3 d = Mat3::diagonal(rng.next_double(0.5, 2.0), rng.next_double(0.5, 2.0), rng.next_double(0.5, 2.0));
    return u * d * v;
}

TempDir::TempDir() {
    static std::uint64_t counter = 0;
    const auto base = std::filesystem::temp_directory_path();
    for (int attempt = 0; attempt < 100; ++attempt) {
        auto candidate = base / ("qc3d_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::error_code ec;
        if (std::filesystem::create_directory(candidate, ec)) {
            dir_ = candidate;
            return;
        }
    }
    throw std::runtime_error("TempDir: cannot create a temporary directory");
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_file: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_file: cannot open " + path);
    out << content;
}

}  // namespace fixtures
