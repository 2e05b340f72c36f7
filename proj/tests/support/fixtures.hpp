#pragma once

#include "qc3d/mesh.hpp"
#include "qc3d/util.hpp"

#include <filesystem>
#include <memory>
#include <string>

namespace fixtures {

// The reference tet: vertices (0,0,0), (1,0,0), (0,1,0), (0,0,1); volume 1/6.
std::shared_ptr<const qc3d::TetMesh> reference_tet();

// A single regular tetrahedron with unit edge length.
std::shared_ptr<const qc3d::TetMesh> regular_tet();

// Two tets sharing the face (0,1,2); volumes 1/6 and 1/3.
std::shared_ptr<const qc3d::TetMesh> two_tets();

// Unit cube [0,1]^3 as an (n+1)^3 grid with 6 tets per cell (Kuhn split).
std::shared_ptr<const qc3d::TetMesh> cube_mesh(int n);

// Smooth fold-free deformation of the unit cube. Each displacement component
// vanishes on its own face planes, so the cube BoundarySet is respected.
// Variants 0..2 use different mode mixes; the amplitude is halved until
// det J > 0 holds on every tet.
qc3d::Mapping smooth_cube_deformation(std::shared_ptr<const qc3d::TetMesh> mesh, double amplitude,
                                      int variant = 0);

// Random positively-oriented tet with vertices in [0,1]^3 and volume above
// 1e-3 (rejection sampled).
std::shared_ptr<const qc3d::TetMesh> random_tet(qc3d::Rng& rng);

qc3d::Mat3 random_rotation(qc3d::Rng& rng);

// Random matrix with singular values in [0.5, 2] and det > 0.
qc3d::Mat3 random_well_conditioned(qc3d::Rng& rng);

// Self-deleting temporary directory for IO tests.
class TempDir {
  public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

  private:
    std::filesystem::path dir_;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace fixtures
