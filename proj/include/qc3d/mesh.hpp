#pragma once

#include "qc3d/linalg3.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace qc3d {

// Tetrahedral mesh with eagerly cached per-tet geometry. Immutable after
// construction; all queries are read-only and safe to share across threads.
//
// Every tet (i1,i2,i3,i4) is stored positively oriented:
//   [(p_i2 - p_i1) x (p_i3 - p_i1)] . (p_i4 - p_i1) > 0,
// equivalently det(X) = 6 Vol(T) > 0 with X the column matrix of edge vectors
// from p_i1. Tets arriving with the opposite orientation are repaired by
// swapping two vertices; tets below the degeneracy tolerance are a hard error.
class TetMesh {
  public:
    // Validates, repairs orientation (logging repaired tet indices into
    // `repaired` when given) and fills the geometry cache.
    static TetMesh build(std::vector<Vec3> vertices, std::vector<std::array<int, 4>> tets,
                         std::vector<int>* repaired = nullptr);

    int vertex_count() const { return static_cast<int>(vertices_.size()); }
    int tet_count() const { return static_cast<int>(tets_.size()); }

    const std::vector<Vec3>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 4>>& tets() const { return tets_; }
    const Vec3& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
    const std::array<int, 4>& tet(int t) const { return tets_[static_cast<std::size_t>(t)]; }

    double volume(int t) const { return volume_[static_cast<std::size_t>(t)]; }
    double total_volume() const;
    // Face opposite local vertex k of tet t.
    double face_area(int t, int k) const { return face_area_[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)]; }
    const Vec3& face_normal(int t, int k) const { return face_normal_[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)]; }

    // Tets containing vertex i (the star N(p_i)), ascending tet index.
    const std::vector<int>& incident_tets(int i) const { return incident_[static_cast<std::size_t>(i)]; }

    // Edge matrix X with columns p_i2 - p_i1, p_i3 - p_i1, p_i4 - p_i1.
    Mat3 edge_matrix(int t) const;

    Vec3 bbox_min() const { return bbox_min_; }
    Vec3 bbox_max() const { return bbox_max_; }
    double bbox_diagonal() const { return norm(bbox_max_ - bbox_min_); }

    // Vertices within `tol` of the plane {coordinate[axis] == value}, ascending.
    std::vector<int> vertices_on_plane(int axis, double value, double tol = 1e-9) const;

    // Topological boundary: vertices of faces that appear in exactly one tet.
    std::vector<int> boundary_vertex_set() const;
    std::vector<std::array<int, 3>> boundary_faces() const;

    // Content hash over vertex coordinates and connectivity (used to pair
    // spectra and compressed containers with their mesh).
    std::uint64_t content_hash() const;

  private:
    std::vector<Vec3> vertices_;
    std::vector<std::array<int, 4>> tets_;
    std::vector<double> volume_;
    std::vector<std::array<double, 4>> face_area_;
    std::vector<std::array<Vec3, 4>> face_normal_;
    std::vector<std::vector<int>> incident_;
    Vec3 bbox_min_, bbox_max_;
};

// A source mesh paired with per-vertex image positions s_i = (u_i, v_i, w_i).
struct Mapping {
    std::shared_ptr<const TetMesh> mesh;
    std::vector<Vec3> images;

    Mapping() = default;
    Mapping(std::shared_ptr<const TetMesh> m, std::vector<Vec3> img);

    // Piecewise-linear Jacobian on tet t: J = Y X^-1 with Y the image edge
    // matrix and X the source edge matrix.
    Mat3 jacobian(int t) const;

    // Tets with det(J) <= 0; empty means the mapping is diffeomorphic.
    std::vector<int> folded_tets() const;

    static Mapping identity(std::shared_ptr<const TetMesh> m);
};

// --- tetgen file exchange -------------------------------------------------
//
// .node: "<n> 3 <nattr> <nmark>" then n lines "<index> x y z ...", 0- or
// 1-based (detected from the first body line). .ele: "<m> 4 <nattr>" then m
// lines "<index> i1 i2 i3 i4 ...". '#' starts a comment. The writers always
// emit "n 3 0 0" / "m 4 0" headers and 1-based indices.

TetMesh load_tetgen(const std::string& node_path, const std::string& ele_path,
                    std::vector<int>* repaired = nullptr);

std::vector<Vec3> load_node_points(const std::string& path);

// Image positions from a second .node file with identical count and order.
Mapping load_mapping(std::shared_ptr<const TetMesh> mesh, const std::string& node_path);

void save_node(const std::string& path, std::span<const Vec3> points);
void save_ele(const std::string& path, std::span<const std::array<int, 4>> tets);

// Canonical JSON container (mesh + optional images + metadata). Byte-stable:
// load -> save -> load -> save produces identical files.
void save_mesh_json(const std::string& path, const TetMesh& mesh, const std::vector<Vec3>* images,
                    const std::string& metadata_json = "{}");
TetMesh load_mesh_json(const std::string& path, std::vector<Vec3>* images = nullptr,
                       std::string* metadata_json = nullptr);

}  // namespace qc3d
