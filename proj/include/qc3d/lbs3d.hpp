#pragma once

#include "qc3d/mesh.hpp"
#include "qc3d/qcrep.hpp"
#include "qc3d/sparse.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace qc3d {

// Per-tet gradient stencil: a, b, c are the d/dx, d/dy, d/dz weights of the
// four vertex values, read off the rows of X^-1 with the first entry closing
// the partition of unity:
//   (a[k], b[k], c[k]) = row k-1 of X^-1 for k = 1..3,
//   a[0] = -(a[1]+a[2]+a[3]) and likewise for b, c.
struct GradientCoefficients {
    std::array<double, 4> a, b, c;

    Vec3 vertex_vector(int k) const { return {a[static_cast<std::size_t>(k)], b[static_cast<std::size_t>(k)], c[static_cast<std::size_t>(k)]}; }
};

GradientCoefficients gradient_coefficients(const TetMesh& mesh, int tet);

// C = grad^T G A grad kept together with its assembly factors: the per-tet
// gradient blocks (grad), the volume weights Vol(T) I3 (G) and the per-tet
// dilation blocks A_T.
struct GeneralizedLaplacian {
    CsrMatrix C;
    std::vector<GradientCoefficients> grad;
    std::vector<double> volume;
    std::vector<Mat3> dilation;

    int n() const { return C.rows; }
    int tet_count() const { return static_cast<int>(grad.size()); }

    // grad_T f for a vertex function f.
    Vec3 tet_gradient(int t, std::span<const double> f, const TetMesh& mesh) const;
};

GeneralizedLaplacian assemble(const TetMesh& mesh, const QCRep& rep);

struct Constraint {
    int vertex;
    double value;
};

// Per-coordinate Dirichlet data for the three systems.
struct BoundaryConditions {
    std::array<std::vector<Constraint>, 3> coord;  // u, v, w

    std::vector<Constraint>& u() { return coord[0]; }
    std::vector<Constraint>& v() { return coord[1]; }
    std::vector<Constraint>& w() { return coord[2]; }
    const std::vector<Constraint>& u() const { return coord[0]; }
    const std::vector<Constraint>& v() const { return coord[1]; }
    const std::vector<Constraint>& w() const { return coord[2]; }

    // Unit-cube face conditions: a vertex lying on a face plane {x,y,z} =
    // {0,1} keeps that coordinate, so each on-plane coordinate becomes a
    // Dirichlet value equal to the plane position.
    static BoundaryConditions cube_faces(const TetMesh& mesh, double tol = 1e-9);

    // Constrain u, v and w of every topological boundary vertex to its image.
    static BoundaryConditions exact_boundary(const Mapping& mapping);

    // Same vertices, values blended (1-t) * source + t * target image.
    static BoundaryConditions blended_boundary(const Mapping& mapping, double t);
};

// Masking: zero the rows and columns of the flagged vertices, set their
// diagonals to 1. Idempotent.
CsrMatrix mask_matrix(const CsrMatrix& C, std::span<const std::uint8_t> constrained);

struct MaskedSystem {
    CsrMatrix M;                       // mask_matrix(C, constrained)
    std::vector<double> h;             // -C v with constrained entries overwritten by beta
    std::vector<double> x0;            // constraint vector (warm start keeping Dirichlet rows exact)
    std::vector<std::uint8_t> constrained;
};

MaskedSystem mask_system(const GeneralizedLaplacian& L, std::span<const Constraint> constraints);

struct MaskedSystems {
    MaskedSystem u, v, w;
};

MaskedSystems apply_boundary(const GeneralizedLaplacian& L, const BoundaryConditions& bc);

struct ReconstructReport {
    std::array<long, 3> cg_iterations = {0, 0, 0};
    std::array<double, 3> cg_residual = {0, 0, 0};
    double max_flux_residual = 0.0;
    std::optional<double> error_l2;  // filled against ground truth by callers
};

// Algorithm: rebuild A_T from q(T), assemble C, mask with the boundary data,
// solve the three SPD systems with CG. Constrained vertices match their
// Dirichlet values exactly.
Mapping reconstruct(std::shared_ptr<const TetMesh> mesh, const QCRep& rep, const BoundaryConditions& bc,
                    const CgOptions& opts = {}, ReconstructReport* report = nullptr);

// Flux of A grad f through the star boundary of each vertex (the -3 Vol
// (A,B,C) . A_T grad_T f sum, constant factor retained). Returns the largest
// magnitude over vertices not constrained for that coordinate.
double max_flux_residual(const GeneralizedLaplacian& L, const TetMesh& mesh, const Mapping& mapping,
                         const BoundaryConditions& bc);

// l2 norm of stacked image differences divided by the vertex count.
double mapping_l2_error(const Mapping& a, const Mapping& b);
double mapping_l2_error(std::span<const Vec3> a, std::span<const Vec3> b);

}  // namespace qc3d
