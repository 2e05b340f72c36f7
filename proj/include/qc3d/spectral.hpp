#pragma once

#include "qc3d/lbs3d.hpp"
#include "qc3d/mesh.hpp"
#include "qc3d/qcrep.hpp"
#include "qc3d/sparse.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qc3d {

// Cotangent stiffness matrix and lumped mass matrix of a tet mesh:
//   w_ij  = 1/6 sum over tets at edge (i,j) of l_opp * cot(dihedral at (i,j))
//   L_ij  = -w_ij,  L_ii = sum_j w_ij
//   M_ii  = 1/4 sum of volumes of tets incident to vertex i.
// The operator is applied in difference form (L x)_i = sum_j w_ij (x_i - x_j),
// so constants are annihilated exactly.
struct LaplaceBeltrami {
    struct Edge {
        int i, j;  // i < j
        double weight;
    };

    int n = 0;
    std::vector<Edge> edges;   // unique, sorted by (i, j)
    std::vector<double> mass;  // M_ii
    std::uint64_t mesh_hash = 0;

    void apply(std::span<const double> x, std::span<double> y) const;
    CsrMatrix to_csr() const;  // diagonal stored as the negated row sum
    double total_mass() const;
};

LaplaceBeltrami build_laplace_beltrami(const TetMesh& mesh);

// Generalized eigenpairs L nu = lambda M nu, ascending, M-orthonormal.
struct Spectrum {
    int n = 0;
    int k = 0;
    std::vector<double> eigenvalues;   // lambda_1 <= ... <= lambda_k
    std::vector<double> eigenvectors;  // k rows of length n (vector i at [i*n, (i+1)*n))
    std::vector<double> mass;          // M diagonal, for projections
    std::uint64_t mesh_hash = 0;

    std::span<const double> eigenvector(int i) const {
        return {eigenvectors.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(n),
                static_cast<std::size_t>(n)};
    }
};

// Solves the k smallest pairs through the symmetric operator
// M^-1/2 L M^-1/2 (M is diagonal positive) with a Lanczos iteration under
// full reorthogonalization, then maps back nu = M^-1/2 nu~ and re-normalizes
// in the M-inner product.
Spectrum eigensolve(const LaplaceBeltrami& lb, int k);

// xi_i = f^T M nu_i for i = 1..k.
std::vector<double> project(const Spectrum& spectrum, std::span<const double> f);

// sum_{i<=count} xi_i nu_i (count = xi.size()).
std::vector<double> synthesize(const Spectrum& spectrum, std::span<const double> xi);

// Volume-weighted average of a per-tet field onto vertices, and the
// four-vertex arithmetic mean back onto tets. The codec's fixed transfer pair.
std::vector<double> tet_to_vertex(const TetMesh& mesh, std::span<const double> g);
std::vector<double> vertex_to_tet(const TetMesh& mesh, std::span<const double> f);

struct CompressedMapping {
    std::uint64_t mesh_hash = 0;
    std::uint64_t threshold = 0;                // T
    std::array<std::vector<double>, 6> coeff;   // spectral coefficients per q component
    BoundaryConditions bc;
};

CompressedMapping compress(const Mapping& mapping, const Spectrum& spectrum, std::size_t threshold,
                           const BoundaryConditions& bc, const RepOptions& rep_opts = {});

struct DecompressReport {
    long clamped_tets = 0;  // tets whose rebuilt P needed the SPD eigenvalue clamp
    ReconstructReport recon;
};

Mapping decompress(const CompressedMapping& c, std::shared_ptr<const TetMesh> mesh, const Spectrum& spectrum,
                   const CgOptions& opts = {}, DecompressReport* report = nullptr);

// Spectrum cache, magic "QSP3": version, mesh hash, n, k, eigenvalues, vectors.
void save_qsp3(const std::string& path, const Spectrum& spectrum);
Spectrum load_qsp3(const std::string& path);

// Compressed container, magic "QCZ3": version, mesh hash, T, boundary record,
// six coefficient arrays of length T.
void save_qcz3(const std::string& path, const CompressedMapping& c);
CompressedMapping load_qcz3(const std::string& path);

}  // namespace qc3d
