#pragma once

#include "qc3d/linalg3.hpp"
#include "qc3d/mesh.hpp"

#include <array>
#include <string>
#include <vector>

namespace qc3d {

// Per-tet quasiconformal representation: the upper-triangular entries of the
// symmetric stretch factor P = sqrt(J^T J) in row-major order
// (P11, P12, P13, P22, P23, P33). Dimensionless.
using QVec = std::array<double, 6>;

inline constexpr QVec kIdentityQ = {1, 0, 0, 1, 0, 1};

struct QCRep {
    std::vector<QVec> q;

    int tet_count() const { return static_cast<int>(q.size()); }
    static QCRep identity(int tet_count) { return {std::vector<QVec>(static_cast<std::size_t>(tet_count), kIdentityQ)}; }
};

Mat3 q_to_matrix(const QVec& q);
QVec matrix_to_q(const Mat3& P);

// J = U * (W diag(a,b,c) W^T) with a >= b >= c > 0 and det(W) = +1.
struct DilationDecomposition {
    double a = 1, b = 1, c = 1;
    Mat3 W = Mat3::identity();
    Mat3 U = Mat3::identity();
};

// Equivalent form: singular values plus Z-Y-X Euler angles of W.
struct EulerForm {
    double a = 1, b = 1, c = 1;
    double theta_x = 0, theta_y = 0, theta_z = 0;
    bool gimbal_lock = false;
};

struct RepOptions {
    // Keep going through orientation-reversed tets (P is built from J^T J and
    // ignores the sign of det J); without it any fold is an error.
    bool permissive = false;
    int threads = 1;
};

// Per-tet q(T) = upper triangle of sqrt(J^T J), via symmetric eigendecomposition.
// Fold indices (det J <= 0) are written to `folded` when given.
QCRep compute_representation(const Mapping& mapping, const RepOptions& opts = {},
                             std::vector<int>* folded = nullptr);

// Left polar decomposition of J with det(J) > 0.
DilationDecomposition polar_decompose(const Mat3& J);

// Dilation matrix A = W diag(bc/a, ac/b, ab/c) W^T of the elliptic operator
// div(A grad u) = 0. Throws when the smallest eigenvalue of P is <= 1e-12.
Mat3 build_dilation_matrix(const QVec& q);

EulerForm to_euler(const DilationDecomposition& dec);
QVec from_euler(const EulerForm& e);

// Binary container: magic "QCR3", u32 version, u64 tet count, m x 6 f64 (LE).
void save_qcr3(const std::string& path, const QCRep& rep);
QCRep load_qcr3(const std::string& path);

std::string qcrep_to_json(const QCRep& rep);
QCRep qcrep_from_json(const std::string& text);

}  // namespace qc3d
