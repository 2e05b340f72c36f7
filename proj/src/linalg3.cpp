#include "qc3d/linalg3.hpp"

#include "qc3d/util.hpp"

#include <algorithm>
#include <cfloat>

namespace qc3d {

Mat3 cross_adjugate(const Mat3& M) {
    if (M.det() == 0.0) {
        throw Error(ErrorCode::numerical, "cross_adjugate: singular matrix (det = 0)");
    }
    return Mat3::from_columns(cross(M.row(1), M.row(2)),
                              cross(M.row(2), M.row(0)),
                              cross(M.row(0), M.row(1)));
}

Mat3 inverse(const Mat3& M) {
    const double d = M.det();
    if (d == 0.0) {
        throw Error(ErrorCode::numerical, "inverse: singular matrix (det = 0)");
    }
    return cross_adjugate(M) * (1.0 / d);
}

Mat3 rot_x(double t) {
    const double c = std::cos(t), s = std::sin(t);
    return {{{1, 0, 0}, {0, c, -s}, {0, s, c}}};
}

Mat3 rot_y(double t) {
    const double c = std::cos(t), s = std::sin(t);
    return {{{c, 0, s}, {0, 1, 0}, {-s, 0, c}}};
}

Mat3 rot_z(double t) {
    const double c = std::cos(t), s = std::sin(t);
    return {{{c, -s, 0}, {s, c, 0}, {0, 0, 1}}};
}

namespace {

double off_diagonal_norm(const Mat3& A) {
    return std::sqrt(A(0, 1) * A(0, 1) + A(0, 2) * A(0, 2) + A(1, 2) * A(1, 2));
}

// One Jacobi rotation zeroing A(p,q); A stays symmetric, V accumulates the
// rotation on the right (columns are the running eigenvectors).
void jacobi_rotate(Mat3& A, Mat3& V, int p, int q) {
    const double apq = A(p, q);
    if (apq == 0.0) return;
    const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
    const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;
    const double tau = s / (1.0 + c);

    const double app = A(p, p), aqq = A(q, q);
    A(p, p) = app - t * apq;
    A(q, q) = aqq + t * apq;
    A(p, q) = A(q, p) = 0.0;

    const int r = 3 - p - q;  // the remaining index
    const double arp = A(r, p), arq = A(r, q);
    A(r, p) = A(p, r) = arp - s * (arq + tau * arp);
    A(r, q) = A(q, r) = arq + s * (arp - tau * arq);

    for (int i = 0; i < 3; ++i) {
        const double vip = V(i, p), viq = V(i, q);
        V(i, p) = vip - s * (viq + tau * vip);
        V(i, q) = viq + s * (vip - tau * viq);
    }
}

}  // namespace

SymEigen3 sym3_eigen(const Mat3& S) {
    Mat3 A = S;
    // Enforce exact symmetry of the working copy.
    A(1, 0) = A(0, 1) = 0.5 * (S(0, 1) + S(1, 0));
    A(2, 0) = A(0, 2) = 0.5 * (S(0, 2) + S(2, 0));
    A(2, 1) = A(1, 2) = 0.5 * (S(1, 2) + S(2, 1));

    Mat3 V = Mat3::identity();
    const double tol = 1e-14 * A.frobenius();
    for (int sweep = 0; sweep < 64 && off_diagonal_norm(A) > tol; ++sweep) {
        jacobi_rotate(A, V, 0, 1);
        jacobi_rotate(A, V, 0, 2);
        jacobi_rotate(A, V, 1, 2);
    }

    std::array<int, 3> order = {0, 1, 2};
    std::array<double, 3> lam = {A(0, 0), A(1, 1), A(2, 2)};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return lam[a] > lam[b]; });

    SymEigen3 out;
    for (int i = 0; i < 3; ++i) {
        out.eigenvalues[i] = lam[order[i]];
        out.vectors.set_col(i, V.col(order[i]));
    }
    return out;
}

void fix_rotation_sign(Mat3& W) {
    if (W.det() >= 0.0) return;
    int flip = 0;  // fallback when no column has a negative leading entry
    for (int j = 0; j < 3; ++j) {
        int lead = 0;
        for (int i = 1; i < 3; ++i)
            if (std::abs(W(i, j)) > std::abs(W(lead, j))) lead = i;
        if (W(lead, j) < 0.0) {
            flip = j;
            break;
        }
    }
    W.set_col(flip, -W.col(flip));
}

}  // namespace qc3d
