#include "qc3d/qcrep.hpp"

#include "qc3d/util.hpp"

#include <json.hpp>

#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>

namespace qc3d {

Mat3 q_to_matrix(const QVec& q) {
    return {{{q[0], q[1], q[2]}, {q[1], q[3], q[4]}, {q[2], q[4], q[5]}}};
}

QVec matrix_to_q(const Mat3& P) {
    return {P(0, 0), P(0, 1), P(0, 2), P(1, 1), P(1, 2), P(2, 2)};
}

namespace {

constexpr double kMinSingularValue = 1e-12;

// P = W diag(sqrt(eigs of J^T J)) W^T; the symmetric product is assembled from
// the upper triangle so P is exactly symmetric.
Mat3 symmetric_sqrt(const Mat3& JtJ, int tet_index) {
    const SymEigen3 eig = sym3_eigen(JtJ);
    for (double lambda : eig.eigenvalues) {
        if (!(lambda > 0.0))
            throw Error(ErrorCode::numerical,
                        "tet " + std::to_string(tet_index) + ": J^T J is not positive definite (eigenvalue " +
                            format_double(lambda) + ")");
    }
    const double sa = std::sqrt(eig.eigenvalues[0]);
    const double sb = std::sqrt(eig.eigenvalues[1]);
    const double sc = std::sqrt(eig.eigenvalues[2]);
    if (sc < kMinSingularValue)
        throw Error(ErrorCode::numerical, "tet " + std::to_string(tet_index) + ": singular value " +
                                              format_double(sc) + " below 1e-12; dilation matrix would blow up");
    const Mat3& W = eig.vectors;
    Mat3 P;
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            const double v = sa * W(i, 0) * W(j, 0) + sb * W(i, 1) * W(j, 1) + sc * W(i, 2) * W(j, 2);
            P(i, j) = P(j, i) = v;
        }
    return P;
}

}  // namespace

QCRep compute_representation(const Mapping& mapping, const RepOptions& opts, std::vector<int>* folded) {
    const int m = mapping.mesh->tet_count();
    std::vector<int> folds = mapping.folded_tets();
    if (folded) *folded = folds;
    if (!folds.empty() && !opts.permissive) {
        std::string list;
        for (std::size_t i = 0; i < folds.size() && i < 16; ++i)
            list += (i ? ", " : "") + std::to_string(folds[i]);
        if (folds.size() > 16) list += ", ...";
        throw Error(ErrorCode::numerical, "mapping is not diffeomorphic: det J <= 0 on " +
                                              std::to_string(folds.size()) + " tet(s) [" + list + "]");
    }

    QCRep rep;
    rep.q.resize(static_cast<std::size_t>(m));
    std::exception_ptr first_error;
    std::mutex error_mutex;
    parallel_for(static_cast<std::size_t>(m), opts.threads, [&](std::size_t begin, std::size_t end) {
        try {
            for (std::size_t t = begin; t < end; ++t) {
                const Mat3 J = mapping.jacobian(static_cast<int>(t));
                rep.q[t] = matrix_to_q(symmetric_sqrt(J.transpose() * J, static_cast<int>(t)));
            }
        } catch (...) {
            std::scoped_lock lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    });
    if (first_error) std::rethrow_exception(first_error);
    return rep;
}

DilationDecomposition polar_decompose(const Mat3& J) {
    const double d = J.det();
    if (!(d > 0.0))
        throw Error(ErrorCode::numerical,
                    "polar_decompose: det(J) = " + format_double(d) + " <= 0 (orientation reversal)");

    const SymEigen3 eig = sym3_eigen(J.transpose() * J);
    DilationDecomposition dec;
    dec.a = std::sqrt(std::max(eig.eigenvalues[0], 0.0));
    dec.b = std::sqrt(std::max(eig.eigenvalues[1], 0.0));
    dec.c = std::sqrt(std::max(eig.eigenvalues[2], 0.0));
    if (dec.c < kMinSingularValue)
        throw Error(ErrorCode::numerical,
                    "polar_decompose: singular value " + format_double(dec.c) + " below 1e-12");
    dec.W = eig.vectors;
    fix_rotation_sign(dec.W);
    // U = J P^-1 = J W diag(1/a, 1/b, 1/c) W^T
    dec.U = J * (dec.W * Mat3::diagonal(1.0 / dec.a, 1.0 / dec.b, 1.0 / dec.c) * dec.W.transpose());
    return dec;
}

Mat3 build_dilation_matrix(const QVec& q) {
    const SymEigen3 eig = sym3_eigen(q_to_matrix(q));
    const double a = eig.eigenvalues[0], b = eig.eigenvalues[1], c = eig.eigenvalues[2];
    if (!(c > kMinSingularValue))
        throw Error(ErrorCode::numerical, "dilation matrix undefined: smallest eigenvalue of P is " +
                                              format_double(c) + " (<= 1e-12)");
    const Mat3& W = eig.vectors;
    const double da = b * c / a, db = a * c / b, dc = a * b / c;
    Mat3 A;
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            const double v = da * W(i, 0) * W(j, 0) + db * W(i, 1) * W(j, 1) + dc * W(i, 2) * W(j, 2);
            A(i, j) = A(j, i) = v;
        }
    return A;
}

EulerForm to_euler(const DilationDecomposition& dec) {
    const Mat3& r = dec.W;
    if (std::abs(r.det() - 1.0) > 1e-6)
        throw Error(ErrorCode::invalid_argument, "to_euler requires det(W) = +1");

    EulerForm e;
    e.a = dec.a;
    e.b = dec.b;
    e.c = dec.c;
    const double cy = std::sqrt(r(2, 1) * r(2, 1) + r(2, 2) * r(2, 2));  // |cos(theta_y)|
    e.theta_y = std::atan2(-r(2, 0), cy);
    if (cy < 1e-8) {
        // Gimbal lock: only theta_x -/+ theta_z is determined; fix theta_x = 0.
        e.gimbal_lock = true;
        e.theta_x = 0.0;
        e.theta_z = std::atan2(-r(0, 1), r(1, 1));
    } else {
        e.theta_x = std::atan2(r(2, 1), r(2, 2));
        e.theta_z = std::atan2(r(1, 0), r(0, 0));
    }
    return e;
}

QVec from_euler(const EulerForm& e) {
    const Mat3 R = rot_z(e.theta_z) * rot_y(e.theta_y) * rot_x(e.theta_x);
    const Mat3 P = R * Mat3::diagonal(e.a, e.b, e.c) * R.transpose();
    // Mirror the upper triangle so rounding in the product cannot break symmetry.
    return {P(0, 0), P(0, 1), P(0, 2), P(1, 1), P(1, 2), P(2, 2)};
}

// --- QCR3 container ---------------------------------------------------------

namespace {

constexpr char kQcr3Magic[4] = {'Q', 'C', 'R', '3'};
constexpr std::uint32_t kQcr3Version = 1;

}  // namespace

void save_qcr3(const std::string& path, const QCRep& rep) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
    out.write(kQcr3Magic, 4);
    out.write(reinterpret_cast<const char*>(&kQcr3Version), sizeof kQcr3Version);
    const std::uint64_t m = static_cast<std::uint64_t>(rep.tet_count());
    out.write(reinterpret_cast<const char*>(&m), sizeof m);
    out.write(reinterpret_cast<const char*>(rep.q.data()),
              static_cast<std::streamsize>(rep.q.size() * sizeof(QVec)));
    if (!out) throw Error(ErrorCode::io, "write failed for '" + path + "'");
}

QCRep load_qcr3(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "'");
    char magic[4];
    std::uint32_t version = 0;
    std::uint64_t m = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&m), sizeof m);
    if (!in || std::memcmp(magic, kQcr3Magic, 4) != 0)
        throw Error(ErrorCode::parse, path + ": not a QCR3 file");
    if (version != kQcr3Version)
        throw Error(ErrorCode::parse, path + ": unsupported QCR3 version " + std::to_string(version));
    QCRep rep;
    rep.q.resize(m);
    in.read(reinterpret_cast<char*>(rep.q.data()), static_cast<std::streamsize>(m * sizeof(QVec)));
    if (!in) throw Error(ErrorCode::parse, path + ": truncated QCR3 payload");
    return rep;
}

std::string qcrep_to_json(const QCRep& rep) {
    nlohmann::ordered_json j;
    j["format"] = "QCR3";
    j["version"] = 1;
    auto& arr = j["q"] = nlohmann::ordered_json::array();
    for (const QVec& q : rep.q) arr.push_back({q[0], q[1], q[2], q[3], q[4], q[5]});
    return j.dump();
}

QCRep qcrep_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::parse, std::string("QCR3 json: ") + e.what());
    }
    if (j.value("format", "") != "QCR3") throw Error(ErrorCode::parse, "QCR3 json: wrong format tag");
    QCRep rep;
    for (const auto& row : j.at("q")) {
        QVec q;
        for (int k = 0; k < 6; ++k) q[static_cast<std::size_t>(k)] = row.at(k).get<double>();
        rep.q.push_back(q);
    }
    return rep;
}

}  // namespace qc3d
