// Acceptance suite: every criterion prints one [PASS]/[FAIL] line; the
// process exits non-zero if any criterion fails.

#include "qc3d/interp.hpp"
#include "qc3d/lbs3d.hpp"
#include "qc3d/mesh.hpp"
#include "qc3d/qcrep.hpp"
#include "qc3d/spectral.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace qc3d;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& details) {
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << index << ". " << name;
    if (!details.empty()) std::cout << " | " << details;
    std::cout << "\n";
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Mean squared per-vertex Euclidean displacement.
double mse(std::span<const Vec3> a, std::span<const Vec3> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Vec3 d = a[i] - b[i];
        s += dot(d, d);
    }
    return s / static_cast<double>(a.size());
}

// 1. Reconstruction round trip: three bundled fold-free cube deformations,
//    1k-10k vertices, exact boundary values, normalized l2 error <= 1e-8,
//    under 60 s per case.
void criterion_reconstruction_round_trip() {
    struct Case {
        int grid;
        double amplitude;
        int variant;
    };
    const Case cases[] = {{10, 0.08, 0}, {15, 0.07, 1}, {20, 0.06, 2}};
    bool pass = true;
    std::ostringstream details;
    for (const Case& c : cases) {
        const auto t0 = std::chrono::steady_clock::now();
        auto mesh = fixtures::cube_mesh(c.grid);
        const Mapping map = fixtures::smooth_cube_deformation(mesh, c.amplitude, c.variant);
        if (!map.folded_tets().empty()) {
            pass = false;
            details << " fixture " << c.grid << " folded!";
            continue;
        }
        const QCRep rep = compute_representation(map);
        const Mapping rebuilt = reconstruct(mesh, rep, BoundaryConditions::exact_boundary(map), {});
        const double err = mapping_l2_error(rebuilt, map);
        const double dt = seconds_since(t0);
        details << " n=" << mesh->vertex_count() << " err=" << err << " t=" << static_cast<int>(dt * 1e3)
                << "ms;";
        if (!(err <= 1e-8) || dt > 60.0) pass = false;
    }
    report(1, "reconstruction round trip (err <= 1e-8, <= 60 s/case)", pass, details.str());
}

// 2. Affine exactness: identity and affine maps reproduced to <= 1e-10
//    normalized l2 from the representation plus boundary values.
void criterion_affine_exactness() {
    auto mesh = fixtures::cube_mesh(8);
    bool pass = true;
    std::ostringstream details;

    const Mapping ident = Mapping::identity(mesh);
    const Mapping ident_back =
        reconstruct(mesh, compute_representation(ident), BoundaryConditions::exact_boundary(ident), {});
    const double err_id = mapping_l2_error(ident_back, ident);
    pass &= err_id <= 1e-10;
    details << "identity err=" << err_id;

    Rng rng(101);
    for (int k = 0; k < 2; ++k) {
        const Mat3 A = fixtures::random_well_conditioned(rng);
        const Vec3 b = {rng.next_double(), rng.next_double(), rng.next_double()};
        std::vector<Vec3> images;
        for (const Vec3& p : mesh->vertices()) images.push_back(A * p + b);
        const Mapping affine(mesh, images);
        const Mapping back =
            reconstruct(mesh, compute_representation(affine), BoundaryConditions::exact_boundary(affine), {});
        const double err = mapping_l2_error(back, affine);
        pass &= err <= 1e-10;
        details << " affine" << k << " err=" << err;
    }
    report(2, "affine exactness (err <= 1e-10)", pass, details.str());
}

// 3. SPD suite on n <= 200: exact symmetry, constant null space, rank N-1,
//    masked matrices pass dense Cholesky.
void criterion_spd_suite() {
    auto mesh = fixtures::cube_mesh(4);  // n = 125
    const Mapping map = fixtures::smooth_cube_deformation(mesh, 0.07, 1);
    const GeneralizedLaplacian L = assemble(*mesh, compute_representation(map));
    bool pass = true;
    std::ostringstream details;

    bool symmetric = true;
    for (int r = 0; r < L.C.rows && symmetric; ++r)
        for (std::int64_t k = L.C.row_ptr[static_cast<std::size_t>(r)];
             k < L.C.row_ptr[static_cast<std::size_t>(r) + 1]; ++k)
            if (L.C.values[static_cast<std::size_t>(k)] != L.C.at(L.C.col_idx[static_cast<std::size_t>(k)], r)) {
                symmetric = false;
                break;
            }
    pass &= symmetric;
    details << "symmetric=" << (symmetric ? "exact" : "NO");

    std::vector<double> ones(static_cast<std::size_t>(L.n()), 1.0);
    double null_resid = 0;
    for (double v : L.C.multiply(ones)) null_resid = std::max(null_resid, std::abs(v));
    const double null_tol = 1e-10 * L.C.max_abs();
    pass &= null_resid <= null_tol;
    details << " |C1|=" << null_resid << " (tol " << null_tol << ")";

    const Eigen::MatrixXd dense = oracles::to_dense(L.C);
    const int rank = oracles::symmetric_rank(dense);
    pass &= rank == L.n() - 1;
    details << " rank=" << rank << "/" << L.n() - 1;

    const MaskedSystems sys = apply_boundary(L, BoundaryConditions::cube_faces(*mesh));
    for (const MaskedSystem* s : {&sys.u, &sys.v, &sys.w}) {
        double min_pivot = 0;
        const bool spd = oracles::cholesky_spd(oracles::to_dense(s->M), &min_pivot);
        pass &= spd && min_pivot > 0.0;
        details << " pivot=" << min_pivot;
    }
    report(3, "SPD suite (symmetry, null space, rank N-1, Cholesky)", pass, details.str());
}

// 4. Element identities on 1000 random tets, to 1e-12: the normal relation
//    Area nhat = -3 Vol (A,B,C) and the cross-product adjugate identity.
void criterion_element_identities() {
    Rng rng(211);
    bool pass = true;
    double worst_normal = 0, worst_adj = 0;
    for (int iter = 0; iter < 1000; ++iter) {
        auto tet = fixtures::random_tet(rng);
        const GradientCoefficients g = gradient_coefficients(*tet, 0);
        for (int k = 0; k < 4; ++k) {
            const Vec3 lhs = tet->face_normal(0, k) * tet->face_area(0, k);
            const Vec3 rhs = g.vertex_vector(k) * (-3.0 * tet->volume(0));
            worst_normal = std::max(worst_normal, norm(lhs - rhs));
        }

        const Mat3 M = fixtures::random_well_conditioned(rng);
        const Eigen::Matrix3d oracle = oracles::to_eigen(M).determinant() * oracles::to_eigen(M).inverse();
        const Mat3 adj = cross_adjugate(M);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) worst_adj = std::max(worst_adj, std::abs(adj(i, j) - oracle(i, j)));
    }
    pass = worst_normal <= 1e-12 && worst_adj <= 1e-12;
    std::ostringstream details;
    details << "normal relation max err=" << worst_normal << ", adjugate max err=" << worst_adj;
    report(4, "element identities on 1000 random tets (<= 1e-12)", pass, details.str());
}

// 5. Spectral operator: regular-tet weight 1/(12 sqrt 2) to 1e-12, exact L1=0,
//    dense-oracle agreement at n <= 100, V^T M V = I and completeness to 1e-8.
void criterion_spectral_operator() {
    bool pass = true;
    std::ostringstream details;

    const LaplaceBeltrami reg = build_laplace_beltrami(*fixtures::regular_tet());
    const double expected = 1.0 / (12.0 * std::sqrt(2.0));
    double weight_err = 0;
    for (const auto& e : reg.edges) weight_err = std::max(weight_err, std::abs(e.weight - expected));
    pass &= weight_err <= 1e-12;
    details << "regular-tet weight err=" << weight_err;

    auto mesh = fixtures::cube_mesh(3);  // n = 64 <= 100
    const LaplaceBeltrami lb = build_laplace_beltrami(*mesh);
    const int n = lb.n;

    std::vector<double> ones(static_cast<std::size_t>(n), 1.0), out(static_cast<std::size_t>(n));
    lb.apply(ones, out);
    bool exact_null = true;
    for (double v : out) exact_null &= v == 0.0;
    pass &= exact_null;
    details << " L1=" << (exact_null ? "0 exactly" : "NONZERO");

    const Spectrum sp = eigensolve(lb, n);
    Eigen::MatrixXd Ld = oracles::to_dense(lb.to_csr());
    Eigen::MatrixXd Md = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) Md(i, i) = lb.mass[static_cast<std::size_t>(i)];
    const auto oracle = oracles::generalized_eigen(Ld, Md);
    double eig_err = 0;
    const double scale = std::max(1.0, std::abs(oracle.eigenvalues[n - 1]));
    for (int i = 0; i < n; ++i)
        eig_err = std::max(eig_err, std::abs(sp.eigenvalues[static_cast<std::size_t>(i)] - oracle.eigenvalues[i]) / scale);
    pass &= eig_err <= 1e-8;
    details << " eig err=" << eig_err;

    double ortho_err = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double d = 0;
            for (int r = 0; r < n; ++r)
                d += sp.eigenvector(i)[static_cast<std::size_t>(r)] * lb.mass[static_cast<std::size_t>(r)] *
                     sp.eigenvector(j)[static_cast<std::size_t>(r)];
            ortho_err = std::max(ortho_err, std::abs(d - (i == j ? 1.0 : 0.0)));
        }
    pass &= ortho_err <= 1e-8;
    details << " VtMV err=" << ortho_err;

    Rng rng(307);
    std::vector<double> f(static_cast<std::size_t>(n));
    for (double& x : f) x = rng.next_double(-1, 1);
    const std::vector<double> back = synthesize(sp, project(sp, f));
    double comp_err = 0;
    for (int i = 0; i < n; ++i) comp_err = std::max(comp_err, std::abs(back[static_cast<std::size_t>(i)] - f[static_cast<std::size_t>(i)]));
    pass &= comp_err <= 1e-8;
    details << " completeness err=" << comp_err;

    report(5, "spectral operator (weights, null space, oracle, completeness)", pass, details.str());
}

// 6. Compression behavior: exact Parseval tail monotonicity, exact boundary
//    planes after decompression, full-spectrum MSE at the transfer floor,
//    MSE-vs-T curve emitted as CSV.
void criterion_compression_behavior() {
    auto mesh = fixtures::cube_mesh(8);  // n = 729
    const Mapping map = fixtures::smooth_cube_deformation(mesh, 0.07, 0);
    const LaplaceBeltrami lb = build_laplace_beltrami(*mesh);
    const int n = lb.n;
    const Spectrum sp = eigensolve(lb, n);
    const BoundaryConditions bc = BoundaryConditions::cube_faces(*mesh);
    bool pass = true;
    std::ostringstream details;

    // Parseval tails from the six projected components.
    const QCRep rep = compute_representation(map);
    std::array<std::vector<double>, 6> xi;
    std::vector<double> per_tet(rep.q.size());
    for (int comp = 0; comp < 6; ++comp) {
        for (std::size_t t = 0; t < rep.q.size(); ++t) per_tet[t] = rep.q[t][static_cast<std::size_t>(comp)];
        xi[static_cast<std::size_t>(comp)] = project(sp, tet_to_vertex(*mesh, per_tet));
    }
    auto tail = [&](int T) {
        double s = 0;
        for (const auto& coeff : xi)
            for (std::size_t i = static_cast<std::size_t>(T); i < coeff.size(); ++i) s += coeff[i] * coeff[i];
        return s;
    };
    bool monotone = true;
    double prev = tail(1);
    for (int T = 2; T <= n; ++T) {
        const double cur = tail(T);
        if (cur > prev) monotone = false;
        prev = cur;
    }
    pass &= monotone;
    details << "tail monotone=" << (monotone ? "yes" : "NO");

    // Transfer floor: reconstruct from the vertex-smoothed representation.
    QCRep smoothed;
    smoothed.q.assign(rep.q.size(), QVec{});
    for (int comp = 0; comp < 6; ++comp) {
        for (std::size_t t = 0; t < rep.q.size(); ++t) per_tet[t] = rep.q[t][static_cast<std::size_t>(comp)];
        const std::vector<double> back = vertex_to_tet(*mesh, tet_to_vertex(*mesh, per_tet));
        for (std::size_t t = 0; t < rep.q.size(); ++t) smoothed.q[t][static_cast<std::size_t>(comp)] = back[t];
    }
    const Mapping direct = reconstruct(mesh, smoothed, bc, {});
    const double floor_mse = mse(direct.images, map.images);

    const CompressedMapping full = compress(map, sp, static_cast<std::size_t>(n), bc);
    DecompressReport dreport;
    const Mapping decompressed = decompress(full, mesh, sp, {}, &dreport);
    const double full_mse = mse(decompressed.images, map.images);
    pass &= full_mse <= floor_mse + 1e-9;
    details << " full-T mse=" << full_mse << " floor=" << floor_mse;

    bool planes_exact = true;
    for (const Constraint& c : bc.u()) planes_exact &= decompressed.images[static_cast<std::size_t>(c.vertex)].x == c.value;
    for (const Constraint& c : bc.v()) planes_exact &= decompressed.images[static_cast<std::size_t>(c.vertex)].y == c.value;
    for (const Constraint& c : bc.w()) planes_exact &= decompressed.images[static_cast<std::size_t>(c.vertex)].z == c.value;
    pass &= planes_exact;
    details << " planes=" << (planes_exact ? "exact" : "VIOLATED");

    // Qualitative MSE-vs-T curve (no asserted numbers; mirrors the flat-then-
    // rising charts).
    std::ofstream csv("acceptance_mse.csv");
    csv << "T,mse,tail_energy\n";
    for (int T : {n, n / 2, n / 4, n / 8}) {
        const CompressedMapping c = compress(map, sp, static_cast<std::size_t>(T), bc);
        const Mapping d = decompress(c, mesh, sp, {});
        csv << T << ',' << format_double(mse(d.images, map.images)) << ',' << format_double(tail(T)) << '\n';
    }
    details << " csv=acceptance_mse.csv";

    report(6, "compression behavior (Parseval, boundary planes, transfer floor)", pass, details.str());
}

// 7. Interpolation: endpoint frames match the keyframes to 1e-8; every
//    intermediate frame of the mild deformation is fold-free.
void criterion_interpolation() {
    auto mesh = fixtures::cube_mesh(6);
    const Mapping map = fixtures::smooth_cube_deformation(mesh, 0.06, 1);
    const auto frames = generate_frames(map, InterpolationSchedule::uniform(5));
    bool pass = frames.size() == 5;
    std::ostringstream details;

    const double err0 = mapping_l2_error(frames.front().mapping, Mapping::identity(mesh));
    const double err1 = mapping_l2_error(frames.back().mapping, map);
    pass &= err0 <= 1e-8 && err1 <= 1e-8;
    details << "endpoint errs=" << err0 << "," << err1;

    int folded = 0;
    for (const Frame& f : frames) folded += static_cast<int>(f.folded.size());
    pass &= folded == 0;
    details << " folded tets across frames=" << folded;

    report(7, "interpolation endpoints and fold-freeness", pass, details.str());
}

// 8. Determinism: repeated runs with fixed seeds and thread counts produce
//    byte-identical QCR3 and QCZ3 containers.
void criterion_determinism() {
    fixtures::TempDir dir;
    auto mesh = fixtures::cube_mesh(5);
    const Mapping map = fixtures::smooth_cube_deformation(mesh, 0.07, 2);
    bool pass = true;
    std::ostringstream details;

    RepOptions one_thread, four_threads;
    four_threads.threads = 4;
    save_qcr3(dir.path("a.qcr3"), compute_representation(map, one_thread));
    save_qcr3(dir.path("b.qcr3"), compute_representation(map, one_thread));
    save_qcr3(dir.path("c.qcr3"), compute_representation(map, four_threads));
    const std::string a = fixtures::read_file(dir.path("a.qcr3"));
    pass &= a == fixtures::read_file(dir.path("b.qcr3"));
    details << "QCR3 repeat=" << (pass ? "identical" : "DIFFERS");
    const bool threads_same = a == fixtures::read_file(dir.path("c.qcr3"));
    pass &= threads_same;
    details << " across-threads=" << (threads_same ? "identical" : "DIFFERS");

    const LaplaceBeltrami lb = build_laplace_beltrami(*mesh);
    const Spectrum sp1 = eigensolve(lb, 40);
    const Spectrum sp2 = eigensolve(lb, 40);
    const BoundaryConditions bc = BoundaryConditions::cube_faces(*mesh);
    save_qcz3(dir.path("a.qcz3"), compress(map, sp1, 40, bc));
    save_qcz3(dir.path("b.qcz3"), compress(map, sp2, 40, bc));
    const bool qcz_same = fixtures::read_file(dir.path("a.qcz3")) == fixtures::read_file(dir.path("b.qcz3"));
    pass &= qcz_same;
    details << " QCZ3 repeat=" << (qcz_same ? "identical" : "DIFFERS");

    report(8, "determinism (byte-identical QCR3/QCZ3)", pass, details.str());
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    criterion_reconstruction_round_trip();
    criterion_affine_exactness();
    criterion_spd_suite();
    criterion_element_identities();
    criterion_spectral_operator();
    criterion_compression_behavior();
    criterion_interpolation();
    criterion_determinism();
    std::cout << (g_failures == 0 ? "ACCEPTANCE: all criteria passed" : "ACCEPTANCE: FAILURES PRESENT")
              << " (" << static_cast<int>(seconds_since(t0)) << " s)\n";
    return g_failures == 0 ? 0 : 1;
}
