#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qc3d/lbs3d.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

using namespace qc3d;

namespace {

// Dense symmetric check on the stored pattern: every (i, j) entry must have a
// bitwise-equal (j, i) partner.
bool exactly_symmetric(const CsrMatrix& C) {
    for (int r = 0; r < C.rows; ++r)
        for (std::int64_t k = C.row_ptr[static_cast<std::size_t>(r)]; k < C.row_ptr[static_cast<std::size_t>(r) + 1]; ++k) {
            const int c = C.col_idx[static_cast<std::size_t>(k)];
            if (C.values[static_cast<std::size_t>(k)] != C.at(c, r)) return false;
        }
    return true;
}

std::vector<double> coordinate_field(const TetMesh& mesh, int axis) {
    std::vector<double> f(static_cast<std::size_t>(mesh.vertex_count()));
    for (int i = 0; i < mesh.vertex_count(); ++i) f[static_cast<std::size_t>(i)] = mesh.vertex(i)[axis];
    return f;
}

}  // namespace

TEST_CASE("gradient coefficients of the reference tet") {
    auto tet = fixtures::reference_tet();
    const GradientCoefficients g = gradient_coefficients(*tet, 0);
    CHECK(g.a == std::array<double, 4>{-1, 1, 0, 0});
    CHECK(g.b == std::array<double, 4>{-1, 0, 1, 0});
    CHECK(g.c == std::array<double, 4>{-1, 0, 0, 1});
}

TEST_CASE("gradient coefficients halve under uniform scaling") {
    auto tet = fixtures::reference_tet();
    std::vector<Vec3> scaled;
    for (const Vec3& p : tet->vertices()) scaled.push_back(p * 2.0);
    const TetMesh big = TetMesh::build(std::move(scaled), tet->tets());
    const GradientCoefficients g = gradient_coefficients(big, 0);
    CHECK(g.a == std::array<double, 4>{-0.5, 0.5, 0, 0});
    CHECK(g.b == std::array<double, 4>{-0.5, 0, 0.5, 0});
    CHECK(g.c == std::array<double, 4>{-0.5, 0, 0, 0.5});
}

TEST_CASE("gradient of coordinate functions is the unit basis") {
    Rng rng(3);
    for (int iter = 0; iter < 100; ++iter) {
        auto tet = fixtures::random_tet(rng);
        const GradientCoefficients g = gradient_coefficients(*tet, 0);
        // Partition of unity: the stencil annihilates constants by definition.
        CHECK(std::abs(g.a[0] + g.a[1] + g.a[2] + g.a[3]) < 1e-12);
        for (int axis = 0; axis < 3; ++axis) {
            Vec3 grad{0, 0, 0};
            for (int k = 0; k < 4; ++k) {
                const double f = tet->vertex(tet->tet(0)[static_cast<std::size_t>(k)])[axis];
                grad += g.vertex_vector(k) * f;
            }
            Vec3 expected{0, 0, 0};
            expected[axis] = 1.0;
            CHECK(norm(grad - expected) < 1e-12);
        }
    }
}

TEST_CASE("cross-product adjugate identity") {
    CHECK(cross_adjugate(Mat3::identity()).max_abs_diff(Mat3::identity()) == 0.0);
    CHECK(cross_adjugate(Mat3::diagonal(2, 3, 4)).max_abs_diff(Mat3::diagonal(12, 8, 6)) == 0.0);

    Rng rng(9);
    for (int iter = 0; iter < 200; ++iter) {
        const Mat3 M = fixtures::random_well_conditioned(rng);
        const Eigen::Matrix3d expected = oracles::to_eigen(M).determinant() * oracles::to_eigen(M).inverse();
        const Mat3 adj = cross_adjugate(M);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) CHECK(adj(i, j) == doctest::Approx(expected(i, j)).epsilon(1e-10));
    }

    const Mat3 singular = {{{1, 0, 0}, {0, 1, 0}, {1, 1, 0}}};
    CHECK_THROWS_WITH_AS(cross_adjugate(singular), doctest::Contains("singular"), Error);
}

TEST_CASE("assembled element matrix of the reference tet") {
    auto tet = fixtures::reference_tet();
    const GeneralizedLaplacian L = assemble(*tet, QCRep::identity(1));
    // Vol grad^T grad with the reference stencil; entry (i2, i2) = 1/6.
    const double vol = 1.0 / 6.0;
    const GradientCoefficients g = gradient_coefficients(*tet, 0);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            const double expected = vol * dot(g.vertex_vector(a), g.vertex_vector(b));
            CHECK(L.C.at(a, b) == doctest::Approx(expected).epsilon(1e-14));
        }
    CHECK(L.C.at(1, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("assembly: constant and linear fields are discrete-harmonic inside") {
    auto mesh = fixtures::cube_mesh(3);
    const GeneralizedLaplacian L = assemble(*mesh, QCRep::identity(mesh->tet_count()));

    CHECK(exactly_symmetric(L.C));

    const double scale = L.C.max_abs();
    std::vector<double> ones(static_cast<std::size_t>(mesh->vertex_count()), 1.0);
    for (double v : L.C.multiply(ones)) CHECK(std::abs(v) <= 1e-10 * scale);

    std::vector<std::uint8_t> boundary(static_cast<std::size_t>(mesh->vertex_count()), 0);
    for (int v : mesh->boundary_vertex_set()) boundary[static_cast<std::size_t>(v)] = 1;
    for (int axis = 0; axis < 3; ++axis) {
        const std::vector<double> residual = L.C.multiply(coordinate_field(*mesh, axis));
        for (int i = 0; i < mesh->vertex_count(); ++i)
            if (!boundary[static_cast<std::size_t>(i)])
                CHECK(std::abs(residual[static_cast<std::size_t>(i)]) < 1e-13 * (1.0 + scale));
    }
}

TEST_CASE("rank of the generalized Laplacian is N-1") {
    for (int n : {2, 3}) {
        auto mesh = fixtures::cube_mesh(n);
        const Mapping map = fixtures::smooth_cube_deformation(mesh, 0.06, n);
        const GeneralizedLaplacian L = assemble(*mesh, compute_representation(map));
        const Eigen::MatrixXd dense = oracles::to_dense(L.C);
        CHECK(oracles::symmetric_rank(dense) == mesh->vertex_count() - 1);
        // The null space is the constants.
        Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh->vertex_count());
        CHECK((dense * ones).cwiseAbs().maxCoeff() < 1e-10 * dense.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("assembly validates the representation") {
    auto mesh = fixtures::cube_mesh(1);
    CHECK_THROWS_WITH_AS(assemble(*mesh, QCRep::identity(3)), doctest::Contains("records"), Error);
    QCRep bad = QCRep::identity(mesh->tet_count());
    bad.q[2] = {1, 0, 0, 1, 0, -1};  // not SPD
    CHECK_THROWS_WITH_AS(assemble(*mesh, bad), doctest::Contains("tet 2"), Error);
}

TEST_CASE("masking: all vertices constrained gives the identity system") {
    auto tet = fixtures::reference_tet();
    const GeneralizedLaplacian L = assemble(*tet, QCRep::identity(1));
    std::vector<Constraint> all = {{0, 5.0}, {1, 6.0}, {2, 7.0}, {3, 8.0}};
    const MaskedSystem sys = mask_system(L, all);
    CHECK(sys.M.nnz() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(sys.M.at(i, i) == 1.0);
        CHECK(sys.h[static_cast<std::size_t>(i)] == doctest::Approx(5.0 + i));
    }
    const CgResult r = solve_cg(sys.M, sys.h, {}, sys.x0);
    for (int i = 0; i < 4; ++i) CHECK(r.x[static_cast<std::size_t>(i)] == 5.0 + i);
}

TEST_CASE("masking one vertex yields an SPD matrix (dense Cholesky oracle)") {
    auto mesh = fixtures::cube_mesh(2);
    const Mapping map = fixtures::smooth_cube_deformation(mesh, 0.07, 1);
    const GeneralizedLaplacian L = assemble(*mesh, compute_representation(map));
    const MaskedSystem sys = mask_system(L, std::vector<Constraint>{{5, 1.0}});
    double min_pivot = 0;
    CHECK(oracles::cholesky_spd(oracles::to_dense(sys.M), &min_pivot));
    CHECK(min_pivot > 0.0);
}

TEST_CASE("masking is idempotent") {
    auto mesh = fixtures::cube_mesh(2);
    const GeneralizedLaplacian L = assemble(*mesh, QCRep::identity(mesh->tet_count()));
    std::vector<std::uint8_t> flags(static_cast<std::size_t>(mesh->vertex_count()), 0);
    for (int v : mesh->vertices_on_plane(0, 0.0)) flags[static_cast<std::size_t>(v)] = 1;
    const CsrMatrix once = mask_matrix(L.C, flags);
    const CsrMatrix twice = mask_matrix(once, flags);
    REQUIRE(once.nnz() == twice.nnz());
    CHECK(once.col_idx == twice.col_idx);
    CHECK(once.values == twice.values);
}

TEST_CASE("cube boundary set compiles to per-coordinate Dirichlet data") {
    auto mesh = fixtures::cube_mesh(3);
    const BoundaryConditions bc = BoundaryConditions::cube_faces(*mesh);
    // 16 vertices per face, two faces per axis.
    for (int a = 0; a < 3; ++a) CHECK(bc.coord[static_cast<std::size_t>(a)].size() == 32);
    for (int a = 0; a < 3; ++a)
        for (const Constraint& c : bc.coord[static_cast<std::size_t>(a)]) {
            CHECK((c.value == 0.0 || c.value == 1.0));
            CHECK(mesh->vertex(c.vertex)[a] == c.value);
        }
    // A corner vertex is constrained in all three coordinates.
    int corner = -1;
    for (int i = 0; i < mesh->vertex_count(); ++i) {
        const Vec3& p = mesh->vertex(i);
        if (p.x == 0.0 && p.y == 0.0 && p.z == 0.0) corner = i;
    }
    REQUIRE(corner >= 0);
    for (int a = 0; a < 3; ++a) {
        bool found = false;
        for (const Constraint& c : bc.coord[static_cast<std::size_t>(a)]) found |= c.vertex == corner;
        CHECK(found);
    }
}

TEST_CASE("empty or duplicate constraints are rejected") {
    auto tet = fixtures::reference_tet();
    const GeneralizedLaplacian L = assemble(*tet, QCRep::identity(1));
    CHECK_THROWS_WITH_AS(mask_system(L, std::vector<Constraint>{}), doctest::Contains("singular"), Error);
    CHECK_THROWS_WITH_AS(mask_system(L, std::vector<Constraint>{{1, 0.0}, {1, 1.0}}),
                         doctest::Contains("twice"), Error);
    BoundaryConditions bc;
    bc.u().push_back({0, 0.0});  // v, w stay empty
    CHECK_THROWS_WITH_AS(apply_boundary(L, bc), doctest::Contains("coordinate v"), Error);
}

TEST_CASE("conjugate gradient: identity system converges in one iteration") {
    std::vector<Triplet> trip;
    for (int i = 0; i < 5; ++i) trip.push_back({i, i, 1.0});
    const CsrMatrix I5 = CsrMatrix::from_triplets(5, 5, trip);
    const std::vector<double> h = {1, -2, 3, -4, 5};
    const CgResult r = solve_cg(I5, h);
    CHECK(r.iterations == 1);
    CHECK(r.x == h);
}

TEST_CASE("conjugate gradient: tiny diagonal system") {
    const CsrMatrix M = CsrMatrix::from_triplets(2, 2, {{0, 0, 2.0}, {1, 1, 3.0}});
    const CgResult r = solve_cg(M, std::vector<double>{2.0, 3.0});
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("conjugate gradient matches a dense factorization oracle") {
    auto mesh = fixtures::cube_mesh(3);  // n = 64
    const Mapping map = fixtures::smooth_cube_deformation(mesh, 0.06, 0);
    const GeneralizedLaplacian L = assemble(*mesh, compute_representation(map));
    const MaskedSystems sys = apply_boundary(L, BoundaryConditions::cube_faces(*mesh));

    const Eigen::MatrixXd dense = oracles::to_dense(sys.u.M);
    Eigen::VectorXd rhs(mesh->vertex_count());
    for (int i = 0; i < mesh->vertex_count(); ++i) rhs[i] = sys.u.h[static_cast<std::size_t>(i)];
    const Eigen::VectorXd expected = oracles::dense_solve_spd(dense, rhs);

    const CgResult r = solve_cg(sys.u.M, sys.u.h, {}, sys.u.x0);
    for (int i = 0; i < mesh->vertex_count(); ++i)
        CHECK(r.x[static_cast<std::size_t>(i)] == doctest::Approx(expected[i]).epsilon(1e-8));
}

TEST_CASE("conjugate gradient reports non-convergence with history") {
    auto mesh = fixtures::cube_mesh(2);
    const GeneralizedLaplacian L = assemble(*mesh, QCRep::identity(mesh->tet_count()));
    const MaskedSystems sys = apply_boundary(L, BoundaryConditions::cube_faces(*mesh));
    CgOptions opts;
    opts.max_iter = 2;
    opts.tol = 1e-15;
    try {
        solve_cg(sys.u.M, sys.u.h, opts);
        FAIL("expected SolveError");
    } catch (const SolveError& e) {
        CHECK(e.residual_history().size() == 2);
        CHECK(std::string(e.what()).find("no convergence") != std::string::npos);
    }
}

TEST_CASE("reconstruct reproduces affine maps exactly from their boundary") {
    auto mesh = fixtures::cube_mesh(3);
    Rng rng(43);
    const Mat3 A = fixtures::random_well_conditioned(rng);
    const Vec3 b = {0.3, -0.2, 0.1};
    std::vector<Vec3> images;
    for (const Vec3& p : mesh->vertices()) images.push_back(A * p + b);
    const Mapping affine(mesh, images);

    ReconstructReport report;
    const Mapping rebuilt = reconstruct(mesh, compute_representation(affine),
                                        BoundaryConditions::exact_boundary(affine), {}, &report);
    CHECK(mapping_l2_error(rebuilt, affine) <= 1e-10);
    // Constrained vertices are bit-exact.
    for (int v : mesh->boundary_vertex_set()) {
        CHECK(rebuilt.images[static_cast<std::size_t>(v)].x == affine.images[static_cast<std::size_t>(v)].x);
        CHECK(rebuilt.images[static_cast<std::size_t>(v)].y == affine.images[static_cast<std::size_t>(v)].y);
        CHECK(rebuilt.images[static_cast<std::size_t>(v)].z == affine.images[static_cast<std::size_t>(v)].z);
    }
}

TEST_CASE("reconstruct round trip on a smooth deformation") {
    auto mesh = fixtures::cube_mesh(5);
    const Mapping map = fixtures::smooth_cube_deformation(mesh, 0.08, 0);
    ReconstructReport report;
    const Mapping rebuilt =
        reconstruct(mesh, compute_representation(map), BoundaryConditions::exact_boundary(map), {}, &report);
    CHECK(mapping_l2_error(rebuilt, map) <= 1e-8);
    CHECK(report.max_flux_residual < 1e-8);
    CHECK(report.cg_iterations[0] > 0);
}

TEST_CASE("dilation matrix scales linearly with P, and the solve follows") {
    Rng rng(47);
    const double s = 2.7;
    for (int iter = 0; iter < 50; ++iter) {
        const Mat3 M = fixtures::random_well_conditioned(rng);
        const Mat3 P = M.transpose() * M;
        const Mat3 A1 = build_dilation_matrix(matrix_to_q(P));
        const Mat3 As = build_dilation_matrix(matrix_to_q(P * s));
        CHECK(As.max_abs_diff(A1 * s) < 1e-10 * (1.0 + A1.frobenius()));
    }

    auto mesh = fixtures::cube_mesh(3);
    const Mapping map = fixtures::smooth_cube_deformation(mesh, 0.07, 2);
    std::vector<Vec3> scaled;
    for (const Vec3& p : map.images) scaled.push_back(p * s);
    const Mapping scaled_map(mesh, scaled);

    const Mapping rebuilt = reconstruct(mesh, compute_representation(scaled_map),
                                        BoundaryConditions::exact_boundary(scaled_map), {});
    CHECK(mapping_l2_error(rebuilt, scaled_map) <= 1e-8);
}

TEST_CASE("flux residual vanishes at unconstrained vertices after a solve") {
    auto mesh = fixtures::cube_mesh(4);
    const Mapping map = fixtures::smooth_cube_deformation(mesh, 0.06, 1);
    const QCRep rep = compute_representation(map);
    const BoundaryConditions bc = BoundaryConditions::exact_boundary(map);
    ReconstructReport report;
    const Mapping rebuilt = reconstruct(mesh, rep, bc, {}, &report);

    const GeneralizedLaplacian L = assemble(*mesh, rep);
    CHECK(max_flux_residual(L, *mesh, rebuilt, bc) == doctest::Approx(report.max_flux_residual));
    CHECK(report.max_flux_residual < 1e-9);
}

TEST_CASE("matrix market export is readable") {
    auto tet = fixtures::reference_tet();
    const GeneralizedLaplacian L = assemble(*tet, QCRep::identity(1));
    fixtures::TempDir dir;
    L.C.save_matrix_market(dir.path("c.mtx"));

    std::ifstream in(dir.path("c.mtx"));
    std::string header;
    std::getline(in, header);
    CHECK(header == "%%MatrixMarket matrix coordinate real general");
    int rows, cols;
    std::int64_t nnz;
    in >> rows >> cols >> nnz;
    CHECK(rows == 4);
    CHECK(cols == 4);
    CHECK(nnz == L.C.nnz());
    for (std::int64_t k = 0; k < nnz; ++k) {
        int r, c;
        double v;
        in >> r >> c >> v;
        CHECK(L.C.at(r - 1, c - 1) == v);
    }
}
