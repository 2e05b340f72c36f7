#include "qc3d/lbs3d.hpp"

#include "qc3d/util.hpp"

#include <algorithm>
#include <cmath>

namespace qc3d {

GradientCoefficients gradient_coefficients(const TetMesh& mesh, int tet) {
    const Mat3 Xinv = inverse(mesh.edge_matrix(tet));
    GradientCoefficients g;
    for (int k = 1; k < 4; ++k) {
        g.a[static_cast<std::size_t>(k)] = Xinv(k - 1, 0);
        g.b[static_cast<std::size_t>(k)] = Xinv(k - 1, 1);
        g.c[static_cast<std::size_t>(k)] = Xinv(k - 1, 2);
    }
    g.a[0] = -(g.a[1] + g.a[2] + g.a[3]);
    g.b[0] = -(g.b[1] + g.b[2] + g.b[3]);
    g.c[0] = -(g.c[1] + g.c[2] + g.c[3]);
    return g;
}

Vec3 GeneralizedLaplacian::tet_gradient(int t, std::span<const double> f, const TetMesh& mesh) const {
    const auto& T = mesh.tet(t);
    const GradientCoefficients& g = grad[static_cast<std::size_t>(t)];
    Vec3 out{0, 0, 0};
    for (int k = 0; k < 4; ++k) {
        const double fk = f[static_cast<std::size_t>(T[static_cast<std::size_t>(k)])];
        out.x += g.a[static_cast<std::size_t>(k)] * fk;
        out.y += g.b[static_cast<std::size_t>(k)] * fk;
        out.z += g.c[static_cast<std::size_t>(k)] * fk;
    }
    return out;
}

GeneralizedLaplacian assemble(const TetMesh& mesh, const QCRep& rep) {
    const int m = mesh.tet_count();
    const int n = mesh.vertex_count();
    if (rep.tet_count() != m)
        throw Error(ErrorCode::invalid_argument, "representation has " + std::to_string(rep.tet_count()) +
                                                     " records for " + std::to_string(m) + " tets");

    GeneralizedLaplacian L;
    L.grad.resize(static_cast<std::size_t>(m));
    L.volume.resize(static_cast<std::size_t>(m));
    L.dilation.resize(static_cast<std::size_t>(m));

    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(m) * 16);

    for (int t = 0; t < m; ++t) {
        const GradientCoefficients g = gradient_coefficients(mesh, t);
        L.grad[static_cast<std::size_t>(t)] = g;
        L.volume[static_cast<std::size_t>(t)] = mesh.volume(t);
        Mat3 A;
        try {
            A = build_dilation_matrix(rep.q[static_cast<std::size_t>(t)]);
        } catch (const Error& e) {
            throw Error(e.code(), "tet " + std::to_string(t) + ": " + e.what());
        }
        L.dilation[static_cast<std::size_t>(t)] = A;

        // Element matrix E[a][b] = Vol g_a . (A g_b); computed once per
        // unordered pair and mirrored so the assembled C is exactly symmetric.
        const auto& T = mesh.tet(t);
        const double vol = mesh.volume(t);
        Vec3 Ag[4];
        for (int k = 0; k < 4; ++k) Ag[k] = A * g.vertex_vector(k);
        for (int a = 0; a < 4; ++a) {
            for (int b = a; b < 4; ++b) {
                const double e = vol * dot(g.vertex_vector(a), Ag[b]);
                triplets.push_back({T[static_cast<std::size_t>(a)], T[static_cast<std::size_t>(b)], e});
                if (b != a) triplets.push_back({T[static_cast<std::size_t>(b)], T[static_cast<std::size_t>(a)], e});
            }
        }
    }
    L.C = CsrMatrix::from_triplets(n, n, std::move(triplets));
    return L;
}

BoundaryConditions BoundaryConditions::cube_faces(const TetMesh& mesh, double tol) {
    BoundaryConditions bc;
    for (int axis = 0; axis < 3; ++axis) {
        for (double plane : {0.0, 1.0}) {
            for (int v : mesh.vertices_on_plane(axis, plane, tol))
                bc.coord[static_cast<std::size_t>(axis)].push_back({v, plane});
        }
    }
    return bc;
}

BoundaryConditions BoundaryConditions::exact_boundary(const Mapping& mapping) {
    BoundaryConditions bc;
    for (int v : mapping.mesh->boundary_vertex_set()) {
        const Vec3& s = mapping.images[static_cast<std::size_t>(v)];
        bc.coord[0].push_back({v, s.x});
        bc.coord[1].push_back({v, s.y});
        bc.coord[2].push_back({v, s.z});
    }
    return bc;
}

BoundaryConditions BoundaryConditions::blended_boundary(const Mapping& mapping, double t) {
    BoundaryConditions bc;
    for (int v : mapping.mesh->boundary_vertex_set()) {
        const Vec3 s = mapping.mesh->vertex(v) * (1.0 - t) + mapping.images[static_cast<std::size_t>(v)] * t;
        bc.coord[0].push_back({v, s.x});
        bc.coord[1].push_back({v, s.y});
        bc.coord[2].push_back({v, s.z});
    }
    return bc;
}

CsrMatrix mask_matrix(const CsrMatrix& C, std::span<const std::uint8_t> constrained) {
    if (constrained.size() != static_cast<std::size_t>(C.rows))
        throw Error(ErrorCode::invalid_argument, "mask_matrix: flag vector size mismatch");
    CsrMatrix M;
    M.rows = M.cols = C.rows;
    M.row_ptr.assign(static_cast<std::size_t>(C.rows) + 1, 0);
    M.col_idx.reserve(static_cast<std::size_t>(C.nnz()));
    M.values.reserve(static_cast<std::size_t>(C.nnz()));
    for (int r = 0; r < C.rows; ++r) {
        if (constrained[static_cast<std::size_t>(r)]) {
            M.col_idx.push_back(r);
            M.values.push_back(1.0);
        } else {
            for (std::int64_t k = C.row_ptr[static_cast<std::size_t>(r)]; k < C.row_ptr[static_cast<std::size_t>(r) + 1]; ++k) {
                const int c = C.col_idx[static_cast<std::size_t>(k)];
                if (!constrained[static_cast<std::size_t>(c)]) {
                    M.col_idx.push_back(c);
                    M.values.push_back(C.values[static_cast<std::size_t>(k)]);
                }
            }
        }
        M.row_ptr[static_cast<std::size_t>(r) + 1] = static_cast<std::int64_t>(M.values.size());
    }
    return M;
}

MaskedSystem mask_system(const GeneralizedLaplacian& L, std::span<const Constraint> constraints) {
    const int n = L.n();
    if (constraints.empty())
        throw Error(ErrorCode::invalid_argument,
                    "no boundary constraints: the system is singular (rank N-1)");

    MaskedSystem sys;
    sys.constrained.assign(static_cast<std::size_t>(n), 0);
    sys.x0.assign(static_cast<std::size_t>(n), 0.0);
    for (const Constraint& c : constraints) {
        if (c.vertex < 0 || c.vertex >= n)
            throw Error(ErrorCode::invalid_argument, "constraint vertex " + std::to_string(c.vertex) + " out of range");
        if (sys.constrained[static_cast<std::size_t>(c.vertex)])
            throw Error(ErrorCode::invalid_argument,
                        "vertex " + std::to_string(c.vertex) + " constrained twice for the same coordinate");
        sys.constrained[static_cast<std::size_t>(c.vertex)] = 1;
        sys.x0[static_cast<std::size_t>(c.vertex)] = c.value;
    }

    // h = -C v with the constrained entries overwritten by their targets.
    sys.h = L.C.multiply(sys.x0);
    for (double& v : sys.h) v = -v;
    for (const Constraint& c : constraints) sys.h[static_cast<std::size_t>(c.vertex)] = c.value;

    sys.M = mask_matrix(L.C, sys.constrained);
    return sys;
}

MaskedSystems apply_boundary(const GeneralizedLaplacian& L, const BoundaryConditions& bc) {
    const char* names[3] = {"u", "v", "w"};
    for (int a = 0; a < 3; ++a)
        if (bc.coord[static_cast<std::size_t>(a)].empty())
            throw Error(ErrorCode::invalid_argument,
                        std::string("no boundary constraints for coordinate ") + names[a] +
                            ": the masked system would be singular");
    return {mask_system(L, bc.coord[0]), mask_system(L, bc.coord[1]), mask_system(L, bc.coord[2])};
}

Mapping reconstruct(std::shared_ptr<const TetMesh> mesh, const QCRep& rep, const BoundaryConditions& bc,
                    const CgOptions& opts, ReconstructReport* report) {
    const GeneralizedLaplacian L = assemble(*mesh, rep);
    const MaskedSystems sys = apply_boundary(L, bc);

    const MaskedSystem* systems[3] = {&sys.u, &sys.v, &sys.w};
    std::vector<Vec3> images(static_cast<std::size_t>(mesh->vertex_count()));
    ReconstructReport rep_out;
    for (int a = 0; a < 3; ++a) {
        const CgResult r = solve_cg(systems[a]->M, systems[a]->h, opts, systems[a]->x0);
        rep_out.cg_iterations[static_cast<std::size_t>(a)] = r.iterations;
        rep_out.cg_residual[static_cast<std::size_t>(a)] = r.relative_residual;
        for (std::size_t i = 0; i < r.x.size(); ++i) images[i][a] = r.x[i];
    }

    Mapping out(std::move(mesh), std::move(images));
    rep_out.max_flux_residual = max_flux_residual(L, *out.mesh, out, bc);
    if (report) *report = rep_out;
    return out;
}

double max_flux_residual(const GeneralizedLaplacian& L, const TetMesh& mesh, const Mapping& mapping,
                         const BoundaryConditions& bc) {
    const int n = mesh.vertex_count();
    std::vector<double> f(static_cast<std::size_t>(n));
    double worst = 0.0;
    for (int a = 0; a < 3; ++a) {
        for (int i = 0; i < n; ++i) f[static_cast<std::size_t>(i)] = mapping.images[static_cast<std::size_t>(i)][a];
        std::vector<std::uint8_t> constrained(static_cast<std::size_t>(n), 0);
        for (const Constraint& c : bc.coord[static_cast<std::size_t>(a)])
            constrained[static_cast<std::size_t>(c.vertex)] = 1;

        std::vector<double> flux(static_cast<std::size_t>(n), 0.0);
        for (int t = 0; t < mesh.tet_count(); ++t) {
            const Vec3 Agrad = L.dilation[static_cast<std::size_t>(t)] * L.tet_gradient(t, f, mesh);
            const auto& T = mesh.tet(t);
            for (int k = 0; k < 4; ++k) {
                const double contrib = -3.0 * L.volume[static_cast<std::size_t>(t)] *
                                       dot(L.grad[static_cast<std::size_t>(t)].vertex_vector(k), Agrad);
                flux[static_cast<std::size_t>(T[static_cast<std::size_t>(k)])] += contrib;
            }
        }
        for (int i = 0; i < n; ++i)
            if (!constrained[static_cast<std::size_t>(i)]) worst = std::max(worst, std::abs(flux[static_cast<std::size_t>(i)]));
    }
    return worst;
}

double mapping_l2_error(std::span<const Vec3> a, std::span<const Vec3> b) {
    if (a.size() != b.size()) throw Error(ErrorCode::invalid_argument, "image count mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Vec3 d = a[i] - b[i];
        s += dot(d, d);
    }
    return std::sqrt(s) / static_cast<double>(a.size());
}

double mapping_l2_error(const Mapping& a, const Mapping& b) {
    return mapping_l2_error(std::span<const Vec3>(a.images), std::span<const Vec3>(b.images));
}

}  // namespace qc3d
