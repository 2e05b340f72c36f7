#include "qc3d/spectral.hpp"

#include "qc3d/util.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

namespace qc3d {

namespace {

// Interior dihedral angle of a tet at the edge (pi, pj), with pk, pl the other
// two vertices: the angle between the components of (pk - pi) and (pl - pi)
// orthogonal to the edge. atan2 of the cross/dot pair keeps it in (0, pi).
double dihedral_angle(const Vec3& pi, const Vec3& pj, const Vec3& pk, const Vec3& pl) {
    const Vec3 e = normalized(pj - pi);
    Vec3 u = pk - pi;
    Vec3 v = pl - pi;
    u -= e * dot(u, e);
    v -= e * dot(v, e);
    return std::atan2(norm(cross(u, v)), dot(u, v));
}

}  // namespace

LaplaceBeltrami build_laplace_beltrami(const TetMesh& mesh) {
    const int n = mesh.vertex_count();
    LaplaceBeltrami lb;
    lb.n = n;
    lb.mesh_hash = mesh.content_hash();

    lb.mass.assign(static_cast<std::size_t>(n), 0.0);
    for (int t = 0; t < mesh.tet_count(); ++t) {
        const double q = 0.25 * mesh.volume(t);
        for (int v : mesh.tet(t)) lb.mass[static_cast<std::size_t>(v)] += q;
    }

    // The six edges of a tet and the opposite pair for each.
    static const int kEdge[6][4] = {{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2},
                                    {1, 2, 0, 3}, {1, 3, 0, 2}, {2, 3, 0, 1}};
    std::map<std::pair<int, int>, double> weights;
    for (int t = 0; t < mesh.tet_count(); ++t) {
        const auto& T = mesh.tet(t);
        for (const auto& e : kEdge) {
            const Vec3& pi = mesh.vertex(T[static_cast<std::size_t>(e[0])]);
            const Vec3& pj = mesh.vertex(T[static_cast<std::size_t>(e[1])]);
            const Vec3& pk = mesh.vertex(T[static_cast<std::size_t>(e[2])]);
            const Vec3& pl = mesh.vertex(T[static_cast<std::size_t>(e[3])]);
            const double theta = dihedral_angle(pi, pj, pk, pl);
            if (theta < 1e-12 || theta > M_PI - 1e-12)
                throw Error(ErrorCode::numerical,
                            "tet " + std::to_string(t) + ": degenerate dihedral angle " + format_double(theta));
            const double len_opp = norm(pl - pk);
            const double w = len_opp / (6.0 * std::tan(theta));
            int a = T[static_cast<std::size_t>(e[0])], b = T[static_cast<std::size_t>(e[1])];
            if (a > b) std::swap(a, b);
            weights[{a, b}] += w;
        }
    }

    lb.edges.reserve(weights.size());
    for (const auto& [key, w] : weights) lb.edges.push_back({key.first, key.second, w});
    return lb;
}

void LaplaceBeltrami::apply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != static_cast<std::size_t>(n) || y.size() != static_cast<std::size_t>(n))
        throw Error(ErrorCode::invalid_argument, "LaplaceBeltrami::apply size mismatch");
    std::fill(y.begin(), y.end(), 0.0);
    for (const Edge& e : edges) {
        const double d = e.weight * (x[static_cast<std::size_t>(e.i)] - x[static_cast<std::size_t>(e.j)]);
        y[static_cast<std::size_t>(e.i)] += d;
        y[static_cast<std::size_t>(e.j)] -= d;
    }
}

CsrMatrix LaplaceBeltrami::to_csr() const {
    std::vector<Triplet> triplets;
    triplets.reserve(edges.size() * 4);
    for (const Edge& e : edges) {
        triplets.push_back({e.i, e.j, -e.weight});
        triplets.push_back({e.j, e.i, -e.weight});
        triplets.push_back({e.i, e.i, e.weight});
        triplets.push_back({e.j, e.j, e.weight});
    }
    return CsrMatrix::from_triplets(n, n, std::move(triplets));
}

double LaplaceBeltrami::total_mass() const {
    double s = 0.0;
    for (double m : mass) s += m;
    return s;
}

// --- symmetric tridiagonal QL (with implicit shifts) ------------------------

namespace {

// d: diagonal, e: subdiagonal (e[i] couples i and i+1; e[n-1] unused on input).
// z: z_rows x n row-major; the caller seeds the rows it wants tracked (the
// identity for full eigenvectors, a single unit row for residual bounds) and
// the rotations are applied to those rows only. Eigenvalues land in d,
// ascending after the final sort.
void tql2(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z, int n, int z_rows) {
    if (n == 1) return;
    for (int i = 1; i < n; ++i) e[static_cast<std::size_t>(i) - 1] = e[static_cast<std::size_t>(i)];
    e[static_cast<std::size_t>(n) - 1] = 0.0;

    double f = 0.0, tst1 = 0.0;
    const double eps = DBL_EPSILON;
    for (int l = 0; l < n; ++l) {
        tst1 = std::max(tst1, std::abs(d[static_cast<std::size_t>(l)]) + std::abs(e[static_cast<std::size_t>(l)]));
        int m = l;
        while (m < n && std::abs(e[static_cast<std::size_t>(m)]) > eps * tst1) ++m;

        if (m > l) {
            int iter = 0;
            do {
                if (++iter > 64)
                    throw Error(ErrorCode::numerical, "tridiagonal QL failed to converge");
                double g = d[static_cast<std::size_t>(l)];
                double p = (d[static_cast<std::size_t>(l) + 1] - g) / (2.0 * e[static_cast<std::size_t>(l)]);
                double r = std::hypot(p, 1.0);
                if (p < 0) r = -r;
                d[static_cast<std::size_t>(l)] = e[static_cast<std::size_t>(l)] / (p + r);
                d[static_cast<std::size_t>(l) + 1] = e[static_cast<std::size_t>(l)] * (p + r);
                const double dl1 = d[static_cast<std::size_t>(l) + 1];
                double h = g - d[static_cast<std::size_t>(l)];
                for (int i = l + 2; i < n; ++i) d[static_cast<std::size_t>(i)] -= h;
                f += h;

                p = d[static_cast<std::size_t>(m)];
                double c = 1.0, c2 = c, c3 = c;
                const double el1 = e[static_cast<std::size_t>(l) + 1];
                double s = 0.0, s2 = 0.0;
                for (int i = m - 1; i >= l; --i) {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[static_cast<std::size_t>(i)];
                    h = c * p;
                    r = std::hypot(p, e[static_cast<std::size_t>(i)]);
                    e[static_cast<std::size_t>(i) + 1] = s * r;
                    s = e[static_cast<std::size_t>(i)] / r;
                    c = p / r;
                    p = c * d[static_cast<std::size_t>(i)] - s * g;
                    d[static_cast<std::size_t>(i) + 1] = h + s * (c * g + s * d[static_cast<std::size_t>(i)]);
                    for (int kk = 0; kk < z_rows; ++kk) {
                        const std::size_t base = static_cast<std::size_t>(kk) * static_cast<std::size_t>(n);
                        h = z[base + static_cast<std::size_t>(i) + 1];
                        z[base + static_cast<std::size_t>(i) + 1] = s * z[base + static_cast<std::size_t>(i)] + c * h;
                        z[base + static_cast<std::size_t>(i)] = c * z[base + static_cast<std::size_t>(i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[static_cast<std::size_t>(l)] / dl1;
                e[static_cast<std::size_t>(l)] = s * p;
                d[static_cast<std::size_t>(l)] = c * p;
            } while (std::abs(e[static_cast<std::size_t>(l)]) > eps * tst1);
        }
        d[static_cast<std::size_t>(l)] += f;
        e[static_cast<std::size_t>(l)] = 0.0;
    }

    // Sort ascending, reordering eigenvector columns with the values.
    for (int i = 0; i < n - 1; ++i) {
        int kmin = i;
        for (int j = i + 1; j < n; ++j)
            if (d[static_cast<std::size_t>(j)] < d[static_cast<std::size_t>(kmin)]) kmin = j;
        if (kmin != i) {
            std::swap(d[static_cast<std::size_t>(i)], d[static_cast<std::size_t>(kmin)]);
            for (int kk = 0; kk < z_rows; ++kk) {
                const std::size_t base = static_cast<std::size_t>(kk) * static_cast<std::size_t>(n);
                std::swap(z[base + static_cast<std::size_t>(i)], z[base + static_cast<std::size_t>(kmin)]);
            }
        }
    }
}

}  // namespace

Spectrum eigensolve(const LaplaceBeltrami& lb, int k) {
    const int n = lb.n;
    if (k < 1 || k > n)
        throw Error(ErrorCode::invalid_argument,
                    "eigensolve: k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    for (double m : lb.mass)
        if (!(m > 0.0)) throw Error(ErrorCode::numerical, "eigensolve: mass matrix has a non-positive entry");

    std::vector<double> inv_sqrt_m(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) inv_sqrt_m[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(lb.mass[static_cast<std::size_t>(i)]);

    // B x = M^-1/2 L M^-1/2 x
    std::vector<double> scratch(static_cast<std::size_t>(n)), scratch2(static_cast<std::size_t>(n));
    auto apply_B = [&](std::span<const double> x, std::span<double> y) {
        for (int i = 0; i < n; ++i) scratch[static_cast<std::size_t>(i)] = inv_sqrt_m[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
        lb.apply(scratch, scratch2);
        for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = inv_sqrt_m[static_cast<std::size_t>(i)] * scratch2[static_cast<std::size_t>(i)];
    };

    Rng rng(0x3D5A61C7u);  // fixed: identical spectra on every run
    auto random_unit = [&](std::span<const std::vector<double>> basis) {
        std::vector<double> v(static_cast<std::size_t>(n));
        for (int attempt = 0; attempt < 64; ++attempt) {
            for (double& x : v) x = rng.next_double() - 0.5;
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& b : basis) {
                    double proj = 0.0;
                    for (int i = 0; i < n; ++i) proj += b[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
                    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] -= proj * b[static_cast<std::size_t>(i)];
                }
            double nrm = 0.0;
            for (double x : v) nrm += x * x;
            nrm = std::sqrt(nrm);
            if (nrm > 1e-8) {
                for (double& x : v) x /= nrm;
                return v;
            }
        }
        throw Error(ErrorCode::numerical, "eigensolve: failed to draw a basis-orthogonal start vector");
    };

    std::vector<std::vector<double>> basis;  // Lanczos vectors v_1..v_j
    basis.reserve(static_cast<std::size_t>(std::min(n, std::max(2 * k + 16, 64))));
    std::vector<double> alpha, beta;  // alpha_j, beta_j (beta_j couples v_j, v_j+1)
    basis.push_back(random_unit({}));

    std::vector<double> w(static_cast<std::size_t>(n));
    const double breakdown_tol = 1e-13;
    const double ritz_tol = 1e-11;

    auto converged_count = [&](int j) {
        // Eigenvalues of the current j x j tridiagonal plus only the last row
        // of its eigenvector matrix: enough for the residual bounds
        // |beta_j s_ji| without the O(j^3) full accumulation.
        std::vector<double> d(alpha.begin(), alpha.end());
        std::vector<double> e(static_cast<std::size_t>(j), 0.0);
        for (int i = 0; i + 1 < j; ++i) e[static_cast<std::size_t>(i) + 1] = beta[static_cast<std::size_t>(i)];
        std::vector<double> last_row(static_cast<std::size_t>(j), 0.0);
        last_row[static_cast<std::size_t>(j) - 1] = 1.0;
        tql2(d, e, last_row, j, 1);
        const double beta_last = beta.empty() ? 0.0 : std::abs(beta.back());
        int ok = 0;
        const int want = std::min(k, j);
        for (int i = 0; i < want; ++i) {
            const double bound = beta_last * std::abs(last_row[static_cast<std::size_t>(i)]);
            if (bound <= ritz_tol * std::max(1.0, std::abs(d[static_cast<std::size_t>(i)]))) ++ok;
        }
        return ok;
    };

    int j = 0;
    bool complete = false;
    while (true) {
        const std::vector<double>& vj = basis.back();
        apply_B(vj, w);
        double a = 0.0;
        for (int i = 0; i < n; ++i) a += vj[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
        alpha.push_back(a);
        ++j;

        if (j == n) {
            complete = true;
        } else {
            for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] -= a * vj[static_cast<std::size_t>(i)];
            if (j >= 2) {
                const std::vector<double>& vprev = basis[static_cast<std::size_t>(j) - 2];
                const double b = beta.back();
                for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] -= b * vprev[static_cast<std::size_t>(i)];
            }
            // Full reorthogonalization, two passes.
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& vb : basis) {
                    double proj = 0.0;
                    for (int i = 0; i < n; ++i) proj += vb[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
                    for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] -= proj * vb[static_cast<std::size_t>(i)];
                }
            double b = 0.0;
            for (int i = 0; i < n; ++i) b += w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
            b = std::sqrt(b);

            if (b < breakdown_tol) {
                // Invariant subspace found: deflate and continue in a fresh
                // random direction orthogonal to the current basis.
                beta.push_back(0.0);
                basis.push_back(random_unit(basis));
            } else {
                beta.push_back(b);
                std::vector<double> vnext(static_cast<std::size_t>(n));
                for (int i = 0; i < n; ++i) vnext[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)] / b;
                basis.push_back(std::move(vnext));
            }
        }

        // Do not stop right at j = k: repeated eigenvalues surface a few
        // iterations after their first copy, so keep an exploration margin.
        const int j_min = std::min(n, k + 8);
        const bool checkpoint = complete || (j >= std::max(j_min, std::min(n, 2 * k + 16)) && (j % 32 == 0));
        if (checkpoint && j >= j_min && converged_count(j) >= std::min(k, j)) break;
        if (complete) break;
    }

    // Full tridiagonal eigendecomposition once, for the Ritz vectors.
    std::vector<double> ritz_values(alpha.begin(), alpha.end());
    std::vector<double> tri_sub(static_cast<std::size_t>(j), 0.0);
    for (int i = 0; i + 1 < j; ++i) tri_sub[static_cast<std::size_t>(i) + 1] = beta[static_cast<std::size_t>(i)];
    std::vector<double> tri_vec(static_cast<std::size_t>(j) * static_cast<std::size_t>(j), 0.0);
    for (int i = 0; i < j; ++i)
        tri_vec[static_cast<std::size_t>(i) * static_cast<std::size_t>(j) + static_cast<std::size_t>(i)] = 1.0;
    tql2(ritz_values, tri_sub, tri_vec, j, j);

    // Ritz vectors of the k smallest values: columns of basis * tri_vec.
    Spectrum sp;
    sp.n = n;
    sp.k = k;
    sp.mesh_hash = lb.mesh_hash;
    sp.mass = lb.mass;
    sp.eigenvalues.assign(ritz_values.begin(), ritz_values.begin() + k);
    sp.eigenvectors.assign(static_cast<std::size_t>(k) * static_cast<std::size_t>(n), 0.0);
    for (int col = 0; col < k; ++col) {
        double* out = sp.eigenvectors.data() + static_cast<std::size_t>(col) * static_cast<std::size_t>(n);
        for (int row = 0; row < j; ++row) {
            const double s = tri_vec[static_cast<std::size_t>(row) * static_cast<std::size_t>(j) + static_cast<std::size_t>(col)];
            if (s == 0.0) continue;
            const std::vector<double>& vb = basis[static_cast<std::size_t>(row)];
            for (int i = 0; i < n; ++i) out[i] += s * vb[static_cast<std::size_t>(i)];
        }
        // Back to the generalized problem and M-normalize.
        for (int i = 0; i < n; ++i) out[i] *= inv_sqrt_m[static_cast<std::size_t>(i)];
        double mnorm = 0.0;
        for (int i = 0; i < n; ++i) mnorm += out[i] * out[i] * lb.mass[static_cast<std::size_t>(i)];
        mnorm = std::sqrt(mnorm);
        if (!(mnorm > 0.0)) throw Error(ErrorCode::numerical, "eigensolve: zero Ritz vector");
        for (int i = 0; i < n; ++i) out[i] /= mnorm;
        // Deterministic sign: largest-magnitude entry positive.
        int lead = 0;
        for (int i = 1; i < n; ++i)
            if (std::abs(out[i]) > std::abs(out[lead])) lead = i;
        if (out[lead] < 0.0)
            for (int i = 0; i < n; ++i) out[i] = -out[i];
    }

    // Final certificate on the generalized problem itself.
    std::vector<double> Lnu(static_cast<std::size_t>(n));
    std::string bad;
    for (int i = 0; i < k; ++i) {
        lb.apply(sp.eigenvector(i), Lnu);
        double num = 0.0, den = 0.0;
        for (int r = 0; r < n; ++r) {
            const double mres = sp.eigenvalues[static_cast<std::size_t>(i)] * lb.mass[static_cast<std::size_t>(r)] *
                                sp.eigenvector(i)[static_cast<std::size_t>(r)];
            num += (Lnu[static_cast<std::size_t>(r)] - mres) * (Lnu[static_cast<std::size_t>(r)] - mres);
            den += Lnu[static_cast<std::size_t>(r)] * Lnu[static_cast<std::size_t>(r)] + mres * mres;
        }
        const double rel = std::sqrt(num) / std::max(std::sqrt(den), 1e-30);
        if (rel > 1e-8 && std::sqrt(num) > 1e-10 * std::max(1.0, std::abs(sp.eigenvalues[static_cast<std::size_t>(i)])))
            bad += " pair " + std::to_string(i) + " residual " + format_double(rel);
    }
    if (!bad.empty()) throw Error(ErrorCode::numerical, "eigensolve did not converge:" + bad);
    return sp;
}

std::vector<double> project(const Spectrum& spectrum, std::span<const double> f) {
    if (f.size() != static_cast<std::size_t>(spectrum.n))
        throw Error(ErrorCode::invalid_argument, "project: field length does not match the spectrum");
    std::vector<double> xi(static_cast<std::size_t>(spectrum.k));
    for (int i = 0; i < spectrum.k; ++i) {
        const auto nu = spectrum.eigenvector(i);
        double s = 0.0;
        for (int r = 0; r < spectrum.n; ++r)
            s += f[static_cast<std::size_t>(r)] * spectrum.mass[static_cast<std::size_t>(r)] * nu[static_cast<std::size_t>(r)];
        xi[static_cast<std::size_t>(i)] = s;
    }
    return xi;
}

std::vector<double> synthesize(const Spectrum& spectrum, std::span<const double> xi) {
    if (xi.size() > static_cast<std::size_t>(spectrum.k))
        throw Error(ErrorCode::invalid_argument, "synthesize: more coefficients than eigenvectors");
    std::vector<double> f(static_cast<std::size_t>(spectrum.n), 0.0);
    for (std::size_t i = 0; i < xi.size(); ++i) {
        const auto nu = spectrum.eigenvector(static_cast<int>(i));
        for (int r = 0; r < spectrum.n; ++r) f[static_cast<std::size_t>(r)] += xi[i] * nu[static_cast<std::size_t>(r)];
    }
    return f;
}

std::vector<double> tet_to_vertex(const TetMesh& mesh, std::span<const double> g) {
    if (g.size() != static_cast<std::size_t>(mesh.tet_count()))
        throw Error(ErrorCode::invalid_argument, "tet_to_vertex: field length mismatch");
    std::vector<double> f(static_cast<std::size_t>(mesh.vertex_count()));
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        double num = 0.0, den = 0.0;
        for (int t : mesh.incident_tets(i)) {
            num += mesh.volume(t) * g[static_cast<std::size_t>(t)];
            den += mesh.volume(t);
        }
        f[static_cast<std::size_t>(i)] = num / den;
    }
    return f;
}

std::vector<double> vertex_to_tet(const TetMesh& mesh, std::span<const double> f) {
    if (f.size() != static_cast<std::size_t>(mesh.vertex_count()))
        throw Error(ErrorCode::invalid_argument, "vertex_to_tet: field length mismatch");
    std::vector<double> g(static_cast<std::size_t>(mesh.tet_count()));
    for (int t = 0; t < mesh.tet_count(); ++t) {
        const auto& T = mesh.tet(t);
        g[static_cast<std::size_t>(t)] = 0.25 * (f[static_cast<std::size_t>(T[0])] + f[static_cast<std::size_t>(T[1])] +
                                                 f[static_cast<std::size_t>(T[2])] + f[static_cast<std::size_t>(T[3])]);
    }
    return g;
}

CompressedMapping compress(const Mapping& mapping, const Spectrum& spectrum, std::size_t threshold,
                           const BoundaryConditions& bc, const RepOptions& rep_opts) {
    const TetMesh& mesh = *mapping.mesh;
    if (spectrum.mesh_hash != mesh.content_hash())
        throw Error(ErrorCode::invalid_argument, "compress: spectrum was built for a different mesh");
    if (threshold < 1 || threshold > static_cast<std::size_t>(spectrum.k))
        throw Error(ErrorCode::invalid_argument, "compress: threshold T must be in [1, k]");

    const QCRep rep = compute_representation(mapping, rep_opts);
    CompressedMapping c;
    c.mesh_hash = mesh.content_hash();
    c.threshold = threshold;
    c.bc = bc;

    std::vector<double> per_tet(static_cast<std::size_t>(mesh.tet_count()));
    for (int comp = 0; comp < 6; ++comp) {
        for (int t = 0; t < mesh.tet_count(); ++t)
            per_tet[static_cast<std::size_t>(t)] = rep.q[static_cast<std::size_t>(t)][static_cast<std::size_t>(comp)];
        const std::vector<double> per_vertex = tet_to_vertex(mesh, per_tet);
        std::vector<double> xi = project(spectrum, per_vertex);
        xi.resize(threshold);
        c.coeff[static_cast<std::size_t>(comp)] = std::move(xi);
    }
    return c;
}

Mapping decompress(const CompressedMapping& c, std::shared_ptr<const TetMesh> mesh, const Spectrum& spectrum,
                   const CgOptions& opts, DecompressReport* report) {
    if (c.mesh_hash != mesh->content_hash())
        throw Error(ErrorCode::invalid_argument, "decompress: container was built for a different mesh");
    if (spectrum.mesh_hash != c.mesh_hash)
        throw Error(ErrorCode::invalid_argument, "decompress: spectrum was built for a different mesh");
    if (static_cast<std::size_t>(spectrum.k) < c.threshold)
        throw Error(ErrorCode::invalid_argument, "decompress: spectrum has fewer than T eigenvectors");

    const int m = mesh->tet_count();
    QCRep rep;
    rep.q.assign(static_cast<std::size_t>(m), QVec{});
    for (int comp = 0; comp < 6; ++comp) {
        const std::vector<double> per_vertex = synthesize(spectrum, c.coeff[static_cast<std::size_t>(comp)]);
        const std::vector<double> per_tet = vertex_to_tet(*mesh, per_vertex);
        for (int t = 0; t < m; ++t) rep.q[static_cast<std::size_t>(t)][static_cast<std::size_t>(comp)] = per_tet[static_cast<std::size_t>(t)];
    }

    // Truncation can push a rebuilt P out of the SPD cone; clamp eigenvalues
    // at 1e-6 so the dilation matrices stay defined.
    long clamped = 0;
    for (int t = 0; t < m; ++t) {
        QVec& q = rep.q[static_cast<std::size_t>(t)];
        const SymEigen3 eig = sym3_eigen(q_to_matrix(q));
        if (eig.eigenvalues[2] < 1e-6) {
            ++clamped;
            const double la = std::max(eig.eigenvalues[0], 1e-6);
            const double lbv = std::max(eig.eigenvalues[1], 1e-6);
            const double lc = std::max(eig.eigenvalues[2], 1e-6);
            const Mat3& W = eig.vectors;
            Mat3 P;
            for (int i = 0; i < 3; ++i)
                for (int jj = i; jj < 3; ++jj) {
                    const double v = la * W(i, 0) * W(jj, 0) + lbv * W(i, 1) * W(jj, 1) + lc * W(i, 2) * W(jj, 2);
                    P(i, jj) = P(jj, i) = v;
                }
            q = matrix_to_q(P);
        }
    }

    DecompressReport rep_out;
    rep_out.clamped_tets = clamped;
    Mapping out = reconstruct(std::move(mesh), rep, c.bc, opts, &rep_out.recon);
    if (report) *report = rep_out;
    return out;
}

// --- binary containers -------------------------------------------------------

namespace {

constexpr std::uint32_t kContainerVersion = 1;

void write_bytes(std::ofstream& out, const void* p, std::size_t size) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(size));
}

void read_bytes(std::ifstream& in, void* p, std::size_t size, const std::string& path) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(size));
    if (!in) throw Error(ErrorCode::parse, path + ": truncated container");
}

}  // namespace

void save_qsp3(const std::string& path, const Spectrum& sp) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
    write_bytes(out, "QSP3", 4);
    write_bytes(out, &kContainerVersion, 4);
    write_bytes(out, &sp.mesh_hash, 8);
    const std::uint64_t n = static_cast<std::uint64_t>(sp.n), k = static_cast<std::uint64_t>(sp.k);
    write_bytes(out, &n, 8);
    write_bytes(out, &k, 8);
    write_bytes(out, sp.eigenvalues.data(), sp.eigenvalues.size() * 8);
    write_bytes(out, sp.eigenvectors.data(), sp.eigenvectors.size() * 8);
    write_bytes(out, sp.mass.data(), sp.mass.size() * 8);
    if (!out) throw Error(ErrorCode::io, "write failed for '" + path + "'");
}

Spectrum load_qsp3(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "'");
    char magic[4];
    std::uint32_t version;
    read_bytes(in, magic, 4, path);
    if (std::memcmp(magic, "QSP3", 4) != 0) throw Error(ErrorCode::parse, path + ": not a QSP3 file");
    read_bytes(in, &version, 4, path);
    if (version != kContainerVersion) throw Error(ErrorCode::parse, path + ": unsupported QSP3 version");
    Spectrum sp;
    std::uint64_t n, k;
    read_bytes(in, &sp.mesh_hash, 8, path);
    read_bytes(in, &n, 8, path);
    read_bytes(in, &k, 8, path);
    sp.n = static_cast<int>(n);
    sp.k = static_cast<int>(k);
    sp.eigenvalues.resize(k);
    sp.eigenvectors.resize(k * n);
    sp.mass.resize(n);
    read_bytes(in, sp.eigenvalues.data(), k * 8, path);
    read_bytes(in, sp.eigenvectors.data(), k * n * 8, path);
    read_bytes(in, sp.mass.data(), n * 8, path);
    return sp;
}

void save_qcz3(const std::string& path, const CompressedMapping& c) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
    write_bytes(out, "QCZ3", 4);
    write_bytes(out, &kContainerVersion, 4);
    write_bytes(out, &c.mesh_hash, 8);
    write_bytes(out, &c.threshold, 8);
    for (int a = 0; a < 3; ++a) {
        const auto& cons = c.bc.coord[static_cast<std::size_t>(a)];
        const std::uint64_t count = cons.size();
        write_bytes(out, &count, 8);
        for (const Constraint& k : cons) {
            const std::uint64_t idx = static_cast<std::uint64_t>(k.vertex);
            write_bytes(out, &idx, 8);
            write_bytes(out, &k.value, 8);
        }
    }
    for (const auto& arr : c.coeff) write_bytes(out, arr.data(), arr.size() * 8);
    if (!out) throw Error(ErrorCode::io, "write failed for '" + path + "'");
}

CompressedMapping load_qcz3(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "'");
    char magic[4];
    std::uint32_t version;
    read_bytes(in, magic, 4, path);
    if (std::memcmp(magic, "QCZ3", 4) != 0) throw Error(ErrorCode::parse, path + ": not a QCZ3 file");
    read_bytes(in, &version, 4, path);
    if (version != kContainerVersion) throw Error(ErrorCode::parse, path + ": unsupported QCZ3 version");
    CompressedMapping c;
    read_bytes(in, &c.mesh_hash, 8, path);
    read_bytes(in, &c.threshold, 8, path);
    for (int a = 0; a < 3; ++a) {
        std::uint64_t count;
        read_bytes(in, &count, 8, path);
        auto& cons = c.bc.coord[static_cast<std::size_t>(a)];
        cons.resize(count);
        for (std::uint64_t i = 0; i < count; ++i) {
            std::uint64_t idx;
            double value;
            read_bytes(in, &idx, 8, path);
            read_bytes(in, &value, 8, path);
            cons[i] = {static_cast<int>(idx), value};
        }
    }
    for (auto& arr : c.coeff) {
        arr.resize(c.threshold);
        read_bytes(in, arr.data(), arr.size() * 8, path);
    }
    return c;
}

}  // namespace qc3d
