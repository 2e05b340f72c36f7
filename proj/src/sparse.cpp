#include "qc3d/sparse.hpp"

#include "qc3d/util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace qc3d {

CsrMatrix CsrMatrix::from_triplets(int rows, int cols, std::vector<Triplet> triplets) {
    for (const Triplet& t : triplets) {
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
            throw Error(ErrorCode::invalid_argument, "triplet index out of range");
    }
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    CsrMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.row_ptr.assign(static_cast<std::size_t>(rows) + 1, 0);
    m.col_idx.reserve(triplets.size());
    m.values.reserve(triplets.size());

    std::size_t i = 0;
    while (i < triplets.size()) {
        const int r = triplets[i].row, c = triplets[i].col;
        double sum = 0.0;
        while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c) sum += triplets[i++].value;
        m.col_idx.push_back(c);
        m.values.push_back(sum);
        ++m.row_ptr[static_cast<std::size_t>(r) + 1];
    }
    for (std::size_t r = 0; r < static_cast<std::size_t>(rows); ++r) m.row_ptr[r + 1] += m.row_ptr[r];
    return m;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y, int threads) const {
    if (x.size() != static_cast<std::size_t>(cols) || y.size() != static_cast<std::size_t>(rows))
        throw Error(ErrorCode::invalid_argument, "matvec dimension mismatch");
    parallel_for(static_cast<std::size_t>(rows), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            double s = 0.0;
            for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
                s += values[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(col_idx[static_cast<std::size_t>(k)])];
            y[r] = s;
        }
    });
}

std::vector<double> CsrMatrix::multiply(std::span<const double> x, int threads) const {
    std::vector<double> y(static_cast<std::size_t>(rows));
    multiply(x, y, threads);
    return y;
}

std::vector<double> CsrMatrix::diagonal() const {
    std::vector<double> d(static_cast<std::size_t>(rows), 0.0);
    for (std::size_t r = 0; r < static_cast<std::size_t>(rows); ++r)
        for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
            if (col_idx[static_cast<std::size_t>(k)] == static_cast<int>(r)) d[r] = values[static_cast<std::size_t>(k)];
    return d;
}

double CsrMatrix::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double CsrMatrix::at(int r, int c) const {
    for (std::int64_t k = row_ptr[static_cast<std::size_t>(r)]; k < row_ptr[static_cast<std::size_t>(r) + 1]; ++k)
        if (col_idx[static_cast<std::size_t>(k)] == c) return values[static_cast<std::size_t>(k)];
    return 0.0;
}

void CsrMatrix::save_matrix_market(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << rows << ' ' << cols << ' ' << nnz() << '\n';
    for (std::size_t r = 0; r < static_cast<std::size_t>(rows); ++r)
        for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
            out << (r + 1) << ' ' << (col_idx[static_cast<std::size_t>(k)] + 1) << ' '
                << format_double(values[static_cast<std::size_t>(k)]) << '\n';
    if (!out) throw Error(ErrorCode::io, "write failed for '" + path + "'");
}

namespace {

double dot_product(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot_product(a, a)); }

}  // namespace

CgResult solve_cg(const CsrMatrix& M, std::span<const double> h, const CgOptions& opts,
                  std::span<const double> x0) {
    if (M.rows != M.cols) throw Error(ErrorCode::invalid_argument, "solve_cg: matrix must be square");
    const std::size_t n = static_cast<std::size_t>(M.rows);
    if (h.size() != n) throw Error(ErrorCode::invalid_argument, "solve_cg: rhs size mismatch");
    if (!x0.empty() && x0.size() != n) throw Error(ErrorCode::invalid_argument, "solve_cg: x0 size mismatch");
    const long max_iter = opts.max_iter >= 0 ? opts.max_iter : 10 * static_cast<long>(n);

    CgResult res;
    res.x.assign(n, 0.0);
    if (!x0.empty()) std::copy(x0.begin(), x0.end(), res.x.begin());

    const double hnorm = norm2(h);
    if (hnorm == 0.0 && x0.empty()) return res;  // x = 0 is exact

    std::vector<double> inv_diag = M.diagonal();
    for (double& d : inv_diag) {
        if (!(d > 0.0)) throw Error(ErrorCode::numerical, "solve_cg: non-positive diagonal entry; matrix is not SPD");
        d = 1.0 / d;
    }

    std::vector<double> r(n), z(n), p(n), Mp(n);
    M.multiply(res.x, r, opts.threads);
    for (std::size_t i = 0; i < n; ++i) r[i] = h[i] - r[i];

    const double denom = hnorm > 0.0 ? hnorm : 1.0;
    double rel = norm2(r) / denom;
    if (rel <= opts.tol) {
        res.relative_residual = rel;
        return res;
    }

    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot_product(r, z);

    for (long it = 1; it <= max_iter; ++it) {
        M.multiply(p, Mp, opts.threads);
        const double pMp = dot_product(p, Mp);
        if (!(pMp > 0.0))
            throw SolveError("solve_cg: p^T M p = " + format_double(pMp) + " <= 0; matrix is not SPD",
                             std::move(res.history));
        const double alpha = rz / pMp;
        for (std::size_t i = 0; i < n; ++i) res.x[i] += alpha * p[i];
        for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * Mp[i];

        rel = norm2(r) / denom;
        if (opts.keep_history) res.history.push_back(rel);
        res.iterations = it;
        if (rel <= opts.tol) {
            // Guard against recurrence drift: accept on the true residual.
            M.multiply(res.x, Mp, opts.threads);
            for (std::size_t i = 0; i < n; ++i) Mp[i] = h[i] - Mp[i];
            const double true_rel = norm2(Mp) / denom;
            if (true_rel <= opts.tol) {
                res.relative_residual = true_rel;
                return res;
            }
            r = Mp;
            rel = true_rel;
        }

        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_next = dot_product(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw SolveError("solve_cg: no convergence after " + std::to_string(max_iter) +
                         " iterations (relative residual " + format_double(rel) + ", tol " +
                         format_double(opts.tol) + ")",
                     std::move(res.history));
}

}  // namespace qc3d
