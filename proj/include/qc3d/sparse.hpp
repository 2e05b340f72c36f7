#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qc3d {

struct Triplet {
    int row;
    int col;
    double value;
};

// Compressed sparse row matrix. Construction sorts triplets by (row, col) and
// sums duplicates left to right, so identical triplet streams compress to
// bit-identical matrices.
struct CsrMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<std::int64_t> row_ptr;
    std::vector<int> col_idx;
    std::vector<double> values;

    static CsrMatrix from_triplets(int rows, int cols, std::vector<Triplet> triplets);

    std::int64_t nnz() const { return static_cast<std::int64_t>(values.size()); }

    void multiply(std::span<const double> x, std::span<double> y, int threads = 1) const;
    std::vector<double> multiply(std::span<const double> x, int threads = 1) const;

    std::vector<double> diagonal() const;
    double max_abs() const;
    double at(int r, int c) const;  // 0 when the entry is not stored

    // MatrixMarket coordinate format (1-based, general symmetry field left
    // to the reader: all entries are written).
    void save_matrix_market(const std::string& path) const;
};

struct CgOptions {
    double tol = 1e-12;   // relative residual ||Mx - h|| / ||h||
    long max_iter = -1;   // -1 selects 10 * n
    int threads = 1;
    bool keep_history = true;
};

struct CgResult {
    std::vector<double> x;
    long iterations = 0;
    double relative_residual = 0.0;
    std::vector<double> history;  // relative residual after each iteration
};

// Jacobi-preconditioned conjugate gradient for SPD systems. An optional x0
// warm-starts the iteration (entries whose residual is exactly zero are never
// touched, which keeps Dirichlet rows bit-exact). Throws SolveError with the
// residual history when max_iter is exhausted.
CgResult solve_cg(const CsrMatrix& M, std::span<const double> h, const CgOptions& opts = {},
                  std::span<const double> x0 = {});

}  // namespace qc3d
