#pragma once

#include <vector>

#include "mdsgnn/matrix.hpp"

namespace mdsgnn {

// CSR with explicit values. Row pointers have length rows+1.
struct SparseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<int> indptr;
    std::vector<int> indices;
    std::vector<double> values;

    SparseMatrix() : indptr(1, 0) {}
    SparseMatrix(int r, int c) : rows(r), cols(c), indptr(r + 1, 0) {}

    int nnz() const { return static_cast<int>(indices.size()); }
};

// Builds CSR from COO triplets; duplicate entries are summed.
SparseMatrix csr_from_coo(int rows, int cols, const std::vector<int>& ri,
                          const std::vector<int>& ci, const std::vector<double>& v);

// out = s * d  (sparse times dense)
Matrix spmm(const SparseMatrix& s, const Matrix& d);

// s^T as CSR (exact transpose, values carried over)
SparseMatrix sparse_transpose(const SparseMatrix& s);

// Symmetric degree normalization D^{-1/2} A D^{-1/2}. Degrees are row sums
// of values. Zero-degree rows and columns come out as zero. Symmetry of the
// output is exact when the input is symmetric: entry (i,j) is computed as
// v * (invs[i] * invs[j]) in a single expression in both triangles.
SparseMatrix sym_normalize(const SparseMatrix& a);

// A + I, assumes no existing diagonal entries are present more than once
SparseMatrix add_identity(const SparseMatrix& a);

Matrix to_dense(const SparseMatrix& s);

}  // namespace mdsgnn
