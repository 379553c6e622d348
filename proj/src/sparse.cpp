#include "mdsgnn/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mdsgnn/errors.hpp"

namespace mdsgnn {

SparseMatrix csr_from_coo(int rows, int cols, const std::vector<int>& ri,
                          const std::vector<int>& ci, const std::vector<double>& v) {
    if (ri.size() != ci.size() || ri.size() != v.size())
        throw NumericError("csr_from_coo: triplet arrays differ in length");
    const int nnz_in = static_cast<int>(ri.size());
    for (int t = 0; t < nnz_in; ++t) {
        if (ri[t] < 0 || ri[t] >= rows || ci[t] < 0 || ci[t] >= cols)
            throw NumericError("csr_from_coo: index out of range");
    }
    std::vector<int> order(nnz_in);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (ri[a] != ri[b]) return ri[a] < ri[b];
        return ci[a] < ci[b];
    });

    SparseMatrix s(rows, cols);
    s.indices.reserve(nnz_in);
    s.values.reserve(nnz_in);
    int prev_r = -1, prev_c = -1;
    for (int t : order) {
        if (ri[t] == prev_r && ci[t] == prev_c) {
            s.values.back() += v[t];
            continue;
        }
        prev_r = ri[t];
        prev_c = ci[t];
        s.indices.push_back(ci[t]);
        s.values.push_back(v[t]);
        s.indptr[ri[t] + 1]++;
    }
    for (int i = 0; i < rows; ++i) s.indptr[i + 1] += s.indptr[i];
    return s;
}

Matrix spmm(const SparseMatrix& s, const Matrix& d) {
    if (s.cols != d.rows)
        throw NumericError("spmm: inner dimensions differ");
    Matrix out(s.rows, d.cols);
    const int n = d.cols;
    for (int i = 0; i < s.rows; ++i) {
        double* orow = out.row(i);
        for (int p = s.indptr[i]; p < s.indptr[i + 1]; ++p) {
            const double v = s.values[p];
            const double* drow = d.row(s.indices[p]);
            for (int j = 0; j < n; ++j) orow[j] += v * drow[j];
        }
    }
    return out;
}

SparseMatrix sparse_transpose(const SparseMatrix& s) {
    SparseMatrix t(s.cols, s.rows);
    t.indices.resize(s.indices.size());
    t.values.resize(s.values.size());
    for (int idx : s.indices) t.indptr[idx + 1]++;
    for (int i = 0; i < t.rows; ++i) t.indptr[i + 1] += t.indptr[i];
    std::vector<int> cursor(t.indptr.begin(), t.indptr.end() - 1);
    for (int i = 0; i < s.rows; ++i) {
        for (int p = s.indptr[i]; p < s.indptr[i + 1]; ++p) {
            int j = s.indices[p];
            int dst = cursor[j]++;
            t.indices[dst] = i;
            t.values[dst] = s.values[p];
        }
    }
    return t;
}

SparseMatrix sym_normalize(const SparseMatrix& a) {
    if (a.rows != a.cols)
        throw NumericError("sym_normalize: matrix must be square");
    std::vector<double> invs(a.rows, 0.0);
    for (int i = 0; i < a.rows; ++i) {
        double deg = 0.0;
        for (int p = a.indptr[i]; p < a.indptr[i + 1]; ++p) deg += a.values[p];
        if (deg > 0.0) invs[i] = 1.0 / std::sqrt(deg);
    }
    SparseMatrix out = a;
    for (int i = 0; i < a.rows; ++i) {
        for (int p = a.indptr[i]; p < a.indptr[i + 1]; ++p) {
            int j = a.indices[p];
            out.values[p] = a.values[p] * (invs[i] * invs[j]);
        }
    }
    return out;
}

SparseMatrix add_identity(const SparseMatrix& a) {
    if (a.rows != a.cols)
        throw NumericError("add_identity: matrix must be square");
    std::vector<int> ri, ci;
    std::vector<double> v;
    ri.reserve(a.nnz() + a.rows);
    ci.reserve(a.nnz() + a.rows);
    v.reserve(a.nnz() + a.rows);
    for (int i = 0; i < a.rows; ++i) {
        for (int p = a.indptr[i]; p < a.indptr[i + 1]; ++p) {
            ri.push_back(i);
            ci.push_back(a.indices[p]);
            v.push_back(a.values[p]);
        }
        ri.push_back(i);
        ci.push_back(i);
        v.push_back(1.0);
    }
    return csr_from_coo(a.rows, a.cols, ri, ci, v);
}

Matrix to_dense(const SparseMatrix& s) {
    Matrix d(s.rows, s.cols);
    for (int i = 0; i < s.rows; ++i)
        for (int p = s.indptr[i]; p < s.indptr[i + 1]; ++p)
            d(i, s.indices[p]) += s.values[p];
    return d;
}

}  // namespace mdsgnn
