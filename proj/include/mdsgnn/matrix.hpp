#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace mdsgnn {

// Dense row-major matrix of doubles. The only dense storage type in the
// project; vectors are 1xN or Nx1 matrices.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    static Matrix zeros(int r, int c) { return Matrix(r, c); }
    static Matrix full(int r, int c, double v);
    static Matrix identity(int n);
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

    double* row(int i) { return data.data() + static_cast<std::size_t>(i) * cols; }
    const double* row(int i) const { return data.data() + static_cast<std::size_t>(i) * cols; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
    bool all_finite() const;

    void set_row(int i, const double* src);
    void zero_row(int i);
    void fill(double v);

    bool operator==(const Matrix& o) const { return rows == o.rows && cols == o.cols && data == o.data; }
};

// Thread cap for row-parallel kernels. Partitioning is by output row, so
// results are bitwise identical for every thread count.
void set_thread_cap(int n);
int thread_cap();

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // a * b^T
Matrix transpose(const Matrix& a);

// out += a^T * g, shapes (m x k)^T (m x n) -> (k x n)
void add_matmul_tn(const Matrix& a, const Matrix& g, Matrix& out);
// y += alpha * x
void axpy(double alpha, const Matrix& x, Matrix& y);

Matrix row_l2_normalized(const Matrix& a);
Matrix cosine_similarity(const Matrix& a, const Matrix& b);

double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace mdsgnn
