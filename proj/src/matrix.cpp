#include "mdsgnn/matrix.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <thread>

#include "mdsgnn/errors.hpp"

namespace mdsgnn {

namespace {
std::atomic<int> g_thread_cap{1};

// Splits [0, rows) into contiguous chunks, one worker per chunk. Each output
// row is written by exactly one worker, so the result does not depend on the
// thread count.
template <typename Fn>
void parallel_rows(int rows, const Fn& fn) {
    int threads = std::min(g_thread_cap.load(), rows);
    if (threads <= 1 || rows < 64) {
        fn(0, rows);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    int chunk = (rows + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        int lo = t * chunk;
        int hi = std::min(rows, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& th : pool) th.join();
}
}  // namespace

void set_thread_cap(int n) { g_thread_cap.store(std::max(1, n)); }
int thread_cap() { return g_thread_cap.load(); }

Matrix Matrix::full(int r, int c, double v) {
    Matrix m(r, c);
    std::fill(m.data.begin(), m.data.end(), v);
    return m;
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    int r = static_cast<int>(rows.size());
    int c = r == 0 ? 0 : static_cast<int>(rows.begin()->size());
    Matrix m(r, c);
    int i = 0;
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != c)
            throw NumericError("from_rows: ragged initializer");
        std::copy(row.begin(), row.end(), m.row(i));
        ++i;
    }
    return m;
}

bool Matrix::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

void Matrix::set_row(int i, const double* src) {
    std::memcpy(row(i), src, sizeof(double) * static_cast<std::size_t>(cols));
}

void Matrix::zero_row(int i) {
    std::memset(row(i), 0, sizeof(double) * static_cast<std::size_t>(cols));
}

void Matrix::fill(double v) { std::fill(data.begin(), data.end(), v); }

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows)
        throw NumericError("matmul: inner dimensions differ");
    Matrix c(a.rows, b.cols);
    const int k = a.cols, n = b.cols;
    parallel_rows(a.rows, [&](int lo, int hi) {
        for (int i = lo; i < hi; ++i) {
            double* crow = c.row(i);
            const double* arow = a.row(i);
            for (int p = 0; p < k; ++p) {
                const double s = arow[p];
                if (s == 0.0) continue;
                const double* brow = b.row(p);
                for (int j = 0; j < n; ++j) crow[j] += s * brow[j];
            }
        }
    });
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols)
        throw NumericError("matmul_nt: inner dimensions differ");
    Matrix c(a.rows, b.rows);
    const int k = a.cols, n = b.rows;
    parallel_rows(a.rows, [&](int lo, int hi) {
        for (int i = lo; i < hi; ++i) {
            const double* arow = a.row(i);
            double* crow = c.row(i);
            for (int j = 0; j < n; ++j) {
                const double* brow = b.row(j);
                double s = 0.0;
                for (int p = 0; p < k; ++p) s += arow[p] * brow[p];
                crow[j] = s;
            }
        }
    });
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

void add_matmul_tn(const Matrix& a, const Matrix& g, Matrix& out) {
    if (a.rows != g.rows || out.rows != a.cols || out.cols != g.cols)
        throw NumericError("add_matmul_tn: shape mismatch");
    const int n = g.cols;
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        const double* grow = g.row(i);
        for (int p = 0; p < a.cols; ++p) {
            const double s = arow[p];
            if (s == 0.0) continue;
            double* orow = out.row(p);
            for (int j = 0; j < n; ++j) orow[j] += s * grow[j];
        }
    }
}

void axpy(double alpha, const Matrix& x, Matrix& y) {
    if (!x.same_shape(y))
        throw NumericError("axpy: shape mismatch");
    for (std::size_t i = 0; i < x.data.size(); ++i) y.data[i] += alpha * x.data[i];
}

Matrix row_l2_normalized(const Matrix& a) {
    Matrix out(a.rows, a.cols);
    for (int i = 0; i < a.rows; ++i) {
        const double* src = a.row(i);
        double nrm = 0.0;
        for (int j = 0; j < a.cols; ++j) nrm += src[j] * src[j];
        nrm = std::sqrt(nrm);
        double* dst = out.row(i);
        if (nrm == 0.0) continue;  // zero rows stay zero
        for (int j = 0; j < a.cols; ++j) dst[j] = src[j] / nrm;
    }
    return out;
}

Matrix cosine_similarity(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols)
        throw NumericError("cosine_similarity: feature dimensions differ");
    return matmul_nt(row_l2_normalized(a), row_l2_normalized(b));
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b))
        throw NumericError("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

}  // namespace mdsgnn
