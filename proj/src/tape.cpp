#include "mdsgnn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "mdsgnn/errors.hpp"

namespace mdsgnn {

const Matrix& Tensor::val() const { return tape->value(id); }
int Tensor::rows() const { return val().rows; }
int Tensor::cols() const { return val().cols; }

Tensor Tape::leaf(Matrix value, bool requires_grad) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    nodes_.push_back(std::move(n));
    return Tensor{this, static_cast<int>(nodes_.size()) - 1};
}

Tensor Tape::record(Matrix value, const std::vector<int>& parents,
                    std::function<void(Tape&, int)> backward) {
    bool req = false;
    for (int p : parents) req = req || nodes_[p].requires_grad;
    Node n;
    n.value = std::move(value);
    n.requires_grad = req;
    if (req) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Tensor{this, static_cast<int>(nodes_.size()) - 1};
}

Matrix& Tape::grad(int id) {
    Node& n = nodes_[id];
    if (!n.grad_alloc) {
        n.grad = Matrix(n.value.rows, n.value.cols);
        n.grad_alloc = true;
    }
    return n.grad;
}

double Tape::scalar(int id) const {
    const Matrix& v = nodes_[id].value;
    if (v.rows != 1 || v.cols != 1)
        throw NumericError("scalar: tensor is not 1x1");
    return v.data[0];
}

void Tape::backward(int loss_id) {
    const Matrix& v = nodes_[loss_id].value;
    if (v.rows != 1 || v.cols != 1)
        throw NumericError("backward: loss must be a 1x1 tensor");
    grad(loss_id)(0, 0) = 1.0;
    for (int i = loss_id; i >= 0; --i) {
        Node& n = nodes_[i];
        // nodes the gradient never reached have nothing to propagate
        if (n.requires_grad && n.backward && n.grad_alloc) n.backward(*this, i);
    }
}

namespace {

void check_same_tape(Tensor a, Tensor b) {
    if (a.tape != b.tape)
        throw NumericError("op: tensors belong to different tapes");
}

Tensor make_op(Tape& t, Matrix value, std::vector<int> parents,
               std::function<void(Tape&, int)> backward) {
    return t.record(std::move(value), parents, std::move(backward));
}

// Elementwise unary op: value = f(x), local derivative df(x) evaluated from
// the saved input.
Tensor unary_op(Tensor a, const std::function<double(double)>& f,
                std::function<double(double)> df) {
    Tape& t = *a.tape;
    const Matrix& x = a.val();
    Matrix out(x.rows, x.cols);
    for (std::size_t i = 0; i < x.data.size(); ++i) out.data[i] = f(x.data[i]);
    int aid = a.id;
    return make_op(t, std::move(out), {aid},
                   [aid, df = std::move(df)](Tape& tp, int self) {
                       const Matrix& g = tp.grad(self);
                       const Matrix& x = tp.value(aid);
                       Matrix& ga = tp.grad(aid);
                       for (std::size_t i = 0; i < x.data.size(); ++i)
                           ga.data[i] += g.data[i] * df(x.data[i]);
                   });
}

}  // namespace

Tensor matmul(Tensor a, Tensor b) {
    check_same_tape(a, b);
    Tape& t = *a.tape;
    Matrix out = matmul(a.val(), b.val());
    int aid = a.id, bid = b.id;
    return make_op(t, std::move(out), {aid, bid}, [aid, bid](Tape& tp, int self) {
        const Matrix& g = tp.grad(self);
        // dA = g B^T, dB = A^T g
        Matrix gbt = matmul_nt(g, tp.value(bid));
        axpy(1.0, gbt, tp.grad(aid));
        add_matmul_tn(tp.value(aid), g, tp.grad(bid));
    });
}

Tensor matmul_nt(Tensor a, Tensor b) {
    check_same_tape(a, b);
    Tape& t = *a.tape;
    Matrix out = matmul_nt(a.val(), b.val());
    int aid = a.id, bid = b.id;
    return make_op(t, std::move(out), {aid, bid}, [aid, bid](Tape& tp, int self) {
        const Matrix& g = tp.grad(self);
        // out = A B^T: dA = g B, dB = g^T A
        Matrix ga = matmul(g, tp.value(bid));
        axpy(1.0, ga, tp.grad(aid));
        add_matmul_tn(g, tp.value(aid), tp.grad(bid));
    });
}

Tensor spmm(std::shared_ptr<const SparseMatrix> s, Tensor d) {
    Tape& t = *d.tape;
    Matrix out = spmm(*s, d.val());
    int did = d.id;
    return make_op(t, std::move(out), {did}, [s, did](Tape& tp, int self) {
        // dD = S^T g; S is symmetric in every use here but transpose anyway
        Matrix gd = spmm(sparse_transpose(*s), tp.grad(self));
        axpy(1.0, gd, tp.grad(did));
    });
}

Tensor add(Tensor a, Tensor b) {
    check_same_tape(a, b);
    if (!a.val().same_shape(b.val()))
        throw NumericError("add: shape mismatch");
    Tape& t = *a.tape;
    Matrix out = a.val();
    axpy(1.0, b.val(), out);
    int aid = a.id, bid = b.id;
    return make_op(t, std::move(out), {aid, bid}, [aid, bid](Tape& tp, int self) {
        const Matrix& g = tp.grad(self);
        if (tp.requires_grad(aid)) axpy(1.0, g, tp.grad(aid));
        if (tp.requires_grad(bid)) axpy(1.0, g, tp.grad(bid));
    });
}

Tensor sub(Tensor a, Tensor b) {
    check_same_tape(a, b);
    if (!a.val().same_shape(b.val()))
        throw NumericError("sub: shape mismatch");
    Tape& t = *a.tape;
    Matrix out = a.val();
    axpy(-1.0, b.val(), out);
    int aid = a.id, bid = b.id;
    return make_op(t, std::move(out), {aid, bid}, [aid, bid](Tape& tp, int self) {
        const Matrix& g = tp.grad(self);
        if (tp.requires_grad(aid)) axpy(1.0, g, tp.grad(aid));
        if (tp.requires_grad(bid)) axpy(-1.0, g, tp.grad(bid));
    });
}

Tensor scale(Tensor a, double c) {
    Tape& t = *a.tape;
    Matrix out = a.val();
    for (double& v : out.data) v *= c;
    int aid = a.id;
    return make_op(t, std::move(out), {aid}, [aid, c](Tape& tp, int self) {
        axpy(c, tp.grad(self), tp.grad(aid));
    });
}

Tensor mul(Tensor a, Tensor b) {
    check_same_tape(a, b);
    if (!a.val().same_shape(b.val()))
        throw NumericError("mul: shape mismatch");
    Tape& t = *a.tape;
    Matrix out = a.val();
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b.val().data[i];
    int aid = a.id, bid = b.id;
    return make_op(t, std::move(out), {aid, bid}, [aid, bid](Tape& tp, int self) {
        const Matrix& g = tp.grad(self);
        if (tp.requires_grad(aid)) {
            const Matrix& bv = tp.value(bid);
            Matrix& ga = tp.grad(aid);
            for (std::size_t i = 0; i < g.data.size(); ++i)
                ga.data[i] += g.data[i] * bv.data[i];
        }
        if (tp.requires_grad(bid)) {
            const Matrix& av = tp.value(aid);
            Matrix& gb = tp.grad(bid);
            for (std::size_t i = 0; i < g.data.size(); ++i)
                gb.data[i] += g.data[i] * av.data[i];
        }
    });
}

Tensor add_rowvec(Tensor a, Tensor bias) {
    check_same_tape(a, bias);
    if (bias.rows() != 1 || bias.cols() != a.cols())
        throw NumericError("add_rowvec: bias must be 1 x cols(a)");
    Tape& t = *a.tape;
    Matrix out = a.val();
    const Matrix& bv = bias.val();
    for (int i = 0; i < out.rows; ++i) {
        double* row = out.row(i);
        for (int j = 0; j < out.cols; ++j) row[j] += bv.data[j];
    }
    int aid = a.id, bid = bias.id;
    return make_op(t, std::move(out), {aid, bid}, [aid, bid](Tape& tp, int self) {
        const Matrix& g = tp.grad(self);
        if (tp.requires_grad(aid)) axpy(1.0, g, tp.grad(aid));
        if (tp.requires_grad(bid)) {
            Matrix& gb = tp.grad(bid);
            for (int i = 0; i < g.rows; ++i) {
                const double* row = g.row(i);
                for (int j = 0; j < g.cols; ++j) gb.data[j] += row[j];
            }
        }
    });
}

Tensor relu(Tensor a) {
    return unary_op(
        a, [](double x) { return x > 0.0 ? x : 0.0; },
        [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor leakyrelu(Tensor a, double slope) {
    return unary_op(
        a, [slope](double x) { return x > 0.0 ? x : slope * x; },
        // subgradient at exactly 0 is 0
        [slope](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? slope : 0.0); });
}

Tensor elu(Tensor a) {
    return unary_op(
        a, [](double x) { return x > 0.0 ? x : std::expm1(x); },
        [](double x) { return x > 0.0 ? 1.0 : std::exp(x); });
}

Tensor sigmoid(Tensor a) {
    auto sig = [](double x) {
        return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                        : std::exp(x) / (1.0 + std::exp(x));
    };
    return unary_op(a, sig, [sig](double x) {
        double s = sig(x);
        return s * (1.0 - s);
    });
}

Tensor row_softmax(Tensor a) {
    Tape& t = *a.tape;
    const Matrix& x = a.val();
    Matrix out(x.rows, x.cols);
    for (int i = 0; i < x.rows; ++i) {
        const double* src = x.row(i);
        double* dst = out.row(i);
        double mx = src[0];
        for (int j = 1; j < x.cols; ++j) mx = std::max(mx, src[j]);
        double z = 0.0;
        for (int j = 0; j < x.cols; ++j) {
            dst[j] = std::exp(src[j] - mx);
            z += dst[j];
        }
        for (int j = 0; j < x.cols; ++j) dst[j] /= z;
    }
    int aid = a.id;
    return make_op(t, std::move(out), {aid}, [aid](Tape& tp, int self) {
        const Matrix& g = tp.grad(self);
        const Matrix& y = tp.value(self);
        Matrix& ga = tp.grad(aid);
        for (int i = 0; i < y.rows; ++i) {
            const double* yr = y.row(i);
            const double* gr = g.row(i);
            double dot = 0.0;
            for (int j = 0; j < y.cols; ++j) dot += yr[j] * gr[j];
            double* gar = ga.row(i);
            for (int j = 0; j < y.cols; ++j) gar[j] += yr[j] * (gr[j] - dot);
        }
    });
}

Tensor row_log_softmax(Tensor a) {
    Tape& t = *a.tape;
    const Matrix& x = a.val();
    Matrix out(x.rows, x.cols);
    for (int i = 0; i < x.rows; ++i) {
        const double* src = x.row(i);
        double* dst = out.row(i);
        double mx = src[0];
        for (int j = 1; j < x.cols; ++j) mx = std::max(mx, src[j]);
        double z = 0.0;
        for (int j = 0; j < x.cols; ++j) z += std::exp(src[j] - mx);
        double lse = mx + std::log(z);
        for (int j = 0; j < x.cols; ++j) dst[j] = src[j] - lse;
    }
    int aid = a.id;
    return make_op(t, std::move(out), {aid}, [aid](Tape& tp, int self) {
        const Matrix& g = tp.grad(self);
        const Matrix& y = tp.value(self);  // log-probabilities
        Matrix& ga = tp.grad(aid);
        for (int i = 0; i < y.rows; ++i) {
            const double* yr = y.row(i);
            const double* gr = g.row(i);
            double gs = 0.0;
            for (int j = 0; j < y.cols; ++j) gs += gr[j];
            double* gar = ga.row(i);
            for (int j = 0; j < y.cols; ++j) gar[j] += gr[j] - std::exp(yr[j]) * gs;
        }
    });
}

Tensor dropout(Tensor a, double rate, Rng& rng, bool train) {
    if (rate < 0.0 || rate >= 1.0)
        throw NumericError("dropout: rate must be in [0, 1)");
    if (!train || rate == 0.0) return a;  // identity, no rng draws
    Tape& t = *a.tape;
    const Matrix& x = a.val();
    std::vector<double> mask(x.data.size());
    const double keep = 1.0 - rate;
    for (double& m : mask) m = rng.uniform() < rate ? 0.0 : 1.0 / keep;
    Matrix out(x.rows, x.cols);
    for (std::size_t i = 0; i < x.data.size(); ++i)
        out.data[i] = x.data[i] * mask[i];
    int aid = a.id;
    return make_op(t, std::move(out), {aid},
                   [aid, mask = std::move(mask)](Tape& tp, int self) {
                       const Matrix& g = tp.grad(self);
                       Matrix& ga = tp.grad(aid);
                       for (std::size_t i = 0; i < g.data.size(); ++i)
                           ga.data[i] += g.data[i] * mask[i];
                   });
}

Tensor concat_cols(const std::vector<Tensor>& xs) {
    if (xs.empty()) throw NumericError("concat_cols: no inputs");
    Tape& t = *xs[0].tape;
    int rows = xs[0].rows();
    int cols = 0;
    for (const Tensor& x : xs) {
        check_same_tape(xs[0], x);
        if (x.rows() != rows) throw NumericError("concat_cols: row counts differ");
        cols += x.cols();
    }
    Matrix out(rows, cols);
    std::vector<int> ids, offs, widths;
    int off = 0;
    for (const Tensor& x : xs) {
        const Matrix& v = x.val();
        for (int i = 0; i < rows; ++i)
            std::copy(v.row(i), v.row(i) + v.cols, out.row(i) + off);
        ids.push_back(x.id);
        offs.push_back(off);
        widths.push_back(v.cols);
        off += v.cols;
    }
    return make_op(t, std::move(out), ids,
                   [ids, offs, widths](Tape& tp, int self) {
                       const Matrix& g = tp.grad(self);
                       for (std::size_t k = 0; k < ids.size(); ++k) {
                           if (!tp.requires_grad(ids[k])) continue;
                           Matrix& gx = tp.grad(ids[k]);
                           for (int i = 0; i < g.rows; ++i) {
                               const double* src = g.row(i) + offs[k];
                               double* dst = gx.row(i);
                               for (int j = 0; j < widths[k]; ++j) dst[j] += src[j];
                           }
                       }
                   });
}

Tensor mean_cols(Tensor a) {
    Tape& t = *a.tape;
    const Matrix& x = a.val();
    Matrix out(x.rows, 1);
    for (int i = 0; i < x.rows; ++i) {
        double s = 0.0;
        const double* row = x.row(i);
        for (int j = 0; j < x.cols; ++j) s += row[j];
        out(i, 0) = s / x.cols;
    }
    int aid = a.id, cols = x.cols;
    return make_op(t, std::move(out), {aid}, [aid, cols](Tape& tp, int self) {
        const Matrix& g = tp.grad(self);
        Matrix& ga = tp.grad(aid);
        for (int i = 0; i < ga.rows; ++i) {
            double gi = g(i, 0) / cols;
            double* row = ga.row(i);
            for (int j = 0; j < cols; ++j) row[j] += gi;
        }
    });
}

Tensor sum(Tensor a) {
    Tape& t = *a.tape;
    const Matrix& x = a.val();
    double s = 0.0;
    for (double v : x.data) s += v;
    Matrix out(1, 1);
    out(0, 0) = s;
    int aid = a.id;
    return make_op(t, std::move(out), {aid}, [aid](Tape& tp, int self) {
        double g = tp.grad(self)(0, 0);
        Matrix& ga = tp.grad(aid);
        for (double& v : ga.data) v += g;
    });
}

Tensor row_l2_normalize(Tensor a) {
    Tape& t = *a.tape;
    const Matrix& x = a.val();
    Matrix out(x.rows, x.cols);
    std::vector<double> norms(x.rows, 0.0);
    for (int i = 0; i < x.rows; ++i) {
        const double* src = x.row(i);
        double n = 0.0;
        for (int j = 0; j < x.cols; ++j) n += src[j] * src[j];
        n = std::sqrt(n);
        norms[i] = n;
        if (n == 0.0) continue;
        double* dst = out.row(i);
        for (int j = 0; j < x.cols; ++j) dst[j] = src[j] / n;
    }
    int aid = a.id;
    return make_op(t, std::move(out), {aid},
                   [aid, norms = std::move(norms)](Tape& tp, int self) {
                       const Matrix& g = tp.grad(self);
                       const Matrix& y = tp.value(self);  // already normalized
                       Matrix& ga = tp.grad(aid);
                       for (int i = 0; i < g.rows; ++i) {
                           double n = norms[i];
                           if (n == 0.0) continue;
                           const double* gr = g.row(i);
                           const double* yr = y.row(i);
                           double dot = 0.0;
                           for (int j = 0; j < g.cols; ++j) dot += gr[j] * yr[j];
                           double* gar = ga.row(i);
                           // d(x/|x|) = (g - y (y.g)) / |x|
                           for (int j = 0; j < g.cols; ++j)
                               gar[j] += (gr[j] - yr[j] * dot) / n;
                       }
                   });
}

Tensor cosine_similarity(Tensor a, Tensor b) {
    return matmul_nt(row_l2_normalize(a), row_l2_normalize(b));
}

}  // namespace mdsgnn
