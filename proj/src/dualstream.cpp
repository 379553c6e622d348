#include "mdsgnn/dualstream.hpp"

#include <algorithm>
#include <cmath>

#include "mdsgnn/errors.hpp"

namespace mdsgnn {

void ClassifierParams::visit(
    const std::function<void(const std::string&, Matrix&, bool)>& fn) {
    fn("cls.w0", w0, true);
    fn("cls.w1", w1, true);
    fn("cls.w2", w2, true);
    if (use_bias) {
        fn("cls.b0", b0, false);
        fn("cls.b1", b1, false);
    }
}

StreamOutputs classify(Tensor x_repr, const ClassifierT& p) {
    if (x_repr.cols() != p.w0.rows())
        throw NumericError("classify: input width does not match w0");
    Tensor pre = matmul(x_repr, p.w0);
    if (p.use_bias) pre = add_rowvec(pre, p.b0);
    Tensor h = relu(pre);
    Tensor logits = matmul(h, p.w1);
    if (p.use_bias) logits = add_rowvec(logits, p.b1);
    return StreamOutputs{h, row_softmax(logits)};
}

Tensor cross_entropy(Tensor y, const std::vector<int>& labels,
                     const std::vector<int>& idx) {
    if (idx.empty()) throw DataError("cross_entropy: empty index list");
    Tape& t = *y.tape;
    const Matrix& yv = y.val();
    if (static_cast<int>(labels.size()) != yv.rows)
        throw DataError("cross_entropy: labels length != rows");
    constexpr double kFloor = 1e-12;
    double total = 0.0;
    for (int i : idx) {
        int lab = labels[i];
        if (lab < 0 || lab >= yv.cols)
            throw DataError("cross_entropy: label out of range");
        total -= std::log(std::max(yv(i, lab), kFloor));
    }
    Matrix value(1, 1);
    value(0, 0) = total / static_cast<double>(idx.size());

    int yid = y.id;
    std::vector<int> idx_copy = idx;
    std::vector<int> labs;
    labs.reserve(idx.size());
    for (int i : idx) labs.push_back(labels[i]);
    return t.record(std::move(value), {yid},
                    [yid, idx = std::move(idx_copy), labs = std::move(labs)](
                        Tape& tp, int self) {
                        double gs = tp.grad(self)(0, 0);
                        const Matrix& yv = tp.value(yid);
                        Matrix& gy = tp.grad(yid);
                        const double inv = 1.0 / static_cast<double>(idx.size());
                        for (std::size_t k = 0; k < idx.size(); ++k) {
                            double p = yv(idx[k], labs[k]);
                            if (p > kFloor) gy(idx[k], labs[k]) -= gs * inv / p;
                        }
                    });
}

Tensor project(Tensor h, const ClassifierT& p) {
    if (h.cols() != p.w2.rows())
        throw NumericError("project: input width does not match w2");
    return matmul(h, p.w2);
}

namespace {

// logsumexp over a row of b excluding column `skip` (pass -1 to keep all)
double lse_row(const Matrix& b, int i, int skip) {
    double mx = -HUGE_VAL;
    for (int k = 0; k < b.cols; ++k)
        if (k != skip) mx = std::max(mx, b(i, k));
    double s = 0.0;
    for (int k = 0; k < b.cols; ++k)
        if (k != skip) s += std::exp(b(i, k) - mx);
    return mx + std::log(s);
}

double lse_col(const Matrix& b, int j, int skip) {
    double mx = -HUGE_VAL;
    for (int k = 0; k < b.rows; ++k)
        if (k != skip) mx = std::max(mx, b(k, j));
    double s = 0.0;
    for (int k = 0; k < b.rows; ++k)
        if (k != skip) s += std::exp(b(k, j) - mx);
    return mx + std::log(s);
}

// Cross-view form: positives on the diagonal of the cross similarity,
// denominators over k != i of the same row (anchor z_i) or column (z'_i).
Tensor ntxent_cross_only(Tensor s_cross, double tau) {
    Tape& t = *s_cross.tape;
    const Matrix& s = s_cross.val();
    const int n = s.rows;

    Matrix b = s;
    for (double& v : b.data) v /= tau;
    std::vector<double> r(n), c(n);
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
        r[i] = lse_row(b, i, i);
        c[i] = lse_col(b, i, i);
        loss -= (b(i, i) - r[i]) + (b(i, i) - c[i]);
    }
    Matrix value(1, 1);
    value(0, 0) = loss / (2.0 * n);

    int sid = s_cross.id;
    return t.record(std::move(value), {sid},
                    [sid, b = std::move(b), r = std::move(r), c = std::move(c),
                     tau](Tape& tp, int self) {
                        double gs = tp.grad(self)(0, 0);
                        const int n = b.rows;
                        Matrix& g = tp.grad(sid);
                        const double w = gs / (2.0 * n * tau);
                        for (int i = 0; i < n; ++i) {
                            for (int j = 0; j < n; ++j) {
                                if (i == j) {
                                    g(i, i) -= 2.0 * w;
                                } else {
                                    g(i, j) += w * (std::exp(b(i, j) - r[i]) +
                                                    std::exp(b(i, j) - c[j]));
                                }
                            }
                        }
                    });
}

// Canonical form: denominators additionally range over same-view negatives
// (all 2n - 1 non-self pairs per anchor).
Tensor ntxent_canonical(Tensor s_cross, Tensor s_zz, Tensor s_pp, double tau) {
    Tape& t = *s_cross.tape;
    Matrix bx = s_cross.val();
    Matrix bz = s_zz.val();
    Matrix bp = s_pp.val();
    const int n = bx.rows;
    for (double& v : bx.data) v /= tau;
    for (double& v : bz.data) v /= tau;
    for (double& v : bp.data) v /= tau;

    // D_i: anchor z_i over {z_k, k != i} u {z'_k, all k}
    // E_i: anchor z'_i over {z'_k, k != i} u {z_k, all k}
    std::vector<double> dlse(n), else_(n);
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
        double mx = -HUGE_VAL;
        for (int k = 0; k < n; ++k) {
            if (k != i) mx = std::max(mx, bz(i, k));
            mx = std::max(mx, bx(i, k));
        }
        double s = 0.0;
        for (int k = 0; k < n; ++k) {
            if (k != i) s += std::exp(bz(i, k) - mx);
            s += std::exp(bx(i, k) - mx);
        }
        dlse[i] = mx + std::log(s);

        mx = -HUGE_VAL;
        for (int k = 0; k < n; ++k) {
            if (k != i) mx = std::max(mx, bp(i, k));
            mx = std::max(mx, bx(k, i));
        }
        s = 0.0;
        for (int k = 0; k < n; ++k) {
            if (k != i) s += std::exp(bp(i, k) - mx);
            s += std::exp(bx(k, i) - mx);
        }
        else_[i] = mx + std::log(s);

        loss -= (bx(i, i) - dlse[i]) + (bx(i, i) - else_[i]);
    }
    Matrix value(1, 1);
    value(0, 0) = loss / (2.0 * n);

    int xid = s_cross.id, zid = s_zz.id, pid = s_pp.id;
    return t.record(
        std::move(value), {xid, zid, pid},
        [xid, zid, pid, bx = std::move(bx), bz = std::move(bz),
         bp = std::move(bp), dlse = std::move(dlse), else_ = std::move(else_),
         tau](Tape& tp, int self) {
            double gs = tp.grad(self)(0, 0);
            const int n = bx.rows;
            const double w = gs / (2.0 * n * tau);
            Matrix& gx = tp.grad(xid);
            Matrix& gz = tp.grad(zid);
            Matrix& gp = tp.grad(pid);
            for (int i = 0; i < n; ++i) {
                gx(i, i) -= 2.0 * w;
                for (int k = 0; k < n; ++k) {
                    gx(i, k) += w * std::exp(bx(i, k) - dlse[i]);  // D_i term
                    gx(k, i) += w * std::exp(bx(k, i) - else_[i]); // E_i term
                    if (k != i) {
                        gz(i, k) += w * std::exp(bz(i, k) - dlse[i]);
                        gp(i, k) += w * std::exp(bp(i, k) - else_[i]);
                    }
                }
            }
        });
}

}  // namespace

Tensor ntxent(Tensor z, Tensor zp, double tau, bool canonical) {
    if (tau <= 0.0) throw ConfigError("ntxent: tau must be positive");
    if (!z.val().same_shape(zp.val()))
        throw NumericError("ntxent: embedding shapes differ");
    if (z.rows() < 2) throw DataError("ntxent: need at least 2 rows");
    Tensor s_cross = cosine_similarity(z, zp);
    if (!canonical) return ntxent_cross_only(s_cross, tau);
    Tensor s_zz = cosine_similarity(z, z);
    Tensor s_pp = cosine_similarity(zp, zp);
    return ntxent_canonical(s_cross, s_zz, s_pp, tau);
}

Tensor total_loss(Tensor l_ce, Tensor l_ce_prime, Tensor l_rec, Tensor l_cl,
                  double lambda, double mu, double gamma) {
    Tape& t = *l_ce.tape;
    const struct {
        const char* name;
        Tensor v;
    } parts[] = {{"l_ce", l_ce}, {"l_ce_prime", l_ce_prime}, {"l_rec", l_rec},
                 {"l_cl", l_cl}};
    for (const auto& p : parts) {
        double v = t.scalar(p.v.id);
        if (!std::isfinite(v))
            throw NumericError(std::string("total_loss: non-finite component ") + p.name);
    }
    Tensor out = add(l_ce, scale(l_ce_prime, lambda));
    out = add(out, scale(l_rec, mu));
    return add(out, scale(l_cl, gamma));
}

}  // namespace mdsgnn
