#include "mdsgnn/recon.hpp"

#include <algorithm>
#include <cmath>

#include "mdsgnn/errors.hpp"

namespace mdsgnn {

void GAEParams::visit(const std::function<void(const std::string&, Matrix&, bool)>& fn) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
        for (std::size_t h = 0; h < layers[l].heads.size(); ++h) {
            std::string base = "gat." + std::to_string(l) + ".head" + std::to_string(h);
            fn(base + ".w", layers[l].heads[h].w, true);
            fn(base + ".a_src", layers[l].heads[h].a_src, true);
            fn(base + ".a_dst", layers[l].heads[h].a_dst, true);
        }
    }
    fn("dec.w0", dec_w0, true);
    fn("dec.b0", dec_b0, false);
    fn("dec.w1", dec_w1, true);
    fn("dec.b1", dec_b1, false);
    fn("fill.x_omega", x_omega, false);
}

Tensor fill_missing(Tensor x_masked, const MaskMatrix& mask, Tensor x_omega,
                    double p_r, Rng& rng, bool train, InferenceFill fill) {
    Tape& t = *x_masked.tape;
    const Matrix& x = x_masked.val();
    const int n = x.rows, f = x.cols;
    if (static_cast<int>(mask.known.size()) != n)
        throw DataError("fill_missing: mask length != node count");
    if (x_omega.rows() != 1 || x_omega.cols() != f)
        throw NumericError("fill_missing: x_omega must be 1 x f");
    if (p_r < 0.0 || p_r > 1.0) throw ConfigError("fill_missing: p_r must be in [0, 1]");

    std::vector<int> known;
    for (int i = 0; i < n; ++i)
        if (mask.known[i]) known.push_back(i);
    const int missing = n - static_cast<int>(known.size());

    Matrix out = x;
    std::vector<int> known_snapshot = known;
    std::vector<int> omega_rows;  // rows that took x_omega: gradient sink
    if (train) {
        if (p_r > 0.0 && known.empty() && missing > 0)
            throw DataError("fill_missing: p_r > 0 requires at least one known node");
        const Matrix& w = x_omega.val();
        for (int i = 0; i < n; ++i) {
            if (mask.known[i]) continue;
            if (rng.uniform() < p_r) {
                int donor = known[static_cast<std::size_t>(
                    rng.uniform_int(static_cast<std::uint64_t>(known.size())))];
                out.set_row(i, x.row(donor));  // copy, no gradient to the source
            } else {
                out.set_row(i, w.row(0));
                omega_rows.push_back(i);
            }
        }
    } else if (fill == InferenceFill::learned) {
        const Matrix& w = x_omega.val();
        for (int i = 0; i < n; ++i) {
            if (mask.known[i]) continue;
            out.set_row(i, w.row(0));
            omega_rows.push_back(i);
        }
    } else {
        for (int i = 0; i < n; ++i)
            if (!mask.known[i]) out.zero_row(i);
    }

    int xid = x_masked.id, wid = x_omega.id;
    return t.record(
        std::move(out), {xid, wid},
        [xid, wid, known = std::move(known_snapshot),
         omega_rows = std::move(omega_rows), f](Tape& tp, int self) {
            const Matrix& g = tp.grad(self);
            // only touch a parent's gradient when something flows to it, so
            // an unused fill vector stays grad-free
            if (tp.requires_grad(xid) && !known.empty()) {
                Matrix& gx = tp.grad(xid);
                for (int i : known) {
                    const double* src = g.row(i);
                    double* dst = gx.row(i);
                    for (int j = 0; j < f; ++j) dst[j] += src[j];
                }
            }
            if (tp.requires_grad(wid) && !omega_rows.empty()) {
                Matrix& gw = tp.grad(wid);
                for (int i : omega_rows) {
                    const double* src = g.row(i);
                    for (int j = 0; j < f; ++j) gw.data[j] += src[j];
                }
            }
        });
}

namespace {

// Multi-head attention aggregation for one head: per edge (i, j) over
// N(i) u {i}, e_ij = LeakyReLU_0.2(s_src[i] + s_dst[j]), alpha = softmax
// over i's neighborhood, out_i = sum_j alpha_ij g_j. Attention dropout
// multiplies alpha by an inverted-scale mask.
Tensor attention_aggregate(Tensor g_feat, Tensor s_src, Tensor s_dst,
                           std::shared_ptr<const SparseMatrix> adj_self,
                           double attn_dropout, Rng& rng, bool train) {
    constexpr double kSlope = 0.2;
    Tape& t = *g_feat.tape;
    const Matrix& gv = g_feat.val();
    const SparseMatrix& a = *adj_self;
    const int n = a.rows, d = gv.cols;
    if (gv.rows != n || s_src.rows() != n || s_dst.rows() != n ||
        s_src.cols() != 1 || s_dst.cols() != 1)
        throw NumericError("attention_aggregate: shape mismatch");

    const Matrix& src = s_src.val();
    const Matrix& dst = s_dst.val();
    const int m = a.nnz();
    std::vector<double> pre(m), alpha(m);
    for (int i = 0; i < n; ++i)
        for (int p = a.indptr[i]; p < a.indptr[i + 1]; ++p) {
            double e = src(i, 0) + dst(a.indices[p], 0);
            pre[p] = e;
            alpha[p] = e > 0.0 ? e : kSlope * e;
        }
    // per-row softmax over the neighborhood
    for (int i = 0; i < n; ++i) {
        int lo = a.indptr[i], hi = a.indptr[i + 1];
        double mx = alpha[lo];
        for (int p = lo + 1; p < hi; ++p) mx = std::max(mx, alpha[p]);
        double z = 0.0;
        for (int p = lo; p < hi; ++p) {
            alpha[p] = std::exp(alpha[p] - mx);
            z += alpha[p];
        }
        for (int p = lo; p < hi; ++p) alpha[p] /= z;
    }
    std::vector<double> drop_mask;
    if (train && attn_dropout > 0.0) {
        drop_mask.resize(m);
        const double keep = 1.0 - attn_dropout;
        for (double& v : drop_mask) v = rng.uniform() < attn_dropout ? 0.0 : 1.0 / keep;
    }

    Matrix out(n, d);
    for (int i = 0; i < n; ++i) {
        double* orow = out.row(i);
        for (int p = a.indptr[i]; p < a.indptr[i + 1]; ++p) {
            double w = alpha[p] * (drop_mask.empty() ? 1.0 : drop_mask[p]);
            const double* grow = gv.row(a.indices[p]);
            for (int j = 0; j < d; ++j) orow[j] += w * grow[j];
        }
    }

    int gid = g_feat.id, sid = s_src.id, did = s_dst.id;
    return t.record(
        std::move(out), {gid, sid, did},
        [gid, sid, did, adj_self, pre = std::move(pre), alpha = std::move(alpha),
         drop_mask = std::move(drop_mask), d](Tape& tp, int self) {
            const SparseMatrix& a = *adj_self;
            const int n = a.rows, m = a.nnz();
            const Matrix& gout = tp.grad(self);
            const Matrix& gv = tp.value(gid);

            std::vector<double> galpha(m);
            Matrix& gg = tp.grad(gid);
            for (int i = 0; i < n; ++i) {
                const double* gorow = gout.row(i);
                for (int p = a.indptr[i]; p < a.indptr[i + 1]; ++p) {
                    int j = a.indices[p];
                    double keep = drop_mask.empty() ? 1.0 : drop_mask[p];
                    double used = alpha[p] * keep;
                    const double* grow = gv.row(j);
                    double* ggrow = gg.row(j);
                    double dot = 0.0;
                    for (int q = 0; q < d; ++q) {
                        dot += gorow[q] * grow[q];
                        ggrow[q] += used * gorow[q];
                    }
                    galpha[p] = dot * keep;
                }
            }

            Matrix& gsrc = tp.grad(sid);
            Matrix& gdst = tp.grad(did);
            for (int i = 0; i < n; ++i) {
                int lo = a.indptr[i], hi = a.indptr[i + 1];
                double s = 0.0;
                for (int p = lo; p < hi; ++p) s += galpha[p] * alpha[p];
                for (int p = lo; p < hi; ++p) {
                    double ge = alpha[p] * (galpha[p] - s);
                    double slope = pre[p] > 0.0 ? 1.0 : (pre[p] < 0.0 ? kSlope : 0.0);
                    double gpre = ge * slope;
                    gsrc(i, 0) += gpre;
                    gdst(a.indices[p], 0) += gpre;
                }
            }
        });
}

}  // namespace

Tensor gat_layer(Tensor h, std::shared_ptr<const SparseMatrix> adj_self,
                 const GATLayerT& p, const ReconConfig& cfg, Rng& rng, bool train) {
    if (p.heads.empty()) throw ConfigError("gat_layer: no heads");
    Tensor hin = dropout(h, cfg.input_dropout, rng, train);
    std::vector<Tensor> outs;
    outs.reserve(p.heads.size());
    for (const GATHeadT& head : p.heads) {
        if (head.w.rows() != hin.cols())
            throw NumericError("gat_layer: input width does not match head weights");
        Tensor g = matmul(hin, head.w);
        Tensor s_src = matmul(g, head.a_src);
        Tensor s_dst = matmul(g, head.a_dst);
        Tensor agg = attention_aggregate(g, s_src, s_dst, adj_self,
                                         cfg.attn_dropout, rng, train);
        outs.push_back(p.average ? agg : elu(agg));
    }
    if (outs.size() == 1) return outs[0];
    if (!p.average) return concat_cols(outs);
    Tensor acc = outs[0];
    for (std::size_t i = 1; i < outs.size(); ++i) acc = add(acc, outs[i]);
    return scale(acc, 1.0 / static_cast<double>(outs.size()));
}

Tensor reconstruct(Tape& t, const IncompleteGraph& g, const GAET& p,
                   const ReconConfig& cfg,
                   std::shared_ptr<const SparseMatrix> adj_self, Rng& rng,
                   bool train) {
    Tensor x = t.leaf(g.graph.features, false);
    Tensor h = fill_missing(x, g.mask, p.x_omega, cfg.p_r, rng, train,
                            cfg.inference_fill);
    for (const GATLayerT& layer : p.layers)
        h = gat_layer(h, adj_self, layer, cfg, rng, train);
    Tensor d = relu(add_rowvec(matmul(h, p.dec_w0), p.dec_b0));
    return add_rowvec(matmul(d, p.dec_w1), p.dec_b1);
}

namespace {
double stable_sigmoid(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}
}  // namespace

Tensor reconstruction_loss(Tensor x_tilde, const Matrix& x_prime,
                           const MaskMatrix& mask, ReconLoss kind) {
    Tape& t = *x_tilde.tape;
    const Matrix& xt = x_tilde.val();
    if (!xt.same_shape(x_prime))
        throw NumericError("reconstruction_loss: shape mismatch");
    if (static_cast<int>(mask.known.size()) != xt.rows)
        throw DataError("reconstruction_loss: mask length != node count");
    const int n = xt.rows, f = xt.cols;
    const int m_known = mask.known_count();
    if (m_known == 0) throw DataError("reconstruction_loss: no known nodes");

    constexpr double kClamp = 30.0;
    double total = 0.0;
    if (kind == ReconLoss::bce) {
        for (int i = 0; i < n; ++i) {
            if (!mask.known[i]) continue;
            const double* zt = xt.row(i);
            const double* y = x_prime.row(i);
            for (int j = 0; j < f; ++j) {
                double z = std::clamp(zt[j], -kClamp, kClamp);
                // max(z,0) - z y + ln(1 + e^{-|z|})
                total += std::max(z, 0.0) - z * y[j] + std::log1p(std::exp(-std::abs(z)));
            }
        }
    } else {
        for (int i = 0; i < n; ++i) {
            if (!mask.known[i]) continue;
            const double* zt = xt.row(i);
            const double* y = x_prime.row(i);
            for (int j = 0; j < f; ++j) {
                double d = zt[j] - y[j];
                total += d * d;
            }
        }
    }
    Matrix value(1, 1);
    value(0, 0) = total / m_known;

    int xid = x_tilde.id;
    Matrix target = x_prime;
    std::vector<std::uint8_t> known = mask.known;
    return t.record(
        std::move(value), {xid},
        [xid, target = std::move(target), known = std::move(known), kind,
         m_known](Tape& tp, int self) {
            double gs = tp.grad(self)(0, 0);
            const Matrix& xt = tp.value(xid);
            Matrix& gx = tp.grad(xid);
            const double scale = gs / m_known;
            for (int i = 0; i < xt.rows; ++i) {
                if (!known[i]) continue;
                const double* zt = xt.row(i);
                const double* y = target.row(i);
                double* gr = gx.row(i);
                for (int j = 0; j < xt.cols; ++j) {
                    if (kind == ReconLoss::bce) {
                        if (std::abs(zt[j]) < kClamp)
                            gr[j] += scale * (stable_sigmoid(zt[j]) - y[j]);
                    } else {
                        gr[j] += scale * 2.0 * (zt[j] - y[j]);
                    }
                }
            }
        });
}

}  // namespace mdsgnn
