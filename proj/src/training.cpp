#include "mdsgnn/training.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <set>

#include "mdsgnn/errors.hpp"
#include "mdsgnn/gradcheck.hpp"
#include "mdsgnn/params_io.hpp"
#include "mdsgnn/text.hpp"

namespace mdsgnn {

namespace {

Matrix glorot(int rows, int cols, Rng& rng) {
    double limit = std::sqrt(6.0 / (rows + cols));
    Matrix w(rows, cols);
    for (double& x : w.data) x = rng.uniform(-limit, limit);
    return w;
}

std::vector<int> argmax_rows(const Matrix& probs) {
    std::vector<int> out(probs.rows);
    for (int i = 0; i < probs.rows; ++i) {
        int best = 0;
        for (int j = 1; j < probs.cols; ++j) {
            if (probs(i, j) > probs(i, best)) best = j;
        }
        out[i] = best;
    }
    return out;
}

struct ForwardLosses {
    Tensor l_ce, l_ce_prime, l_rec, l_cl, total;
};

// Everything after the reconstruction: both classification streams, the
// contrastive term, the reconstruction penalty, and their weighted sum.
// `propagated` enters as a constant; gradients never cross the propagation.
ForwardLosses finish_forward(Tape& tape, const IncompleteGraph& g, Tensor x_tilde,
                             const ClassifierT& cls, const Matrix& propagated,
                             const TrainConfig& cfg, bool with_rec) {
    StreamOutputs s1 = classify(x_tilde, cls);
    Tensor l_ce = cross_entropy(s1.y, g.graph.labels, g.graph.train_idx);
    Tensor x_prop = tape.leaf(propagated, false);
    StreamOutputs s2 = classify(x_prop, cls);
    Tensor l_ce_prime = cross_entropy(s2.y, g.graph.labels, g.graph.train_idx);
    Tensor z1 = project(s1.h, cls);
    Tensor z2 = project(s2.h, cls);
    Tensor l_cl = ntxent(z1, z2, cfg.tau, cfg.cl_canonical);
    Tensor l_rec = with_rec ? reconstruction_loss(x_tilde, g.graph.features, g.mask,
                                                  cfg.recon_loss)
                            : tape.leaf(Matrix::zeros(1, 1), false);
    Tensor total = total_loss(l_ce, l_ce_prime, l_rec, l_cl, cfg.lambda, cfg.mu,
                              cfg.gamma);
    return {l_ce, l_ce_prime, l_rec, l_cl, total};
}

void rebuild_propagation(TrainState& st, const IncompleteGraph& g,
                         const TrainConfig& cfg, const Matrix& x_tilde) {
    st.aug = knn_graph(x_tilde, cfg.knn_k);
    const Matrix& source =
        cfg.propagate_reconstructed ? x_tilde : g.graph.features;
    st.propagated = ppr_propagate(st.aug, source, cfg.alpha, cfg.ppr_steps);
    st.have_aug = true;
}

}  // namespace

GAET stage_gae(Tape& tape, GAEParams& p, bool requires_grad,
               std::vector<StagedParam>& staged) {
    auto mk = [&](Matrix& m, std::string name) {
        Tensor t = tape.leaf(m, requires_grad);
        // attention vectors decay like weights; biases and the fill do not
        bool decay = name.find(".b") == std::string::npos &&
                     name != "fill.x_omega";
        staged.push_back({std::move(name), &m, decay, t});
        return t;
    };
    GAET g;
    g.layers.resize(p.layers.size());
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        g.layers[l].average = p.layers[l].average;
        for (std::size_t h = 0; h < p.layers[l].heads.size(); ++h) {
            std::string base =
                "gat." + std::to_string(l) + ".head" + std::to_string(h);
            GATHeadT head;
            head.w = mk(p.layers[l].heads[h].w, base + ".w");
            head.a_src = mk(p.layers[l].heads[h].a_src, base + ".a_src");
            head.a_dst = mk(p.layers[l].heads[h].a_dst, base + ".a_dst");
            g.layers[l].heads.push_back(head);
        }
    }
    g.dec_w0 = mk(p.dec_w0, "dec.w0");
    g.dec_b0 = mk(p.dec_b0, "dec.b0");
    g.dec_w1 = mk(p.dec_w1, "dec.w1");
    g.dec_b1 = mk(p.dec_b1, "dec.b1");
    g.x_omega = mk(p.x_omega, "fill.x_omega");
    return g;
}

ClassifierT stage_classifier(Tape& tape, ClassifierParams& p, bool requires_grad,
                             std::vector<StagedParam>& staged) {
    auto mk = [&](Matrix& m, std::string name, bool decay) {
        Tensor t = tape.leaf(m, requires_grad);
        staged.push_back({std::move(name), &m, decay, t});
        return t;
    };
    ClassifierT c;
    c.use_bias = p.use_bias;
    c.w0 = mk(p.w0, "cls.w0", true);
    c.w1 = mk(p.w1, "cls.w1", true);
    c.w2 = mk(p.w2, "cls.w2", true);
    if (p.use_bias) {
        c.b0 = mk(p.b0, "cls.b0", false);
        c.b1 = mk(p.b1, "cls.b1", false);
    }
    return c;
}

void adam_step(Adam& opt, const std::vector<StagedParam>& staged, Tape& tape) {
    if (opt.m.empty() && !staged.empty()) {
        for (const StagedParam& p : staged) {
            opt.m.push_back(Matrix::zeros(p.value->rows, p.value->cols));
            opt.v.push_back(Matrix::zeros(p.value->rows, p.value->cols));
        }
    }
    if (opt.m.size() != staged.size()) {
        throw ConfigError("adam_step: parameter list changed between steps");
    }
    ++opt.t;
    double bc1 = 1.0 - std::pow(opt.beta1, opt.t);
    double bc2 = 1.0 - std::pow(opt.beta2, opt.t);
    for (std::size_t i = 0; i < staged.size(); ++i) {
        const Matrix& gm = tape.grad(staged[i].tensor.id);
        Matrix& w = *staged[i].value;
        Matrix& m = opt.m[i];
        Matrix& v = opt.v[i];
        for (std::size_t j = 0; j < w.data.size(); ++j) {
            double grad = gm.data[j];
            m.data[j] = opt.beta1 * m.data[j] + (1.0 - opt.beta1) * grad;
            v.data[j] = opt.beta2 * v.data[j] + (1.0 - opt.beta2) * grad * grad;
            double step = opt.lr * (m.data[j] / bc1) /
                          (std::sqrt(v.data[j] / bc2) + opt.eps);
            if (staged[i].decay) step += opt.lr * opt.weight_decay * w.data[j];
            w.data[j] -= step;
        }
    }
}

ModelParams init_params(const TrainConfig& cfg, int f, int c, Rng& rng) {
    ModelParams p;
    int per_head = cfg.hidden / cfg.heads;
    p.gae.layers.resize(cfg.gat_layers);
    for (int l = 0; l < cfg.gat_layers; ++l) {
        bool last = (l == cfg.gat_layers - 1);
        int d_in = (l == 0) ? f : cfg.hidden;
        int d_out = last ? cfg.hidden : per_head;
        p.gae.layers[l].average = last;
        p.gae.layers[l].heads.resize(cfg.heads);
        for (int h = 0; h < cfg.heads; ++h) {
            p.gae.layers[l].heads[h].w = glorot(d_in, d_out, rng);
            p.gae.layers[l].heads[h].a_src = glorot(d_out, 1, rng);
            p.gae.layers[l].heads[h].a_dst = glorot(d_out, 1, rng);
        }
    }
    p.gae.dec_w0 = glorot(cfg.hidden, cfg.hidden, rng);
    p.gae.dec_b0 = Matrix::zeros(1, cfg.hidden);
    p.gae.dec_w1 = glorot(cfg.hidden, f, rng);
    p.gae.dec_b1 = Matrix::zeros(1, f);
    p.gae.x_omega = Matrix::zeros(1, f);
    p.cls.use_bias = cfg.classifier_bias;
    p.cls.w0 = glorot(f, cfg.hidden, rng);
    p.cls.w1 = glorot(cfg.hidden, c, rng);
    p.cls.w2 = glorot(cfg.hidden, cfg.proj_dim, rng);
    p.cls.b0 = Matrix::zeros(1, cfg.hidden);
    p.cls.b1 = Matrix::zeros(1, c);
    return p;
}

TrainState init_state(const IncompleteGraph& g, const TrainConfig& cfg) {
    validate_config(cfg);
    if (g.graph.n < 2) throw DataError("init_state: need at least two nodes");
    if (cfg.knn_k >= g.graph.n) {
        throw ConfigError("init_state: knn_k=" + std::to_string(cfg.knn_k) +
                          " must be below the node count " +
                          std::to_string(g.graph.n));
    }
    Rng init_rng(cfg.seed, "init");
    return TrainState{
        init_params(cfg, g.graph.f, g.graph.c, init_rng),
        Adam{cfg.lr, cfg.weight_decay},
        0,
        AugmentedGraph{},
        Matrix{0, 0},
        false,
        Rng(cfg.seed, "model"),
        adjacency_with_self_loops(g.graph),
    };
}

EpochLosses train_step(TrainState& st, const IncompleteGraph& g,
                       const TrainConfig& cfg) {
    Tape tape;
    std::vector<StagedParam> staged;
    GAET gae;
    if (!cfg.bypass_gae) gae = stage_gae(tape, st.params.gae, true, staged);
    ClassifierT cls = stage_classifier(tape, st.params.cls, true, staged);
    EpochLosses el;
    Tensor total;
    try {
        Tensor x_tilde = cfg.bypass_gae
                             ? tape.leaf(g.graph.features, false)
                             : reconstruct(tape, g, gae, recon_config(cfg),
                                           st.adj_self, st.rng, true);
        if (!st.have_aug || st.epoch % cfg.t_knn == 0) {
            rebuild_propagation(st, g, cfg, x_tilde.val());
        }
        ForwardLosses fl = finish_forward(tape, g, x_tilde, cls, st.propagated,
                                          cfg, !cfg.bypass_gae);
        el.l_ce = tape.scalar(fl.l_ce.id);
        el.l_ce_prime = tape.scalar(fl.l_ce_prime.id);
        el.l_rec = tape.scalar(fl.l_rec.id);
        el.l_cl = tape.scalar(fl.l_cl.id);
        el.total = tape.scalar(fl.total.id);
        total = fl.total;
    } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(st.epoch) + ": " + e.what());
    }
    tape.backward(total.id);
    adam_step(st.opt, staged, tape);
    ++st.epoch;
    return el;
}

std::vector<int> predict(TrainState& st, const IncompleteGraph& g,
                         const TrainConfig& cfg) {
    Tape tape;
    std::vector<StagedParam> staged;
    GAET gae;
    if (!cfg.bypass_gae) gae = stage_gae(tape, st.params.gae, false, staged);
    ClassifierT cls = stage_classifier(tape, st.params.cls, false, staged);
    Rng eval_rng(0, "eval");  // eval-mode forwards draw nothing
    Tensor x_tilde = cfg.bypass_gae
                         ? tape.leaf(g.graph.features, false)
                         : reconstruct(tape, g, gae, recon_config(cfg),
                                       st.adj_self, eval_rng, false);
    Matrix probs = classify(x_tilde, cls).y.val();
    if (cfg.pred_stream != PredStream::original) {
        if (!st.have_aug) rebuild_propagation(st, g, cfg, x_tilde.val());
        Tensor x_prop = tape.leaf(st.propagated, false);
        const Matrix& y2 = classify(x_prop, cls).y.val();
        if (cfg.pred_stream == PredStream::augmented) {
            probs = y2;
        } else {
            for (std::size_t j = 0; j < probs.data.size(); ++j) {
                probs.data[j] = 0.5 * (probs.data[j] + y2.data[j]);
            }
        }
    }
    return argmax_rows(probs);
}

double accuracy(const std::vector<int>& pred, const std::vector<int>& labels,
                const std::vector<int>& idx) {
    if (idx.empty()) return 0.0;
    int hit = 0;
    for (int i : idx) hit += (pred[i] == labels[i]) ? 1 : 0;
    return static_cast<double>(hit) / static_cast<double>(idx.size());
}

std::pair<TrainState, RunMetrics> fit(const IncompleteGraph& g,
                                      const TrainConfig& cfg) {
    g.graph.validate();
    TrainState st = init_state(g, cfg);
    RunMetrics rm;
    auto t0 = std::chrono::steady_clock::now();
    // snapshot at the best-validation epoch; the returned state reproduces
    // the reported accuracies
    ModelParams best_params;
    AugmentedGraph best_aug;
    Matrix best_propagated{0, 0};
    bool best_have_aug = false;
    for (int e = 0; e < cfg.epochs; ++e) {
        rm.losses.push_back(train_step(st, g, cfg));
        std::vector<int> pred = predict(st, g, cfg);
        double va = accuracy(pred, g.graph.labels, g.graph.val_idx);
        if (rm.best_epoch < 0 || va > rm.best_val_acc) {
            rm.best_epoch = e;
            rm.best_val_acc = va;
            rm.test_acc = accuracy(pred, g.graph.labels, g.graph.test_idx);
            best_params = st.params;
            best_aug = st.aug;
            best_propagated = st.propagated;
            best_have_aug = st.have_aug;
        }
    }
    if (rm.best_epoch >= 0) {
        st.params = std::move(best_params);
        st.aug = std::move(best_aug);
        st.propagated = std::move(best_propagated);
        st.have_aug = best_have_aug;
    } else {
        std::vector<int> pred = predict(st, g, cfg);
        rm.best_val_acc = accuracy(pred, g.graph.labels, g.graph.val_idx);
        rm.test_acc = accuracy(pred, g.graph.labels, g.graph.test_idx);
    }
    rm.wall_secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return {std::move(st), std::move(rm)};
}

RunMetrics gcn_baseline(const IncompleteGraph& g, const TrainConfig& cfg) {
    g.graph.validate();
    validate_config(cfg);
    Rng init_rng(cfg.seed, "init");
    Matrix u0 = glorot(g.graph.f, cfg.hidden, init_rng);
    Matrix u1 = glorot(cfg.hidden, g.graph.c, init_rng);
    // self-loops keep isolated nodes alive; with no edges at all this
    // degenerates to an MLP
    auto norm = std::make_shared<const SparseMatrix>(
        sym_normalize(add_identity(adjacency_csr(g.graph))));
    Adam opt{cfg.lr, cfg.weight_decay};
    RunMetrics rm;
    auto t0 = std::chrono::steady_clock::now();
    auto forward = [&](Tape& tape, Tensor a, Tensor b) {
        Tensor x = tape.leaf(g.graph.features, false);
        Tensor h = relu(spmm(norm, matmul(x, a)));
        return row_softmax(spmm(norm, matmul(h, b)));
    };
    auto eval_pred = [&]() {
        Tape tape;
        Tensor y = forward(tape, tape.leaf(u0, false), tape.leaf(u1, false));
        return argmax_rows(y.val());
    };
    for (int e = 0; e < cfg.epochs; ++e) {
        Tape tape;
        Tensor a = tape.leaf(u0, true);
        Tensor b = tape.leaf(u1, true);
        Tensor y = forward(tape, a, b);
        Tensor l = cross_entropy(y, g.graph.labels, g.graph.train_idx);
        EpochLosses el;
        el.l_ce = tape.scalar(l.id);
        el.total = el.l_ce;
        if (!std::isfinite(el.total)) {
            throw NumericError("epoch " + std::to_string(e) +
                               ": non-finite component l_ce");
        }
        tape.backward(l.id);
        std::vector<StagedParam> staged = {{"gcn.u0", &u0, true, a},
                                           {"gcn.u1", &u1, true, b}};
        adam_step(opt, staged, tape);
        rm.losses.push_back(el);
        std::vector<int> pred = eval_pred();
        double va = accuracy(pred, g.graph.labels, g.graph.val_idx);
        if (rm.best_epoch < 0 || va > rm.best_val_acc) {
            rm.best_epoch = e;
            rm.best_val_acc = va;
            rm.test_acc = accuracy(pred, g.graph.labels, g.graph.test_idx);
        }
    }
    if (rm.best_epoch < 0) {
        std::vector<int> pred = eval_pred();
        rm.best_val_acc = accuracy(pred, g.graph.labels, g.graph.val_idx);
        rm.test_acc = accuracy(pred, g.graph.labels, g.graph.test_idx);
    }
    rm.wall_secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return rm;
}

Method parse_method(const std::string& s) {
    if (s == "mdsgnn") return Method::mdsgnn;
    if (s == "gcn") return Method::gcn;
    throw ConfigError("unknown method '" + s + "' (expected mdsgnn or gcn)");
}

RunSummary run_seeds(const IncompleteGraph& g, const TrainConfig& cfg,
                     const std::vector<std::uint64_t>& seeds, Method method) {
    if (seeds.empty()) throw ConfigError("run_seeds: need at least one seed");
    RunSummary rs;
    std::vector<double> accs;
    for (std::uint64_t s : seeds) {
        TrainConfig c = cfg;
        c.seed = s;
        // corruption depends only on (graph, rates, seed), never on the
        // method, so methods compared per seed see the same instance
        IncompleteGraph gs =
            corrupt_for_seed(g, cfg.feature_missing, cfg.edge_missing, s);
        RunMetrics rm =
            (method == Method::gcn) ? gcn_baseline(gs, c) : fit(gs, c).second;
        accs.push_back(rm.test_acc);
        rs.runs.push_back({s, std::move(rm)});
    }
    rs.mean = mean_of(accs);
    rs.stddev = sample_std(accs);
    return rs;
}

AblateDrop parse_ablate_drop(const std::string& s) {
    if (s == "rec") return AblateDrop::rec;
    if (s == "cl") return AblateDrop::cl;
    if (s == "both") return AblateDrop::both;
    throw ConfigError("unknown ablation '" + s + "' (expected rec, cl, or both)");
}

RunSummary ablate(const IncompleteGraph& g, const TrainConfig& cfg,
                  AblateDrop drop, const std::vector<std::uint64_t>& seeds) {
    TrainConfig c = cfg;
    std::string tag;
    switch (drop) {
        case AblateDrop::rec: c.mu = 0.0; tag = "wo_rec"; break;
        case AblateDrop::cl: c.gamma = 0.0; tag = "wo_cl"; break;
        case AblateDrop::both: c.mu = 0.0; c.gamma = 0.0; tag = "wo_both"; break;
    }
    RunSummary rs = run_seeds(g, c, seeds);
    rs.tag = tag;
    return rs;
}

SweepAxis parse_sweep_axis(const std::string& s) {
    if (s == "feature_missing") return SweepAxis::feature_missing;
    if (s == "edge_missing") return SweepAxis::edge_missing;
    if (s == "knn_k") return SweepAxis::knn_k;
    if (s == "ppr_steps") return SweepAxis::ppr_steps;
    throw ConfigError("unknown sweep axis '" + s +
                      "' (expected feature_missing, edge_missing, knn_k, or "
                      "ppr_steps)");
}

std::vector<SweepRow> sweep(const IncompleteGraph& g, const TrainConfig& cfg,
                            SweepAxis axis, const std::vector<double>& values,
                            const std::vector<std::uint64_t>& seeds) {
    if (values.empty()) throw ConfigError("sweep: need at least one value");
    auto as_int = [](double v) {
        if (std::round(v) != v) {
            throw ConfigError("sweep: axis takes integer values, got " +
                              format_double(v));
        }
        return static_cast<int>(v);
    };
    std::vector<SweepRow> rows;
    for (double v : values) {
        TrainConfig c = cfg;
        switch (axis) {
            case SweepAxis::feature_missing: c.feature_missing = v; break;
            case SweepAxis::edge_missing: c.edge_missing = v; break;
            case SweepAxis::knn_k: c.knn_k = as_int(v); break;
            case SweepAxis::ppr_steps: c.ppr_steps = as_int(v); break;
        }
        validate_config(c);
        rows.push_back({v, run_seeds(g, c, seeds)});
    }
    return rows;
}

void save_checkpoint(const std::string& path, TrainState& st) {
    std::vector<std::pair<std::string, const Matrix*>> entries;
    st.params.visit([&](const std::string& name, Matrix& m, bool) {
        entries.emplace_back(name, &m);
    });
    if (st.have_aug) entries.emplace_back("cache.propagated", &st.propagated);
    save_params(path, entries);
}

TrainState load_checkpoint(const std::string& path, const IncompleteGraph& g,
                           const TrainConfig& cfg) {
    TrainState st = init_state(g, cfg);
    std::map<std::string, Matrix*> slots;
    st.params.visit(
        [&](const std::string& name, Matrix& m, bool) { slots[name] = &m; });
    std::set<std::string> seen;
    for (auto& [name, m] : load_params(path)) {
        if (name == "cache.propagated") {
            if (m.rows != g.graph.n) {
                throw DataError("checkpoint " + path +
                                ": propagation cache has " +
                                std::to_string(m.rows) + " rows, dataset has " +
                                std::to_string(g.graph.n));
            }
            st.propagated = std::move(m);
            st.have_aug = true;
            continue;
        }
        auto it = slots.find(name);
        if (it == slots.end()) {
            throw DataError("checkpoint " + path + ": unknown entry '" + name +
                            "'");
        }
        if (!seen.insert(name).second) {
            throw DataError("checkpoint " + path + ": duplicate entry '" + name +
                            "'");
        }
        if (it->second->rows != m.rows || it->second->cols != m.cols) {
            throw DataError("checkpoint " + path + ": entry '" + name + "' is " +
                            std::to_string(m.rows) + "x" +
                            std::to_string(m.cols) + ", expected " +
                            std::to_string(it->second->rows) + "x" +
                            std::to_string(it->second->cols));
        }
        *it->second = std::move(m);
    }
    for (const auto& [name, unused] : slots) {
        (void)unused;
        if (!seen.count(name)) {
            throw DataError("checkpoint " + path + ": missing entry '" + name +
                            "'");
        }
    }
    return st;
}

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double mu = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - mu) * (x - mu);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

namespace {

// Small connected instance for gradient checks: a path with chords,
// round-robin labels, features in [0,1], last rows masked out.
IncompleteGraph probe_graph(int n, int f, int c, std::uint64_t seed,
                            int missing) {
    Rng rng(seed, "probe");
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    for (int i = 0; i + 3 < n; i += 3) edges.emplace_back(i, i + 3);
    Graph g;
    g.n = n;
    g.f = f;
    g.c = c;
    g.adj = adjacency_from_edges(n, edges, "probe");
    g.features = Matrix(n, f);
    for (double& x : g.features.data) x = rng.uniform(0.0, 1.0);
    g.labels.resize(n);
    for (int i = 0; i < n; ++i) g.labels[i] = i % c;
    for (int i = 0; i < n; ++i) {
        (i % 3 == 0 ? g.train_idx : i % 3 == 1 ? g.val_idx : g.test_idx)
            .push_back(i);
    }
    MaskMatrix mask;
    mask.known.assign(n, 1);
    for (int i = 0; i < missing; ++i) {
        mask.known[n - 1 - i] = 0;
        g.features.zero_row(n - 1 - i);
    }
    g.validate();
    return {std::move(g), std::move(mask)};
}

Matrix probe_weights(int rows, int cols, std::uint64_t seed) {
    Rng rng(seed, "probe-w");
    Matrix m(rows, cols);
    for (double& x : m.data) x = rng.uniform(-1.0, 1.0);
    return m;
}

// Weighted-sum scalarization so every output coordinate carries a distinct
// gradient.
Tensor probe_sum(Tape& tape, Tensor x, const Matrix& probe) {
    return sum(mul(x, tape.leaf(probe, false)));
}

GAET gaet_from(const GAEParams& shape, const std::vector<Tensor>& xs,
               std::size_t& cur) {
    GAET g;
    g.layers.resize(shape.layers.size());
    for (std::size_t l = 0; l < shape.layers.size(); ++l) {
        g.layers[l].average = shape.layers[l].average;
        for (std::size_t h = 0; h < shape.layers[l].heads.size(); ++h) {
            g.layers[l].heads.push_back({xs[cur], xs[cur + 1], xs[cur + 2]});
            cur += 3;
        }
    }
    g.dec_w0 = xs[cur++];
    g.dec_b0 = xs[cur++];
    g.dec_w1 = xs[cur++];
    g.dec_b1 = xs[cur++];
    g.x_omega = xs[cur++];
    return g;
}

ClassifierT clst_from(const ClassifierParams& shape,
                      const std::vector<Tensor>& xs, std::size_t& cur) {
    ClassifierT c;
    c.use_bias = shape.use_bias;
    c.w0 = xs[cur++];
    c.w1 = xs[cur++];
    c.w2 = xs[cur++];
    if (shape.use_bias) {
        c.b0 = xs[cur++];
        c.b1 = xs[cur++];
    }
    return c;
}

std::vector<Matrix> collect_params(ModelParams& p, bool gae_only) {
    std::vector<Matrix> out;
    p.gae.visit([&](const std::string&, Matrix& m, bool) { out.push_back(m); });
    if (!gae_only) {
        p.cls.visit(
            [&](const std::string&, Matrix& m, bool) { out.push_back(m); });
    }
    return out;
}

// Finite differences need parameters off their zero initialization: zero
// biases park rectifier units dead and put attention logits exactly on the
// kink, where the two-sided difference straddles the nondifferentiable point.
void jitter_zeros(ModelParams& p, std::uint64_t seed) {
    Rng rng(seed, "gc-jitter");
    auto bump = [&](const std::string&, Matrix& m, bool) {
        for (double x : m.data) {
            if (x != 0.0) return;
        }
        for (double& x : m.data) x = rng.uniform(-0.5, 0.5);
    };
    p.gae.visit(bump);
    p.cls.visit(bump);
}

}  // namespace

std::vector<std::pair<std::string, double>> gradcheck_suite() {
    std::vector<std::pair<std::string, double>> results;
    auto run = [&](const std::string& name,
                   const std::function<Tensor(Tape&, const std::vector<Tensor>&)>& build,
                   const std::vector<Matrix>& inputs) {
        results.emplace_back(name, grad_check(build, inputs).max_rel_err);
    };

    TrainConfig small;
    small.hidden = 4;
    small.proj_dim = 3;
    small.heads = 2;
    small.gat_layers = 2;
    small.dropout = 0.0;
    small.p_r = 0.0;
    small.knn_k = 2;
    small.ppr_steps = 3;
    small.alpha = 0.2;
    small.tau = 0.5;
    small.lambda = 0.7;
    small.mu = 0.9;
    small.gamma = 1.3;
    small.classifier_bias = true;
    validate_config(small);

    IncompleteGraph g = probe_graph(8, 5, 3, 7, 2);
    auto adj = adjacency_with_self_loops(g.graph);
    ReconConfig rc = recon_config(small);

    // single attention layer, both head-combination modes
    for (bool average : {false, true}) {
        int d_in = 4, d_out = 3, n = 6;
        IncompleteGraph gl = probe_graph(n, d_in, 2, 11, 0);
        auto adj_l = adjacency_with_self_loops(gl.graph);
        Matrix probe = probe_weights(n, average ? d_out : 2 * d_out, 13);
        ReconConfig rc0 = rc;
        auto build = [=](Tape& tape, const std::vector<Tensor>& xs) {
            GATLayerT layer;
            layer.average = average;
            layer.heads.push_back({xs[1], xs[2], xs[3]});
            layer.heads.push_back({xs[4], xs[5], xs[6]});
            Rng rng(1, "gc");
            Tensor out = gat_layer(xs[0], adj_l, layer, rc0, rng, true);
            return probe_sum(tape, out, probe);
        };
        std::vector<Matrix> inputs = {probe_weights(n, d_in, 17)};
        for (int h = 0; h < 2; ++h) {
            Rng rng(19 + h, "gc-init");
            inputs.push_back(glorot(d_in, d_out, rng));
            inputs.push_back(glorot(d_out, 1, rng));
            inputs.push_back(glorot(d_out, 1, rng));
        }
        run(average ? "gat_layer_avg" : "gat_layer", build, inputs);
    }

    // full encoder/decoder wrt every parameter, fill vector included
    {
        Rng init_rng(small.seed, "init");
        ModelParams mp = init_params(small, g.graph.f, g.graph.c, init_rng);
        jitter_zeros(mp, 101);
        Matrix probe = probe_weights(g.graph.n, g.graph.f, 23);
        GAEParams shape = mp.gae;
        auto build = [=, &g](Tape& tape, const std::vector<Tensor>& xs) {
            std::size_t cur = 0;
            GAET gt = gaet_from(shape, xs, cur);
            Rng rng(3, "gc");
            Tensor x_tilde = reconstruct(tape, g, gt, rc, adj, rng, true);
            return probe_sum(tape, x_tilde, probe);
        };
        run("reconstruct", build, collect_params(mp, true));
    }

    // donor replacement active: donor rows must carry no fill gradient
    {
        Rng init_rng(29, "init");
        ModelParams mp = init_params(small, g.graph.f, g.graph.c, init_rng);
        jitter_zeros(mp, 103);
        Matrix probe = probe_weights(g.graph.n, g.graph.f, 31);
        GAEParams shape = mp.gae;
        ReconConfig rc_fill = rc;
        rc_fill.p_r = 0.5;
        auto build = [=, &g](Tape& tape, const std::vector<Tensor>& xs) {
            std::size_t cur = 0;
            GAET gt = gaet_from(shape, xs, cur);
            Rng rng(3, "gc");
            Tensor x_tilde = reconstruct(tape, g, gt, rc_fill, adj, rng, true);
            return probe_sum(tape, x_tilde, probe);
        };
        run("fill_replacement", build, collect_params(mp, true));
    }

    // reconstruction penalties against fixed targets
    for (ReconLoss kind : {ReconLoss::bce, ReconLoss::mse}) {
        auto build = [=, &g](Tape&, const std::vector<Tensor>& xs) {
            return reconstruction_loss(xs[0], g.graph.features, g.mask, kind);
        };
        Matrix logits = probe_weights(g.graph.n, g.graph.f, 37);
        run(kind == ReconLoss::bce ? "recon_loss_bce" : "recon_loss_mse", build,
            {logits});
    }

    // classifier head through the cross entropy
    {
        auto build = [&g](Tape&, const std::vector<Tensor>& xs) {
            ClassifierT c;
            c.use_bias = true;
            c.w0 = xs[1];
            c.w1 = xs[2];
            c.b0 = xs[3];
            c.b1 = xs[4];
            StreamOutputs s = classify(xs[0], c);
            return cross_entropy(s.y, g.graph.labels, g.graph.train_idx);
        };
        Rng rng(41, "gc-init");
        std::vector<Matrix> inputs = {probe_weights(8, 5, 43),
                                      glorot(5, 4, rng), glorot(4, 3, rng),
                                      Matrix::full(1, 4, 0.1),
                                      Matrix::full(1, 3, -0.2)};
        run("classifier", build, inputs);
    }

    // projection weights through the contrastive loss
    {
        auto build = [](Tape&, const std::vector<Tensor>& xs) {
            ClassifierT c;
            c.w2 = xs[2];
            return ntxent(project(xs[0], c), project(xs[1], c), 0.5);
        };
        Rng rng(47, "gc-init");
        run("projection", build,
            {probe_weights(5, 4, 53), probe_weights(5, 4, 59),
             glorot(4, 3, rng)});
    }

    // both contrastive variants on raw embeddings
    for (bool canonical : {false, true}) {
        auto build = [=](Tape&, const std::vector<Tensor>& xs) {
            return ntxent(xs[0], xs[1], 0.7, canonical);
        };
        run(canonical ? "ntxent_canonical" : "ntxent_cross", build,
            {probe_weights(5, 3, 61), probe_weights(5, 3, 67)});
    }

    // every parameter through the whole composite objective
    {
        Rng init_rng(small.seed, "init");
        ModelParams mp = init_params(small, g.graph.f, g.graph.c, init_rng);
        jitter_zeros(mp, 107);
        GAEParams gae_shape = mp.gae;
        ClassifierParams cls_shape = mp.cls;
        Matrix propagated;
        {
            Tape t0;
            std::vector<StagedParam> sp;
            GAET g0 = stage_gae(t0, mp.gae, false, sp);
            Rng rng(3, "gc");
            Tensor x0 = reconstruct(t0, g, g0, rc, adj, rng, true);
            AugmentedGraph aug = knn_graph(x0.val(), small.knn_k);
            propagated = ppr_propagate(aug, g.graph.features, small.alpha,
                                       small.ppr_steps);
        }
        TrainConfig cfg = small;
        auto build = [=, &g](Tape& tape, const std::vector<Tensor>& xs) {
            std::size_t cur = 0;
            GAET gt = gaet_from(gae_shape, xs, cur);
            ClassifierT ct = clst_from(cls_shape, xs, cur);
            Rng rng(3, "gc");
            Tensor x_tilde = reconstruct(tape, g, gt, rc, adj, rng, true);
            ForwardLosses fl =
                finish_forward(tape, g, x_tilde, ct, propagated, cfg, true);
            return fl.total;
        };
        run("full_pipeline", build, collect_params(mp, false));
    }

    // baseline model
    {
        auto norm = std::make_shared<const SparseMatrix>(
            sym_normalize(add_identity(adjacency_csr(g.graph))));
        auto build = [=, &g](Tape& tape, const std::vector<Tensor>& xs) {
            Tensor x = tape.leaf(g.graph.features, false);
            Tensor h = relu(spmm(norm, matmul(x, xs[0])));
            Tensor y = row_softmax(spmm(norm, matmul(h, xs[1])));
            return cross_entropy(y, g.graph.labels, g.graph.train_idx);
        };
        Rng rng(71, "gc-init");
        run("gcn", build, {glorot(5, 4, rng), glorot(4, 3, rng)});
    }

    return results;
}

}  // namespace mdsgnn
