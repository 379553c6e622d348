#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <memory>

#include "doctest.h"
#include "mdsgnn/errors.hpp"
#include "mdsgnn/recon.hpp"
#include "mdsgnn/tape.hpp"
#include "synthetic.hpp"

using namespace mdsgnn;
using testsupport::random_matrix;

namespace {

ReconConfig dry_config() {
    ReconConfig rc;
    rc.input_dropout = 0.0;
    rc.attn_dropout = 0.0;
    return rc;
}

MaskMatrix mask_of(std::vector<std::uint8_t> known) {
    MaskMatrix m;
    m.known = std::move(known);
    return m;
}

}  // namespace

TEST_CASE("fill_missing passes known rows through and consumes no draws") {
    Tape t;
    Matrix x = random_matrix(4, 3, 1);
    Tensor xt = t.leaf(x);
    Tensor omega = t.leaf(random_matrix(1, 3, 2));
    Rng rng(5, "fill");
    Tensor out = fill_missing(xt, mask_of({1, 1, 1, 1}), omega, 0.5, rng, true);
    CHECK(out.val() == x);
    Rng fresh(5, "fill");
    CHECK(rng.next_u64() == fresh.next_u64());  // nothing was drawn
}

TEST_CASE("missing rows become the fill vector when replacement is off") {
    Tape t;
    Matrix x = random_matrix(4, 3, 3);
    x.zero_row(1);
    x.zero_row(3);
    Matrix om = random_matrix(1, 3, 4);
    Rng rng(1, "fill");
    Tensor out = fill_missing(t.leaf(x), mask_of({1, 0, 1, 0}), t.leaf(om), 0.0,
                              rng, true);
    for (int j = 0; j < 3; ++j) {
        CHECK(out.val()(1, j) == om(0, j));
        CHECK(out.val()(3, j) == om(0, j));
        CHECK(out.val()(0, j) == x(0, j));
    }
}

TEST_CASE("donor replacement copies a known row and cuts its gradient") {
    Tape t;
    Matrix x = random_matrix(5, 3, 5);
    x.zero_row(2);
    x.zero_row(4);
    MaskMatrix mask = mask_of({1, 1, 0, 1, 0});
    Tensor xt = t.leaf(x, true);
    Tensor omega = t.leaf(random_matrix(1, 3, 6), true);
    Rng rng(9, "fill");
    Tensor out = fill_missing(xt, mask, omega, 1.0, rng, true);

    for (int i : {2, 4}) {
        bool matches_some_known = false;
        for (int k : {0, 1, 3}) {
            bool eq = true;
            for (int j = 0; j < 3; ++j) {
                if (out.val()(i, j) != x(k, j)) eq = false;
            }
            matches_some_known |= eq;
        }
        CHECK(matches_some_known);
    }

    t.backward(sum(out).id);
    CHECK_FALSE(t.grad_reached(omega.id));  // every fill was a donor copy
    const Matrix& gx = t.grad(xt.id);
    for (int i : {0, 1, 3}) {
        for (int j = 0; j < 3; ++j) CHECK(gx(i, j) == 1.0);  // copy carries none
    }
    for (int i : {2, 4}) {
        for (int j = 0; j < 3; ++j) CHECK(gx(i, j) == 0.0);
    }
}

TEST_CASE("fill vector receives gradient from every non-donor fill") {
    Tape t;
    Matrix x = random_matrix(4, 3, 7);
    x.zero_row(0);
    x.zero_row(2);
    Tensor omega = t.leaf(Matrix(1, 3), true);
    Rng rng(1, "fill");
    Tensor out = fill_missing(t.leaf(x), mask_of({0, 1, 0, 1}), omega, 0.0, rng,
                              true);
    t.backward(sum(out).id);
    for (int j = 0; j < 3; ++j) CHECK(t.grad(omega.id)(0, j) == 2.0);
}

TEST_CASE("eval-mode fill uses zero or the learned vector, never donors") {
    Tape t;
    Matrix x = random_matrix(3, 2, 8);
    x.zero_row(1);
    Matrix om = random_matrix(1, 2, 9);
    MaskMatrix mask = mask_of({1, 0, 1});
    Rng rng(2, "fill");
    Tensor z = fill_missing(t.leaf(x), mask, t.leaf(om), 0.9, rng, false,
                            InferenceFill::zero);
    CHECK(z.val()(1, 0) == 0.0);
    CHECK(z.val()(1, 1) == 0.0);
    Tensor l = fill_missing(t.leaf(x), mask, t.leaf(om), 0.9, rng, false,
                            InferenceFill::learned);
    CHECK(l.val()(1, 0) == om(0, 0));
    CHECK(l.val()(1, 1) == om(0, 1));
    Rng fresh(2, "fill");
    CHECK(rng.next_u64() == fresh.next_u64());  // eval never draws
}

TEST_CASE("fill_missing validates its inputs") {
    Tape t;
    Matrix x = Matrix(2, 3);
    Tensor omega = t.leaf(Matrix(1, 3));
    Rng rng(1, "fill");
    CHECK_THROWS_AS(fill_missing(t.leaf(x), mask_of({1}), omega, 0.0, rng, true),
                    DataError);
    CHECK_THROWS_AS(fill_missing(t.leaf(x), mask_of({1, 1}), t.leaf(Matrix(1, 2)),
                                 0.0, rng, true),
                    NumericError);
    CHECK_THROWS_AS(fill_missing(t.leaf(x), mask_of({1, 1}), omega, 1.5, rng, true),
                    ConfigError);
    // replacement with nobody to copy from
    CHECK_THROWS_AS(fill_missing(t.leaf(x), mask_of({0, 0}), omega, 0.5, rng, true),
                    DataError);
}

// ---- attention layer oracles ----

namespace {

struct TinyGraph {
    Graph g;
    std::shared_ptr<const SparseMatrix> adj_self;
};

// path 0-1-2 with an isolated node 3
TinyGraph path_with_isolate(int f) {
    Graph g;
    g.n = 4;
    g.f = f;
    g.c = 2;
    g.adj = adjacency_from_edges(4, {{0, 1}, {1, 2}}, "tiny");
    g.features = random_matrix(4, f, 11);
    g.labels = {0, 1, 0, 1};
    g.train_idx = {0};
    g.val_idx = {1};
    g.test_idx = {2, 3};
    g.validate();
    TinyGraph out;
    out.adj_self = adjacency_with_self_loops(g);
    out.g = std::move(g);
    return out;
}

GATLayerT leaf_head(Tape& t, const Matrix& w, const Matrix& a_src,
                    const Matrix& a_dst, bool average) {
    GATLayerT layer;
    layer.average = average;
    layer.heads.push_back({t.leaf(w), t.leaf(a_src), t.leaf(a_dst)});
    return layer;
}

}  // namespace

TEST_CASE("zero attention vectors give neighborhood means") {
    TinyGraph tg = path_with_isolate(3);
    Tape t;
    Matrix w = random_matrix(3, 2, 12);
    GATLayerT layer = leaf_head(t, w, Matrix(2, 1), Matrix(2, 1), true);
    ReconConfig rc = dry_config();
    Rng rng(1, "gat");
    Tensor out = gat_layer(t.leaf(tg.g.features), tg.adj_self, layer, rc, rng, true);

    Matrix g = matmul(tg.g.features, w);
    // neighborhoods with self-loops: {0,1}, {0,1,2}, {1,2}, {3}
    std::vector<std::vector<int>> nbr = {{0, 1}, {0, 1, 2}, {1, 2}, {3}};
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 2; ++j) {
            double mean = 0.0;
            for (int k : nbr[i]) mean += g(k, j);
            mean /= static_cast<double>(nbr[i].size());
            CHECK(out.val()(i, j) == doctest::Approx(mean).epsilon(1e-12));
        }
    }
}

TEST_CASE("an isolated node attends only to itself") {
    TinyGraph tg = path_with_isolate(3);
    Tape t;
    Matrix w = random_matrix(3, 2, 13);
    Matrix a_src = random_matrix(2, 1, 14);
    Matrix a_dst = random_matrix(2, 1, 15);
    GATLayerT layer = leaf_head(t, w, a_src, a_dst, true);
    ReconConfig rc = dry_config();
    Rng rng(1, "gat");
    Tensor out = gat_layer(t.leaf(tg.g.features), tg.adj_self, layer, rc, rng, true);
    Matrix g = matmul(tg.g.features, w);
    CHECK(out.val()(3, 0) == doctest::Approx(g(3, 0)).epsilon(1e-12));
    CHECK(out.val()(3, 1) == doctest::Approx(g(3, 1)).epsilon(1e-12));
}

TEST_CASE("attention matches a scalar brute-force computation") {
    TinyGraph tg = path_with_isolate(3);
    Tape t;
    Matrix w = random_matrix(3, 2, 16);
    Matrix a_src = random_matrix(2, 1, 17);
    Matrix a_dst = random_matrix(2, 1, 18);
    GATLayerT layer = leaf_head(t, w, a_src, a_dst, true);
    ReconConfig rc = dry_config();
    Rng rng(1, "gat");
    Tensor out = gat_layer(t.leaf(tg.g.features), tg.adj_self, layer, rc, rng, true);

    Matrix g = matmul(tg.g.features, w);
    auto lrelu = [](double v) { return v > 0.0 ? v : 0.2 * v; };
    std::vector<std::vector<int>> nbr = {{0, 1}, {0, 1, 2}, {1, 2}, {3}};
    for (int i = 0; i < 4; ++i) {
        double s_i = g(i, 0) * a_src(0, 0) + g(i, 1) * a_src(1, 0);
        double denom = 0.0;
        std::vector<double> weights;
        for (int k : nbr[i]) {
            double s_k = g(k, 0) * a_dst(0, 0) + g(k, 1) * a_dst(1, 0);
            double e = std::exp(lrelu(s_i + s_k));
            weights.push_back(e);
            denom += e;
        }
        for (int j = 0; j < 2; ++j) {
            double acc = 0.0;
            for (std::size_t q = 0; q < nbr[i].size(); ++q)
                acc += weights[q] / denom * g(nbr[i][q], j);
            CHECK(out.val()(i, j) == doctest::Approx(acc).epsilon(1e-12));
        }
    }
}

TEST_CASE("hidden layers concatenate elu-activated heads") {
    TinyGraph tg = path_with_isolate(3);
    Tape t;
    Matrix w0 = random_matrix(3, 2, 19);
    Matrix w1 = random_matrix(3, 2, 20);
    GATLayerT layer;
    layer.average = false;
    layer.heads.push_back({t.leaf(w0), t.leaf(Matrix(2, 1)), t.leaf(Matrix(2, 1))});
    layer.heads.push_back({t.leaf(w1), t.leaf(Matrix(2, 1)), t.leaf(Matrix(2, 1))});
    ReconConfig rc = dry_config();
    Rng rng(1, "gat");
    Tensor out = gat_layer(t.leaf(tg.g.features), tg.adj_self, layer, rc, rng, true);
    REQUIRE(out.cols() == 4);  // two heads of width 2

    // isolated node: head outputs are its own transforms, then elu
    Matrix g0 = matmul(tg.g.features, w0);
    Matrix g1 = matmul(tg.g.features, w1);
    auto elu_ref = [](double v) { return v > 0.0 ? v : std::expm1(v); };
    CHECK(out.val()(3, 0) == doctest::Approx(elu_ref(g0(3, 0))).epsilon(1e-12));
    CHECK(out.val()(3, 1) == doctest::Approx(elu_ref(g0(3, 1))).epsilon(1e-12));
    CHECK(out.val()(3, 2) == doctest::Approx(elu_ref(g1(3, 0))).epsilon(1e-12));
    CHECK(out.val()(3, 3) == doctest::Approx(elu_ref(g1(3, 1))).epsilon(1e-12));
}

TEST_CASE("averaging layers combine raw head outputs") {
    TinyGraph tg = path_with_isolate(3);
    Tape t;
    Matrix w0 = random_matrix(3, 2, 21);
    Matrix w1 = random_matrix(3, 2, 22);
    GATLayerT layer;
    layer.average = true;
    layer.heads.push_back({t.leaf(w0), t.leaf(Matrix(2, 1)), t.leaf(Matrix(2, 1))});
    layer.heads.push_back({t.leaf(w1), t.leaf(Matrix(2, 1)), t.leaf(Matrix(2, 1))});
    ReconConfig rc = dry_config();
    Rng rng(1, "gat");
    Tensor out = gat_layer(t.leaf(tg.g.features), tg.adj_self, layer, rc, rng, true);
    REQUIRE(out.cols() == 2);
    Matrix g0 = matmul(tg.g.features, w0);
    Matrix g1 = matmul(tg.g.features, w1);
    // raw average, no activation: negatives pass through
    CHECK(out.val()(3, 0) ==
          doctest::Approx(0.5 * (g0(3, 0) + g1(3, 0))).epsilon(1e-12));
    CHECK(out.val()(3, 1) ==
          doctest::Approx(0.5 * (g0(3, 1) + g1(3, 1))).epsilon(1e-12));
}

TEST_CASE("gat_layer rejects bad inputs") {
    TinyGraph tg = path_with_isolate(3);
    Tape t;
    ReconConfig rc = dry_config();
    Rng rng(1, "gat");
    GATLayerT empty;
    CHECK_THROWS_AS(
        gat_layer(t.leaf(tg.g.features), tg.adj_self, empty, rc, rng, true),
        ConfigError);
    GATLayerT wrong = leaf_head(t, random_matrix(5, 2, 23), Matrix(2, 1),
                                Matrix(2, 1), true);
    CHECK_THROWS_AS(
        gat_layer(t.leaf(tg.g.features), tg.adj_self, wrong, rc, rng, true),
        NumericError);
}

// ---- reconstruction loss ----

TEST_CASE("bce at zero logits equals f * ln 2 regardless of targets") {
    Tape t;
    Matrix targets = random_matrix(3, 2, 24, 0.0, 1.0);
    Tensor logits = t.leaf(Matrix(3, 2), true);
    Tensor loss =
        reconstruction_loss(logits, targets, mask_of({1, 1, 1}), ReconLoss::bce);
    CHECK(t.scalar(loss.id) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("bce stays finite under huge logits via the clamp") {
    Tape t;
    Matrix targets = Matrix::full(1, 2, 1.0);
    Matrix big = Matrix::full(1, 2, 1e9);
    Matrix edge = Matrix::full(1, 2, 30.0);
    Tensor l_big = reconstruction_loss(t.leaf(big), targets, mask_of({1}),
                                       ReconLoss::bce);
    Tensor l_edge = reconstruction_loss(t.leaf(edge), targets, mask_of({1}),
                                        ReconLoss::bce);
    CHECK(std::isfinite(t.scalar(l_big.id)));
    CHECK(t.scalar(l_big.id) == t.scalar(l_edge.id));
}

TEST_CASE("mse matches a hand-computed mean of row distances") {
    Tape t;
    Matrix target = Matrix::from_rows({{1, 0}, {0, 0}, {3, 4}});
    Matrix pred = Matrix::from_rows({{0, 0}, {0, 0}, {0, 0}});
    Tensor loss = reconstruction_loss(t.leaf(pred), target, mask_of({1, 0, 1}),
                                      ReconLoss::mse);
    // rows 0 and 2 known: (1 + 0) and (9 + 16), mean over 2 known nodes
    CHECK(t.scalar(loss.id) == doctest::Approx(13.0).epsilon(1e-12));
}

TEST_CASE("loss ignores reconstruction at missing rows") {
    Tape t;
    Matrix targets = random_matrix(4, 3, 25, 0.0, 1.0);
    Matrix base = random_matrix(4, 3, 26);
    Matrix bumped = base;
    for (int j = 0; j < 3; ++j) bumped(2, j) += 100.0;
    MaskMatrix mask = mask_of({1, 1, 0, 1});
    for (ReconLoss kind : {ReconLoss::bce, ReconLoss::mse}) {
        Tensor a = reconstruction_loss(t.leaf(base), targets, mask, kind);
        Tensor b = reconstruction_loss(t.leaf(bumped), targets, mask, kind);
        CHECK(t.scalar(a.id) == t.scalar(b.id));
    }
}

TEST_CASE("reconstruction_loss validates shapes and masks") {
    Tape t;
    Matrix targets = Matrix(2, 3);
    CHECK_THROWS_AS(reconstruction_loss(t.leaf(Matrix(2, 2)), targets,
                                        mask_of({1, 1}), ReconLoss::bce),
                    NumericError);
    CHECK_THROWS_AS(reconstruction_loss(t.leaf(Matrix(2, 3)), targets,
                                        mask_of({1}), ReconLoss::bce),
                    DataError);
    CHECK_THROWS_AS(reconstruction_loss(t.leaf(Matrix(2, 3)), targets,
                                        mask_of({0, 0}), ReconLoss::bce),
                    DataError);
}
