#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>

#include "doctest.h"
#include "mdsgnn/dualstream.hpp"
#include "mdsgnn/errors.hpp"
#include "mdsgnn/tape.hpp"
#include "synthetic.hpp"

using namespace mdsgnn;
using testsupport::random_matrix;

namespace {

ClassifierT leaf_classifier(Tape& t, const Matrix& w0, const Matrix& w1,
                            const Matrix& w2, bool grad = false) {
    ClassifierT c;
    c.w0 = t.leaf(w0, grad);
    c.w1 = t.leaf(w1, grad);
    c.w2 = t.leaf(w2, grad);
    return c;
}

}  // namespace

TEST_CASE("zero weights classify every node uniformly") {
    Tape t;
    ClassifierT c = leaf_classifier(t, Matrix(5, 4), Matrix(4, 3), Matrix(4, 2));
    StreamOutputs s = classify(t.leaf(random_matrix(6, 5, 1)), c);
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 3; ++j) {
            CHECK(s.y.val()(i, j) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("cross entropy of uniform predictions is ln c") {
    Tape t;
    ClassifierT c = leaf_classifier(t, Matrix(5, 4), Matrix(4, 3), Matrix(4, 2));
    StreamOutputs s = classify(t.leaf(random_matrix(6, 5, 2)), c);
    Tensor loss = cross_entropy(s.y, {0, 1, 2, 0, 1, 2}, {0, 2, 4});
    CHECK(t.scalar(loss.id) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("cross entropy reads the labeled probability exactly") {
    Tape t;
    Tensor y = t.leaf(Matrix::from_rows({{0.75, 0.25}, {0.1, 0.9}}));
    Tensor loss = cross_entropy(y, {0, 1}, {0});
    CHECK(t.scalar(loss.id) == doctest::Approx(-std::log(0.75)).epsilon(1e-12));
    Tensor both = cross_entropy(y, {0, 1}, {0, 1});
    double expect = -(std::log(0.75) + std::log(0.9)) / 2.0;
    CHECK(t.scalar(both.id) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("cross entropy ignores rows outside the index set") {
    Tape t;
    Matrix a = random_matrix(4, 3, 3, 0.01, 1.0);
    Matrix b = a;
    for (int j = 0; j < 3; ++j) b(3, j) = 1.0 - b(3, j);
    Tensor la = cross_entropy(t.leaf(a), {0, 1, 2, 0}, {0, 2});
    Tensor lb = cross_entropy(t.leaf(b), {0, 1, 2, 0}, {0, 2});
    CHECK(t.scalar(la.id) == t.scalar(lb.id));
}

TEST_CASE("cross entropy validates its inputs") {
    Tape t;
    Tensor y = t.leaf(Matrix::full(2, 2, 0.5));
    CHECK_THROWS_AS(cross_entropy(y, {0, 1}, {}), DataError);
    CHECK_THROWS_AS(cross_entropy(y, {0}, {0}), DataError);
    CHECK_THROWS_AS(cross_entropy(y, {0, 5}, {1}), DataError);
}

TEST_CASE("classifier applies bias rows only when enabled") {
    Tape t;
    Matrix x = random_matrix(3, 4, 4);
    Matrix w0 = random_matrix(4, 5, 5);
    Matrix w1 = random_matrix(5, 2, 6);
    ClassifierT plain = leaf_classifier(t, w0, w1, Matrix(5, 2));
    ClassifierT biased = plain;
    biased.use_bias = true;
    biased.b0 = t.leaf(Matrix::full(1, 5, 0.3));
    biased.b1 = t.leaf(Matrix::full(1, 2, -0.1));
    StreamOutputs sp = classify(t.leaf(x), plain);
    StreamOutputs sb = classify(t.leaf(x), biased);

    Matrix h_plain = matmul(x, w0);
    for (double& v : h_plain.data) v = std::max(v, 0.0);
    CHECK(max_abs_diff(sp.h.val(), h_plain) == 0.0);
    Matrix h_biased = matmul(x, w0);
    for (double& v : h_biased.data) v = std::max(v + 0.3, 0.0);
    CHECK(max_abs_diff(sb.h.val(), h_biased) == 0.0);
}

TEST_CASE("shared weights accumulate gradient from both streams") {
    Matrix x1 = random_matrix(4, 3, 7);
    Matrix x2 = random_matrix(4, 3, 8);
    Matrix w0 = random_matrix(3, 5, 9);
    Matrix w1 = random_matrix(5, 2, 10);
    std::vector<int> labels = {0, 1, 0, 1};
    std::vector<int> idx = {0, 1, 2, 3};

    auto grad_w0 = [&](bool use1, bool use2) {
        Tape t;
        ClassifierT c = leaf_classifier(t, w0, w1, Matrix(5, 2), true);
        Tensor loss = t.leaf(Matrix(1, 1));
        if (use1)
            loss = add(loss, cross_entropy(classify(t.leaf(x1), c).y, labels, idx));
        if (use2)
            loss = add(loss, cross_entropy(classify(t.leaf(x2), c).y, labels, idx));
        t.backward(loss.id);
        return t.grad(c.w0.id);
    };

    Matrix both = grad_w0(true, true);
    Matrix only1 = grad_w0(true, false);
    Matrix only2 = grad_w0(false, true);
    Matrix summed = only1;
    axpy(1.0, only2, summed);
    CHECK(max_abs_diff(both, summed) < 1e-14);
}

TEST_CASE("projection is a bare linear map") {
    Tape t;
    Matrix h = random_matrix(3, 4, 11);
    Matrix w2 = random_matrix(4, 2, 12);
    ClassifierT c = leaf_classifier(t, Matrix(4, 4), Matrix(4, 2), w2);
    CHECK(max_abs_diff(project(t.leaf(h), c).val(), matmul(h, w2)) == 0.0);
}

TEST_CASE("identical embeddings give exactly ln(n-1)") {
    for (int n : {2, 3, 10, 100}) {
        Tape t;
        Matrix z(n, 4);
        for (int i = 0; i < n; ++i) {
            z(i, 0) = 0.3;
            z(i, 1) = -0.7;
            z(i, 2) = 0.2;
            z(i, 3) = 1.1;
        }
        Tensor loss = ntxent(t.leaf(z), t.leaf(z), 0.2);
        CHECK(std::abs(t.scalar(loss.id) - std::log(static_cast<double>(n - 1)))
              <= 1e-9);
    }
}

TEST_CASE("orthonormal pair at unit temperature scores minus one") {
    Tape t;
    Matrix z = Matrix::from_rows({{1, 0}, {0, 1}});
    Tensor loss = ntxent(t.leaf(z), t.leaf(z), 1.0);
    CHECK(t.scalar(loss.id) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("contrastive loss is invariant to per-view positive rescaling") {
    Tape t;
    Matrix z = random_matrix(5, 3, 13);
    Matrix zp = random_matrix(5, 3, 14);
    Matrix z3 = z;
    for (double& v : z3.data) v *= 3.0;
    Matrix zp7 = zp;
    for (double& v : zp7.data) v *= 0.07;
    for (bool canonical : {false, true}) {
        double base = t.scalar(ntxent(t.leaf(z), t.leaf(zp), 0.4, canonical).id);
        double scaled =
            t.scalar(ntxent(t.leaf(z3), t.leaf(zp7), 0.4, canonical).id);
        CHECK(std::abs(base - scaled) < 1e-12);
    }
}

TEST_CASE("aligned views score better than shuffled views") {
    // z' = z plus noise keeps row i closest to its own counterpart
    Matrix z = random_matrix(6, 4, 15);
    Matrix zp = z;
    Matrix noise = random_matrix(6, 4, 16, -0.1, 0.1);
    axpy(1.0, noise, zp);
    Matrix shuffled(6, 4);
    for (int i = 0; i < 6; ++i) shuffled.set_row(i, zp.row((i + 1) % 6));
    Tape t;
    double aligned = t.scalar(ntxent(t.leaf(z), t.leaf(zp), 0.2).id);
    double rolled = t.scalar(ntxent(t.leaf(z), t.leaf(shuffled), 0.2).id);
    CHECK(aligned < rolled);
}

TEST_CASE("same-view negatives only add to the denominator") {
    Tape t;
    Matrix z = random_matrix(7, 3, 17);
    Matrix zp = random_matrix(7, 3, 18);
    double cross = t.scalar(ntxent(t.leaf(z), t.leaf(zp), 0.3, false).id);
    double canonical = t.scalar(ntxent(t.leaf(z), t.leaf(zp), 0.3, true).id);
    CHECK(canonical > cross);
}

TEST_CASE("loss rises monotonically as the views rotate apart") {
    // both views share an orthonormal basis pair per row; view two rotates
    // by theta inside that plane, so the positive similarity is cos(theta)
    const int n = 5;
    Matrix u(n, 2 * n);
    for (int i = 0; i < n; ++i) u(i, 2 * i) = 1.0;
    Tape t;
    double prev = -1e300;
    for (double theta : {0.0, 0.4, 0.8, 1.2, 1.570796}) {
        Matrix zp(n, 2 * n);
        for (int i = 0; i < n; ++i) {
            zp(i, 2 * i) = std::cos(theta);
            zp(i, 2 * i + 1) = std::sin(theta);
        }
        double loss = t.scalar(ntxent(t.leaf(u), t.leaf(zp), 0.5).id);
        CHECK(loss > prev);
        prev = loss;
    }
}

TEST_CASE("ntxent validates inputs") {
    Tape t;
    Matrix z = random_matrix(3, 2, 19);
    CHECK_THROWS_AS(ntxent(t.leaf(z), t.leaf(z), 0.0), ConfigError);
    CHECK_THROWS_AS(ntxent(t.leaf(z), t.leaf(random_matrix(3, 3, 20)), 0.5),
                    NumericError);
    CHECK_THROWS_AS(ntxent(t.leaf(random_matrix(1, 2, 21)),
                           t.leaf(random_matrix(1, 2, 22)), 0.5),
                    DataError);
}

TEST_CASE("total loss combines the four terms linearly") {
    Tape t;
    auto c = [&](double v) { return t.leaf(Matrix::full(1, 1, v)); };
    Tensor all_ones = total_loss(c(1), c(1), c(1), c(1), 1.0, 1.0, 1.0);
    CHECK(t.scalar(all_ones.id) == 4.0);
    Tensor weighted = total_loss(c(2), c(3), c(5), c(7), 0.5, 0.1, 2.0);
    CHECK(t.scalar(weighted.id) == doctest::Approx(2 + 1.5 + 0.5 + 14).epsilon(1e-14));
    // moving lambda alone moves the total by delta * l_ce_prime
    double lo = t.scalar(total_loss(c(2), c(3), c(5), c(7), 0.2, 0.1, 2.0).id);
    double hi = t.scalar(total_loss(c(2), c(3), c(5), c(7), 0.9, 0.1, 2.0).id);
    CHECK(hi - lo == doctest::Approx(0.7 * 3.0).epsilon(1e-12));
}

TEST_CASE("non-finite loss components are rejected by name") {
    Tape t;
    auto c = [&](double v) { return t.leaf(Matrix::full(1, 1, v)); };
    double inf = std::numeric_limits<double>::infinity();
    try {
        total_loss(c(1), c(1), c(inf), c(1), 1, 1, 1);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("l_rec") != std::string::npos);
    }
    CHECK_THROWS_AS(total_loss(c(std::nan("")), c(1), c(1), c(1), 1, 1, 1),
                    NumericError);
}
