#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mdsgnn/tape.hpp"

namespace mdsgnn {

// One parameter set serves both streams; the weight sharing is load-bearing.
struct ClassifierParams {
    Matrix w0;  // f x d1
    Matrix w1;  // d1 x c
    Matrix w2;  // d1 x d2 projection
    Matrix b0, b1;  // used only when use_bias
    bool use_bias = false;

    void visit(const std::function<void(const std::string&, Matrix&, bool decay)>& fn);
};

struct ClassifierT {
    Tensor w0, w1, w2, b0, b1;
    bool use_bias = false;
};

struct StreamOutputs {
    Tensor h, y;  // hidden representation, row-stochastic predictions
};

// H = relu(x w0 [+ b0]); Y = row_softmax(H w1 [+ b1]).
StreamOutputs classify(Tensor x_repr, const ClassifierT& p);

// -(1/|idx|) sum over idx of ln Y[i, labels[i]], probabilities floored at
// 1e-12 before the log.
Tensor cross_entropy(Tensor y, const std::vector<int>& labels,
                     const std::vector<int>& idx);

// Linear projection Z = H w2; no bias, no nonlinearity.
Tensor project(Tensor h, const ClassifierT& p);

// Temperature-scaled contrastive loss between the two streams' projections.
// Default form: positives are the aligned rows, denominators run over
// cross-view pairs k != i only. canonical=true switches to the variant whose
// denominators also include same-view negatives.
Tensor ntxent(Tensor z, Tensor zp, double tau, bool canonical = false);

// l_ce + lambda * l_ce_prime + mu * l_rec + gamma * l_cl.
// Rejects non-finite components by name.
Tensor total_loss(Tensor l_ce, Tensor l_ce_prime, Tensor l_rec, Tensor l_cl,
                  double lambda, double mu, double gamma);

}  // namespace mdsgnn
