#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mdsgnn/graph.hpp"
#include "mdsgnn/tape.hpp"

namespace mdsgnn {

enum class ReconLoss { bce, mse };

// What fills missing rows at inference time. Training always uses the
// learnable fill vector (or a random known donor, per p_r).
enum class InferenceFill { zero, learned };

struct ReconConfig {
    double p_r = 0.05;
    double input_dropout = 0.3;
    double attn_dropout = 0.3;
    int hidden = 64;     // encoder layer width and decoder hidden width
    int layers = 2;
    int heads = 4;
    ReconLoss loss_kind = ReconLoss::bce;
    InferenceFill inference_fill = InferenceFill::zero;
};

// Per-head attention parameters. The attention vector a in R^{2d} is stored
// split: a_src scores the transformed source row, a_dst the neighbor.
struct GATHeadParams {
    Matrix w;      // d_in x d_out
    Matrix a_src;  // d_out x 1
    Matrix a_dst;  // d_out x 1
};

struct GATLayerParams {
    std::vector<GATHeadParams> heads;
    bool average = false;  // final layer averages heads and skips the ELU
};

struct GAEParams {
    std::vector<GATLayerParams> layers;
    Matrix dec_w0, dec_b0;  // hidden x d1 decoder stage, relu
    Matrix dec_w1, dec_b1;  // d1 x f, linear logits out
    Matrix x_omega;         // 1 x f learnable fill vector

    // Fixed enumeration order shared by the optimizer and checkpoints.
    void visit(const std::function<void(const std::string&, Matrix&, bool decay)>& fn);
};

// Taped handles mirroring the structures above, staged fresh per epoch.
struct GATHeadT {
    Tensor w, a_src, a_dst;
};
struct GATLayerT {
    std::vector<GATHeadT> heads;
    bool average = false;
};
struct GAET {
    std::vector<GATLayerT> layers;
    Tensor dec_w0, dec_b0, dec_w1, dec_b1, x_omega;
};

// Missing rows become x_omega (gradient flows into it) or, with probability
// p_r, a copy of a uniformly chosen known row (no gradient to the source).
// With train=false every missing row is filled per `fill` instead and no rng
// draws happen. Known rows pass through untouched.
Tensor fill_missing(Tensor x_masked, const MaskMatrix& mask, Tensor x_omega,
                    double p_r, Rng& rng, bool train,
                    InferenceFill fill = InferenceFill::zero);

// One multi-head attention layer over adj_self (adjacency plus self-loops).
// Hidden layers concat ELU'd heads; a layer with average=true averages raw
// head outputs.
Tensor gat_layer(Tensor h, std::shared_ptr<const SparseMatrix> adj_self,
                 const GATLayerT& p, const ReconConfig& cfg, Rng& rng, bool train);

// fill_missing -> stacked gat_layer -> 2-layer MLP decoder; returns n x f
// reconstruction logits.
Tensor reconstruct(Tape& t, const IncompleteGraph& g, const GAET& p,
                   const ReconConfig& cfg,
                   std::shared_ptr<const SparseMatrix> adj_self, Rng& rng,
                   bool train);

// Averaged over known nodes only. bce treats x_tilde as logits against
// targets in [0,1], clamping logits to |z| <= 30; mse is the squared row
// distance.
Tensor reconstruction_loss(Tensor x_tilde, const Matrix& x_prime,
                           const MaskMatrix& mask, ReconLoss kind);

}  // namespace mdsgnn
