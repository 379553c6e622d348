#pragma once

#include <cstdint>
#include <string>

#include "mdsgnn/recon.hpp"

namespace mdsgnn {

enum class PredStream { original, augmented, mean };

// Every knob of a training run. Config files are flat key=value lines with
// '#' comments; unknown keys are rejected and parse(render(cfg)) == cfg.
struct TrainConfig {
    double lr = 0.01;
    double weight_decay = 5e-4;
    int epochs = 500;
    int hidden = 64;    // d1: encoder/decoder/classifier hidden width
    int proj_dim = 64;  // d2
    double p_r = 0.05;
    double dropout = 0.3;  // input and attention dropout share one rate
    int heads = 4;
    int gat_layers = 2;
    int knn_k = 10;
    int ppr_steps = 10;
    double alpha = 0.01;
    double tau = 0.2;
    double lambda = 0.5;
    double mu = 0.5;
    double gamma = 1.0;
    ReconLoss recon_loss = ReconLoss::bce;
    int t_knn = 5;  // augmented-graph rebuild period in epochs
    PredStream pred_stream = PredStream::original;
    std::uint64_t seed = 0;

    // extensions beyond the core hyperparameters, all defaulted off
    double feature_missing = 0.0;  // per-seed corruption applied by run drivers
    double edge_missing = 0.0;
    bool cl_canonical = false;      // same-view negatives in the contrastive loss
    bool classifier_bias = false;
    InferenceFill inference_fill = InferenceFill::zero;
    bool propagate_reconstructed = false;  // propagate decoder output instead of X'
    bool bypass_gae = false;  // feed raw masked features to stream 1, no reconstruction

    bool operator==(const TrainConfig&) const = default;
};

TrainConfig parse_config_text(const std::string& text, const std::string& context);
TrainConfig parse_config_file(const std::string& path);

// Applies one "key=value" assignment; unknown key or bad value throws
// ConfigError naming the key.
void apply_config_entry(TrainConfig& cfg, const std::string& key,
                        const std::string& value, const std::string& context);

// Full key set in fixed order; round-trips through the parser exactly.
std::string render_config(const TrainConfig& cfg);

// Range checks (positivity, divisibility of hidden by heads, ...).
void validate_config(const TrainConfig& cfg);

ReconConfig recon_config(const TrainConfig& cfg);

}  // namespace mdsgnn
