#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mdsgnn/config.hpp"
#include "mdsgnn/dualstream.hpp"
#include "mdsgnn/graph.hpp"
#include "mdsgnn/metrics.hpp"
#include "mdsgnn/propagation.hpp"
#include "mdsgnn/recon.hpp"
#include "mdsgnn/rng.hpp"
#include "mdsgnn/sparse.hpp"
#include "mdsgnn/tape.hpp"

namespace mdsgnn {

struct ModelParams {
    GAEParams gae;
    ClassifierParams cls;

    template <typename Fn>
    void visit(Fn&& fn) {
        gae.visit(fn);
        cls.visit(fn);
    }
};

// Adam with decoupled weight decay; decay applies only to parameters
// flagged decay=true (weight matrices, never biases or the fill vector).
struct Adam {
    double lr = 0.01;
    double weight_decay = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int t = 0;
    std::vector<Matrix> m, v;
};

// One trainable parameter staged onto a tape for the current step.
struct StagedParam {
    std::string name;
    Matrix* value = nullptr;
    bool decay = false;
    Tensor tensor;
};

GAET stage_gae(Tape& tape, GAEParams& p, bool requires_grad,
               std::vector<StagedParam>& staged);
ClassifierT stage_classifier(Tape& tape, ClassifierParams& p, bool requires_grad,
                             std::vector<StagedParam>& staged);

void adam_step(Adam& opt, const std::vector<StagedParam>& staged, Tape& tape);

ModelParams init_params(const TrainConfig& cfg, int f, int c, Rng& rng);

struct TrainState {
    ModelParams params;
    Adam opt;
    int epoch = 0;
    AugmentedGraph aug;
    Matrix propagated{0, 0};  // propagated second-stream features
    bool have_aug = false;
    Rng rng;  // dropout, replacement sampling
    std::shared_ptr<const SparseMatrix> adj_self;
};

TrainState init_state(const IncompleteGraph& g, const TrainConfig& cfg);

// All loss terms for one step; rebuilds the kNN graph on schedule.
EpochLosses train_step(TrainState& st, const IncompleteGraph& g,
                       const TrainConfig& cfg);

// Deterministic eval-mode class predictions; builds the propagation cache
// from eval-mode reconstruction if a non-original stream needs it.
std::vector<int> predict(TrainState& st, const IncompleteGraph& g,
                         const TrainConfig& cfg);

double accuracy(const std::vector<int>& pred, const std::vector<int>& labels,
                const std::vector<int>& idx);

// Trains for cfg.epochs, tracking validation accuracy each epoch; reported
// test accuracy is the one at the earliest argmax-validation epoch.
std::pair<TrainState, RunMetrics> fit(const IncompleteGraph& g,
                                      const TrainConfig& cfg);

// Two-layer GCN over the observed graph, same split protocol and optimizer.
RunMetrics gcn_baseline(const IncompleteGraph& g, const TrainConfig& cfg);

enum class Method { mdsgnn, gcn };

Method parse_method(const std::string& s);

struct SeedRun {
    std::uint64_t seed = 0;
    RunMetrics metrics;
};

struct RunSummary {
    std::vector<SeedRun> runs;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, 0 for a single run
    std::string tag;      // optional variant label
};

// Per seed: re-derive corruption from the clean graph, then train. The
// corrupted instance for a given (graph, rates, seed) is method-independent.
RunSummary run_seeds(const IncompleteGraph& g, const TrainConfig& cfg,
                     const std::vector<std::uint64_t>& seeds,
                     Method method = Method::mdsgnn);

enum class AblateDrop { rec, cl, both };

AblateDrop parse_ablate_drop(const std::string& s);

// Zeroes the corresponding loss weights and reruns the seed protocol.
RunSummary ablate(const IncompleteGraph& g, const TrainConfig& cfg,
                  AblateDrop drop, const std::vector<std::uint64_t>& seeds);

enum class SweepAxis { feature_missing, edge_missing, knn_k, ppr_steps };

SweepAxis parse_sweep_axis(const std::string& s);

struct SweepRow {
    double value = 0.0;
    RunSummary summary;
};

std::vector<SweepRow> sweep(const IncompleteGraph& g, const TrainConfig& cfg,
                            SweepAxis axis, const std::vector<double>& values,
                            const std::vector<std::uint64_t>& seeds);

// Model parameters plus the propagation cache when present; optimizer
// moments are not persisted.
void save_checkpoint(const std::string& path, TrainState& st);
TrainState load_checkpoint(const std::string& path, const IncompleteGraph& g,
                           const TrainConfig& cfg);

double mean_of(const std::vector<double>& xs);
double sample_std(const std::vector<double>& xs);

// Finite-difference checks of every differentiable component on small
// instances; returns (component, max relative error) pairs.
std::vector<std::pair<std::string, double>> gradcheck_suite();

}  // namespace mdsgnn
