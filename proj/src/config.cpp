#include "mdsgnn/config.hpp"

#include <cmath>

#include "mdsgnn/errors.hpp"
#include "mdsgnn/text.hpp"

namespace mdsgnn {

namespace {

double cfg_double(const std::string& v, const std::string& ctx) {
    try {
        return parse_double(v, ctx);
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
}

long long cfg_int(const std::string& v, const std::string& ctx) {
    try {
        return parse_int(v, ctx);
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
}

bool cfg_bool(const std::string& v, const std::string& ctx) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError(ctx + ": expected true or false, got '" + v + "'");
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

}  // namespace

void apply_config_entry(TrainConfig& cfg, const std::string& key,
                        const std::string& value, const std::string& context) {
    const std::string ctx = context + " [" + key + "]";
    if (key == "lr") cfg.lr = cfg_double(value, ctx);
    else if (key == "weight_decay") cfg.weight_decay = cfg_double(value, ctx);
    else if (key == "epochs") cfg.epochs = static_cast<int>(cfg_int(value, ctx));
    else if (key == "hidden") cfg.hidden = static_cast<int>(cfg_int(value, ctx));
    else if (key == "proj_dim") cfg.proj_dim = static_cast<int>(cfg_int(value, ctx));
    else if (key == "p_r") cfg.p_r = cfg_double(value, ctx);
    else if (key == "dropout") cfg.dropout = cfg_double(value, ctx);
    else if (key == "heads") cfg.heads = static_cast<int>(cfg_int(value, ctx));
    else if (key == "gat_layers") cfg.gat_layers = static_cast<int>(cfg_int(value, ctx));
    else if (key == "knn_k") cfg.knn_k = static_cast<int>(cfg_int(value, ctx));
    else if (key == "ppr_steps") cfg.ppr_steps = static_cast<int>(cfg_int(value, ctx));
    else if (key == "alpha") cfg.alpha = cfg_double(value, ctx);
    else if (key == "tau") cfg.tau = cfg_double(value, ctx);
    else if (key == "lambda") cfg.lambda = cfg_double(value, ctx);
    else if (key == "mu") cfg.mu = cfg_double(value, ctx);
    else if (key == "gamma") cfg.gamma = cfg_double(value, ctx);
    else if (key == "recon_loss") {
        if (value == "bce") cfg.recon_loss = ReconLoss::bce;
        else if (value == "mse") cfg.recon_loss = ReconLoss::mse;
        else throw ConfigError(ctx + ": expected bce or mse, got '" + value + "'");
    } else if (key == "t_knn") cfg.t_knn = static_cast<int>(cfg_int(value, ctx));
    else if (key == "pred_stream") {
        if (value == "original") cfg.pred_stream = PredStream::original;
        else if (value == "augmented") cfg.pred_stream = PredStream::augmented;
        else if (value == "mean") cfg.pred_stream = PredStream::mean;
        else throw ConfigError(ctx + ": expected original, augmented or mean");
    } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(cfg_int(value, ctx));
    } else if (key == "feature_missing") cfg.feature_missing = cfg_double(value, ctx);
    else if (key == "edge_missing") cfg.edge_missing = cfg_double(value, ctx);
    else if (key == "cl_canonical") cfg.cl_canonical = cfg_bool(value, ctx);
    else if (key == "classifier_bias") cfg.classifier_bias = cfg_bool(value, ctx);
    else if (key == "inference_fill") {
        if (value == "zero") cfg.inference_fill = InferenceFill::zero;
        else if (value == "learned") cfg.inference_fill = InferenceFill::learned;
        else throw ConfigError(ctx + ": expected zero or learned");
    } else if (key == "propagate_reconstructed") {
        cfg.propagate_reconstructed = cfg_bool(value, ctx);
    } else if (key == "bypass_gae") cfg.bypass_gae = cfg_bool(value, ctx);
    else throw ConfigError(context + ": unknown config key '" + key + "'");
}

TrainConfig parse_config_text(const std::string& text, const std::string& context) {
    TrainConfig cfg;
    int lineno = 0;
    for (std::string_view raw : split(text, '\n')) {
        ++lineno;
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(context + ":" + std::to_string(lineno) +
                              ": expected key=value");
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        apply_config_entry(cfg, key, value, context + ":" + std::to_string(lineno));
    }
    validate_config(cfg);
    return cfg;
}

TrainConfig parse_config_file(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    return parse_config_text(text, path);
}

std::string render_config(const TrainConfig& cfg) {
    std::string s;
    auto kv = [&s](const char* k, const std::string& v) {
        s += k;
        s += '=';
        s += v;
        s += '\n';
    };
    kv("lr", format_double(cfg.lr));
    kv("weight_decay", format_double(cfg.weight_decay));
    kv("epochs", std::to_string(cfg.epochs));
    kv("hidden", std::to_string(cfg.hidden));
    kv("proj_dim", std::to_string(cfg.proj_dim));
    kv("p_r", format_double(cfg.p_r));
    kv("dropout", format_double(cfg.dropout));
    kv("heads", std::to_string(cfg.heads));
    kv("gat_layers", std::to_string(cfg.gat_layers));
    kv("knn_k", std::to_string(cfg.knn_k));
    kv("ppr_steps", std::to_string(cfg.ppr_steps));
    kv("alpha", format_double(cfg.alpha));
    kv("tau", format_double(cfg.tau));
    kv("lambda", format_double(cfg.lambda));
    kv("mu", format_double(cfg.mu));
    kv("gamma", format_double(cfg.gamma));
    kv("recon_loss", cfg.recon_loss == ReconLoss::bce ? "bce" : "mse");
    kv("t_knn", std::to_string(cfg.t_knn));
    kv("pred_stream", cfg.pred_stream == PredStream::original  ? "original"
                      : cfg.pred_stream == PredStream::augmented ? "augmented"
                                                                 : "mean");
    kv("seed", std::to_string(cfg.seed));
    kv("feature_missing", format_double(cfg.feature_missing));
    kv("edge_missing", format_double(cfg.edge_missing));
    kv("cl_canonical", bool_str(cfg.cl_canonical));
    kv("classifier_bias", bool_str(cfg.classifier_bias));
    kv("inference_fill", cfg.inference_fill == InferenceFill::zero ? "zero" : "learned");
    kv("propagate_reconstructed", bool_str(cfg.propagate_reconstructed));
    kv("bypass_gae", bool_str(cfg.bypass_gae));
    return s;
}

void validate_config(const TrainConfig& cfg) {
    auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
    if (!(cfg.lr > 0.0) || !std::isfinite(cfg.lr)) fail("lr must be positive");
    if (cfg.weight_decay < 0.0) fail("weight_decay must be non-negative");
    if (cfg.epochs < 0) fail("epochs must be non-negative");
    if (cfg.hidden < 1) fail("hidden must be >= 1");
    if (cfg.proj_dim < 1) fail("proj_dim must be >= 1");
    if (cfg.p_r < 0.0 || cfg.p_r > 1.0) fail("p_r must be in [0, 1]");
    if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) fail("dropout must be in [0, 1)");
    if (cfg.heads < 1) fail("heads must be >= 1");
    if (cfg.gat_layers < 1) fail("gat_layers must be >= 1");
    if (cfg.hidden % cfg.heads != 0) fail("hidden must be divisible by heads");
    if (cfg.knn_k < 1) fail("knn_k must be >= 1");
    if (cfg.ppr_steps < 1) fail("ppr_steps must be >= 1");
    if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) fail("alpha must be in (0, 1]");
    if (!(cfg.tau > 0.0)) fail("tau must be positive");
    if (cfg.lambda < 0.0 || cfg.mu < 0.0 || cfg.gamma < 0.0)
        fail("lambda, mu, gamma must be non-negative");
    if (cfg.t_knn < 1) fail("t_knn must be >= 1");
    if (cfg.feature_missing < 0.0 || cfg.feature_missing > 1.0)
        fail("feature_missing must be in [0, 1]");
    if (cfg.edge_missing < 0.0 || cfg.edge_missing > 1.0)
        fail("edge_missing must be in [0, 1]");
}

ReconConfig recon_config(const TrainConfig& cfg) {
    ReconConfig rc;
    rc.p_r = cfg.p_r;
    rc.input_dropout = cfg.dropout;
    rc.attn_dropout = cfg.dropout;
    rc.hidden = cfg.hidden;
    rc.layers = cfg.gat_layers;
    rc.heads = cfg.heads;
    rc.loss_kind = cfg.recon_loss;
    rc.inference_fill = cfg.inference_fill;
    return rc;
}

}  // namespace mdsgnn
