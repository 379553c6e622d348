#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mdsgnn/config.hpp"

namespace mdsgnn {

// Line-delimited structured records: "<type> key=value key=value ...".
// Values never contain spaces. Record types: config, epoch, run, summary,
// table. Files built from these are deterministic byte-for-byte given the
// same inputs.
struct MetricsRecord {
    std::string type;
    std::vector<std::pair<std::string, std::string>> kv;

    const std::string* find(const std::string& key) const;
};

std::string metrics_line(const std::string& type,
                         const std::vector<std::pair<std::string, std::string>>& kv);

std::vector<MetricsRecord> parse_metrics(const std::string& text,
                                         const std::string& context);

struct EpochLosses {
    double l_ce = 0.0, l_ce_prime = 0.0, l_rec = 0.0, l_cl = 0.0, total = 0.0;
};

struct RunMetrics {
    std::vector<EpochLosses> losses;
    int best_epoch = -1;  // -1 = untrained
    double best_val_acc = 0.0;
    double test_acc = 0.0;
    // console reporting only; metrics files must be re-run identical, so
    // wall-clock time never enters them
    double wall_secs = 0.0;
};

std::string config_record(const TrainConfig& cfg);
// one "epoch ..." line per entry plus the closing "run ..." line
std::string run_records(const std::string& dataset, std::uint64_t seed,
                        const RunMetrics& rm);
std::string summary_record(const std::string& dataset, int n_seeds, double mean,
                           double stddev,
                           const std::vector<std::pair<std::string, std::string>>& extra);

}  // namespace mdsgnn
