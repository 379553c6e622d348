#include "mdsgnn/metrics.hpp"

#include <sstream>

#include "mdsgnn/errors.hpp"
#include "mdsgnn/text.hpp"

namespace mdsgnn {

const std::string* MetricsRecord::find(const std::string& key) const {
    for (const auto& [k, v] : kv) {
        if (k == key) return &v;
    }
    return nullptr;
}

std::string metrics_line(const std::string& type,
                         const std::vector<std::pair<std::string, std::string>>& kv) {
    std::string out = type;
    for (const auto& [k, v] : kv) {
        out += ' ';
        out += k;
        out += '=';
        out += v;
    }
    out += '\n';
    return out;
}

std::vector<MetricsRecord> parse_metrics(const std::string& text,
                                         const std::string& context) {
    std::vector<MetricsRecord> records;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view t = trim(line);
        if (t.empty()) continue;
        std::vector<std::string_view> parts = split(t, ' ');
        MetricsRecord rec;
        rec.type = std::string(parts[0]);
        for (std::size_t i = 1; i < parts.size(); ++i) {
            auto eq = parts[i].find('=');
            if (eq == std::string_view::npos || eq == 0) {
                throw DataError(context + ":" + std::to_string(lineno) +
                                ": malformed field '" + std::string(parts[i]) +
                                "'");
            }
            rec.kv.emplace_back(parts[i].substr(0, eq), parts[i].substr(eq + 1));
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::string config_record(const TrainConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> kv;
    std::string rendered = render_config(cfg);
    for (std::string_view line : split(trim(rendered), '\n')) {
        auto eq = line.find('=');
        kv.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
    return metrics_line("config", kv);
}

std::string run_records(const std::string& dataset, std::uint64_t seed,
                        const RunMetrics& rm) {
    std::string out;
    for (std::size_t e = 0; e < rm.losses.size(); ++e) {
        const EpochLosses& el = rm.losses[e];
        out += metrics_line("epoch", {{"dataset", dataset},
                                      {"seed", std::to_string(seed)},
                                      {"epoch", std::to_string(e)},
                                      {"l_ce", format_double(el.l_ce)},
                                      {"l_ce_prime", format_double(el.l_ce_prime)},
                                      {"l_rec", format_double(el.l_rec)},
                                      {"l_cl", format_double(el.l_cl)},
                                      {"total", format_double(el.total)}});
    }
    out += metrics_line("run", {{"dataset", dataset},
                                {"seed", std::to_string(seed)},
                                {"best_epoch", std::to_string(rm.best_epoch)},
                                {"val_acc", format_double(rm.best_val_acc)},
                                {"test_acc", format_double(rm.test_acc)}});
    return out;
}

std::string summary_record(const std::string& dataset, int n_seeds, double mean,
                           double stddev,
                           const std::vector<std::pair<std::string, std::string>>& extra) {
    std::vector<std::pair<std::string, std::string>> kv = {
        {"dataset", dataset},
        {"seeds", std::to_string(n_seeds)},
        {"mean", format_double(mean)},
        {"std", format_double(stddev)},
    };
    kv.insert(kv.end(), extra.begin(), extra.end());
    return metrics_line("summary", kv);
}

}  // namespace mdsgnn
