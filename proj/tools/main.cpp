#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mdsgnn/config.hpp"
#include "mdsgnn/errors.hpp"
#include "mdsgnn/graph.hpp"
#include "mdsgnn/metrics.hpp"
#include "mdsgnn/text.hpp"
#include "mdsgnn/training.hpp"

namespace {

using namespace mdsgnn;

TrainConfig build_config(const std::string& config_path,
                         const std::vector<std::string>& sets, bool seed_given,
                         std::uint64_t seed) {
    TrainConfig cfg =
        config_path.empty() ? TrainConfig{} : parse_config_file(config_path);
    for (const std::string& kv : sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        }
        apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1), "--set");
    }
    if (seed_given) cfg.seed = seed;
    validate_config(cfg);
    return cfg;
}

std::string dataset_label(const std::string& dir) {
    std::filesystem::path p(dir);
    std::string name = p.filename().string();
    if (name.empty()) name = p.parent_path().filename().string();
    if (name.empty()) name = "dataset";
    for (char& ch : name) {
        if (ch == ' ') ch = '_';
    }
    return name;
}

std::vector<std::uint64_t> seed_range(std::uint64_t base, int n) {
    if (n < 1) throw ConfigError("--seeds must be at least 1");
    std::vector<std::uint64_t> out;
    for (int i = 0; i < n; ++i) out.push_back(base + static_cast<std::uint64_t>(i));
    return out;
}

void write_output(const std::string& dir, const std::string& name,
                  const std::string& content) {
    std::filesystem::create_directories(dir);
    write_file((std::filesystem::path(dir) / name).string(), content);
}

std::string seed_runs_block(const std::string& label, const RunSummary& rs) {
    std::string out;
    for (const SeedRun& r : rs.runs) out += run_records(label, r.seed, r.metrics);
    return out;
}

struct CommonArgs {
    std::string data, out, config, method = "mdsgnn";
    std::vector<std::string> sets;
    std::uint64_t seed = 0;
};

void add_common(CLI::App* sub, CommonArgs& a, bool with_method) {
    sub->add_option("--data", a.data, "dataset directory")->required();
    sub->add_option("--out", a.out, "output directory")->required();
    sub->add_option("--config", a.config, "key=value config file");
    sub->add_option("--set", a.sets, "override one config key (key=value)");
    sub->add_option("--seed", a.seed, "base RNG seed");
    if (with_method) {
        sub->add_option("--method", a.method, "mdsgnn or gcn");
    }
}

int cmd_corrupt(const std::string& in_dir, const std::string& out_dir,
                double feature_missing, double edge_missing,
                std::uint64_t seed) {
    IncompleteGraph in_g = load_dataset(in_dir);
    IncompleteGraph out_g =
        corrupt_for_seed(in_g, feature_missing, edge_missing, seed);
    int masked = out_g.mask.missing_count() - in_g.mask.missing_count();
    int dropped =
        in_g.graph.undirected_edge_count() - out_g.graph.undirected_edge_count();
    save_dataset(out_g, out_dir,
                 {"corrupted from " + in_dir,
                  "feature_missing=" + format_double(feature_missing) +
                      " edge_missing=" + format_double(edge_missing) +
                      " seed=" + std::to_string(seed)});
    std::cout << "masked " << masked << "/" << in_g.graph.n
              << " nodes, dropped " << dropped << "/"
              << in_g.graph.undirected_edge_count() << " edges -> " << out_dir
              << "\n";
    return 0;
}

int cmd_train(const CommonArgs& a, bool seed_given) {
    TrainConfig cfg = build_config(a.config, a.sets, seed_given, a.seed);
    Method method = parse_method(a.method);
    IncompleteGraph data = load_dataset(a.data);
    IncompleteGraph run_g =
        corrupt_for_seed(data, cfg.feature_missing, cfg.edge_missing, cfg.seed);
    std::string label = dataset_label(a.data);
    std::string metrics = config_record(cfg);
    RunMetrics rm;
    if (method == Method::gcn) {
        rm = gcn_baseline(run_g, cfg);
    } else {
        auto [st, m] = fit(run_g, cfg);
        rm = std::move(m);
        std::filesystem::create_directories(a.out);
        save_checkpoint((std::filesystem::path(a.out) / "checkpoint.bin").string(),
                        st);
    }
    metrics += run_records(label, cfg.seed, rm);
    write_output(a.out, "metrics.txt", metrics);
    write_output(a.out, "config.txt", render_config(cfg));
    std::cout << "train " << label << " method=" << a.method
              << " seed=" << cfg.seed << " best_epoch=" << rm.best_epoch
              << " val_acc=" << format_double(rm.best_val_acc)
              << " test_acc=" << format_double(rm.test_acc)
              << " wall_secs=" << format_double(rm.wall_secs) << "\n";
    return 0;
}

int cmd_run(const CommonArgs& a, bool seed_given, int n_seeds) {
    TrainConfig cfg = build_config(a.config, a.sets, seed_given, a.seed);
    Method method = parse_method(a.method);
    IncompleteGraph data = load_dataset(a.data);
    std::string label = dataset_label(a.data);
    RunSummary rs = run_seeds(data, cfg, seed_range(cfg.seed, n_seeds), method);
    std::string metrics = config_record(cfg);
    metrics += seed_runs_block(label, rs);
    metrics += summary_record(label, n_seeds, rs.mean, rs.stddev,
                              {{"method", a.method}});
    write_output(a.out, "metrics.txt", metrics);
    write_output(a.out, "config.txt", render_config(cfg));
    std::cout << "run " << label << " method=" << a.method
              << " seeds=" << n_seeds << " mean=" << format_double(rs.mean)
              << " std=" << format_double(rs.stddev) << "\n";
    return 0;
}

int cmd_ablate(const CommonArgs& a, bool seed_given, int n_seeds,
               const std::string& drop_name) {
    TrainConfig cfg = build_config(a.config, a.sets, seed_given, a.seed);
    AblateDrop drop = parse_ablate_drop(drop_name);
    IncompleteGraph data = load_dataset(a.data);
    std::string label = dataset_label(a.data);
    RunSummary rs = ablate(data, cfg, drop, seed_range(cfg.seed, n_seeds));
    // echo the config the runs actually used
    TrainConfig eff = cfg;
    if (drop != AblateDrop::cl) eff.mu = 0.0;
    if (drop != AblateDrop::rec) eff.gamma = 0.0;
    std::string metrics = config_record(eff);
    metrics += seed_runs_block(label, rs);
    metrics += summary_record(label, n_seeds, rs.mean, rs.stddev,
                              {{"method", "mdsgnn"}, {"tag", rs.tag}});
    write_output(a.out, "metrics.txt", metrics);
    write_output(a.out, "config.txt", render_config(eff));
    std::cout << "ablate " << label << " tag=" << rs.tag << " seeds=" << n_seeds
              << " mean=" << format_double(rs.mean)
              << " std=" << format_double(rs.stddev) << "\n";
    return 0;
}

int cmd_sweep(const CommonArgs& a, bool seed_given, int n_seeds,
              const std::string& axis_name, const std::string& values_csv) {
    TrainConfig cfg = build_config(a.config, a.sets, seed_given, a.seed);
    SweepAxis axis = parse_sweep_axis(axis_name);
    std::vector<double> values;
    for (std::string_view part : split(values_csv, ',')) {
        values.push_back(parse_double(trim(part), "--values"));
    }
    IncompleteGraph data = load_dataset(a.data);
    std::string label = dataset_label(a.data);
    std::vector<SweepRow> rows =
        sweep(data, cfg, axis, values, seed_range(cfg.seed, n_seeds));
    std::string metrics = config_record(cfg);
    std::string table = "value\tmean\tstd\n";
    for (const SweepRow& row : rows) {
        metrics += seed_runs_block(label, row.summary);
        metrics += summary_record(label, n_seeds, row.summary.mean,
                                  row.summary.stddev,
                                  {{"method", "mdsgnn"},
                                   {"axis", axis_name},
                                   {"value", format_double(row.value)}});
        table += format_double(row.value) + "\t" +
                 format_double(row.summary.mean) + "\t" +
                 format_double(row.summary.stddev) + "\n";
    }
    write_output(a.out, "metrics.txt", metrics);
    write_output(a.out, "table.tsv", table);
    write_output(a.out, "config.txt", render_config(cfg));
    std::cout << "sweep " << label << " axis=" << axis_name << "\n" << table;
    return 0;
}

int cmd_gradcheck() {
    bool ok = true;
    for (const auto& [name, err] : gradcheck_suite()) {
        bool pass = err < 1e-4;
        ok = ok && pass;
        std::cout << (pass ? "ok   " : "FAIL ") << name
                  << " max_rel_err=" << format_double(err) << "\n";
    }
    if (!ok) {
        std::cerr << "gradient check failed\n";
        return 3;
    }
    std::cout << "all gradient checks below 1e-4\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        if (const char* env = std::getenv("MDSGNN_THREADS")) {
            long long t = 0;
            try {
                t = parse_int(env, "MDSGNN_THREADS");
            } catch (const DataError& e) {
                throw ConfigError(e.what());
            }
            if (t < 1 || t > 4096) {
                throw ConfigError("MDSGNN_THREADS out of range: " +
                                  std::string(env));
            }
            set_thread_cap(static_cast<int>(t));
        }

        CLI::App app{
            "dual-stream graph neural network for node classification on "
            "graphs with missing features and edges"};
        app.require_subcommand(1);

        auto* corrupt = app.add_subcommand(
            "corrupt", "write a corrupted copy of a dataset directory");
        std::string c_in, c_out;
        double c_fm = 0.0, c_em = 0.0;
        std::uint64_t c_seed = 0;
        corrupt->add_option("--in", c_in, "input dataset directory")->required();
        corrupt->add_option("--out", c_out, "output dataset directory")
            ->required();
        corrupt->add_option("--feature-missing", c_fm,
                            "fraction of nodes to mask");
        corrupt->add_option("--edge-missing", c_em,
                            "fraction of edges to drop");
        corrupt->add_option("--seed", c_seed, "corruption seed");

        CommonArgs t_args;
        auto* train = app.add_subcommand(
            "train", "train once and write metrics plus a checkpoint");
        add_common(train, t_args, true);

        CommonArgs r_args;
        int r_seeds = 5;
        auto* run = app.add_subcommand(
            "run", "train across consecutive seeds and summarize");
        add_common(run, r_args, true);
        run->add_option("--seeds", r_seeds, "number of consecutive seeds");

        CommonArgs a_args;
        int a_seeds = 5;
        std::string a_drop;
        auto* ablate = app.add_subcommand(
            "ablate", "rerun with a loss term disabled");
        add_common(ablate, a_args, false);
        ablate->add_option("--seeds", a_seeds, "number of consecutive seeds");
        ablate->add_option("--drop", a_drop, "rec, cl, or both")->required();

        CommonArgs s_args;
        int s_seeds = 5;
        std::string s_axis, s_values;
        auto* sweep = app.add_subcommand(
            "sweep", "vary one knob across a value list and tabulate");
        add_common(sweep, s_args, false);
        sweep->add_option("--seeds", s_seeds, "number of consecutive seeds");
        sweep->add_option("--axis", s_axis,
                          "feature_missing, edge_missing, knn_k, or ppr_steps")
            ->required();
        sweep->add_option("--values", s_values, "comma-separated value list")
            ->required();

        auto* gradcheck = app.add_subcommand(
            "gradcheck", "finite-difference checks of every component");

        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            int code = app.exit(e);
            return code == 0 ? 0 : 1;
        }

        if (corrupt->parsed()) return cmd_corrupt(c_in, c_out, c_fm, c_em, c_seed);
        if (train->parsed()) return cmd_train(t_args, train->count("--seed") > 0);
        if (run->parsed())
            return cmd_run(r_args, run->count("--seed") > 0, r_seeds);
        if (ablate->parsed())
            return cmd_ablate(a_args, ablate->count("--seed") > 0, a_seeds,
                              a_drop);
        if (sweep->parsed())
            return cmd_sweep(s_args, sweep->count("--seed") > 0, s_seeds, s_axis,
                             s_values);
        if (gradcheck->parsed()) return cmd_gradcheck();
        return 1;
    } catch (const mdsgnn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const mdsgnn::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const mdsgnn::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
