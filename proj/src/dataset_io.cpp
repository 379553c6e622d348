#include <algorithm>
#include <filesystem>

#include "mdsgnn/errors.hpp"
#include "mdsgnn/graph.hpp"
#include "mdsgnn/text.hpp"

namespace mdsgnn {

namespace {

namespace fs = std::filesystem;

// Non-empty, non-comment lines with their 1-based line numbers. The views
// point into `content`, which must outlive the result.
std::vector<std::pair<int, std::string_view>> data_lines(const std::string& content,
                                                         bool allow_comments) {
    std::vector<std::pair<int, std::string_view>> out;
    int lineno = 0;
    for (std::string_view line : split(content, '\n')) {
        ++lineno;
        std::string_view t = trim(line);
        if (t.empty()) continue;
        if (allow_comments && t.front() == '#') continue;
        out.emplace_back(lineno, t);
    }
    return out;
}

std::string loc(const std::string& path, int line) {
    return path + ":" + std::to_string(line);
}

std::vector<int> load_index_file(const std::string& path, int n) {
    std::vector<int> out;
    const std::string text = read_file(path);
    for (auto [ln, line] : data_lines(text, false)) {
        long long v = parse_int(line, loc(path, ln));
        if (v < 0 || v >= n)
            throw DataError(loc(path, ln) + ": index out of range: " + std::to_string(v));
        out.push_back(static_cast<int>(v));
    }
    return out;
}

}  // namespace

IncompleteGraph load_dataset(const std::string& dir) {
    const std::string meta_path = dir + "/meta.txt";
    Graph g;
    {
        bool have_n = false, have_f = false, have_c = false;
        const std::string meta_text = read_file(meta_path);
        for (auto [ln, line] : data_lines(meta_text, true)) {
            auto eq = line.find('=');
            if (eq == std::string_view::npos)
                throw DataError(loc(meta_path, ln) + ": expected key=value");
            std::string_view key = trim(line.substr(0, eq));
            long long v = parse_int(trim(line.substr(eq + 1)), loc(meta_path, ln));
            if (key == "n") { g.n = static_cast<int>(v); have_n = true; }
            else if (key == "f") { g.f = static_cast<int>(v); have_f = true; }
            else if (key == "c") { g.c = static_cast<int>(v); have_c = true; }
            else throw DataError(loc(meta_path, ln) + ": unknown key '" + std::string(key) + "'");
        }
        if (!have_n || !have_f || !have_c)
            throw DataError(meta_path + ": missing one of n=, f=, c=");
    }

    const std::string edges_path = dir + "/edges.tsv";
    {
        std::vector<std::pair<int, int>> edges;
        const std::string edges_text = read_file(edges_path);
        for (auto [ln, line] : data_lines(edges_text, false)) {
            auto parts = split(line, '\t');
            if (parts.size() != 2)
                throw DataError(loc(edges_path, ln) + ": expected u<TAB>v");
            long long u = parse_int(parts[0], loc(edges_path, ln));
            long long v = parse_int(parts[1], loc(edges_path, ln));
            if (u < 0 || v < 0 || u >= g.n || v >= g.n)
                throw DataError(loc(edges_path, ln) + ": index out of range");
            if (u >= v)
                throw DataError(loc(edges_path, ln) + ": edges must satisfy u < v");
            edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
        }
        g.adj = adjacency_from_edges(g.n, edges, edges_path);
    }

    const std::string feat_path = dir + "/features.tsv";
    {
        g.features = Matrix(g.n, g.f);
        const std::string feat_text = read_file(feat_path);
        auto lines = data_lines(feat_text, false);
        if (static_cast<int>(lines.size()) != g.n)
            throw DataError(feat_path + ": expected " + std::to_string(g.n) + " rows, got " +
                            std::to_string(lines.size()));
        for (int i = 0; i < g.n; ++i) {
            auto [ln, line] = lines[i];
            auto parts = split(line, '\t');
            if (static_cast<int>(parts.size()) != g.f)
                throw DataError(loc(feat_path, ln) + ": expected " + std::to_string(g.f) +
                                " values, got " + std::to_string(parts.size()));
            for (int j = 0; j < g.f; ++j)
                g.features(i, j) = parse_double(parts[j], loc(feat_path, ln));
        }
    }

    const std::string labels_path = dir + "/labels.tsv";
    {
        const std::string labels_text = read_file(labels_path);
        auto lines = data_lines(labels_text, false);
        if (static_cast<int>(lines.size()) != g.n)
            throw DataError(labels_path + ": expected " + std::to_string(g.n) + " rows");
        for (auto [ln, line] : lines) {
            long long y = parse_int(line, loc(labels_path, ln));
            if (y < 0 || y >= g.c)
                throw DataError(loc(labels_path, ln) + ": label out of range: " + std::to_string(y));
            g.labels.push_back(static_cast<int>(y));
        }
    }

    g.train_idx = load_index_file(dir + "/train.idx", g.n);
    g.val_idx = load_index_file(dir + "/val.idx", g.n);
    g.test_idx = load_index_file(dir + "/test.idx", g.n);

    IncompleteGraph ig;
    ig.mask.known.assign(g.n, 1);
    const std::string mask_path = dir + "/mask.tsv";
    if (fs::exists(mask_path)) {
        const std::string mask_text = read_file(mask_path);
        auto lines = data_lines(mask_text, false);
        if (static_cast<int>(lines.size()) != g.n)
            throw DataError(mask_path + ": expected " + std::to_string(g.n) + " rows");
        for (int i = 0; i < g.n; ++i) {
            auto [ln, line] = lines[i];
            long long b = parse_int(line, loc(mask_path, ln));
            if (b != 0 && b != 1)
                throw DataError(loc(mask_path, ln) + ": mask entries must be 0 or 1");
            ig.mask.known[i] = static_cast<std::uint8_t>(b);
        }
        for (int i = 0; i < g.n; ++i) {
            if (ig.mask.known[i]) continue;
            for (int j = 0; j < g.f; ++j)
                if (g.features(i, j) != 0.0)
                    throw DataError(mask_path + ": node " + std::to_string(i) +
                                    " marked missing but has nonzero features");
        }
    }

    g.validate();
    ig.graph = std::move(g);
    return ig;
}

void save_dataset(const IncompleteGraph& ig, const std::string& dir,
                  const std::vector<std::string>& meta_comments) {
    const Graph& g = ig.graph;
    std::filesystem::create_directories(dir);

    std::string meta;
    for (const std::string& c : meta_comments) meta += "# " + c + "\n";
    meta += "n=" + std::to_string(g.n) + "\n";
    meta += "f=" + std::to_string(g.f) + "\n";
    meta += "c=" + std::to_string(g.c) + "\n";
    write_file(dir + "/meta.txt", meta);

    std::string edges;
    for (const auto& [u, v] : g.edge_list())
        edges += std::to_string(u) + "\t" + std::to_string(v) + "\n";
    write_file(dir + "/edges.tsv", edges);

    std::string feats;
    for (int i = 0; i < g.n; ++i) {
        for (int j = 0; j < g.f; ++j) {
            if (j) feats += '\t';
            feats += format_double(g.features(i, j));
        }
        feats += '\n';
    }
    write_file(dir + "/features.tsv", feats);

    std::string labels;
    for (int y : g.labels) labels += std::to_string(y) + "\n";
    write_file(dir + "/labels.tsv", labels);

    auto write_idx = [&](const char* name, const std::vector<int>& idx) {
        std::string s;
        for (int i : idx) s += std::to_string(i) + "\n";
        write_file(dir + "/" + name, s);
    };
    write_idx("train.idx", g.train_idx);
    write_idx("val.idx", g.val_idx);
    write_idx("test.idx", g.test_idx);

    if (!ig.mask.all_known()) {
        std::string mask;
        for (std::uint8_t b : ig.mask.known) mask += b ? "1\n" : "0\n";
        write_file(dir + "/mask.tsv", mask);
    } else {
        std::filesystem::remove(dir + "/mask.tsv");  // absent means all known
    }
}

}  // namespace mdsgnn
