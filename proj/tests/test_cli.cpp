#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "mdsgnn/graph.hpp"
#include "mdsgnn/metrics.hpp"
#include "mdsgnn/text.hpp"
#include "synthetic.hpp"

using namespace mdsgnn;
namespace fs = std::filesystem;

namespace {

// The command line interface is exercised as a subprocess: MDSGNN_CLI must
// point at the built executable (the test harness sets it).
std::string cli_binary() {
    const char* bin = std::getenv("MDSGNN_CLI");
    REQUIRE_MESSAGE(bin != nullptr, "MDSGNN_CLI is not set");
    REQUIRE(fs::exists(bin));
    return bin;
}

int run_cli(const std::string& args) {
    std::string cmd = cli_binary() + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

std::string scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("mdsgnn_cli_" + name);
    fs::remove_all(p);
    return p.string();
}

// One small on-disk dataset shared by every case.
std::string dataset_dir() {
    static const std::string dir = [] {
        std::string d = scratch("data");
        save_dataset(testsupport::all_known(testsupport::make_separable()), d);
        return d;
    }();
    return dir;
}

const std::string kFast = " --set epochs=3 --set hidden=8 --set knn_k=4";

std::vector<MetricsRecord> metrics_of(const std::string& out_dir) {
    return parse_metrics(read_file(out_dir + "/metrics.txt"), "metrics.txt");
}

}  // namespace

TEST_CASE("no subcommand is a usage error") {
    CHECK(run_cli("") == 1);
    CHECK(run_cli("frobnicate") == 1);
}

TEST_CASE("corrupt writes a deterministic dataset copy") {
    std::string a = scratch("corrupt_a");
    std::string b = scratch("corrupt_b");
    std::string c = scratch("corrupt_c");
    std::string base = " --in " + dataset_dir() +
                       " --feature-missing 0.4 --edge-missing 0.3";
    CHECK(run_cli("corrupt" + base + " --seed 7 --out " + a) == 0);
    CHECK(run_cli("corrupt" + base + " --seed 7 --out " + b) == 0);
    CHECK(run_cli("corrupt" + base + " --seed 8 --out " + c) == 0);

    bool any_differs = false;
    for (const char* name : {"meta.txt", "edges.tsv", "features.tsv",
                             "labels.tsv", "mask.tsv", "train.idx", "val.idx",
                             "test.idx"}) {
        std::string fa = read_file(a + "/" + std::string(name));
        CHECK(fa == read_file(b + "/" + std::string(name)));
        if (fa != read_file(c + "/" + std::string(name))) any_differs = true;
    }
    CHECK(any_differs);  // a different seed must corrupt differently

    // the copy loads back as a valid instance with the requested mask count
    IncompleteGraph g = load_dataset(a);
    CHECK(g.mask.missing_count() == static_cast<int>(0.4 * 60));
}

TEST_CASE("corrupt rejects an out-of-range rate") {
    CHECK(run_cli("corrupt --in " + dataset_dir() + " --out " +
                  scratch("corrupt_bad") + " --feature-missing 1.5") == 1);
}

TEST_CASE("a missing dataset directory is a data error") {
    CHECK(run_cli("train --data /nonexistent/nowhere --out " +
                  scratch("missing") + kFast) == 2);
}

TEST_CASE("train writes re-runnable metrics and a checkpoint") {
    std::string a = scratch("train_a");
    std::string b = scratch("train_b");
    std::string base = "train --data " + dataset_dir() + kFast +
                       " --set feature_missing=0.3 --seed 2 --out ";
    REQUIRE(run_cli(base + a) == 0);
    REQUIRE(run_cli(base + b) == 0);
    CHECK(read_file(a + "/metrics.txt") == read_file(b + "/metrics.txt"));
    CHECK(read_file(a + "/config.txt") == read_file(b + "/config.txt"));
    CHECK(fs::exists(a + "/checkpoint.bin"));

    std::vector<MetricsRecord> recs = metrics_of(a);
    REQUIRE(recs.size() >= 5);  // config + 3 epochs + run
    CHECK(recs.front().type == "config");
    CHECK(*recs.front().find("seed") == "2");
    const MetricsRecord& run = recs.back();
    CHECK(run.type == "run");
    CHECK(run.find("test_acc") != nullptr);
    CHECK(run.find("wall_secs") == nullptr);  // timing never enters the file
    int epochs = 0;
    for (const MetricsRecord& r : recs) epochs += r.type == "epoch";
    CHECK(epochs == 3);
}

TEST_CASE("the baseline method trains without a checkpoint") {
    std::string out = scratch("train_gcn");
    REQUIRE(run_cli("train --data " + dataset_dir() + kFast +
                    " --method gcn --out " + out) == 0);
    CHECK_FALSE(fs::exists(out + "/checkpoint.bin"));
    CHECK(metrics_of(out).back().type == "run");
}

TEST_CASE("config errors from --set exit with code 1") {
    std::string out = scratch("badset");
    CHECK(run_cli("train --data " + dataset_dir() + " --set junk=1 --out " +
                  out) == 1);
    CHECK(run_cli("train --data " + dataset_dir() + " --set lr=-2 --out " +
                  out) == 1);
}

TEST_CASE("numeric failure during training exits with code 3") {
    CHECK(run_cli("train --data " + dataset_dir() + kFast +
                  " --set lr=1e300 --out " + scratch("diverge")) == 3);
}

TEST_CASE("run summarizes consecutive seeds") {
    std::string out = scratch("run");
    REQUIRE(run_cli("run --data " + dataset_dir() + kFast +
                    " --seeds 2 --seed 5 --out " + out) == 0);
    std::vector<MetricsRecord> recs = metrics_of(out);
    const MetricsRecord& sum = recs.back();
    REQUIRE(sum.type == "summary");
    CHECK(*sum.find("seeds") == "2");
    CHECK(*sum.find("method") == "mdsgnn");
    int runs = 0;
    for (const MetricsRecord& r : recs) {
        if (r.type == "run") {
            ++runs;
            CHECK((*r.find("seed") == "5" || *r.find("seed") == "6"));
        }
    }
    CHECK(runs == 2);
}

TEST_CASE("ablate tags the summary with the dropped term") {
    std::string out = scratch("ablate");
    REQUIRE(run_cli("ablate --data " + dataset_dir() + kFast +
                    " --drop rec --seeds 1 --out " + out) == 0);
    std::vector<MetricsRecord> recs = metrics_of(out);
    CHECK(*recs.back().find("tag") == "wo_rec");
    CHECK(*recs.front().find("mu") == "0");  // echoed config has the term off
}

TEST_CASE("sweep tabulates one row per value") {
    std::string out = scratch("sweep");
    REQUIRE(run_cli("sweep --data " + dataset_dir() + kFast +
                    " --axis edge_missing --values 0,0.4 --seeds 1 --out " +
                    out) == 0);
    std::string table = read_file(out + "/table.tsv");
    std::vector<std::string_view> lines = split(table, '\n');
    REQUIRE(lines.size() >= 3);
    CHECK(lines[0] == "value\tmean\tstd");
    CHECK(lines[1].substr(0, 2) == "0\t");
    CHECK(lines[2].substr(0, 4) == "0.4\t");

    int summaries = 0;
    for (const MetricsRecord& r : metrics_of(out)) {
        if (r.type == "summary") {
            ++summaries;
            CHECK(*r.find("axis") == "edge_missing");
        }
    }
    CHECK(summaries == 2);

    CHECK(run_cli("sweep --data " + dataset_dir() + kFast +
                  " --axis knn_k --values 2.5 --seeds 1 --out " +
                  scratch("sweep_bad")) == 1);
}

TEST_CASE("the gradient check command passes") {
    CHECK(run_cli("gradcheck") == 0);
}
