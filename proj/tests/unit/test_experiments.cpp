#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hric/experiments.hpp"

using namespace hric;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

ExperimentConfig tiny() {
    ExperimentConfig c = parse_config(R"({"epochs": 2})");
    c.scenario.episode_slots = 4;
    c.agent.batch_size = 4;
    c.agent.buffer_capacity = 32;
    c.agent.hidden_width = 8;
    c.seeds = {1};
    return c;
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("hric_test_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("epa training writes one row per epoch and is reproducible") {
    ExperimentConfig c = tiny();
    c.methods = {"epa"};
    HeuristicProvider provider;
    const fs::path a = scratch("train_a"), b = scratch("train_b");
    (void)run_train_experiment(c, provider, a);
    (void)run_train_experiment(c, provider, b);
    const std::string curves = slurp(a / "curves_epa_seed1.csv");
    CHECK(curves.rfind("method,seed,epoch,phase,w,sigma,total_throughput,fallback_count\n", 0) == 0);
    CHECK(lines(curves) == 3);
    CHECK(curves == slurp(b / "curves_epa_seed1.csv"));
    CHECK(slurp(a / "summary.csv") == slurp(b / "summary.csv"));
    CHECK(fs::exists(a / "manifest.json"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("alpha sweep rows follow the grid") {
    ExperimentConfig c = tiny();
    c.methods = {"epa"};
    c.alpha_grid = {0.3, 0.7};
    c.test_drops = 2;
    HeuristicProvider provider;
    const fs::path dir = scratch("sweep");
    const auto rows = run_alpha_sweep(c, provider, dir);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].alpha == 0.3);
    CHECK(rows[1].alpha == 0.7);
    CHECK(rows[0].mean_throughput > 0.0);
    const std::string csv = slurp(dir / "sweep_alpha.csv");
    CHECK(csv.rfind("alpha,method,mean_throughput,stderr\n", 0) == 0);
    CHECK(lines(csv) == 3);
    fs::remove_all(dir);
}

TEST_CASE("bench reports every sample") {
    ExperimentConfig c = tiny();
    HeuristicProvider provider;
    const fs::path dir = scratch("bench");
    const BenchReport report = run_bench(c, nullptr, true, provider, dir);
    CHECK(report.actor_ms.size() == 500);
    CHECK(report.guidance_ms.size() == 500);
    CHECK(report.actor.min_ms <= report.actor.median_ms);
    CHECK(report.actor.median_ms <= report.actor.p99_ms);
    CHECK(lines(slurp(dir / "latency.csv")) == 1001);
    std::ostringstream out;
    print_bench_report(out, report);
    CHECK(out.str().find("0.07 ms") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("latency stats") {
    const auto s = latency_stats({5.0, 1.0, 3.0, 2.0, 4.0});
    CHECK(s.min_ms == 1.0);
    CHECK(s.median_ms == 3.0);
    CHECK(s.p99_ms == 5.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
}

TEST_CASE("guidance dry run builds a prompt offline") {
    const Prompt p = guidance_dry_run(ExperimentConfig::defaults(Profile::Desk), 1);
    CHECK(p.text().find("MBS3:") != std::string::npos);
}

}
