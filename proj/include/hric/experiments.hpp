#pragma once

// Experiment orchestration behind the command-line tool. Every function
// writes CSV files with a header row into `output_dir` and returns what it
// wrote so callers can index it in a manifest.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "hric/config.hpp"
#include "hric/guidance.hpp"
#include "hric/trainer.hpp"

namespace hric {

/// The heuristic provider or a chat-completion client, per config.
[[nodiscard]] std::unique_ptr<GuidanceProvider> make_provider(const ExperimentConfig& config);

[[nodiscard]] double median(std::vector<double> values);

struct MethodSummary {
    std::string method;
    double median_final_throughput = 0.0;
    std::vector<double> per_seed;
};

struct TrainReport {
    std::vector<MethodSummary> summaries;
    std::vector<std::filesystem::path> files;
};

/// Trains every (method, seed) cell, writing curves_<method>_seed<seed>.csv,
/// checkpoint_<method>_seed<seed>.bin for learned methods, summary.csv,
/// guidance_audit.jsonl and manifest.json.
TrainReport run_train_experiment(const ExperimentConfig& config, GuidanceProvider& provider,
                                 const std::filesystem::path& output_dir, std::ostream* progress = nullptr);

void write_curves_csv(std::ostream& out, const std::string& method, std::uint64_t seed,
                      const std::vector<EpochRecord>& records);

struct SweepRow {
    double alpha = 0.0;
    std::string method;
    double mean_throughput = 0.0;
    double stderr_throughput = 0.0;
};

/// For each alpha (grid order) and method, evaluates one episode on each of
/// `config.test_drops` fresh deployments; learned methods are first trained
/// at that alpha on the first configured seed. Writes sweep_alpha.csv.
std::vector<SweepRow> run_alpha_sweep(const ExperimentConfig& config, GuidanceProvider& provider,
                                      const std::filesystem::path& output_dir, std::ostream* progress = nullptr);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

struct LatencyStats {
    double min_ms = 0.0;
    double median_ms = 0.0;
    double p99_ms = 0.0;
};

[[nodiscard]] LatencyStats latency_stats(std::vector<double> samples_ms);

struct BenchReport {
    std::vector<double> actor_ms;
    std::vector<double> guidance_ms;  // empty unless requested
    LatencyStats actor;
    LatencyStats guidance;
};

/// Times `config.bench_samples` single-state actor forwards (and, if asked,
/// as many full guidance cycles). Writes latency.csv.
BenchReport run_bench(const ExperimentConfig& config, const std::vector<DdpgAgent>* agents, bool include_guidance,
                      GuidanceProvider& provider, const std::filesystem::path& output_dir);

/// Human-readable bench summary with the reference footnote.
void print_bench_report(std::ostream& out, const BenchReport& report);

/// Evaluates a checkpoint (or epa when `agents` is empty). Writes
/// evaluation.csv (per episode) and evaluation_slots.csv (per slot and SBS).
EvaluationResult run_evaluation(const ExperimentConfig& config, const Method& method,
                                const std::vector<DdpgAgent>& agents, std::uint64_t seed, GuidanceProvider& provider,
                                const std::filesystem::path& output_dir);

/// Builds guidance statistics from a fresh deployment and returns the prompt;
/// never contacts an endpoint.
[[nodiscard]] Prompt guidance_dry_run(const ExperimentConfig& config, std::uint64_t seed);

/// manifest.json: config hash, versions, and the listed files.
void write_manifest(const std::filesystem::path& output_dir, const ExperimentConfig& config,
                    const std::string& command, const std::vector<std::filesystem::path>& files);

}  // namespace hric
