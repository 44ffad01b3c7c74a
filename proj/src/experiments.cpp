#include "hric/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "hric/checkpoint.hpp"
#include "hric/environment.hpp"
#include "hric/llm_client.hpp"
#include "hric/random.hpp"

#ifndef HRIC_VERSION
#define HRIC_VERSION "unknown"
#endif

namespace hric {

namespace fs = std::filesystem;

namespace {

// Seed stream for the alpha sweep's test deployments.
constexpr std::uint64_t kDropStream = 0xD20900;

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

std::string fmt(const char* pattern, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, value);
    return buf;
}

std::string cell_stem(const std::string& method, std::uint64_t seed) {
    return method + "_seed" + std::to_string(seed);
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
    std::vector<Method> methods;
    for (const auto& name : names) {
        methods.push_back(Method::parse(name));
    }
    return methods;
}

}  // namespace

std::unique_ptr<GuidanceProvider> make_provider(const ExperimentConfig& config) {
    if (config.provider == ProviderKind::Endpoint) {
        return std::make_unique<ChatCompletionClient>(config.endpoint);
    }
    return std::make_unique<HeuristicProvider>();
}

double median(std::vector<double> values) {
    if (values.empty()) {
        return 0.0;
    }
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

void write_curves_csv(std::ostream& out, const std::string& method, std::uint64_t seed,
                      const std::vector<EpochRecord>& records) {
    out << "method,seed,epoch,phase,w,sigma,total_throughput,fallback_count\n";
    for (const EpochRecord& r : records) {
        out << method << ',' << seed << ',' << r.epoch << ',' << to_string(r.phase) << ',' << fmt("%.6f", r.w) << ','
            << fmt("%.6f", r.sigma) << ',' << fmt("%.3f", r.total_throughput) << ',' << r.fallback_count << '\n';
    }
}

TrainReport run_train_experiment(const ExperimentConfig& config, GuidanceProvider& provider,
                                 const fs::path& output_dir, std::ostream* progress) {
    config.validate();
    fs::create_directories(output_dir);
    const std::vector<Method> methods = parse_methods(config.methods);
    const TrainingSetup setup = config.training_setup();

    TrainReport report;
    const fs::path audit_path = output_dir / "guidance_audit.jsonl";
    std::ofstream audit_out = open_output(audit_path);
    GuidanceAuditLog audit(audit_out);

    for (std::size_t i = 0; i < methods.size(); ++i) {
        MethodSummary summary;
        summary.method = config.methods[i];
        for (const std::uint64_t seed : config.seeds) {
            const auto started = std::chrono::steady_clock::now();
            TrainingSinks sinks;
            sinks.audit = methods[i].uses_guidance() ? &audit : nullptr;
            const TrainingResult result = run_training(setup, methods[i], seed, provider, sinks);

            const fs::path curves = output_dir / ("curves_" + cell_stem(summary.method, seed) + ".csv");
            std::ofstream out = open_output(curves);
            write_curves_csv(out, summary.method, seed, result.records);
            finish(out, curves);
            report.files.push_back(curves);

            if (!result.agents.empty()) {
                const fs::path ckpt = output_dir / ("checkpoint_" + cell_stem(summary.method, seed) + ".bin");
                save_checkpoint(ckpt, result.agents);
                report.files.push_back(ckpt);
            }
            const double final = final_throughput(result.records);
            summary.per_seed.push_back(final);
            if (progress != nullptr) {
                const double secs =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
                *progress << summary.method << " seed " << seed << ": final-10 throughput "
                          << fmt("%.2f", final / 1e6) << " Mb/s (" << fmt("%.1f", secs) << " s)\n";
            }
        }
        summary.median_final_throughput = median(summary.per_seed);
        report.summaries.push_back(std::move(summary));
    }
    finish(audit_out, audit_path);
    report.files.push_back(audit_path);

    const fs::path summary_path = output_dir / "summary.csv";
    std::ofstream out = open_output(summary_path);
    out << "method,median_final10_throughput,seeds\n";
    for (const MethodSummary& s : report.summaries) {
        out << s.method << ',' << fmt("%.3f", s.median_final_throughput) << ',' << s.per_seed.size() << '\n';
    }
    finish(out, summary_path);
    report.files.push_back(summary_path);

    write_manifest(output_dir, config, "train", report.files);
    return report;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "alpha,method,mean_throughput,stderr\n";
    for (const SweepRow& row : rows) {
        out << fmt("%.4g", row.alpha) << ',' << row.method << ',' << fmt("%.3f", row.mean_throughput) << ','
            << fmt("%.3f", row.stderr_throughput) << '\n';
    }
}

std::vector<SweepRow> run_alpha_sweep(const ExperimentConfig& config, GuidanceProvider& provider,
                                      const fs::path& output_dir, std::ostream* progress) {
    config.validate();
    if (config.alpha_grid.empty()) {
        throw std::invalid_argument("alpha_grid: at least one value is required");
    }
    fs::create_directories(output_dir);
    const std::vector<Method> methods = parse_methods(config.methods);
    const std::uint64_t seed = config.seeds.front();

    std::vector<SweepRow> rows;
    for (const double alpha : config.alpha_grid) {
        ExperimentConfig cell = config;
        cell.scenario.backhaul_fraction_alpha = alpha;
        for (std::size_t i = 0; i < methods.size(); ++i) {
            std::vector<DdpgAgent> agents;
            if (methods[i].learns()) {
                agents = run_training(cell.training_setup(), methods[i], seed, provider).agents;
            }
            // Each test drop is a fresh deployment; the same drops are used at every alpha.
            std::vector<double> per_drop;
            for (std::size_t d = 0; d < config.test_drops; ++d) {
                per_drop.push_back(
                    evaluate(agents, methods[i], cell.scenario, 1, mix_seed(seed, kDropStream + d), provider)
                        .mean_total_throughput);
            }
            SweepRow row{alpha, config.methods[i], 0.0, 0.0};
            for (double v : per_drop) {
                row.mean_throughput += v / static_cast<double>(per_drop.size());
            }
            if (per_drop.size() > 1) {
                double ss = 0.0;
                for (double v : per_drop) {
                    ss += (v - row.mean_throughput) * (v - row.mean_throughput);
                }
                const double n = static_cast<double>(per_drop.size());
                row.stderr_throughput = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
            }
            if (progress != nullptr) {
                *progress << "alpha " << fmt("%.3g", alpha) << ' ' << row.method << ": "
                          << fmt("%.2f", row.mean_throughput / 1e6) << " Mb/s\n";
            }
            rows.push_back(std::move(row));
        }
    }
    const fs::path path = output_dir / "sweep_alpha.csv";
    std::ofstream out = open_output(path);
    write_sweep_csv(out, rows);
    finish(out, path);
    write_manifest(output_dir, config, "sweep-alpha", {path});
    return rows;
}

LatencyStats latency_stats(std::vector<double> samples_ms) {
    if (samples_ms.empty()) {
        return {};
    }
    std::sort(samples_ms.begin(), samples_ms.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(samples_ms.size())));
    return {samples_ms.front(), median(samples_ms), samples_ms[std::clamp<std::size_t>(rank, 1, samples_ms.size()) - 1]};
}

BenchReport run_bench(const ExperimentConfig& config, const std::vector<DdpgAgent>* agents, bool include_guidance,
                      GuidanceProvider& provider, const fs::path& output_dir) {
    config.validate();
    fs::create_directories(output_dir);
    using Clock = std::chrono::steady_clock;
    const std::uint64_t seed = config.seeds.front();

    const DdpgAgent fresh(config.scenario.num_sbs_per_mbs, config.agent, seed);
    const DdpgAgent& agent = agents != nullptr && !agents->empty() ? agents->front() : fresh;
    Environment env(config.scenario, seed, kEvaluationEpisodeBase);
    const std::vector<double> features = observation_features(env.observations().front());

    BenchReport report;
    double sink = 0.0;
    (void)agent.act(features);  // warm-up
    for (std::size_t i = 0; i < config.bench_samples; ++i) {
        const auto t0 = Clock::now();
        const auto action = agent.act(features);
        const auto t1 = Clock::now();
        sink += action.front();
        report.actor_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    if (include_guidance) {
        const GuidanceInput stats = env.observation_statistics(config.scenario.guidance_period_slots);
        for (std::size_t i = 0; i < config.bench_samples; ++i) {
            const auto t0 = Clock::now();
            const GuidanceOutcome outcome = guidance_with_fallback(stats, config.scenario, provider);
            const auto t1 = Clock::now();
            sink += outcome.policy.at(0, 0);
            report.guidance_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
    }
    if (!std::isfinite(sink)) {
        throw std::runtime_error("bench: non-finite output");
    }
    report.actor = latency_stats(report.actor_ms);
    report.guidance = latency_stats(report.guidance_ms);

    const fs::path path = output_dir / "latency.csv";
    std::ofstream out = open_output(path);
    out << "kind,sample,latency_ms\n";
    for (std::size_t i = 0; i < report.actor_ms.size(); ++i) {
        out << "actor_forward," << i << ',' << fmt("%.6f", report.actor_ms[i]) << '\n';
    }
    for (std::size_t i = 0; i < report.guidance_ms.size(); ++i) {
        out << "guidance_cycle," << i << ',' << fmt("%.6f", report.guidance_ms[i]) << '\n';
    }
    finish(out, path);
    write_manifest(output_dir, config, "bench", {path});
    return report;
}

void print_bench_report(std::ostream& out, const BenchReport& report) {
    const auto line = [&](const char* name, std::size_t n, const LatencyStats& s) {
        out << name << " (" << n << " samples): min " << fmt("%.4f", s.min_ms) << " ms, median "
            << fmt("%.4f", s.median_ms) << " ms, p99 " << fmt("%.4f", s.p99_ms) << " ms\n";
    };
    line("actor_forward", report.actor_ms.size(), report.actor);
    if (!report.guidance_ms.empty()) {
        line("guidance_cycle", report.guidance_ms.size(), report.guidance);
    }
    out << "* reference: LLM inference < 1.5 s, agent inference < 0.07 ms\n";
}

EvaluationResult run_evaluation(const ExperimentConfig& config, const Method& method,
                                const std::vector<DdpgAgent>& agents, std::uint64_t seed, GuidanceProvider& provider,
                                const fs::path& output_dir) {
    config.validate();
    fs::create_directories(output_dir);
    const EvaluationResult result = evaluate(agents, method, config.scenario, config.test_drops, seed, provider);

    const fs::path per_episode = output_dir / "evaluation.csv";
    std::ofstream out = open_output(per_episode);
    out << "method,seed,episode,mean_total_throughput\n";
    for (const auto& ep : result.episodes) {
        out << method.name() << ',' << seed << ',' << ep.episode << ',' << fmt("%.3f", ep.mean_total_throughput)
            << '\n';
    }
    finish(out, per_episode);

    const fs::path per_slot = output_dir / "evaluation_slots.csv";
    std::ofstream slots = open_output(per_slot);
    slots << "episode,slot,m,n,backhaul_rate,access_sum\n";
    const std::size_t N = config.scenario.num_sbs_per_mbs;
    for (const auto& ep : result.episodes) {
        for (std::size_t t = 0; t < ep.slots.size(); ++t) {
            const SlotLog& log = ep.slots[t];
            for (std::size_t i = 0; i < log.backhaul_rate.size(); ++i) {
                slots << ep.episode << ',' << t << ',' << i / N << ',' << i % N << ','
                      << fmt("%.17g", log.backhaul_rate[i]) << ',' << fmt("%.17g", log.access_sum[i]) << '\n';
            }
        }
    }
    finish(slots, per_slot);
    write_manifest(output_dir, config, "evaluate", {per_episode, per_slot});
    return result;
}

Prompt guidance_dry_run(const ExperimentConfig& config, std::uint64_t seed) {
    config.validate();
    const Environment env(config.scenario, seed, 0);
    return build_prompt(env.observation_statistics(config.scenario.guidance_period_slots), config.scenario);
}

void write_manifest(const fs::path& output_dir, const ExperimentConfig& config, const std::string& command,
                    const std::vector<fs::path>& files) {
    nlohmann::json files_json = nlohmann::json::array();
    for (const auto& f : files) {
        files_json.push_back(f.filename().string());
    }
    const nlohmann::json manifest = {
        {"command", command},
        {"hric_version", HRIC_VERSION},
        {"compiler", __VERSION__},
        {"config_hash", config_hash(config)},
        {"guidance_provider", to_string(config.provider)},
        {"files", files_json},
    };
    const fs::path path = output_dir / "manifest.json";
    std::ofstream out = open_output(path);
    out << manifest.dump(2) << '\n';
    finish(out, path);
}

}  // namespace hric
