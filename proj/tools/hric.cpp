// hric command-line entry point.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <CLI11.hpp>

#include "hric/checkpoint.hpp"
#include "hric/config.hpp"
#include "hric/experiments.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::string profile;
    std::vector<std::uint64_t> seeds;
    std::string output;
    std::string provider;
    std::vector<std::string> methods;
    std::optional<std::size_t> epochs;
};

void add_common(CLI::App& cmd, CommonOptions& o) {
    cmd.add_option("--config", o.config_path, "JSON config file (omitted keys take defaults)");
    cmd.add_option("--profile", o.profile, "desk or paper; overrides the file")
        ->check(CLI::IsMember({"desk", "paper"}));
    cmd.add_option("--seed,--seeds", o.seeds, "Seed list");
    cmd.add_option("--output", o.output, "Output directory");
    cmd.add_option("--provider", o.provider, "Guidance provider")->check(CLI::IsMember({"heuristic", "endpoint"}));
    cmd.add_option("--methods", o.methods, "hric, dln, dcn, epa, hric-fixed-w<w>")->delimiter(',');
    cmd.add_option("--epochs", o.epochs, "Training epochs (phase lengths follow)");
}

hric::ExperimentConfig resolve(const CommonOptions& o) {
    hric::ExperimentConfig config;
    if (!o.config_path.empty()) {
        config = hric::load_config(o.config_path);
    } else {
        config = hric::parse_config("");
    }
    if (!o.profile.empty() && (o.profile == "paper") != (config.profile == hric::Profile::Paper)) {
        const auto p = o.profile == "paper" ? hric::Profile::Paper : hric::Profile::Desk;
        auto d = hric::ExperimentConfig::defaults(p);
        config.profile = p;
        config.epochs = d.epochs;
        config.test_drops = d.test_drops;
        config.scenario.episode_slots = d.scenario.episode_slots;
        config.schedule = hric::PhaseSchedule{d.schedule.phase1_epochs, d.schedule.phase2_epochs,
                                              d.schedule.phase3_epochs, config.schedule.w_start,
                                              config.schedule.w_end, config.schedule.noise_sigma_start,
                                              config.schedule.noise_sigma_end};
    }
    if (!o.seeds.empty()) config.seeds = o.seeds;
    if (!o.output.empty()) config.output_dir = o.output;
    if (!o.provider.empty()) config.provider = hric::parse_provider(o.provider);
    if (!o.methods.empty()) config.methods = o.methods;
    if (o.epochs) {
        const auto split = hric::PhaseSchedule::proportional(*o.epochs);
        config.epochs = *o.epochs;
        config.schedule.phase1_epochs = split.phase1_epochs;
        config.schedule.phase2_epochs = split.phase2_epochs;
        config.schedule.phase3_epochs = split.phase3_epochs;
    }
    config.validate();
    return config;
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
    // Training allocates and frees large Eigen temporaries every step; keep
    // them on the heap instead of round-tripping through mmap.
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
    CLI::App app{"Hierarchical RIC power allocation experiments"};
    app.require_subcommand(1);

    CommonOptions train_opts, sweep_opts, eval_opts, bench_opts, dry_opts, show_opts;

    auto* train = app.add_subcommand("train", "Train each (method, seed) and write curves and a summary");
    add_common(*train, train_opts);

    auto* sweep = app.add_subcommand("sweep-alpha", "Evaluate methods over a backhaul fraction grid");
    add_common(*sweep, sweep_opts);
    std::vector<double> alphas;
    std::optional<std::size_t> drops;
    sweep->add_option("--alphas", alphas, "Comma-separated alpha grid")->delimiter(',');
    sweep->add_option("--drops", drops, "Test episodes per alpha");

    auto* eval = app.add_subcommand("evaluate", "Evaluate a checkpoint (or epa) without exploration");
    add_common(*eval, eval_opts);
    std::string eval_checkpoint;
    std::string eval_method = "epa";
    std::optional<std::size_t> episodes;
    eval->add_option("--checkpoint", eval_checkpoint, "Checkpoint written by train");
    eval->add_option("--method", eval_method, "Method the checkpoint was trained with");
    eval->add_option("--episodes", episodes, "Test episodes");

    auto* bench = app.add_subcommand("bench", "Time actor forwards and optionally guidance cycles");
    add_common(*bench, bench_opts);
    std::string bench_checkpoint;
    std::optional<std::size_t> samples;
    bool bench_guidance = false;
    bench->add_option("--checkpoint", bench_checkpoint, "Checkpoint to time instead of a fresh agent");
    bench->add_option("--samples", samples, "Samples per measurement");
    bench->add_flag("--guidance", bench_guidance, "Also time the guidance pipeline");

    auto* dry = app.add_subcommand("guidance-dry-run", "Print the guidance prompt for a fresh deployment");
    add_common(*dry, dry_opts);

    auto* show = app.add_subcommand("show-config", "Print the resolved configuration");
    add_common(*show, show_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and --version land here too and must still exit 0.
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (train->parsed()) {
            const auto config = resolve(train_opts);
            auto provider = hric::make_provider(config);
            const auto report = hric::run_train_experiment(config, *provider, config.output_dir, &std::cerr);
            for (const auto& s : report.summaries) {
                std::printf("%-18s median final-10 throughput %.2f Mb/s over %zu seeds\n", s.method.c_str(),
                            s.median_final_throughput / 1e6, s.per_seed.size());
            }
        } else if (sweep->parsed()) {
            auto config = resolve(sweep_opts);
            if (sweep->count("--alphas") > 0) config.alpha_grid = alphas;
            if (drops) config.test_drops = *drops;
            config.validate();
            auto provider = hric::make_provider(config);
            const auto rows = hric::run_alpha_sweep(config, *provider, config.output_dir, &std::cerr);
            hric::write_sweep_csv(std::cout, rows);
        } else if (eval->parsed()) {
            auto config = resolve(eval_opts);
            if (episodes) config.test_drops = *episodes;
            config.validate();
            const auto method = hric::Method::parse(eval_method);
            std::vector<hric::DdpgAgent> agents;
            if (method.learns()) {
                if (eval_checkpoint.empty()) {
                    throw std::invalid_argument("evaluate: --checkpoint is required for " + method.name());
                }
                agents = hric::load_checkpoint(eval_checkpoint).agents;
            }
            auto provider = hric::make_provider(config);
            const auto result = hric::run_evaluation(config, method, agents, config.seeds.front(), *provider,
                                                     config.output_dir);
            std::printf("%s: mean total throughput %.2f Mb/s over %zu episodes\n", method.name().c_str(),
                        result.mean_total_throughput / 1e6, result.episodes.size());
        } else if (bench->parsed()) {
            auto config = resolve(bench_opts);
            if (samples) config.bench_samples = *samples;
            config.validate();
            std::optional<std::vector<hric::DdpgAgent>> agents;
            if (!bench_checkpoint.empty()) {
                agents = hric::load_checkpoint(bench_checkpoint).agents;
            }
            auto provider = hric::make_provider(config);
            const auto report = hric::run_bench(config, agents ? &*agents : nullptr, bench_guidance, *provider,
                                                config.output_dir);
            hric::print_bench_report(std::cout, report);
        } else if (dry->parsed()) {
            const auto config = resolve(dry_opts);
            std::cout << hric::guidance_dry_run(config, config.seeds.front()).text() << '\n';
        } else if (show->parsed()) {
            std::cout << hric::dump_config(resolve(show_opts));
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "hric: configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "hric: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
