#include "hric/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "hric/random.hpp"

namespace hric {

namespace {

void require_simplex(std::span<const double> p, const char* what) {
    if (!on_simplex(p)) {
        throw ContractError(std::string("select_action: ") + what + " is not on the simplex");
    }
}

std::vector<double> noisy(std::span<const double> p, double sigma, std::mt19937_64& rng) {
    std::vector<double> out(p.begin(), p.end());
    if (sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, sigma);
        for (double& v : out) {
            v += noise(rng);
        }
    }
    return project_to_simplex(out);
}

}  // namespace

std::string_view to_string(Phase phase) noexcept {
    switch (phase) {
        case Phase::Guided: return "guided";
        case Phase::Blending: return "blending";
        case Phase::SelfDirected: return "self-directed";
    }
    return "unknown";
}

PhaseSchedule PhaseSchedule::proportional(std::size_t total_epochs) {
    PhaseSchedule s;
    s.phase1_epochs = total_epochs / 5;
    s.phase2_epochs = total_epochs / 2;
    s.phase3_epochs = total_epochs - s.phase1_epochs - s.phase2_epochs;
    return s;
}

Phase PhaseSchedule::phase_of(std::size_t epoch) const noexcept {
    if (epoch < phase1_epochs) {
        return Phase::Guided;
    }
    if (epoch < phase1_epochs + phase2_epochs) {
        return Phase::Blending;
    }
    return Phase::SelfDirected;
}

double PhaseSchedule::guided_sigma(std::size_t epoch) const noexcept {
    if (phase1_epochs <= 1) {
        return noise_sigma_start;
    }
    const double t = std::min(1.0, static_cast<double>(epoch) / static_cast<double>(phase1_epochs - 1));
    return noise_sigma_start + t * (noise_sigma_end - noise_sigma_start);
}

void PhaseSchedule::validate() const {
    if (!(w_start >= 0.0 && w_start <= 1.0 && w_end >= 0.0 && w_end <= 1.0 && w_end <= w_start)) {
        throw std::invalid_argument("schedule.w must decay within [0, 1]");
    }
    if (!(noise_sigma_start >= 0.0 && noise_sigma_end >= 0.0)) {
        throw std::invalid_argument("schedule.noise_sigma must be >= 0");
    }
}

Method Method::parse(std::string_view name) {
    if (name == "hric") return {MethodKind::Hric, std::nullopt};
    if (name == "dln") return {MethodKind::Dln, std::nullopt};
    if (name == "dcn") return {MethodKind::Dcn, std::nullopt};
    if (name == "epa") return {MethodKind::Epa, std::nullopt};
    constexpr std::string_view prefix = "hric-fixed-w";
    if (name.substr(0, prefix.size()) == prefix) {
        const std::string_view number = name.substr(prefix.size());
        double w = -1.0;
        const auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), w);
        if (ec == std::errc() && ptr == number.data() + number.size() && w >= 0.0 && w <= 1.0) {
            return {MethodKind::Hric, w};
        }
    }
    throw std::invalid_argument("unknown method '" + std::string(name) +
                                "' (expected hric, dln, dcn, epa or hric-fixed-w<0..1>)");
}

std::string Method::name() const {
    switch (kind) {
        case MethodKind::Hric: {
            if (!fixed_w) {
                return "hric";
            }
            char buf[32];
            std::snprintf(buf, sizeof(buf), "hric-fixed-w%g", *fixed_w);
            return buf;
        }
        case MethodKind::Dln: return "dln";
        case MethodKind::Dcn: return "dcn";
        case MethodKind::Epa: return "epa";
    }
    return "unknown";
}

std::vector<double> select_action(Phase phase, std::span<const double> guidance, std::span<const double> learned,
                                  double sigma, double w, std::mt19937_64& rng) {
    require_simplex(guidance, "guidance policy");
    require_simplex(learned, "learned policy");
    if (guidance.size() != learned.size()) {
        throw ContractError("select_action: policies differ in length");
    }
    if (!(sigma >= 0.0) || !(w >= 0.0 && w <= 1.0)) {
        throw ContractError("select_action: sigma must be >= 0 and w within [0, 1]");
    }
    switch (phase) {
        case Phase::Guided:
            return noisy(guidance, sigma, rng);
        case Phase::Blending: {
            std::vector<double> out(guidance.size());
            for (std::size_t i = 0; i < out.size(); ++i) {
                out[i] = w * guidance[i] + (1.0 - w) * learned[i];
            }
            return out;
        }
        case Phase::SelfDirected:
            return {learned.begin(), learned.end()};
    }
    return {learned.begin(), learned.end()};
}

std::vector<double> perturb_on_simplex(std::span<const double> policy, double sigma, std::mt19937_64& rng) {
    return noisy(policy, sigma, rng);
}

double blending_weight(std::size_t epoch, const PhaseSchedule& schedule) noexcept {
    if (schedule.phase2_epochs == 0) {
        return schedule.w_end;
    }
    const double progress = (static_cast<double>(epoch) - static_cast<double>(schedule.phase1_epochs)) /
                            static_cast<double>(schedule.phase2_epochs);
    const double w = schedule.w_start - progress * (schedule.w_start - schedule.w_end);
    return std::clamp(w, 0.0, 1.0);
}

double noise_sigma_linear(std::size_t epoch, std::size_t total_epochs, double sigma0) noexcept {
    if (total_epochs == 0) {
        return 0.0;
    }
    const double t = std::min(1.0, static_cast<double>(epoch) / static_cast<double>(total_epochs));
    return sigma0 * (1.0 - t);
}

double noise_sigma_cosine(std::size_t epoch, std::size_t total_epochs, double sigma0) noexcept {
    if (total_epochs == 0) {
        return 0.0;
    }
    const double t = std::min(1.0, static_cast<double>(epoch) / static_cast<double>(total_epochs));
    return sigma0 * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

void TrainingSetup::validate() const {
    scenario.validate();
    agent.validate();
    schedule.validate();
    if (epochs == 0) {
        throw std::invalid_argument("epochs must be >= 1");
    }
    if (!(exploration_sigma0 >= 0.0)) {
        throw std::invalid_argument("exploration_sigma0 must be >= 0");
    }
}

namespace {

struct GuidanceRefresh {
    bool fallback = false;
};

GuidanceRefresh refresh_guidance(Environment& env, GuidanceProvider& provider, GuidanceAuditLog* audit) {
    const GuidanceInput stats = env.observation_statistics(env.config().guidance_period_slots);
    const GuidanceOutcome outcome = guidance_with_fallback(stats, env.config(), provider);
    if (audit != nullptr) {
        audit->record(outcome);
    }
    env.install_guidance(outcome.policy);
    return {outcome.fallback_used};
}

}  // namespace

TrainingResult run_training(const TrainingSetup& setup, const Method& method, std::uint64_t seed,
                            GuidanceProvider& provider, const TrainingSinks& sinks) {
    setup.validate();
    const std::size_t M = setup.scenario.num_mbs;
    const std::size_t N = setup.scenario.num_sbs_per_mbs;
    const std::size_t slots = setup.scenario.episode_slots;
    const std::size_t period = setup.scenario.guidance_period_slots;

    TrainingResult result;
    if (method.learns()) {
        for (std::size_t m = 0; m < M; ++m) {
            result.agents.emplace_back(N, setup.agent, mix_seed(seed, 0x100 + m));
        }
    }
    std::mt19937_64 explore(mix_seed(seed, 0xE7));
    const std::vector<double> uniform = uniform_simplex(N);

    for (std::size_t epoch = 0; epoch < setup.epochs; ++epoch) {
        Environment env(setup.scenario, seed, epoch);
        EpochRecord record;
        record.epoch = epoch;
        record.per_mbs_reward.assign(M, 0.0);

        const Phase phase = method.uses_guidance() ? setup.schedule.phase_of(epoch) : Phase::SelfDirected;
        double w = 0.0;
        double sigma = 0.0;
        switch (method.kind) {
            case MethodKind::Hric:
                record.phase = phase;
                if (phase == Phase::Guided) {
                    sigma = setup.schedule.guided_sigma(epoch);
                    w = 1.0;
                } else if (phase == Phase::Blending) {
                    w = method.fixed_w ? *method.fixed_w : blending_weight(epoch, setup.schedule);
                }
                break;
            case MethodKind::Dln:
                record.phase = Phase::SelfDirected;
                sigma = noise_sigma_linear(epoch, setup.epochs, setup.exploration_sigma0);
                break;
            case MethodKind::Dcn:
                record.phase = Phase::SelfDirected;
                sigma = noise_sigma_cosine(epoch, setup.epochs, setup.exploration_sigma0);
                break;
            case MethodKind::Epa:
                record.phase = Phase::SelfDirected;
                break;
        }
        record.w = w;
        record.sigma = sigma;

        std::vector<std::vector<double>> features(M);
        for (std::size_t slot = 0; slot < slots; ++slot) {
            if (method.uses_guidance() && slot % period == 0) {
                if (refresh_guidance(env, provider, sinks.audit).fallback) {
                    record.fallback_used = true;
                    ++record.fallback_count;
                }
            }
            const auto& observations = env.observations();
            std::vector<Action> actions(M);
            for (std::size_t m = 0; m < M; ++m) {
                features[m] = observation_features(observations[m]);
                switch (method.kind) {
                    case MethodKind::Epa:
                        actions[m].power_ratios = uniform;
                        break;
                    case MethodKind::Dln:
                    case MethodKind::Dcn:
                        actions[m].power_ratios = perturb_on_simplex(result.agents[m].act(features[m]), sigma, explore);
                        break;
                    case MethodKind::Hric: {
                        const auto learned = result.agents[m].act(features[m]);
                        actions[m].power_ratios =
                            select_action(phase, observations[m].guidance, learned, sigma, w, explore);
                        break;
                    }
                }
                if (sinks.emitted_actions != nullptr) {
                    sinks.emitted_actions->push_back(actions[m].power_ratios);
                }
            }

            const StepOutcome outcome = env.step(actions);
            if (sinks.step_metrics != nullptr) {
                sinks.step_metrics->write(epoch, slot, outcome, setup.scenario.backhaul_fraction_alpha, seed);
            }
            record.total_throughput += outcome.total_throughput;
            for (std::size_t m = 0; m < M; ++m) {
                record.per_mbs_reward[m] += outcome.rewards[m];
            }

            if (method.learns()) {
                for (std::size_t m = 0; m < M; ++m) {
                    result.agents[m].remember({features[m], actions[m].power_ratios, outcome.rewards[m],
                                               observation_features(outcome.next_observations[m])});
                    (void)result.agents[m].train();
                }
            }
        }
        record.total_throughput /= static_cast<double>(slots);
        for (double& r : record.per_mbs_reward) {
            r /= static_cast<double>(slots);
        }
        result.records.push_back(std::move(record));
    }
    return result;
}

EvaluationResult evaluate(std::span<const DdpgAgent> agents, const Method& method, const NetworkConfig& config,
                          std::size_t episodes, std::uint64_t seed, GuidanceProvider& provider) {
    config.validate();
    const std::size_t M = config.num_mbs;
    const std::size_t N = config.num_sbs_per_mbs;
    if (method.learns() && agents.size() != M) {
        throw ContractError("evaluate: a learned method needs one agent per MBS");
    }
    const std::vector<double> uniform = uniform_simplex(N);

    EvaluationResult result;
    double grand_total = 0.0;
    for (std::size_t e = 0; e < episodes; ++e) {
        Environment env(config, seed, kEvaluationEpisodeBase + e);
        EpisodeSummary summary;
        summary.episode = e;
        for (std::size_t slot = 0; slot < config.episode_slots; ++slot) {
            if (method.uses_guidance() && slot % config.guidance_period_slots == 0) {
                (void)refresh_guidance(env, provider, nullptr);
            }
            std::vector<Action> actions(M);
            for (std::size_t m = 0; m < M; ++m) {
                actions[m].power_ratios =
                    method.learns() ? agents[m].act(observation_features(env.observations()[m])) : uniform;
            }
            const StepOutcome outcome = env.step(actions);
            summary.slots.push_back({outcome.per_sbs_backhaul_rate, outcome.per_sbs_access_sum,
                                     outcome.per_mbs_throughput, outcome.total_throughput});
            summary.mean_total_throughput += outcome.total_throughput;
        }
        summary.mean_total_throughput /= static_cast<double>(config.episode_slots);
        grand_total += summary.mean_total_throughput;
        result.episodes.push_back(std::move(summary));
    }
    result.mean_total_throughput = episodes == 0 ? 0.0 : grand_total / static_cast<double>(episodes);
    return result;
}

double final_throughput(std::span<const EpochRecord> records, std::size_t window) {
    if (records.empty()) {
        return 0.0;
    }
    const std::size_t take = std::min(window, records.size());
    double sum = 0.0;
    for (std::size_t i = records.size() - take; i < records.size(); ++i) {
        sum += records[i].total_throughput;
    }
    return sum / static_cast<double>(take);
}

}  // namespace hric
