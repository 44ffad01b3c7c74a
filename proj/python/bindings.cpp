// Python bindings for the core operations. Configuration crosses the
// boundary as JSON text in the same format as the CLI config file.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>
#include <stdexcept>

#include "hric/channel.hpp"
#include "hric/config.hpp"
#include "hric/environment.hpp"
#include "hric/guidance.hpp"
#include "hric/policy.hpp"
#include "hric/trainer.hpp"

namespace py = pybind11;

namespace {

using Rows = std::vector<std::vector<double>>;

Rows to_rows(const hric::GuidancePolicy& policy) {
    Rows rows;
    for (std::size_t m = 0; m < policy.num_mbs(); ++m) {
        const auto r = policy.row(m);
        rows.emplace_back(r.begin(), r.end());
    }
    return rows;
}

hric::Phase parse_phase(const std::string& name) {
    if (name == "guided") return hric::Phase::Guided;
    if (name == "blending") return hric::Phase::Blending;
    if (name == "self-directed") return hric::Phase::SelfDirected;
    throw std::invalid_argument("phase must be guided, blending or self-directed");
}

// Replies with fixed text; lets Python drive the fallback pipeline.
class ScriptedProvider final : public hric::GuidanceProvider {
  public:
    explicit ScriptedProvider(std::string reply) : reply_(std::move(reply)) {}
    hric::CompletionResult complete(const hric::GuidanceRequest&) override { return reply_; }
    std::string name() const override { return "scripted"; }

  private:
    std::string reply_;
};

py::dict outcome_dict(const hric::GuidanceOutcome& outcome) {
    py::dict d;
    d["policy"] = to_rows(outcome.policy);
    d["fallback_used"] = outcome.fallback_used;
    d["failed_stage"] = std::string(hric::to_string(outcome.failed_stage));
    d["detail"] = outcome.detail;
    return d;
}

class PyEnvironment {
  public:
    PyEnvironment(const std::string& config_json, std::uint64_t seed, std::uint64_t episode)
        : config_(hric::parse_config(config_json)), env_(config_.scenario, seed, episode) {}

    py::list observations() const {
        py::list out;
        for (const auto& o : env_.observations()) {
            py::dict d;
            d["backhaul_gains"] = o.backhaul_gains;
            d["user_counts"] = o.user_counts;
            d["avg_user_rate"] = o.avg_user_rate;
            d["guidance"] = o.guidance;
            out.append(d);
        }
        return out;
    }

    py::dict step(const Rows& ratios) {
        std::vector<hric::Action> actions;
        for (const auto& r : ratios) {
            actions.push_back({r});
        }
        const auto outcome = env_.step(actions);
        py::dict d;
        d["rewards"] = outcome.rewards;
        d["per_mbs_throughput"] = outcome.per_mbs_throughput;
        d["total_throughput"] = outcome.total_throughput;
        d["backhaul_rate"] = outcome.per_sbs_backhaul_rate;
        d["access_sum"] = outcome.per_sbs_access_sum;
        return d;
    }

    hric::GuidanceInput statistics() const {
        return env_.observation_statistics(config_.scenario.guidance_period_slots);
    }

    std::string prompt() const { return hric::build_prompt(statistics(), config_.scenario).text(); }

    Rows heuristic_policy() const { return to_rows(hric::heuristic_guidance(statistics())); }

    py::dict guidance_from_reply(const std::string& reply) {
        ScriptedProvider provider(reply);
        const auto outcome = hric::guidance_with_fallback(statistics(), config_.scenario, provider);
        env_.install_guidance(outcome.policy);
        return outcome_dict(outcome);
    }

    std::size_t num_mbs() const { return config_.scenario.num_mbs; }
    std::size_t num_sbs() const { return config_.scenario.num_sbs_per_mbs; }

  private:
    hric::ExperimentConfig config_;
    hric::Environment env_;
};

}  // namespace

PYBIND11_MODULE(_hric, m) {
    m.doc() = "IAB power allocation with guidance-assisted DDPG";

    py::register_exception<hric::ContractError>(m, "ContractError", PyExc_ValueError);

    m.def("los_probability", &hric::los_probability, py::arg("distance"), py::arg("rho"));
    m.def(
        "path_loss_gain",
        [](double distance, bool is_los) { return hric::path_loss_gain(distance, is_los, hric::ChannelParams{}); },
        py::arg("distance"), py::arg("is_los"));
    m.def("shannon_rate", &hric::shannon_rate, py::arg("bandwidth_hz"), py::arg("signal_w"),
          py::arg("interference_w"), py::arg("noise_w"));
    m.def(
        "project_to_simplex", [](const std::vector<double>& v) { return hric::project_to_simplex(v); },
        py::arg("weights"));
    m.def(
        "on_simplex", [](const std::vector<double>& v) { return hric::on_simplex(v); }, py::arg("weights"));
    m.def("noise_sigma_linear", &hric::noise_sigma_linear, py::arg("epoch"), py::arg("total_epochs"),
          py::arg("sigma0"));
    m.def("noise_sigma_cosine", &hric::noise_sigma_cosine, py::arg("epoch"), py::arg("total_epochs"),
          py::arg("sigma0"));
    m.def(
        "select_action",
        [](const std::string& phase, const std::vector<double>& guidance, const std::vector<double>& learned,
           double sigma, double w, std::uint64_t seed) {
            std::mt19937_64 rng(seed);
            return hric::select_action(parse_phase(phase), guidance, learned, sigma, w, rng);
        },
        py::arg("phase"), py::arg("guidance"), py::arg("learned"), py::arg("sigma"), py::arg("w"),
        py::arg("seed") = 0);

    m.def(
        "parse_guidance",
        [](const std::string& text, std::size_t num_mbs, std::size_t num_sbs) {
            auto result = hric::parse_guidance(text, num_mbs, num_sbs);
            if (const auto* err = std::get_if<hric::ParseError>(&result)) {
                throw py::value_error(std::string(hric::to_string(err->kind)) + ": " + err->detail);
            }
            return to_rows(std::get<hric::GuidancePolicy>(result));
        },
        py::arg("text"), py::arg("num_mbs"), py::arg("num_sbs"));
    m.def(
        "serialize_policy", [](const Rows& rows) { return hric::serialize_policy(hric::GuidancePolicy(rows)); },
        py::arg("rows"));

    m.def(
        "default_config", [] { return hric::dump_config(hric::parse_config("")); },
        "Full default configuration as JSON text");
    m.def(
        "normalize_config", [](const std::string& text) { return hric::dump_config(hric::parse_config(text)); },
        py::arg("config_json"), "Validates a config and returns it with every key present");

    py::class_<PyEnvironment>(m, "Environment")
        .def(py::init<const std::string&, std::uint64_t, std::uint64_t>(), py::arg("config_json") = "",
             py::arg("seed") = 1, py::arg("episode") = 0)
        .def_property_readonly("num_mbs", &PyEnvironment::num_mbs)
        .def_property_readonly("num_sbs", &PyEnvironment::num_sbs)
        .def("observations", &PyEnvironment::observations)
        .def("step", &PyEnvironment::step, py::arg("ratios"))
        .def("prompt", &PyEnvironment::prompt)
        .def("heuristic_policy", &PyEnvironment::heuristic_policy)
        .def("guidance_from_reply", &PyEnvironment::guidance_from_reply, py::arg("reply"));

    m.def(
        "train",
        [](const std::string& config_json, const std::string& method, std::uint64_t seed) {
            const auto config = hric::parse_config(config_json);
            hric::HeuristicProvider provider;
            hric::TrainingResult result;
            {
                py::gil_scoped_release release;
                result = hric::run_training(config.training_setup(), hric::Method::parse(method), seed, provider);
            }
            py::list records;
            for (const auto& r : result.records) {
                py::dict d;
                d["epoch"] = r.epoch;
                d["phase"] = std::string(hric::to_string(r.phase));
                d["w"] = r.w;
                d["sigma"] = r.sigma;
                d["total_throughput"] = r.total_throughput;
                d["fallback_count"] = r.fallback_count;
                records.append(d);
            }
            return records;
        },
        py::arg("config_json"), py::arg("method"), py::arg("seed"),
        "Runs training with the heuristic guidance provider; returns per-epoch records");

    m.def(
        "evaluate_epa",
        [](const std::string& config_json, std::size_t episodes, std::uint64_t seed) {
            const auto config = hric::parse_config(config_json);
            hric::HeuristicProvider provider;
            return hric::evaluate({}, hric::Method::parse("epa"), config.scenario, episodes, seed, provider)
                .mean_total_throughput;
        },
        py::arg("config_json"), py::arg("episodes"), py::arg("seed"));
}
