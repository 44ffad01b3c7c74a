#pragma once

// Value types shared by the environment, the guidance pipeline and the
// trainer: simplex helpers, the per-MBS guidance matrix and the averaged
// statistics the non-RT controller reasons about.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "hric/topology.hpp"

namespace hric {

inline constexpr double kSimplexTolerance = 1e-6;

/// Raised when a caller hands over an argument that breaks a documented
/// precondition (off-simplex action, wrong shape).
class ContractError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

[[nodiscard]] bool on_simplex(std::span<const double> weights, double tolerance = kSimplexTolerance) noexcept;
[[nodiscard]] std::vector<double> uniform_simplex(std::size_t size);

/// Clamps to [0, inf) (NaN counts as 0), renormalizes, and returns the
/// uniform vector when the clamped mass is below 1e-9.
[[nodiscard]] std::vector<double> project_to_simplex(std::span<const double> weights);

/// M x N matrix whose rows are power-ratio vectors on the simplex.
class GuidancePolicy {
  public:
    GuidancePolicy() = default;

    /// Throws ContractError if shapes disagree or a row is off the simplex.
    GuidancePolicy(std::size_t num_mbs, std::size_t num_sbs, std::vector<double> row_major);
    explicit GuidancePolicy(const std::vector<std::vector<double>>& rows);

    [[nodiscard]] static GuidancePolicy uniform(std::size_t num_mbs, std::size_t num_sbs);

    [[nodiscard]] std::size_t num_mbs() const noexcept { return num_mbs_; }
    [[nodiscard]] std::size_t num_sbs() const noexcept { return num_sbs_; }
    [[nodiscard]] std::span<const double> row(std::size_t m) const;
    [[nodiscard]] double at(std::size_t m, std::size_t n) const { return row(m)[n]; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

    friend bool operator==(const GuidancePolicy&, const GuidancePolicy&) = default;

  private:
    std::size_t num_mbs_ = 0;
    std::size_t num_sbs_ = 0;
    std::vector<double> values_;
};

struct InterferenceTerm {
    SbsId source;
    double avg_gain = 0.0;

    friend bool operator==(const InterferenceTerm&, const InterferenceTerm&) = default;
};

struct SbsGuidanceInput {
    double avg_channel_gain = 0.0;
    std::int64_t connected_users = 0;
    double avg_expected_rate_mbps = 0.0;
    std::vector<InterferenceTerm> interference;

    friend bool operator==(const SbsGuidanceInput&, const SbsGuidanceInput&) = default;
};

/// Per-SBS averages over a window of slots, flat in (m, n).
struct GuidanceInput {
    std::size_t num_mbs = 0;
    std::size_t num_sbs = 0;
    std::vector<SbsGuidanceInput> sbs;

    [[nodiscard]] const SbsGuidanceInput& at(std::size_t m, std::size_t n) const { return sbs.at(m * num_sbs + n); }
    [[nodiscard]] SbsGuidanceInput& at(std::size_t m, std::size_t n) { return sbs.at(m * num_sbs + n); }

    friend bool operator==(const GuidanceInput&, const GuidanceInput&) = default;
};

/// Arithmetic mean of per-slot inputs with identical shape. User counts are
/// rounded to the nearest integer.
[[nodiscard]] GuidanceInput average_inputs(std::span<const GuidanceInput> samples);

}  // namespace hric
