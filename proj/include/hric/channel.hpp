#pragma once

// Link-level radio math: LoS probability, log-distance path loss,
// Nakagami-m power fading, thermal noise and Shannon rate.

#include <random>

namespace hric {

struct ChannelParams {
    double los_range_constant_rho = 300.0;   // meters
    double pathloss_exponent_los = 2.0;
    double pathloss_exponent_nlos = 3.5;
    double reference_loss_db = 30.0;         // dB at 1 m
    double nakagami_shape_los = 3.0;
    double nakagami_shape_nlos = 1.0;
    double noise_density_dbm_per_hz = -174.0;
    double noise_figure_db = 7.0;
    double min_distance = 1.0;               // meters; distances are clamped here

    /// Throws std::invalid_argument naming the first violated constraint.
    void validate() const;

    friend bool operator==(const ChannelParams&, const ChannelParams&) = default;
};

/// Large-scale gain, current fading draw and LoS state of one link.
struct LinkGain {
    double large_scale_gain_linear = 0.0;
    double fading_gain_linear = 1.0;
    bool is_los = false;

    [[nodiscard]] double combined() const noexcept { return large_scale_gain_linear * fading_gain_linear; }
};

/// exp(-d / rho). Throws std::domain_error for d < 0 or rho <= 0.
[[nodiscard]] double los_probability(double distance, double rho);

/// Linear power gain of the log-distance model, exponent picked by `is_los`.
/// `distance` is clamped to params.min_distance first.
[[nodiscard]] double path_loss_gain(double distance, bool is_los, const ChannelParams& params);

/// One squared-envelope draw of Nakagami-m fading: Gamma(shape m, scale omega/m).
[[nodiscard]] double sample_nakagami_power(double shape_m, double mean_omega, std::mt19937_64& rng);

/// bandwidth * log2(1 + signal / (interference + noise)), in bits/s.
[[nodiscard]] double shannon_rate(double bandwidth_hz, double signal_w, double interference_w, double noise_w);

[[nodiscard]] double dbm_to_watts(double p_dbm) noexcept;
[[nodiscard]] double watts_to_dbm(double p_w) noexcept;
[[nodiscard]] double linear_to_db(double ratio) noexcept;

/// Thermal noise plus noise figure over `bandwidth_hz`, in watts.
[[nodiscard]] double noise_power_watts(double bandwidth_hz, const ChannelParams& params);

[[nodiscard]] inline double nakagami_shape_for(bool is_los, const ChannelParams& params) noexcept {
    return is_los ? params.nakagami_shape_los : params.nakagami_shape_nlos;
}

}  // namespace hric
