#include "hric/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hric {

void ChannelParams::validate() const {
    if (!(los_range_constant_rho > 0.0)) {
        throw std::invalid_argument("channel.los_range_constant_rho must be > 0");
    }
    if (!(nakagami_shape_los >= 0.5) || !(nakagami_shape_nlos >= 0.5)) {
        throw std::invalid_argument("channel.nakagami_shape must be >= 0.5");
    }
    if (!(pathloss_exponent_nlos >= pathloss_exponent_los)) {
        throw std::invalid_argument("channel.pathloss_exponent_nlos must be >= pathloss_exponent_los");
    }
    if (!(min_distance > 0.0)) {
        throw std::invalid_argument("channel.min_distance must be > 0");
    }
}

double los_probability(double distance, double rho) {
    if (!(distance >= 0.0)) {
        throw std::domain_error("los_probability: distance must be >= 0");
    }
    if (!(rho > 0.0)) {
        throw std::domain_error("los_probability: rho must be > 0");
    }
    return std::exp(-distance / rho);
}

double path_loss_gain(double distance, bool is_los, const ChannelParams& params) {
    const double d = std::max(distance, params.min_distance);
    const double exponent = is_los ? params.pathloss_exponent_los : params.pathloss_exponent_nlos;
    const double gain_db = -(params.reference_loss_db + 10.0 * exponent * std::log10(d));
    return std::pow(10.0, gain_db / 10.0);
}

double sample_nakagami_power(double shape_m, double mean_omega, std::mt19937_64& rng) {
    if (!(shape_m >= 0.5) || !(mean_omega > 0.0)) {
        throw std::domain_error("sample_nakagami_power: requires shape_m >= 0.5 and mean_omega > 0");
    }
    std::gamma_distribution<double> gamma(shape_m, mean_omega / shape_m);
    return gamma(rng);
}

double shannon_rate(double bandwidth_hz, double signal_w, double interference_w, double noise_w) {
    if (bandwidth_hz < 0.0 || signal_w < 0.0 || interference_w < 0.0 || !(noise_w > 0.0)) {
        throw std::domain_error("shannon_rate: inputs must be non-negative and noise positive");
    }
    return bandwidth_hz * std::log2(1.0 + signal_w / (interference_w + noise_w));
}

double dbm_to_watts(double p_dbm) noexcept { return std::pow(10.0, (p_dbm - 30.0) / 10.0); }

double watts_to_dbm(double p_w) noexcept { return 10.0 * std::log10(p_w) + 30.0; }

double linear_to_db(double ratio) noexcept { return 10.0 * std::log10(ratio); }

double noise_power_watts(double bandwidth_hz, const ChannelParams& params) {
    if (!(bandwidth_hz > 0.0)) {
        throw std::domain_error("noise_power_watts: bandwidth must be > 0");
    }
    const double dbm = params.noise_density_dbm_per_hz + params.noise_figure_db + 10.0 * std::log10(bandwidth_hz);
    return dbm_to_watts(dbm);
}

}  // namespace hric
