#include "hric/policy.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace hric {

bool on_simplex(std::span<const double> weights, double tolerance) noexcept {
    if (weights.empty()) {
        return false;
    }
    double sum = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0 || w > 1.0) {
            return false;
        }
        sum += w;
    }
    return std::abs(sum - 1.0) <= tolerance;
}

std::vector<double> uniform_simplex(std::size_t size) {
    if (size == 0) {
        throw ContractError("uniform_simplex: size must be positive");
    }
    return std::vector<double>(size, 1.0 / static_cast<double>(size));
}

std::vector<double> project_to_simplex(std::span<const double> weights) {
    std::vector<double> out(weights.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double w = weights[i];
        out[i] = (std::isfinite(w) && w > 0.0) ? w : 0.0;
        sum += out[i];
    }
    if (!(sum >= 1e-9) || !std::isfinite(sum)) {
        return uniform_simplex(weights.size());
    }
    for (double& w : out) {
        w /= sum;
    }
    return out;
}

GuidancePolicy::GuidancePolicy(std::size_t num_mbs, std::size_t num_sbs, std::vector<double> row_major)
    : num_mbs_(num_mbs), num_sbs_(num_sbs), values_(std::move(row_major)) {
    if (num_mbs_ == 0 || num_sbs_ == 0 || values_.size() != num_mbs_ * num_sbs_) {
        throw ContractError("GuidancePolicy: shape mismatch");
    }
    for (std::size_t m = 0; m < num_mbs_; ++m) {
        if (!on_simplex(row(m))) {
            throw ContractError("GuidancePolicy: row " + std::to_string(m) + " is not on the simplex");
        }
    }
}

GuidancePolicy::GuidancePolicy(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows.front().empty()) {
        throw ContractError("GuidancePolicy: empty matrix");
    }
    std::vector<double> flat;
    for (const auto& r : rows) {
        if (r.size() != rows.front().size()) {
            throw ContractError("GuidancePolicy: ragged rows");
        }
        flat.insert(flat.end(), r.begin(), r.end());
    }
    *this = GuidancePolicy(rows.size(), rows.front().size(), std::move(flat));
}

GuidancePolicy GuidancePolicy::uniform(std::size_t num_mbs, std::size_t num_sbs) {
    std::vector<double> flat;
    for (std::size_t m = 0; m < num_mbs; ++m) {
        const auto row = uniform_simplex(num_sbs);
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return GuidancePolicy(num_mbs, num_sbs, std::move(flat));
}

std::span<const double> GuidancePolicy::row(std::size_t m) const {
    if (m >= num_mbs_) {
        throw std::out_of_range("GuidancePolicy::row: index out of range");
    }
    return std::span<const double>(values_).subspan(m * num_sbs_, num_sbs_);
}

GuidanceInput average_inputs(std::span<const GuidanceInput> samples) {
    if (samples.empty()) {
        throw ContractError("average_inputs: no samples");
    }
    GuidanceInput avg = samples.front();
    const double count = static_cast<double>(samples.size());
    for (std::size_t i = 0; i < avg.sbs.size(); ++i) {
        double gain = 0.0;
        double users = 0.0;
        double rate = 0.0;
        std::vector<double> interference(avg.sbs[i].interference.size(), 0.0);
        for (const auto& sample : samples) {
            if (sample.sbs.size() != avg.sbs.size() ||
                sample.sbs[i].interference.size() != interference.size()) {
                throw ContractError("average_inputs: samples differ in shape");
            }
            gain += sample.sbs[i].avg_channel_gain;
            users += static_cast<double>(sample.sbs[i].connected_users);
            rate += sample.sbs[i].avg_expected_rate_mbps;
            for (std::size_t j = 0; j < interference.size(); ++j) {
                interference[j] += sample.sbs[i].interference[j].avg_gain;
            }
        }
        avg.sbs[i].avg_channel_gain = gain / count;
        avg.sbs[i].connected_users = std::llround(users / count);
        avg.sbs[i].avg_expected_rate_mbps = rate / count;
        for (std::size_t j = 0; j < interference.size(); ++j) {
            avg.sbs[i].interference[j].avg_gain = interference[j] / count;
        }
    }
    return avg;
}

}  // namespace hric
