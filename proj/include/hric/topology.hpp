#pragma once

// Network geometry, Gauss-Markov user mobility, sub-carrier assignment and
// interference bookkeeping for the multi-cell IAB deployment.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <utility>
#include <vector>

#include "hric/channel.hpp"

namespace hric {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

[[nodiscard]] double distance(const Point& a, const Point& b) noexcept;

struct MobilityParams {
    double memory_alpha_gm = 0.9;
    double mean_speed = 1.5;      // m/s
    double speed_stddev = 0.3;    // m/s
    double mean_direction = 0.0;  // radians; per-user directions are drawn at build time

    void validate() const;

    friend bool operator==(const MobilityParams&, const MobilityParams&) = default;
};

struct NetworkConfig {
    std::size_t num_mbs = 3;                 // M
    std::size_t num_sbs_per_mbs = 6;         // N
    std::size_t users_per_sbs = 2;           // K
    double total_bandwidth_hz = 100e6;       // W
    double backhaul_fraction_alpha = 0.5;
    double mbs_max_power_dbm = 44.0;
    double sbs_access_power_dbm = 30.0;
    double area_side = 1000.0;               // meters
    double sbs_ring_min = 50.0;
    double sbs_ring_max = 150.0;
    double user_disc_radius = 40.0;
    double access_los_resample_distance = 10.0;
    ChannelParams channel;
    MobilityParams mobility;
    double slot_duration = 0.2;              // seconds
    std::size_t guidance_period_slots = 10;
    std::size_t episode_slots = 50;
    bool backhaul_interference = true;
    bool access_interference = true;
    bool fading_enabled = true;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;

    [[nodiscard]] std::size_t num_sbs_total() const noexcept { return num_mbs * num_sbs_per_mbs; }
    [[nodiscard]] std::size_t num_users_total() const noexcept { return num_sbs_total() * users_per_sbs; }
    [[nodiscard]] double backhaul_link_bandwidth() const noexcept;
    [[nodiscard]] double access_user_bandwidth() const noexcept;

    friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// Identifies SBS n of MBS m.
struct SbsId {
    std::size_t mbs = 0;
    std::size_t sbs = 0;

    friend bool operator==(const SbsId&, const SbsId&) = default;
};

/// Positions and velocities of every node. SBS and user arrays are flat,
/// indexed through sbs_index()/user_index().
struct Topology {
    std::size_t num_mbs = 0;
    std::size_t num_sbs_per_mbs = 0;
    std::size_t users_per_sbs = 0;
    std::vector<Point> mbs_positions;
    std::vector<Point> sbs_positions;
    std::vector<Point> user_positions;
    std::vector<Point> user_velocities;
    std::vector<double> user_mean_directions;
    std::vector<std::size_t> subcarrier_index;

    [[nodiscard]] std::size_t sbs_index(std::size_t m, std::size_t n) const noexcept { return m * num_sbs_per_mbs + n; }
    [[nodiscard]] std::size_t user_index(std::size_t m, std::size_t n, std::size_t k) const noexcept {
        return sbs_index(m, n) * users_per_sbs + k;
    }
    [[nodiscard]] const Point& sbs(std::size_t m, std::size_t n) const { return sbs_positions.at(sbs_index(m, n)); }
    [[nodiscard]] const Point& user(std::size_t m, std::size_t n, std::size_t k) const {
        return user_positions.at(user_index(m, n, k));
    }

    friend bool operator==(const Topology&, const Topology&) = default;
};

/// MBSs on a regular grid, SBSs uniform (by area) in a ring around their
/// MBS, users uniform in a disc around their SBS. Deterministic in `seed`.
[[nodiscard]] Topology build_topology(const NetworkConfig& config, std::uint64_t seed);

/// v' = a v + (1 - a) mu + sqrt(1 - a^2) w per component, w ~ N(0, stddev^2).
[[nodiscard]] Point gauss_markov_step(const Point& velocity, const MobilityParams& params, std::mt19937_64& rng);

/// Moves every user one slot; positions are reflected at the area border.
[[nodiscard]] Topology advance_users(Topology topology, const NetworkConfig& config, std::mt19937_64& rng);

/// All SBSs of other MBSs sharing the sub-carrier of SBS (m, n).
/// Throws std::out_of_range for bad indices.
[[nodiscard]] std::vector<SbsId> interference_sources(std::size_t m, std::size_t n, const Topology& topology);

/// Plain-text dump, one row per node: role m n k x y.
void write_topology(std::ostream& out, const Topology& topology);
[[nodiscard]] Topology read_topology(std::istream& in);

}  // namespace hric
