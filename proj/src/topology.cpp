#include "hric/topology.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>

namespace hric {

namespace {

void require(bool ok, const char* what) {
    if (!ok) {
        throw std::invalid_argument(what);
    }
}

// Folds a coordinate back into [0, side], flipping the velocity component
// each time it crosses a wall.
void reflect(double& coord, double& velocity, double& direction_component, double side) {
    for (int guard = 0; guard < 8 && (coord < 0.0 || coord > side); ++guard) {
        if (coord < 0.0) {
            coord = -coord;
        } else {
            coord = 2.0 * side - coord;
        }
        velocity = -velocity;
        direction_component = -direction_component;
    }
    coord = std::clamp(coord, 0.0, side);
}

Point sample_in_annulus(const Point& center, double r_min, double r_max, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double r = std::sqrt(r_min * r_min + unit(rng) * (r_max * r_max - r_min * r_min));
    const double theta = 2.0 * std::numbers::pi * unit(rng);
    return {center.x + r * std::cos(theta), center.y + r * std::sin(theta)};
}

Point reflect_into_area(Point p, double side) {
    double vx = 0.0, vy = 0.0, dx = 0.0, dy = 0.0;
    reflect(p.x, vx, dx, side);
    reflect(p.y, vy, dy, side);
    return p;
}

}  // namespace

double distance(const Point& a, const Point& b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

void MobilityParams::validate() const {
    require(memory_alpha_gm >= 0.0 && memory_alpha_gm <= 1.0, "mobility.memory_alpha_gm must lie in [0, 1]");
    require(speed_stddev >= 0.0, "mobility.speed_stddev must be >= 0");
    require(mean_speed >= 0.0, "mobility.mean_speed must be >= 0");
}

void NetworkConfig::validate() const {
    require(num_mbs >= 1, "scenario.num_mbs must be >= 1");
    require(num_sbs_per_mbs >= 1, "scenario.num_sbs_per_mbs must be >= 1");
    require(users_per_sbs >= 1, "scenario.users_per_sbs must be >= 1");
    require(total_bandwidth_hz > 0.0, "scenario.total_bandwidth_hz must be > 0");
    require(backhaul_fraction_alpha >= 0.0 && backhaul_fraction_alpha <= 1.0,
            "scenario.backhaul_fraction_alpha must lie in [0, 1]");
    require(area_side > 0.0, "scenario.area_side must be > 0");
    require(sbs_ring_min >= 0.0 && sbs_ring_max >= sbs_ring_min, "scenario.sbs_ring_max must be >= scenario.sbs_ring_min >= 0");
    require(user_disc_radius >= 0.0, "scenario.user_disc_radius must be >= 0");
    require(slot_duration > 0.0, "scenario.slot_duration must be > 0");
    require(guidance_period_slots >= 1, "scenario.guidance_period_slots must be >= 1");
    require(episode_slots >= 1, "scenario.episode_slots must be >= 1");
    channel.validate();
    mobility.validate();
}

double NetworkConfig::backhaul_link_bandwidth() const noexcept {
    return total_bandwidth_hz * backhaul_fraction_alpha / static_cast<double>(num_sbs_per_mbs);
}

double NetworkConfig::access_user_bandwidth() const noexcept {
    return total_bandwidth_hz * (1.0 - backhaul_fraction_alpha) /
           static_cast<double>(num_sbs_per_mbs * users_per_sbs);
}

Topology build_topology(const NetworkConfig& config, std::uint64_t seed) {
    config.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);

    Topology topo;
    topo.num_mbs = config.num_mbs;
    topo.num_sbs_per_mbs = config.num_sbs_per_mbs;
    topo.users_per_sbs = config.users_per_sbs;

    const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(config.num_mbs))));
    const std::size_t rows = (config.num_mbs + cols - 1) / cols;
    const double cell_w = config.area_side / static_cast<double>(cols);
    const double cell_h = config.area_side / static_cast<double>(rows);
    for (std::size_t m = 0; m < config.num_mbs; ++m) {
        const std::size_t c = m % cols;
        const std::size_t r = m / cols;
        topo.mbs_positions.push_back({(static_cast<double>(c) + 0.5) * cell_w, (static_cast<double>(r) + 0.5) * cell_h});
    }

    for (std::size_t m = 0; m < config.num_mbs; ++m) {
        for (std::size_t n = 0; n < config.num_sbs_per_mbs; ++n) {
            const Point p = sample_in_annulus(topo.mbs_positions[m], config.sbs_ring_min, config.sbs_ring_max, rng);
            topo.sbs_positions.push_back(reflect_into_area(p, config.area_side));
            topo.subcarrier_index.push_back(n);
        }
    }

    for (std::size_t s = 0; s < topo.sbs_positions.size(); ++s) {
        for (std::size_t k = 0; k < config.users_per_sbs; ++k) {
            const Point p = sample_in_annulus(topo.sbs_positions[s], 0.0, config.user_disc_radius, rng);
            topo.user_positions.push_back(reflect_into_area(p, config.area_side));
            const double dir = angle(rng);
            topo.user_mean_directions.push_back(dir);
            topo.user_velocities.push_back({config.mobility.mean_speed * std::cos(dir),
                                            config.mobility.mean_speed * std::sin(dir)});
        }
    }
    return topo;
}

Point gauss_markov_step(const Point& velocity, const MobilityParams& params, std::mt19937_64& rng) {
    const double a = params.memory_alpha_gm;
    const double mu_x = params.mean_speed * std::cos(params.mean_direction);
    const double mu_y = params.mean_speed * std::sin(params.mean_direction);
    const double spread = std::sqrt(std::max(0.0, 1.0 - a * a));
    double wx = 0.0;
    double wy = 0.0;
    if (params.speed_stddev > 0.0) {
        std::normal_distribution<double> noise(0.0, params.speed_stddev);
        wx = noise(rng);
        wy = noise(rng);
    }
    return {a * velocity.x + (1.0 - a) * mu_x + spread * wx, a * velocity.y + (1.0 - a) * mu_y + spread * wy};
}

Topology advance_users(Topology topology, const NetworkConfig& config, std::mt19937_64& rng) {
    MobilityParams params = config.mobility;
    for (std::size_t u = 0; u < topology.user_positions.size(); ++u) {
        params.mean_direction = topology.user_mean_directions[u];
        Point v = gauss_markov_step(topology.user_velocities[u], params, rng);
        Point& p = topology.user_positions[u];
        p.x += v.x * config.slot_duration;
        p.y += v.y * config.slot_duration;

        // Mirror the drift direction together with the velocity so users do
        // not keep pushing into the wall they bounced off.
        double dir_x = std::cos(params.mean_direction);
        double dir_y = std::sin(params.mean_direction);
        reflect(p.x, v.x, dir_x, config.area_side);
        reflect(p.y, v.y, dir_y, config.area_side);
        topology.user_mean_directions[u] = std::atan2(dir_y, dir_x);
        topology.user_velocities[u] = v;
    }
    return topology;
}

std::vector<SbsId> interference_sources(std::size_t m, std::size_t n, const Topology& topology) {
    if (m >= topology.num_mbs || n >= topology.num_sbs_per_mbs) {
        throw std::out_of_range("interference_sources: SBS index out of range");
    }
    const std::size_t carrier = topology.subcarrier_index[topology.sbs_index(m, n)];
    std::vector<SbsId> sources;
    for (std::size_t other = 0; other < topology.num_mbs; ++other) {
        if (other == m) {
            continue;
        }
        for (std::size_t j = 0; j < topology.num_sbs_per_mbs; ++j) {
            if (topology.subcarrier_index[topology.sbs_index(other, j)] == carrier) {
                sources.push_back({other, j});
            }
        }
    }
    return sources;
}

void write_topology(std::ostream& out, const Topology& topology) {
    out << "role m n k x y\n";
    char line[160];
    auto row = [&](const char* role, long m, long n, long k, const Point& p) {
        std::snprintf(line, sizeof(line), "%s %ld %ld %ld %.17g %.17g\n", role, m, n, k, p.x, p.y);
        out << line;
    };
    for (std::size_t m = 0; m < topology.num_mbs; ++m) {
        row("mbs", static_cast<long>(m), -1, -1, topology.mbs_positions[m]);
    }
    for (std::size_t m = 0; m < topology.num_mbs; ++m) {
        for (std::size_t n = 0; n < topology.num_sbs_per_mbs; ++n) {
            row("sbs", static_cast<long>(m), static_cast<long>(n), -1, topology.sbs(m, n));
        }
    }
    for (std::size_t m = 0; m < topology.num_mbs; ++m) {
        for (std::size_t n = 0; n < topology.num_sbs_per_mbs; ++n) {
            for (std::size_t k = 0; k < topology.users_per_sbs; ++k) {
                row("user", static_cast<long>(m), static_cast<long>(n), static_cast<long>(k), topology.user(m, n, k));
            }
        }
    }
}

Topology read_topology(std::istream& in) {
    std::map<long, Point> mbs;
    std::map<std::pair<long, long>, Point> sbs;
    std::map<std::tuple<long, long, long>, Point> users;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.rfind("role", 0) == 0) {
            continue;
        }
        std::istringstream row(line);
        std::string role;
        long m = 0, n = 0, k = 0;
        Point p;
        if (!(row >> role >> m >> n >> k >> p.x >> p.y)) {
            throw std::runtime_error("read_topology: malformed row " + std::to_string(line_no));
        }
        if (role == "mbs") {
            mbs[m] = p;
        } else if (role == "sbs") {
            sbs[{m, n}] = p;
        } else if (role == "user") {
            users[{m, n, k}] = p;
        } else {
            throw std::runtime_error("read_topology: unknown role '" + role + "' on row " + std::to_string(line_no));
        }
    }
    if (mbs.empty() || sbs.empty() || users.empty()) {
        throw std::runtime_error("read_topology: missing node rows");
    }

    Topology topo;
    topo.num_mbs = mbs.size();
    topo.num_sbs_per_mbs = sbs.size() / mbs.size();
    topo.users_per_sbs = users.size() / sbs.size();
    if (topo.num_mbs * topo.num_sbs_per_mbs != sbs.size() ||
        topo.num_mbs * topo.num_sbs_per_mbs * topo.users_per_sbs != users.size()) {
        throw std::runtime_error("read_topology: node counts are not rectangular");
    }
    for (std::size_t m = 0; m < topo.num_mbs; ++m) {
        topo.mbs_positions.push_back(mbs.at(static_cast<long>(m)));
        for (std::size_t n = 0; n < topo.num_sbs_per_mbs; ++n) {
            topo.sbs_positions.push_back(sbs.at({static_cast<long>(m), static_cast<long>(n)}));
            topo.subcarrier_index.push_back(n);
        }
    }
    for (std::size_t m = 0; m < topo.num_mbs; ++m) {
        for (std::size_t n = 0; n < topo.num_sbs_per_mbs; ++n) {
            for (std::size_t k = 0; k < topo.users_per_sbs; ++k) {
                topo.user_positions.push_back(
                    users.at({static_cast<long>(m), static_cast<long>(n), static_cast<long>(k)}));
                topo.user_velocities.push_back({0.0, 0.0});
                topo.user_mean_directions.push_back(0.0);
            }
        }
    }
    return topo;
}

}  // namespace hric
