#include "hric/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace hric {

namespace {

constexpr std::array<char, 8> kMagic = {'H', 'R', 'I', 'C', 'C', 'K', 'P', 'T'};

template <typename T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
        throw std::runtime_error("checkpoint: truncated stream");
    }
    return value;
}

template <typename T>
void put_array(std::ostream& out, std::span<const T> values) {
    put<std::uint64_t>(out, values.size());
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
}

template <typename T>
void get_array_into(std::istream& in, std::span<T> dest) {
    const auto n = get<std::uint64_t>(in);
    if (n != dest.size()) {
        throw std::runtime_error("checkpoint: tensor size " + std::to_string(n) + " does not match expected " +
                                 std::to_string(dest.size()));
    }
    if (!in.read(reinterpret_cast<char*>(dest.data()), static_cast<std::streamsize>(dest.size_bytes()))) {
        throw std::runtime_error("checkpoint: truncated stream");
    }
}

void put_string(std::ostream& out, const std::string& s) {
    put<std::uint64_t>(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
    const auto n = get<std::uint64_t>(in);
    if (n > (1u << 20)) {
        throw std::runtime_error("checkpoint: implausible string length");
    }
    std::string s(n, '\0');
    if (!in.read(s.data(), static_cast<std::streamsize>(n))) {
        throw std::runtime_error("checkpoint: truncated stream");
    }
    return s;
}

void put_adam(std::ostream& out, const AdamState<float>& adam) {
    put<std::uint64_t>(out, adam.step);
    put<double>(out, adam.beta1);
    put<double>(out, adam.beta2);
    put<double>(out, adam.epsilon);
    put_array<float>(out, adam.first_moment);
    put_array<float>(out, adam.second_moment);
}

void get_adam(std::istream& in, AdamState<float>& adam) {
    adam.step = get<std::uint64_t>(in);
    adam.beta1 = get<double>(in);
    adam.beta2 = get<double>(in);
    adam.epsilon = get<double>(in);
    get_array_into<float>(in, adam.first_moment);
    get_array_into<float>(in, adam.second_moment);
}

}  // namespace

void write_checkpoint(std::ostream& out, std::span<const DdpgAgent> agents) {
    out.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint64_t>(out, agents.size());
    for (const DdpgAgent& agent : agents) {
        const AgentConfig& c = agent.config();
        put<std::uint64_t>(out, agent.num_sbs());
        put<double>(out, c.learning_rate);
        put<std::uint64_t>(out, c.batch_size);
        put<double>(out, c.discount_gamma);
        put<double>(out, c.soft_update_tau);
        put<std::uint64_t>(out, c.buffer_capacity);
        put<std::uint64_t>(out, c.hidden_width);
        put<double>(out, c.reward_scale);
        put<double>(out, c.action_floor);
        for (const auto* net : {&agent.actor(), &agent.critic(), &agent.target_actor(), &agent.target_critic()}) {
            put_array<float>(out, net->parameters());
        }
        put_adam(out, agent.actor_optimizer());
        put_adam(out, agent.critic_optimizer());
        const ReplayBuffer& buffer = agent.buffer();
        put<std::uint64_t>(out, buffer.capacity());
        put<std::uint64_t>(out, buffer.size());
        put<std::uint64_t>(out, buffer.next_slot());
        std::ostringstream rng_state;
        rng_state << agent.rng();
        put_string(out, rng_state.str());
    }
    if (!out) {
        throw std::runtime_error("checkpoint: write failed");
    }
}

void save_checkpoint(const std::filesystem::path& path, std::span<const DdpgAgent> agents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("checkpoint: cannot open " + path.string() + " for writing");
    }
    write_checkpoint(out, agents);
}

LoadedCheckpoint read_checkpoint(std::istream& in) {
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
        throw std::runtime_error("checkpoint: not an hric checkpoint");
    }
    const auto version = get<std::uint32_t>(in);
    if (version != kCheckpointVersion) {
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    }
    const auto count = get<std::uint64_t>(in);
    if (count > 4096) {
        throw std::runtime_error("checkpoint: implausible agent count");
    }
    LoadedCheckpoint loaded;
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto num_sbs = get<std::uint64_t>(in);
        AgentConfig c;
        c.learning_rate = get<double>(in);
        c.batch_size = get<std::uint64_t>(in);
        c.discount_gamma = get<double>(in);
        c.soft_update_tau = get<double>(in);
        c.buffer_capacity = get<std::uint64_t>(in);
        c.hidden_width = get<std::uint64_t>(in);
        c.reward_scale = get<double>(in);
        c.action_floor = get<double>(in);
        if (num_sbs == 0 || num_sbs > 4096 || c.hidden_width == 0 || c.hidden_width > 65536) {
            throw std::runtime_error("checkpoint: implausible network shape");
        }
        DdpgAgent agent(num_sbs, c, 0);
        for (auto* net : {&agent.actor(), &agent.critic(), &agent.target_actor(), &agent.target_critic()}) {
            get_array_into<float>(in, net->parameters());
        }
        get_adam(in, agent.actor_optimizer());
        get_adam(in, agent.critic_optimizer());
        BufferMetadata meta;
        meta.capacity = get<std::uint64_t>(in);
        meta.size = get<std::uint64_t>(in);
        meta.next_slot = get<std::uint64_t>(in);
        std::istringstream rng_state(get_string(in));
        rng_state >> agent.rng();
        if (!rng_state) {
            throw std::runtime_error("checkpoint: corrupt rng state");
        }
        loaded.agents.push_back(std::move(agent));
        loaded.buffers.push_back(meta);
    }
    return loaded;
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("checkpoint: cannot open " + path.string());
    }
    return read_checkpoint(in);
}

}  // namespace hric
