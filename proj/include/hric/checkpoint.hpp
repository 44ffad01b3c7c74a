#pragma once

// Versioned little-endian binary checkpoints for a set of per-MBS agents:
// every parameter tensor, both Adam states, the agent RNG, and replay buffer
// metadata (not its contents).

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "hric/ddpg.hpp"

namespace hric {

inline constexpr std::uint32_t kCheckpointVersion = 2;

struct BufferMetadata {
    std::uint64_t capacity = 0;
    std::uint64_t size = 0;
    std::uint64_t next_slot = 0;

    friend bool operator==(const BufferMetadata&, const BufferMetadata&) = default;
};

struct LoadedCheckpoint {
    std::vector<DdpgAgent> agents;
    std::vector<BufferMetadata> buffers;
};

void write_checkpoint(std::ostream& out, std::span<const DdpgAgent> agents);
void save_checkpoint(const std::filesystem::path& path, std::span<const DdpgAgent> agents);

/// Throws std::runtime_error on a bad magic, unknown version or truncation.
[[nodiscard]] LoadedCheckpoint read_checkpoint(std::istream& in);
[[nodiscard]] LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hric
