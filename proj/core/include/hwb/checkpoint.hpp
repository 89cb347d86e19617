#pragma once

// Binary field snapshots: 16-byte magic, then little-endian u32 n, f64 length,
// f64 t and n interleaved (re, im) f64 pairs.

#include <array>
#include <filesystem>
#include <optional>

#include "hwb/evolver.hpp"

namespace hwb {

inline constexpr std::array<unsigned char, 16> kCheckpointMagic = {'H', 'W', 'B', 'U', 'B', 'B', 'L', 'E',
                                                                   0, 0, 0, 0, 0, 0, 0, 1};

// Writes to a sibling temporary file and renames it into place.
void checkpoint_save(const SimulationState& s, const std::filesystem::path& path);

// Validates magic, size and, when given, the target grid.
SimulationState checkpoint_load(const std::filesystem::path& path,
                                const std::optional<Grid1D>& target = std::nullopt);

}  // namespace hwb
