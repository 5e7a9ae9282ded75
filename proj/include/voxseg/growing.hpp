// Seeded 3D region growing over the 6-connected voxel lattice.
#pragma once

#include <cmath>
#include <cstdint>
#include <queue>
#include <string>

#include "voxseg/core.hpp"

namespace voxseg {

enum class Acceptance { SeedFixed, RunningMean };

inline Acceptance acceptance_from_string(const std::string& s) {
    if (s == "seed-fixed") return Acceptance::SeedFixed;
    if (s == "running-mean") return Acceptance::RunningMean;
    fail("args", "acceptance must be seed-fixed or running-mean, got \"" + s + "\"");
}

struct GrowParams {
    double threshold = 5.0;
    Acceptance acceptance = Acceptance::RunningMean;

    void validate() const {
        if (!(std::isfinite(threshold) && threshold >= 0.0))
            fail("args", "threshold must be finite and >= 0");
    }
};

/// Grows the 6-connected region containing the seed. Expansion is a FIFO
/// breadth-first sweep; neighbors are enqueued in the fixed order x-, x+,
/// y-, y+, z-, z+. A candidate is accepted when |I(v) - ref| < threshold
/// (strict), where ref is I(seed) in seed-fixed mode or the mean of the
/// voxels accepted so far in running-mean mode (updated after every
/// acceptance). Each voxel is examined at most once, the first time the
/// frontier reaches it; rejected voxels are never reconsidered. The seed is
/// always part of the result. Single-threaded: running-mean results depend
/// on the visit order, which is part of the contract.
inline BinaryMask region_grow(const VoxelVolume& vol, SeedPoint seed, GrowParams params) {
    params.validate();
    const Dims d = vol.dims();
    if (!d.contains(seed.x, seed.y, seed.z))
        fail("bounds", "seed (" + std::to_string(seed.x) + "," + std::to_string(seed.y) + "," +
                           std::to_string(seed.z) + ") outside volume " + d.str());

    BinaryMask mask(d);
    Grid3<std::uint8_t> visited(d);

    const std::size_t seed_idx = d.index(seed.x, seed.y, seed.z);
    const double seed_value = vol[seed_idx];
    double sum = seed_value;
    std::int64_t count = 1;

    mask[seed_idx] = 1;
    visited[seed_idx] = 1;

    struct Voxel {
        int x, y, z;
    };
    std::queue<Voxel> frontier;
    frontier.push({seed.x, seed.y, seed.z});

    const int step[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};

    while (!frontier.empty()) {
        const Voxel p = frontier.front();
        frontier.pop();
        for (const auto& s : step) {
            const int x = p.x + s[0], y = p.y + s[1], z = p.z + s[2];
            if (!d.contains(x, y, z)) continue;
            const std::size_t i = d.index(x, y, z);
            if (visited[i]) continue;
            visited[i] = 1;
            const double ref =
                params.acceptance == Acceptance::SeedFixed ? seed_value : sum / count;
            if (std::abs(vol[i] - ref) < params.threshold) {
                mask[i] = 1;
                sum += vol[i];
                ++count;
                frontier.push({x, y, z});
            }
        }
    }
    return mask;
}

} // namespace voxseg
