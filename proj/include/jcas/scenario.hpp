#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "jcas/radio.hpp"

namespace jcas::scenario {

using Point = std::pair<double, double>;  // (x, y) meters

struct VehicleSnapshot {
    int time_index = 0;
    std::vector<Point> vehicle_positions;
};

struct Scene {
    Point bs_position{0.0, 0.0};
    std::vector<Point> user_positions;
    std::vector<VehicleSnapshot> snapshots;  // time indices strictly increasing
    uint64_t rng_seed = 0;

    void validate() const;  // throws on invariant violations
};

struct ChannelModelParams {
    int num_paths = 5;
    double angle_spread = 0.2;       // radians; scattered paths drawn in +-spread around LOS
    double gain_decay = 0.6;         // |alpha_p| = decay^(p-1)
    double rotation_offset = 0.0;    // radians added to every path angle
    uint64_t rng_seed = 0;
};

// Geometric multipath channel: h = sum_p alpha_p * b_r(phi_p + rotation_offset),
// phi_1 the LOS angle from BS to user, phi_{p>1} LOS plus a uniform draw from
// the angle spread, |alpha_p| = decay^(p-1) with uniform random phase.
// Deterministic given params.rng_seed.
radio::ChannelVector synth_channel(const radio::ArrayGeometry& geom,
                                   const ChannelModelParams& params, Point user_pos,
                                   Point bs_pos);

// Quadrant-aware angle of arrival from BS to target, in (-pi, pi].
double target_aoa(Point bs_pos, Point target_pos);

// Index of the vehicle minimizing the min-over-users distance; ties -> lowest index.
int nearest_vehicle(const Scene& scene, const VehicleSnapshot& snapshot);

// Plain-text channel file: header "M K" then K records of M "re im" pairs.
void save_channels(const std::vector<radio::ChannelVector>& channels,
                   const std::filesystem::path& path);
std::vector<radio::ChannelVector> load_channels(const std::filesystem::path& path);

void save_scene(const Scene& scene, const std::filesystem::path& path);
Scene load_scene(const std::filesystem::path& path);

}  // namespace jcas::scenario
