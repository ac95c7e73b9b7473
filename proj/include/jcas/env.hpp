#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "jcas/radio.hpp"

namespace jcas::env {

struct CommTask {
    std::vector<radio::ChannelVector> channels;  // nonempty
};

struct SenseTask {
    radio::ArrayGeometry geometry;
    double aoa;  // target angle of arrival, radians
};

struct BeamEnvConfig {
    int num_antennas = 8;     // M
    int num_redundant = 0;    // M_Red
    std::variant<CommTask, SenseTask> task;
    bool quantize_in_loop = false;
    radio::PhaseCodomain codomain{4};
    int episode_length = 200;  // E

    int action_dim() const { return num_antennas + num_redundant; }
};

struct EnvState {
    std::vector<double> phases;  // (M + M_Red) values in (-pi, pi]
    double beta = 0.0;           // adaptive threshold, nondecreasing within an episode
    double prev_gain = 0.0;
    int step_in_episode = 0;
};

struct StepOutcome {
    std::vector<double> next_phases;
    int reward = 0;  // one of {-1, 0, +1}
    double gain = 0.0;
    std::vector<uint8_t> relevant_mask;  // ground truth: first M dims true
};

class BeamEnv {
public:
    explicit BeamEnv(BeamEnvConfig config);

    const BeamEnvConfig& config() const { return config_; }

    EnvState reset(uint64_t seed) const;

    // Pure given (state, action): the action becomes the next phases; gain is
    // computed from the first M dims only; reward is +1 if gain beats the
    // threshold (which then ratchets), 0 if it at least improved on the
    // previous gain, and -1 otherwise.
    StepOutcome step(EnvState& state, std::span<const double> action) const;

    // Gain of a phase vector (first M dims; quantized first when configured).
    double gain_of(std::span<const double> phases) const;

    // Analytic maximum: M for sensing, (sum|h_m|)^2/M for a single channel.
    // Rejects multi-channel communication tasks (no closed form).
    double oracle_max_gain() const;

    std::vector<uint8_t> relevant_mask() const;

private:
    BeamEnvConfig config_;
};

}  // namespace jcas::env
