#include "jcas/env.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace jcas::env {

namespace {
constexpr double kPi = std::numbers::pi;
}

BeamEnv::BeamEnv(BeamEnvConfig config) : config_(std::move(config)) {
    if (config_.num_antennas < 1) throw std::invalid_argument("env: M must be >= 1");
    if (config_.num_redundant < 0) throw std::invalid_argument("env: M_Red must be >= 0");
    if (config_.episode_length < 1)
        throw std::invalid_argument("env: episode length must be >= 1");
    if (const auto* comm = std::get_if<CommTask>(&config_.task)) {
        if (comm->channels.empty())
            throw std::invalid_argument("env: communication task needs channels");
        for (const auto& h : comm->channels)
            if (static_cast<int>(h.size()) != config_.num_antennas)
                throw std::invalid_argument("env: channel length != M");
    } else {
        const auto& sense = std::get<SenseTask>(config_.task);
        if (sense.geometry.num_antennas() != config_.num_antennas)
            throw std::invalid_argument("env: geometry antenna count != M");
    }
}

double BeamEnv::gain_of(std::span<const double> phases) const {
    if (static_cast<int>(phases.size()) < config_.num_antennas)
        throw std::invalid_argument("gain_of: too few phases");
    radio::BeamVector beam(
        std::vector<double>(phases.begin(), phases.begin() + config_.num_antennas));
    if (config_.quantize_in_loop) beam = radio::quantize(beam, config_.codomain);
    if (const auto* comm = std::get_if<CommTask>(&config_.task))
        return radio::avg_comm_gain(beam, comm->channels);
    const auto& sense = std::get<SenseTask>(config_.task);
    return radio::sensing_gain(beam, sense.geometry, sense.aoa);
}

EnvState BeamEnv::reset(uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-kPi, kPi);
    EnvState state;
    state.phases.resize(config_.action_dim());
    for (double& p : state.phases) p = -dist(rng);  // negated [-pi,pi) -> (-pi,pi]
    state.beta = 0.0;
    state.prev_gain = gain_of(state.phases);
    state.step_in_episode = 0;
    return state;
}

StepOutcome BeamEnv::step(EnvState& state, std::span<const double> action) const {
    if (static_cast<int>(action.size()) != config_.action_dim())
        throw std::invalid_argument("step: action length " + std::to_string(action.size()) +
                                    " != " + std::to_string(config_.action_dim()));
    StepOutcome out;
    out.next_phases.assign(action.begin(), action.end());
    out.gain = gain_of(action);
    if (out.gain > state.beta) {
        out.reward = +1;
        state.beta = out.gain;
    } else if (out.gain > state.prev_gain) {
        out.reward = 0;
    } else {
        out.reward = -1;
    }
    state.prev_gain = out.gain;
    state.phases = out.next_phases;
    state.step_in_episode += 1;
    out.relevant_mask = relevant_mask();
    return out;
}

double BeamEnv::oracle_max_gain() const {
    if (std::holds_alternative<SenseTask>(config_.task))
        return static_cast<double>(config_.num_antennas);
    const auto& comm = std::get<CommTask>(config_.task);
    if (comm.channels.size() != 1)
        throw std::invalid_argument(
            "oracle_max_gain: no closed form for multi-channel communication");
    double sum_abs = 0.0;
    for (const auto& h : comm.channels.front()) sum_abs += std::abs(h);
    return sum_abs * sum_abs / static_cast<double>(config_.num_antennas);
}

std::vector<uint8_t> BeamEnv::relevant_mask() const {
    std::vector<uint8_t> mask(config_.action_dim(), 0);
    for (int i = 0; i < config_.num_antennas; ++i) mask[i] = 1;
    return mask;
}

}  // namespace jcas::env
