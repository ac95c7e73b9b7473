#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "jcas/agents.hpp"
#include "jcas/clustering.hpp"
#include "jcas/env.hpp"
#include "jcas/metrics.hpp"
#include "jcas/radio.hpp"
#include "jcas/scenario.hpp"

namespace jcas::pipeline {

struct CodebookEntry {
    radio::BeamVector beam;  // quantized
    std::string role;        // "comm" | "sense"
    int id = 0;              // cluster id or target id
};

struct Codebook {
    int num_antennas = 0;
    int phase_bits = 0;
    double wavelength = 0.1;
    double spacing_wavelengths = 0.5;
    std::vector<CodebookEntry> entries;

    void save(const std::filesystem::path& path) const;
    static Codebook load(const std::filesystem::path& path);
};

struct RunConfig {
    int num_antennas = 8;        // M
    int num_redundant = 0;       // M_Red
    int phase_bits = 4;          // r
    double wavelength = 0.1;     // meters
    double spacing_wavelengths = 0.5;
    int num_comm_beams = 2;      // N_C
    int num_sense_beams = 1;     // N_S
    int probe_count = 16;        // C
    long total_epochs = 20000;
    long buffering_epochs = 2000;
    int epochs_per_episode = 100;  // E
    int batch_size = 32;
    int update_every = 1;   // gradient step every N env steps
    long replay_capacity = 0;  // 0: keep every epoch (no eviction)
    agents::AgentKind agent_kind = agents::AgentKind::Td3Invase;
    agents::AgentConfig agent;  // dims filled in from the fields above
    bool quantize_in_loop = false;
    int fine_tune_iterations = 200;
    double fine_tune_noise_std = 0.05;
    int recluster_every_snapshots = 1;
    int parallel_agents = 1;
    uint64_t seed = 1;
    // Invoked after every finished episode (label like "sense0"); may be
    // called from worker threads when parallel_agents > 1.
    std::function<void(const std::string&, const metrics::EpisodeRecord&)> episode_callback;

    radio::ArrayGeometry geometry() const;
    agents::AgentConfig resolved_agent_config() const;
};

struct TrainResult {
    std::vector<metrics::EpisodeRecord> episodes;
    radio::BeamVector best_beam;      // highest-gain phases seen (first M dims)
    double best_gain = 0.0;
    double final_eval_gain = 0.0;     // greedy post-training episode
    std::unique_ptr<agents::Agent> agent;
};

// One agent against one environment for the configured epoch budget.
// Deterministic given (config, seed).
TrainResult train_single_agent(const env::BeamEnv& environment, const RunConfig& config,
                               uint64_t seed);

// Greedy episode with the frozen actor; returns the mean gain over E steps.
double evaluate_agent(const env::BeamEnv& environment, agents::Agent& agent, uint64_t seed);

using Evaluator = std::function<double(const radio::BeamVector&)>;

// Greedy hill-climb: perturb, quantize, keep if the evaluator improves.
radio::BeamVector fine_tune(const radio::BeamVector& beam, const Evaluator& evaluate,
                            const radio::PhaseCodomain& codomain, int iterations,
                            double noise_std, uint64_t seed);

struct CommPipelineResult {
    std::vector<radio::BeamVector> beams;  // quantized, one per cluster
    clustering::Partition partition;
    clustering::Assignment assignment;
    std::vector<TrainResult> agent_results;
};

// Probe -> features -> k-means -> Hungarian assignment -> per-cluster training
// with periodic re-clustering -> fine-tuned quantized beams.
CommPipelineResult run_comm_pipeline(const scenario::Scene& scene,
                                     const std::vector<radio::ChannelVector>& channels,
                                     const RunConfig& config);

struct SensePipelineResult {
    std::vector<radio::BeamVector> beams;  // quantized, one per target
    std::vector<double> target_aoas;
    std::vector<TrainResult> agent_results;
};

// Nearest vehicle -> AoA -> one agent per target -> fine-tuned quantized beams.
SensePipelineResult run_sense_pipeline(const scenario::Scene& scene, const RunConfig& config);

}  // namespace jcas::pipeline
