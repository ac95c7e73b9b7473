#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace jcas::metrics {

struct EpisodeRecord {
    int episode = 0;
    double avg_gain = 0.0;
    double final_beta = 0.0;
    std::optional<double> tpr;          // relevant-selected / relevant, percent
    std::optional<double> tpr_literal;  // selected / relevant, percent (can exceed 100)
    std::optional<double> selected_count;
};

// Mean per-step gain over one episode.
double episodic_gain(std::span<const double> step_gains);

// 100 * |selected AND relevant| / |relevant|.
double tpr(std::span<const uint8_t> mask, std::span<const uint8_t> relevant);

// 100 * |selected| / |relevant| -- the unrefined ratio, reported alongside.
double tpr_literal(std::span<const uint8_t> mask, std::span<const uint8_t> relevant);

// CSV columns: episode,avg_gain,beta,tpr,tpr_literal,selected_count.
// Baselines leave the selector columns empty.
void write_episode_csv(const std::vector<EpisodeRecord>& records,
                       const std::filesystem::path& path);
std::vector<EpisodeRecord> read_episode_csv(const std::filesystem::path& path);

struct RunSeries {
    std::string label;                  // e.g. agent kind
    std::vector<double> episodic_gains; // one entry per episode
};

struct AgentSummary {
    std::string label;
    std::vector<double> median_gain;    // per episode index
    std::vector<double> iqr_gain;       // per episode index
    std::vector<double> auc_per_run;    // sum of episodic gains, one per run
    double median_auc = 0.0;
    // First episode reaching the threshold, -1 when never; one per run.
    std::vector<long> episodes_to_threshold;
};

struct ComparisonSummary {
    double threshold = 0.0;
    std::vector<AgentSummary> agents;

    nlohmann::ordered_json to_json() const;
};

// Groups runs by label; all runs must have the same episode count.
ComparisonSummary compare_runs(const std::vector<RunSeries>& runs, double threshold);

void write_beam_pattern_csv(const std::vector<std::pair<double, double>>& pattern,
                            const std::filesystem::path& path);

std::string format_double(double v);  // shortest round-trip, deterministic

}  // namespace jcas::metrics
