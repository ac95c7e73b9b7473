#pragma once

#include <cstdint>
#include <vector>

#include "jcas/radio.hpp"

namespace jcas::clustering {

// Probe-beam gain matrix: entry (c, k) = |f_c^H h_k|^2.
struct ProbeGainMatrix {
    int num_probes = 0;    // C
    int num_channels = 0;  // K'
    std::vector<double> entries;  // row-major C x K'
    std::vector<int> channel_refs;

    double at(int probe, int channel) const {
        return entries[static_cast<size_t>(probe) * num_channels + channel];
    }
};

// Columns u_k of normalized pairwise gain differences; dimension C*(C-1)/2.
struct FeatureMatrix {
    int feature_dim = 0;
    std::vector<std::vector<double>> columns;
};

struct Partition {
    std::vector<int> assignments;            // one cluster id per channel
    std::vector<std::vector<double>> centroids;
    double distortion = 0.0;                 // J = sum ||u_k - mu_assigned||^2
};

struct Assignment {
    std::vector<int> permutation;       // beam index -> cluster index
    std::vector<std::vector<double>> cost;  // Z
    double value = 0.0;                 // sum_n Z[n][perm[n]]
};

ProbeGainMatrix probe_gains(const std::vector<radio::BeamVector>& probes,
                            const std::vector<radio::ChannelVector>& channels);

FeatureMatrix feature_matrix(const ProbeGainMatrix& gains);

// Lloyd iterations until the assignment stops changing (cap 300); deterministic
// under seed. Empty clusters are re-seeded with the farthest point. When given,
// `distortion_trace` records J after every assignment and centroid phase.
Partition kmeans(const FeatureMatrix& features, int num_clusters, uint64_t seed,
                 std::vector<double>* distortion_trace = nullptr);

// Z[n][n'] = average gain of beam n on cluster n'.
std::vector<std::vector<double>> assignment_cost(
    const std::vector<radio::BeamVector>& beams,
    const std::vector<std::vector<radio::ChannelVector>>& clusters);

// Permutation maximizing sum_n Z[n][perm(n)]; Hungarian algorithm with a
// lexicographic tie-break on the beam index.
Assignment assign(const std::vector<std::vector<double>>& cost);

// C quantized probe beams steered at equally spaced angles across (-pi/2, pi/2).
std::vector<radio::BeamVector> default_probe_beams(const radio::ArrayGeometry& geom,
                                                   int count,
                                                   const radio::PhaseCodomain& codomain);

}  // namespace jcas::clustering
