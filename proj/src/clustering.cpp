#include "jcas/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace jcas::clustering {

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        d += diff * diff;
    }
    return d;
}

// Min-cost perfect assignment on a square matrix (Hungarian algorithm with
// row/column potentials). Returns column assigned to each row.
std::vector<int> hungarian_min(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

// Best achievable total gain when rows `free_rows` are matched to columns
// `free_cols` (maximization).
double best_completion(const std::vector<std::vector<double>>& gain,
                       const std::vector<int>& free_rows, const std::vector<int>& free_cols) {
    if (free_rows.empty()) return 0.0;
    const int n = static_cast<int>(free_rows.size());
    std::vector<std::vector<double>> sub(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) sub[i][j] = -gain[free_rows[i]][free_cols[j]];
    const auto match = hungarian_min(sub);
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += gain[free_rows[i]][free_cols[match[i]]];
    return total;
}

}  // namespace

ProbeGainMatrix probe_gains(const std::vector<radio::BeamVector>& probes,
                            const std::vector<radio::ChannelVector>& channels) {
    if (probes.empty() || channels.empty())
        throw std::invalid_argument("probe_gains: empty probe or channel list");
    ProbeGainMatrix m;
    m.num_probes = static_cast<int>(probes.size());
    m.num_channels = static_cast<int>(channels.size());
    m.entries.resize(static_cast<size_t>(m.num_probes) * m.num_channels);
    m.channel_refs.resize(channels.size());
    for (int k = 0; k < m.num_channels; ++k) m.channel_refs[k] = k;
    for (int c = 0; c < m.num_probes; ++c)
        for (int k = 0; k < m.num_channels; ++k)
            m.entries[static_cast<size_t>(c) * m.num_channels + k] =
                radio::comm_gain(probes[c], channels[k]);
    return m;
}

FeatureMatrix feature_matrix(const ProbeGainMatrix& gains) {
    const int c = gains.num_probes;
    FeatureMatrix f;
    f.feature_dim = c * (c - 1) / 2;
    f.columns.resize(gains.num_channels);
    for (int k = 0; k < gains.num_channels; ++k) {
        double mean = 0.0;
        for (int i = 0; i < c; ++i) mean += gains.at(i, k);
        mean /= static_cast<double>(c);
        if (mean == 0.0)
            throw std::invalid_argument("feature_matrix: channel " +
                                        std::to_string(gains.channel_refs[k]) +
                                        " has zero mean probe gain (degenerate channel)");
        auto& col = f.columns[k];
        col.reserve(f.feature_dim);
        for (int i = 0; i < c; ++i)
            for (int j = i + 1; j < c; ++j)
                col.push_back((gains.at(i, k) - gains.at(j, k)) / mean);
    }
    return f;
}

namespace {
double partition_distortion(const FeatureMatrix& features, const Partition& part) {
    double j = 0.0;
    for (size_t i = 0; i < features.columns.size(); ++i)
        j += squared_distance(features.columns[i], part.centroids[part.assignments[i]]);
    return j;
}
}  // namespace

Partition kmeans(const FeatureMatrix& features, int num_clusters, uint64_t seed,
                 std::vector<double>* distortion_trace) {
    const int k = static_cast<int>(features.columns.size());
    if (num_clusters < 1) throw std::invalid_argument("kmeans: need at least one cluster");
    if (num_clusters > k)
        throw std::invalid_argument("kmeans: more clusters than points (" +
                                    std::to_string(num_clusters) + " > " + std::to_string(k) +
                                    ")");
    std::mt19937_64 rng(seed);
    std::vector<int> indices(k);
    for (int i = 0; i < k; ++i) indices[i] = i;
    std::shuffle(indices.begin(), indices.end(), rng);

    Partition part;
    part.centroids.resize(num_clusters);
    for (int n = 0; n < num_clusters; ++n) part.centroids[n] = features.columns[indices[n]];
    part.assignments.assign(k, -1);

    auto record = [&] {
        if (distortion_trace) distortion_trace->push_back(partition_distortion(features, part));
    };

    const int max_iterations = 300;
    for (int it = 0; it < max_iterations; ++it) {
        // assignment phase
        bool changed = false;
        for (int i = 0; i < k; ++i) {
            int best = 0;
            double best_d = squared_distance(features.columns[i], part.centroids[0]);
            for (int n = 1; n < num_clusters; ++n) {
                const double d = squared_distance(features.columns[i], part.centroids[n]);
                if (d < best_d) {
                    best_d = d;
                    best = n;
                }
            }
            if (part.assignments[i] != best) {
                part.assignments[i] = best;
                changed = true;
            }
        }
        // repair empty clusters with the point farthest from its centroid
        std::vector<int> counts(num_clusters, 0);
        for (int a : part.assignments) ++counts[a];
        for (int n = 0; n < num_clusters; ++n) {
            if (counts[n] > 0) continue;
            int farthest = -1;
            double far_d = -1.0;
            for (int i = 0; i < k; ++i) {
                if (counts[part.assignments[i]] <= 1) continue;
                const double d =
                    squared_distance(features.columns[i], part.centroids[part.assignments[i]]);
                if (d > far_d) {
                    far_d = d;
                    farthest = i;
                }
            }
            if (farthest >= 0) {
                --counts[part.assignments[farthest]];
                part.assignments[farthest] = n;
                ++counts[n];
                part.centroids[n] = features.columns[farthest];
                changed = true;
            }
        }
        record();
        if (!changed && it > 0) break;
        // centroid phase
        for (int n = 0; n < num_clusters; ++n) {
            if (counts[n] == 0) continue;
            std::vector<double> mean(features.feature_dim, 0.0);
            for (int i = 0; i < k; ++i) {
                if (part.assignments[i] != n) continue;
                for (int d = 0; d < features.feature_dim; ++d)
                    mean[d] += features.columns[i][d];
            }
            for (double& x : mean) x /= static_cast<double>(counts[n]);
            part.centroids[n] = std::move(mean);
        }
        record();
    }
    part.distortion = partition_distortion(features, part);
    return part;
}

std::vector<std::vector<double>> assignment_cost(
    const std::vector<radio::BeamVector>& beams,
    const std::vector<std::vector<radio::ChannelVector>>& clusters) {
    if (beams.size() != clusters.size())
        throw std::invalid_argument("assignment_cost: beam/cluster count mismatch");
    for (size_t n = 0; n < clusters.size(); ++n)
        if (clusters[n].empty())
            throw std::invalid_argument("assignment_cost: cluster " + std::to_string(n) +
                                        " is empty");
    const size_t n = beams.size();
    std::vector<std::vector<double>> z(n, std::vector<double>(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) z[i][j] = radio::avg_comm_gain(beams[i], clusters[j]);
    return z;
}

Assignment assign(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    if (n == 0) throw std::invalid_argument("assign: empty cost matrix");
    for (const auto& row : cost)
        if (static_cast<int>(row.size()) != n)
            throw std::invalid_argument("assign: cost matrix must be square");

    // Fix beams in index order, each time keeping the smallest cluster whose
    // forced choice still completes to the maximum total (lexicographic ties).
    Assignment result;
    result.cost = cost;
    result.permutation.assign(n, -1);
    std::vector<int> free_cols(n);
    for (int j = 0; j < n; ++j) free_cols[j] = j;
    double fixed_sum = 0.0;
    for (int row = 0; row < n; ++row) {
        std::vector<int> remaining_rows;
        for (int r = row + 1; r < n; ++r) remaining_rows.push_back(r);
        int best_col = -1;
        double best_total = -std::numeric_limits<double>::infinity();
        for (size_t ci = 0; ci < free_cols.size(); ++ci) {
            const int col = free_cols[ci];
            std::vector<int> rest_cols;
            for (size_t cj = 0; cj < free_cols.size(); ++cj)
                if (cj != ci) rest_cols.push_back(free_cols[cj]);
            const double total =
                cost[row][col] + best_completion(cost, remaining_rows, rest_cols);
            if (total > best_total) {
                best_total = total;
                best_col = col;
            }
        }
        result.permutation[row] = best_col;
        fixed_sum += cost[row][best_col];
        free_cols.erase(std::find(free_cols.begin(), free_cols.end(), best_col));
    }
    result.value = 0.0;
    for (int i = 0; i < n; ++i) result.value += cost[i][result.permutation[i]];
    (void)fixed_sum;
    return result;
}

std::vector<radio::BeamVector> default_probe_beams(const radio::ArrayGeometry& geom,
                                                   int count,
                                                   const radio::PhaseCodomain& codomain) {
    if (count < 1) throw std::invalid_argument("need at least one probe beam");
    constexpr double kPi = std::numbers::pi;
    std::vector<radio::BeamVector> probes;
    probes.reserve(count);
    for (int c = 0; c < count; ++c) {
        const double theta = -kPi / 2.0 + kPi * (c + 1) / (count + 1);
        const double s = std::sin(theta);
        std::vector<double> phases(geom.num_antennas());
        for (int m = 0; m < geom.num_antennas(); ++m)
            phases[m] = radio::wrap_phase(2.0 * kPi * geom.positions[m] * s / geom.wavelength);
        probes.push_back(quantize(radio::BeamVector(std::move(phases)), codomain));
    }
    return probes;
}

}  // namespace jcas::clustering
