#include "jcas/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace jcas::metrics {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double episodic_gain(std::span<const double> step_gains) {
    if (step_gains.empty()) throw std::invalid_argument("episodic_gain: empty trace");
    double sum = 0.0;
    for (double g : step_gains) sum += g;
    return sum / static_cast<double>(step_gains.size());
}

double tpr(std::span<const uint8_t> mask, std::span<const uint8_t> relevant) {
    if (mask.size() != relevant.size())
        throw std::invalid_argument("tpr: mask/relevant length mismatch");
    int n_relevant = 0, n_hit = 0;
    for (size_t i = 0; i < mask.size(); ++i) {
        if (relevant[i]) {
            ++n_relevant;
            if (mask[i]) ++n_hit;
        }
    }
    if (n_relevant == 0) throw std::invalid_argument("tpr: no relevant dimensions");
    return 100.0 * n_hit / n_relevant;
}

double tpr_literal(std::span<const uint8_t> mask, std::span<const uint8_t> relevant) {
    if (mask.size() != relevant.size())
        throw std::invalid_argument("tpr_literal: mask/relevant length mismatch");
    int n_relevant = 0, n_selected = 0;
    for (size_t i = 0; i < mask.size(); ++i) {
        if (relevant[i]) ++n_relevant;
        if (mask[i]) ++n_selected;
    }
    if (n_relevant == 0) throw std::invalid_argument("tpr_literal: no relevant dimensions");
    return 100.0 * n_selected / n_relevant;
}

void write_episode_csv(const std::vector<EpisodeRecord>& records,
                       const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "episode,avg_gain,beta,tpr,tpr_literal,selected_count\n";
    for (const auto& r : records) {
        out << r.episode << ',' << format_double(r.avg_gain) << ','
            << format_double(r.final_beta) << ',';
        if (r.tpr) out << format_double(*r.tpr);
        out << ',';
        if (r.tpr_literal) out << format_double(*r.tpr_literal);
        out << ',';
        if (r.selected_count) out << format_double(*r.selected_count);
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<EpisodeRecord> read_episode_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open episode csv: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "episode,avg_gain,beta,tpr,tpr_literal,selected_count")
        throw std::runtime_error("episode csv " + path.string() + ": bad header");
    std::vector<EpisodeRecord> records;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        while (fields.size() < 6) fields.emplace_back();
        if (fields.size() != 6)
            throw std::runtime_error("episode csv " + path.string() + ": line " +
                                     std::to_string(line_no) + " has too many fields");
        EpisodeRecord r;
        r.episode = std::stoi(fields[0]);
        r.avg_gain = std::stod(fields[1]);
        r.final_beta = std::stod(fields[2]);
        if (!fields[3].empty()) r.tpr = std::stod(fields[3]);
        if (!fields[4].empty()) r.tpr_literal = std::stod(fields[4]);
        if (!fields[5].empty()) r.selected_count = std::stod(fields[5]);
        records.push_back(r);
    }
    return records;
}

namespace {

double percentile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    const double pos = q * (values.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(pos));
    const size_t hi = static_cast<size_t>(std::ceil(pos));
    const double frac = pos - lo;
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace

ComparisonSummary compare_runs(const std::vector<RunSeries>& runs, double threshold) {
    if (runs.empty()) throw std::invalid_argument("compare_runs: no runs");
    const size_t episodes = runs.front().episodic_gains.size();
    for (const auto& r : runs)
        if (r.episodic_gains.size() != episodes)
            throw std::invalid_argument("compare_runs: inconsistent episode counts");

    std::map<std::string, std::vector<const RunSeries*>> by_label;
    for (const auto& r : runs) by_label[r.label].push_back(&r);

    ComparisonSummary summary;
    summary.threshold = threshold;
    for (const auto& [label, group] : by_label) {
        AgentSummary agent;
        agent.label = label;
        agent.median_gain.resize(episodes);
        agent.iqr_gain.resize(episodes);
        for (size_t e = 0; e < episodes; ++e) {
            std::vector<double> vals;
            vals.reserve(group.size());
            for (const auto* r : group) vals.push_back(r->episodic_gains[e]);
            agent.median_gain[e] = percentile(vals, 0.5);
            agent.iqr_gain[e] = percentile(vals, 0.75) - percentile(vals, 0.25);
        }
        for (const auto* r : group) {
            double auc = 0.0;
            long first = -1;
            for (size_t e = 0; e < episodes; ++e) {
                auc += r->episodic_gains[e];
                if (first < 0 && r->episodic_gains[e] >= threshold)
                    first = static_cast<long>(e);
            }
            agent.auc_per_run.push_back(auc);
            agent.episodes_to_threshold.push_back(first);
        }
        agent.median_auc = percentile(agent.auc_per_run, 0.5);
        summary.agents.push_back(std::move(agent));
    }
    return summary;
}

nlohmann::ordered_json ComparisonSummary::to_json() const {
    nlohmann::ordered_json j;
    j["threshold"] = threshold;
    auto agents_json = nlohmann::ordered_json::array();
    for (const auto& a : agents) {
        nlohmann::ordered_json ja;
        ja["label"] = a.label;
        ja["median_gain"] = a.median_gain;
        ja["iqr_gain"] = a.iqr_gain;
        ja["auc_per_run"] = a.auc_per_run;
        ja["median_auc"] = a.median_auc;
        ja["episodes_to_threshold"] = a.episodes_to_threshold;
        agents_json.push_back(ja);
    }
    j["agents"] = agents_json;
    return j;
}

void write_beam_pattern_csv(const std::vector<std::pair<double, double>>& pattern,
                            const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "angle_rad,normalized_gain\n";
    for (const auto& [angle, gain] : pattern)
        out << format_double(angle) << ',' << format_double(gain) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace jcas::metrics
