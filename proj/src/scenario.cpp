#include "jcas/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace jcas::scenario {

namespace {
constexpr double kPi = std::numbers::pi;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace

void Scene::validate() const {
    if (user_positions.empty())
        throw std::invalid_argument("scene: at least one user position required");
    for (size_t i = 1; i < snapshots.size(); ++i)
        if (snapshots[i].time_index <= snapshots[i - 1].time_index)
            throw std::invalid_argument("scene: snapshot time indices must strictly increase");
}

radio::ChannelVector synth_channel(const radio::ArrayGeometry& geom,
                                   const ChannelModelParams& params, Point user_pos,
                                   Point bs_pos) {
    if (params.num_paths < 1) throw std::invalid_argument("num_paths must be >= 1");
    if (user_pos == bs_pos)
        throw std::invalid_argument("synth_channel: user and BS positions coincide");

    const double los = target_aoa(bs_pos, user_pos);
    std::mt19937_64 rng(params.rng_seed);
    std::uniform_real_distribution<double> phase_dist(-kPi, kPi);
    std::uniform_real_distribution<double> spread_dist(-params.angle_spread,
                                                       params.angle_spread);

    radio::ChannelVector h(geom.num_antennas(), radio::Complex{0.0, 0.0});
    for (int p = 0; p < params.num_paths; ++p) {
        const double angle_offset = (p == 0) ? 0.0 : spread_dist(rng);
        const double phi = radio::wrap_phase(los + angle_offset + params.rotation_offset);
        const double amp = std::pow(params.gain_decay, static_cast<double>(p));
        const radio::Complex alpha = std::polar(amp, phase_dist(rng));
        const auto steering = radio::array_response(geom, phi);
        for (size_t m = 0; m < h.size(); ++m) h[m] += alpha * steering[m];
    }
    return h;
}

double target_aoa(Point bs_pos, Point target_pos) {
    const double dx = target_pos.first - bs_pos.first;
    const double dy = target_pos.second - bs_pos.second;
    if (dx == 0.0 && dy == 0.0)
        throw std::invalid_argument("target_aoa: positions coincide, angle undefined");
    double a = std::atan2(dy, dx);  // [-pi, pi]
    if (a == -kPi) a = kPi;
    return a;
}

int nearest_vehicle(const Scene& scene, const VehicleSnapshot& snapshot) {
    if (snapshot.vehicle_positions.empty())
        throw std::invalid_argument("nearest_vehicle: empty snapshot");
    scene.validate();
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < snapshot.vehicle_positions.size(); ++j) {
        const auto& [vx, vy] = snapshot.vehicle_positions[j];
        double d = std::numeric_limits<double>::infinity();
        for (const auto& [ux, uy] : scene.user_positions)
            d = std::min(d, std::hypot(ux - vx, uy - vy));
        if (d < best_dist) {
            best_dist = d;
            best = static_cast<int>(j);
        }
    }
    return best;
}

void save_channels(const std::vector<radio::ChannelVector>& channels,
                   const std::filesystem::path& path) {
    if (channels.empty()) throw std::invalid_argument("save_channels: empty channel list");
    const size_t m = channels.front().size();
    for (const auto& h : channels)
        if (h.size() != m)
            throw std::invalid_argument("save_channels: inconsistent channel lengths");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << m << ' ' << channels.size() << '\n';
    for (const auto& h : channels) {
        for (size_t i = 0; i < m; ++i) {
            if (i > 0) out << ' ';
            out << format_double(h[i].real()) << ' ' << format_double(h[i].imag());
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<radio::ChannelVector> load_channels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open channel file: " + path.string());
    size_t m = 0, k = 0;
    if (!(in >> m >> k))
        throw std::runtime_error("channel file " + path.string() +
                                 ": missing or malformed 'M K' header");
    if (m == 0 || k == 0)
        throw std::runtime_error("channel file " + path.string() + ": header must be positive");
    std::vector<radio::ChannelVector> channels;
    channels.reserve(k);
    for (size_t rec = 0; rec < k; ++rec) {
        radio::ChannelVector h(m);
        for (size_t i = 0; i < m; ++i) {
            double re = 0.0, im = 0.0;
            if (!(in >> re)) {
                throw std::runtime_error("channel file " + path.string() + ": record " +
                                         std::to_string(rec) +
                                         " truncated or has an odd number of reals");
            }
            if (!(in >> im)) {
                throw std::runtime_error("channel file " + path.string() + ": record " +
                                         std::to_string(rec) +
                                         " has an odd number of reals");
            }
            h[i] = radio::Complex{re, im};
        }
        channels.push_back(std::move(h));
    }
    return channels;
}

void save_scene(const Scene& scene, const std::filesystem::path& path) {
    scene.validate();
    nlohmann::ordered_json j;
    j["bs_position"] = {scene.bs_position.first, scene.bs_position.second};
    auto users = nlohmann::ordered_json::array();
    for (const auto& [x, y] : scene.user_positions) users.push_back({x, y});
    j["user_positions"] = users;
    auto snaps = nlohmann::ordered_json::array();
    for (const auto& s : scene.snapshots) {
        nlohmann::ordered_json js;
        js["time_index"] = s.time_index;
        auto vehicles = nlohmann::ordered_json::array();
        for (const auto& [x, y] : s.vehicle_positions) vehicles.push_back({x, y});
        js["vehicle_positions"] = vehicles;
        snaps.push_back(js);
    }
    j["snapshots"] = snaps;
    j["rng_seed"] = scene.rng_seed;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Scene load_scene(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scene file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("scene file " + path.string() + ": " + e.what());
    }
    Scene scene;
    auto bs = j.at("bs_position");
    scene.bs_position = {bs.at(0).get<double>(), bs.at(1).get<double>()};
    for (const auto& u : j.at("user_positions"))
        scene.user_positions.emplace_back(u.at(0).get<double>(), u.at(1).get<double>());
    if (j.contains("snapshots")) {
        for (const auto& s : j.at("snapshots")) {
            VehicleSnapshot snap;
            snap.time_index = s.at("time_index").get<int>();
            for (const auto& v : s.at("vehicle_positions"))
                snap.vehicle_positions.emplace_back(v.at(0).get<double>(),
                                                    v.at(1).get<double>());
            scene.snapshots.push_back(std::move(snap));
        }
    }
    if (j.contains("rng_seed")) scene.rng_seed = j.at("rng_seed").get<uint64_t>();
    scene.validate();
    return scene;
}

}  // namespace jcas::scenario
