#include "jcas/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace jcas::pipeline {

namespace {

uint64_t mix_seed(uint64_t a, uint64_t b) {
    uint64_t x = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

// Drives one agent against (possibly changing) environments while keeping the
// replay buffer, counters, and episode records across rounds.
class AgentTrainer {
public:
    AgentTrainer(const RunConfig& config, uint64_t seed, std::string label = {})
        : config_(config),
          label_(std::move(label)),
          agent_(agents::make_agent(config.agent_kind, config.resolved_agent_config(),
                                    mix_seed(seed, 0))),
          buffer_(static_cast<size_t>(std::max<long>(
              config.replay_capacity > 0 ? config.replay_capacity : config.total_epochs, 1))),
          sample_rng_(mix_seed(seed, 1)),
          episode_seed_base_(mix_seed(seed, 2)) {}

    void train_for(const env::BeamEnv& environment, long epochs) {
        const int e_len = config_.epochs_per_episode;
        long done = 0;
        while (done < epochs) {
            env::EnvState state = environment.reset(mix_seed(episode_seed_base_, episode_index_));
            std::vector<double> gains;
            gains.reserve(e_len);
            double tpr_sum = 0.0, tpr_lit_sum = 0.0, sel_sum = 0.0;
            int mask_samples = 0;
            const auto relevant = environment.relevant_mask();
            for (int t = 0; t < e_len && done < epochs; ++t, ++done) {
                const std::vector<double> prev_phases = state.phases;
                const std::vector<double> action = agent_->act(prev_phases, /*explore=*/true);
                const env::StepOutcome out = environment.step(state, action);
                buffer_.push({prev_phases, action, static_cast<double>(out.reward),
                              out.next_phases});
                if (total_steps_ >= config_.buffering_epochs &&
                    total_steps_ % std::max(1, config_.update_every) == 0 &&
                    buffer_.size() >= static_cast<size_t>(config_.batch_size)) {
                    const auto batch =
                        buffer_.sample(static_cast<size_t>(config_.batch_size), sample_rng_);
                    const agents::LossReport report = agent_->update(batch);
                    if (!report.finite())
                        throw std::runtime_error(
                            "training diverged: non-finite loss at epoch " +
                            std::to_string(total_steps_));
                }
                ++total_steps_;
                gains.push_back(out.gain);
                if (out.gain > best_gain_) {
                    best_gain_ = out.gain;
                    best_phases_.assign(action.begin(),
                                        action.begin() + config_.num_antennas);
                }
                if (const auto mask = agent_->eval_mask(prev_phases, action)) {
                    tpr_sum += metrics::tpr(mask->bits, relevant);
                    tpr_lit_sum += metrics::tpr_literal(mask->bits, relevant);
                    sel_sum += mask->selected_count();
                    ++mask_samples;
                }
            }
            metrics::EpisodeRecord rec;
            rec.episode = episode_index_;
            rec.avg_gain = metrics::episodic_gain(gains);
            rec.final_beta = state.beta;
            if (mask_samples > 0) {
                rec.tpr = tpr_sum / mask_samples;
                rec.tpr_literal = tpr_lit_sum / mask_samples;
                rec.selected_count = sel_sum / mask_samples;
            }
            episodes_.push_back(rec);
            if (config_.episode_callback) config_.episode_callback(label_, rec);
            ++episode_index_;
        }
    }

    TrainResult finish(const env::BeamEnv& final_env) {
        TrainResult result;
        result.final_eval_gain =
            evaluate_agent(final_env, *agent_, mix_seed(episode_seed_base_, 0x5EEDULL));
        result.episodes = std::move(episodes_);
        if (best_phases_.empty())
            best_phases_.assign(config_.num_antennas, 0.0);
        result.best_beam = radio::BeamVector(best_phases_);
        result.best_gain = best_gain_;
        result.agent = std::move(agent_);
        return result;
    }

    const radio::BeamVector current_best_beam() const {
        if (best_phases_.empty())
            return radio::BeamVector(std::vector<double>(config_.num_antennas, 0.0));
        return radio::BeamVector(best_phases_);
    }

private:
    const RunConfig& config_;
    std::string label_;
    std::unique_ptr<agents::Agent> agent_;
    agents::ReplayBuffer buffer_;
    std::mt19937_64 sample_rng_;
    uint64_t episode_seed_base_;
    long total_steps_ = 0;
    int episode_index_ = 0;
    double best_gain_ = -1.0;
    std::vector<double> best_phases_;
    std::vector<metrics::EpisodeRecord> episodes_;
};

void run_parallel(std::vector<std::function<void()>>& jobs, int max_threads) {
    if (max_threads <= 1 || jobs.size() <= 1) {
        for (auto& job : jobs) job();
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    const int n_threads = std::min<int>(max_threads, static_cast<int>(jobs.size()));
    std::vector<std::exception_ptr> errors(n_threads);
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1))
                    jobs[i]();
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

radio::ArrayGeometry RunConfig::geometry() const {
    return radio::ArrayGeometry::uniform_linear(num_antennas, wavelength, spacing_wavelengths);
}

agents::AgentConfig RunConfig::resolved_agent_config() const {
    agents::AgentConfig cfg = agent;
    cfg.num_antennas = num_antennas;
    cfg.num_redundant = num_redundant;
    cfg.buffering_steps = buffering_epochs;
    cfg.curriculum.total_steps = std::max<long>(1, total_epochs - buffering_epochs);
    if (cfg.curriculum.pr_end <= 0.0)
        cfg.curriculum.pr_end =
            static_cast<double>(num_antennas) / static_cast<double>(num_antennas + num_redundant);
    return cfg;
}

TrainResult train_single_agent(const env::BeamEnv& environment, const RunConfig& config,
                               uint64_t seed) {
    AgentTrainer trainer(config, seed);
    trainer.train_for(environment, config.total_epochs);
    return trainer.finish(environment);
}

double evaluate_agent(const env::BeamEnv& environment, agents::Agent& agent, uint64_t seed) {
    env::EnvState state = environment.reset(seed);
    std::vector<double> gains;
    gains.reserve(environment.config().episode_length);
    for (int t = 0; t < environment.config().episode_length; ++t) {
        const auto action = agent.act(state.phases, /*explore=*/false);
        const auto out = environment.step(state, action);
        gains.push_back(out.gain);
    }
    return metrics::episodic_gain(gains);
}

radio::BeamVector fine_tune(const radio::BeamVector& beam, const Evaluator& evaluate,
                            const radio::PhaseCodomain& codomain, int iterations,
                            double noise_std, uint64_t seed) {
    if (iterations < 0) throw std::invalid_argument("fine_tune: negative iteration count");
    radio::BeamVector best = radio::quantize(beam, codomain);
    double best_value = evaluate(best);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_std);
    std::vector<double> phases(best.phases.size());
    for (int it = 0; it < iterations; ++it) {
        for (size_t m = 0; m < phases.size(); ++m)
            phases[m] = radio::wrap_phase(best.phases[m] + noise(rng));
        radio::BeamVector candidate = radio::quantize(radio::BeamVector(phases), codomain);
        const double value = evaluate(candidate);
        if (value > best_value) {
            best_value = value;
            best = std::move(candidate);
        }
    }
    return best;
}

CommPipelineResult run_comm_pipeline(const scenario::Scene& scene,
                                     const std::vector<radio::ChannelVector>& channels,
                                     const RunConfig& config) {
    scene.validate();
    const int n_c = config.num_comm_beams;
    if (static_cast<int>(channels.size()) < n_c)
        throw std::invalid_argument("run_comm_pipeline: fewer channels than clusters");
    const auto geom = config.geometry();
    const radio::PhaseCodomain codomain(config.phase_bits);
    const auto probes = clustering::default_probe_beams(geom, config.probe_count, codomain);

    // Re-cluster once per snapshot window; at least one round.
    const int cadence = std::max(1, config.recluster_every_snapshots);
    const int num_rounds = scene.snapshots.empty()
                               ? 1
                               : std::max<int>(1, static_cast<int>(scene.snapshots.size()) /
                                                      cadence);
    const long epochs_per_round = std::max<long>(1, config.total_epochs / num_rounds);

    std::vector<AgentTrainer> trainers;
    trainers.reserve(n_c);
    for (int n = 0; n < n_c; ++n)
        trainers.emplace_back(config, mix_seed(config.seed, 100 + n), "comm" + std::to_string(n));

    CommPipelineResult result;
    std::vector<int> agent_to_cluster(n_c);
    std::iota(agent_to_cluster.begin(), agent_to_cluster.end(), 0);

    std::vector<std::vector<radio::ChannelVector>> cluster_channels(n_c);
    for (int round = 0; round < num_rounds; ++round) {
        const auto gains = clustering::probe_gains(probes, channels);
        const auto features = clustering::feature_matrix(gains);
        result.partition = clustering::kmeans(features, n_c, mix_seed(config.seed, 500 + round));
        for (auto& cluster : cluster_channels) cluster.clear();
        for (size_t k = 0; k < channels.size(); ++k)
            cluster_channels[result.partition.assignments[k]].push_back(channels[k]);

        if (n_c > 1 && round > 0) {
            // Hungarian re-assignment from each agent's temporarily best beam.
            std::vector<radio::BeamVector> best_beams;
            best_beams.reserve(n_c);
            for (const auto& t : trainers) best_beams.push_back(t.current_best_beam());
            const auto cost = clustering::assignment_cost(best_beams, cluster_channels);
            result.assignment = clustering::assign(cost);
            agent_to_cluster = result.assignment.permutation;
        } else if (n_c == 1) {
            result.assignment.permutation = {0};
            result.assignment.cost = {{0.0}};
        }

        std::vector<std::function<void()>> jobs;
        for (int n = 0; n < n_c; ++n) {
            jobs.emplace_back([&, n] {
                env::BeamEnvConfig env_cfg;
                env_cfg.num_antennas = config.num_antennas;
                env_cfg.num_redundant = config.num_redundant;
                env_cfg.task = env::CommTask{cluster_channels[agent_to_cluster[n]]};
                env_cfg.quantize_in_loop = config.quantize_in_loop;
                env_cfg.codomain = codomain;
                env_cfg.episode_length = config.epochs_per_episode;
                env::BeamEnv environment(std::move(env_cfg));
                trainers[n].train_for(environment, epochs_per_round);
            });
        }
        run_parallel(jobs, config.parallel_agents);
    }

    for (int n = 0; n < n_c; ++n) {
        const auto& my_channels = cluster_channels[agent_to_cluster[n]];
        env::BeamEnvConfig env_cfg;
        env_cfg.num_antennas = config.num_antennas;
        env_cfg.num_redundant = config.num_redundant;
        env_cfg.task = env::CommTask{my_channels};
        env_cfg.quantize_in_loop = config.quantize_in_loop;
        env_cfg.codomain = codomain;
        env_cfg.episode_length = config.epochs_per_episode;
        env::BeamEnv environment(std::move(env_cfg));
        TrainResult tr = trainers[n].finish(environment);
        const auto tuned = fine_tune(
            tr.best_beam,
            [&](const radio::BeamVector& b) { return radio::avg_comm_gain(b, my_channels); },
            codomain, config.fine_tune_iterations, config.fine_tune_noise_std,
            mix_seed(config.seed, 900 + n));
        result.beams.push_back(tuned);
        result.agent_results.push_back(std::move(tr));
    }
    return result;
}

SensePipelineResult run_sense_pipeline(const scenario::Scene& scene, const RunConfig& config) {
    scene.validate();
    bool any_vehicle = false;
    for (const auto& s : scene.snapshots) any_vehicle |= !s.vehicle_positions.empty();
    if (!any_vehicle)
        throw std::invalid_argument("run_sense_pipeline: scene has no vehicles to sense");

    const auto geom = config.geometry();
    const radio::PhaseCodomain codomain(config.phase_bits);

    SensePipelineResult result;
    // Targets: the vehicle nearest to the user grid, one snapshot per beam.
    std::vector<scenario::Point> targets;
    for (int i = 0; i < config.num_sense_beams; ++i) {
        const auto& snap = scene.snapshots[i % scene.snapshots.size()];
        if (snap.vehicle_positions.empty())
            throw std::invalid_argument("run_sense_pipeline: snapshot " +
                                        std::to_string(snap.time_index) + " has no vehicles");
        const int j = scenario::nearest_vehicle(scene, snap);
        targets.push_back(snap.vehicle_positions[j]);
        result.target_aoas.push_back(scenario::target_aoa(scene.bs_position, targets.back()));
    }

    result.beams.resize(targets.size());
    result.agent_results.resize(targets.size());
    std::vector<std::function<void()>> jobs;
    for (size_t i = 0; i < targets.size(); ++i) {
        jobs.emplace_back([&, i] {
            env::BeamEnvConfig env_cfg;
            env_cfg.num_antennas = config.num_antennas;
            env_cfg.num_redundant = config.num_redundant;
            env_cfg.task = env::SenseTask{geom, result.target_aoas[i]};
            env_cfg.quantize_in_loop = config.quantize_in_loop;
            env_cfg.codomain = codomain;
            env_cfg.episode_length = config.epochs_per_episode;
            env::BeamEnv environment(std::move(env_cfg));
            AgentTrainer trainer(config, mix_seed(config.seed, 200 + i),
                                 "sense" + std::to_string(i));
            trainer.train_for(environment, config.total_epochs);
            TrainResult tr = trainer.finish(environment);
            const double aoa = result.target_aoas[i];
            result.beams[i] = fine_tune(
                tr.best_beam,
                [&](const radio::BeamVector& b) { return radio::sensing_gain(b, geom, aoa); },
                codomain, config.fine_tune_iterations, config.fine_tune_noise_std,
                mix_seed(config.seed, 950 + i));
            result.agent_results[i] = std::move(tr);
        });
    }
    run_parallel(jobs, config.parallel_agents);
    return result;
}

void Codebook::save(const std::filesystem::path& path) const {
    nlohmann::ordered_json j;
    j["num_antennas"] = num_antennas;
    j["phase_bits"] = phase_bits;
    j["wavelength"] = wavelength;
    j["spacing_wavelengths"] = spacing_wavelengths;
    auto beams = nlohmann::ordered_json::array();
    for (const auto& e : entries) {
        nlohmann::ordered_json jb;
        jb["role"] = e.role;
        jb["id"] = e.id;
        jb["phases"] = e.beam.phases;
        beams.push_back(jb);
    }
    j["beams"] = beams;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Codebook Codebook::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open codebook: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("codebook " + path.string() + ": " + e.what());
    }
    Codebook book;
    book.num_antennas = j.at("num_antennas").get<int>();
    book.phase_bits = j.at("phase_bits").get<int>();
    book.wavelength = j.value("wavelength", 0.1);
    book.spacing_wavelengths = j.value("spacing_wavelengths", 0.5);
    for (const auto& jb : j.at("beams")) {
        CodebookEntry e;
        e.role = jb.at("role").get<std::string>();
        e.id = jb.at("id").get<int>();
        e.beam = radio::BeamVector(jb.at("phases").get<std::vector<double>>());
        if (e.beam.num_antennas() != book.num_antennas)
            throw std::runtime_error("codebook " + path.string() + ": beam length mismatch");
        book.entries.push_back(std::move(e));
    }
    return book;
}

}  // namespace jcas::pipeline
