#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "jcas/nn.hpp"

namespace jcas::agents {

struct Transition {
    std::vector<double> state;
    std::vector<double> action;
    double reward = 0.0;
    std::vector<double> next_state;
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(size_t capacity);

    void push(Transition t);
    size_t size() const { return items_.size(); }
    size_t capacity() const { return capacity_; }
    const Transition& at(size_t i) const { return items_[i]; }

    // Uniform with replacement.
    std::vector<const Transition*> sample(size_t batch, std::mt19937_64& rng) const;

private:
    size_t capacity_;
    size_t write_pos_ = 0;
    std::vector<Transition> items_;
};

enum class AgentKind { Ddpg, Td3, Td3Invase };
const char* to_string(AgentKind k);
AgentKind agent_kind_from_string(std::string_view name);

// Piecewise-linear ramps: lambda rises, p_r falls, both over ramp_fraction of
// total_steps and constant afterwards.
struct CurriculumSchedule {
    double lambda_start = 0.0;
    double lambda_end = 1.0;
    double pr_start = 0.9;
    double pr_end = 0.0;  // callers usually set M/(M+M_Red)
    double ramp_fraction = 0.5;
    long total_steps = 1;
    int n_rounds = 1;

    double lambda_at(long step) const;
    double pr_at(long step) const;
};

struct AgentConfig {
    int num_antennas = 8;   // M
    int num_redundant = 0;  // M_Red
    // Hidden widths; 0 means the M-scaled defaults (16M actor, 32M critic).
    int actor_hidden = 0;
    int critic_hidden = 0;
    int selector_hidden = 100;
    double gamma = 0.99;
    double tau = 0.005;
    double smoothing_noise_std = 0.2;
    double smoothing_noise_clip = 0.5;
    double explore_noise_std = 0.1 * std::numbers::pi;
    int policy_delay = 2;
    double lr_actor = 1e-3;
    double lr_critic = 1e-3;
    double lr_selector = 1e-3;
    long buffering_steps = 50000;  // uniform-random action phase
    CurriculumSchedule curriculum;
    // Output-layer bias of the selector at init; the default logit(pr_start)
    // makes the initial selection proportion match the curriculum's easy end,
    // so early critics train on nearly unmasked actions.
    double selector_init_bias = 1e300;  // sentinel: derive from pr_start
    // Phases are circular: feed networks (cos, sin) pairs instead of raw
    // angles. Masked action dims zero their whole pair, which separates
    // "masked" from "phase 0". Networks built with raw inputs still work;
    // helpers detect the encoding from the net's input width.
    bool trig_input = true;

    int action_dim() const { return num_antennas + num_redundant; }
    int actor_hidden_units() const { return actor_hidden > 0 ? actor_hidden : 16 * num_antennas; }
    int critic_hidden_units() const { return critic_hidden > 0 ? critic_hidden : 32 * num_antennas; }
};

struct SelectionMask {
    std::vector<uint8_t> bits;
    std::vector<double> probs;  // first-round sigmoid outputs

    int selected_count() const;
};

// One selector application per round; round masks combine by elementwise AND,
// so each round's selected set is a subset of the previous one. Stochastic
// mode samples Bernoulli bits, otherwise probabilities threshold at 0.5.
SelectionMask select_mask(const nn::DenseNet& selector, std::span<const double> state,
                          std::span<const double> action, bool stochastic, int n_rounds,
                          std::mt19937_64* rng);

struct LossReport {
    double critic_loss = 0.0;
    double baseline_loss = 0.0;
    double selector_objective = 0.0;
    double actor_objective = 0.0;
    bool actor_updated = false;

    bool finite() const;
};

class Agent {
public:
    virtual ~Agent() = default;
    virtual AgentKind kind() const = 0;
    virtual const AgentConfig& config() const = 0;

    // Uniform random during the buffering phase (explore only); otherwise the
    // actor output, plus wrapped Gaussian noise when exploring.
    virtual std::vector<double> act(std::span<const double> state, bool explore) = 0;

    virtual LossReport update(const std::vector<const Transition*>& batch) = 0;

    virtual const nn::DenseNet& actor_net() const = 0;
    virtual long update_count() const = 0;

    // Deterministic selection mask; empty for agents without a selector.
    virtual std::optional<SelectionMask> eval_mask(std::span<const double> state,
                                                   std::span<const double> action) const {
        (void)state;
        (void)action;
        return std::nullopt;
    }

    virtual void save(const std::filesystem::path& dir) const = 0;
};

class DdpgAgent final : public Agent {
public:
    DdpgAgent(AgentConfig cfg, uint64_t seed);

    AgentKind kind() const override { return AgentKind::Ddpg; }
    const AgentConfig& config() const override { return cfg_; }
    std::vector<double> act(std::span<const double> state, bool explore) override;
    LossReport update(const std::vector<const Transition*>& batch) override;
    const nn::DenseNet& actor_net() const override { return actor; }
    long update_count() const override { return update_count_; }
    void save(const std::filesystem::path& dir) const override;

    nn::DenseNet actor, actor_target;
    nn::DenseNet critic, critic_target;

private:
    friend std::unique_ptr<Agent> load_agent(const std::filesystem::path&);
    AgentConfig cfg_;
    nn::AdamOptimizer opt_actor_, opt_critic_;
    std::mt19937_64 noise_rng_;
    long act_count_ = 0;
    long update_count_ = 0;
};

class Td3Agent final : public Agent {
public:
    Td3Agent(AgentConfig cfg, uint64_t seed);

    AgentKind kind() const override { return AgentKind::Td3; }
    const AgentConfig& config() const override { return cfg_; }
    std::vector<double> act(std::span<const double> state, bool explore) override;
    LossReport update(const std::vector<const Transition*>& batch) override;
    const nn::DenseNet& actor_net() const override { return actor; }
    long update_count() const override { return update_count_; }
    void save(const std::filesystem::path& dir) const override;

    nn::DenseNet actor, actor_target;
    nn::DenseNet critic1, critic2, critic1_target, critic2_target;

private:
    friend std::unique_ptr<Agent> load_agent(const std::filesystem::path&);
    AgentConfig cfg_;
    nn::AdamOptimizer opt_actor_, opt_critic1_, opt_critic2_;
    std::mt19937_64 noise_rng_;
    long act_count_ = 0;
    long update_count_ = 0;
};

class Td3InvaseAgent final : public Agent {
public:
    Td3InvaseAgent(AgentConfig cfg, uint64_t seed);

    AgentKind kind() const override { return AgentKind::Td3Invase; }
    const AgentConfig& config() const override { return cfg_; }
    std::vector<double> act(std::span<const double> state, bool explore) override;
    LossReport update(const std::vector<const Transition*>& batch) override;
    const nn::DenseNet& actor_net() const override { return actor; }
    long update_count() const override { return update_count_; }
    std::optional<SelectionMask> eval_mask(std::span<const double> state,
                                           std::span<const double> action) const override;
    void save(const std::filesystem::path& dir) const override;

    double current_lambda() const;
    double current_pr() const;

    nn::DenseNet actor, actor_target;
    nn::DenseNet critic1, critic2, critic1_target, critic2_target;
    nn::DenseNet baseline1, baseline2, baseline1_target, baseline2_target;
    nn::DenseNet selector, selector_target;

private:
    friend std::unique_ptr<Agent> load_agent(const std::filesystem::path&);
    AgentConfig cfg_;
    nn::AdamOptimizer opt_actor_, opt_critic1_, opt_critic2_;
    nn::AdamOptimizer opt_baseline1_, opt_baseline2_, opt_selector_;
    std::mt19937_64 noise_rng_;
    std::mt19937_64 mask_rng_;
    long act_count_ = 0;
    long update_count_ = 0;
};

std::unique_ptr<Agent> make_agent(AgentKind kind, const AgentConfig& cfg, uint64_t seed);

// Checkpoint directory: one binary file per network plus manifest.json naming
// roles, dimensions, and curriculum state.
std::unique_ptr<Agent> load_agent(const std::filesystem::path& manifest_path);

}  // namespace jcas::agents
