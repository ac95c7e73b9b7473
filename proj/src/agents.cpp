#include "jcas/agents.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "jcas/radio.hpp"
#include "json.hpp"

namespace jcas::agents {

namespace {

constexpr double kPi = std::numbers::pi;

// Clamp a smoothed target action into the phase range; the -pi edge folds to pi.
double clamp_phase(double x) {
    double c = std::clamp(x, -kPi, kPi);
    if (c == -kPi) c = kPi;
    return c;
}

// State/action vectors are presented to a network either raw or as (cos, sin)
// pairs; which one is read off the network's input width. Masked action dims
// become exact zeros in either encoding.
void fill_state(const nn::DenseNet& net, std::span<const double> state,
                std::vector<double>& out) {
    if (net.input_size() == static_cast<int>(state.size())) {
        out.assign(state.begin(), state.end());
        return;
    }
    out.resize(2 * state.size());
    for (size_t i = 0; i < state.size(); ++i) {
        out[2 * i] = std::cos(state[i]);
        out[2 * i + 1] = std::sin(state[i]);
    }
}

void fill_state_action(const nn::DenseNet& net, std::span<const double> state,
                       std::span<const double> action, const uint8_t* mask,
                       std::vector<double>& out) {
    const size_t sd = state.size(), ad = action.size();
    if (net.input_size() == static_cast<int>(sd + ad)) {
        out.resize(sd + ad);
        std::copy(state.begin(), state.end(), out.begin());
        for (size_t i = 0; i < ad; ++i)
            out[sd + i] = (mask != nullptr && !mask[i]) ? 0.0 : action[i];
        return;
    }
    out.resize(2 * (sd + ad));
    for (size_t i = 0; i < sd; ++i) {
        out[2 * i] = std::cos(state[i]);
        out[2 * i + 1] = std::sin(state[i]);
    }
    for (size_t i = 0; i < ad; ++i) {
        const bool keep = (mask == nullptr) || mask[i];
        out[2 * sd + 2 * i] = keep ? std::cos(action[i]) : 0.0;
        out[2 * sd + 2 * i + 1] = keep ? std::sin(action[i]) : 0.0;
    }
}

// Chain a Q-network's input gradient back to raw action coordinates.
void action_gradient(const nn::DenseNet& net, std::span<const double> state,
                     std::span<const double> action,
                     const std::vector<double>& input_grad, std::vector<double>& out) {
    const size_t sd = state.size(), ad = action.size();
    out.resize(ad);
    if (net.input_size() == static_cast<int>(sd + ad)) {
        for (size_t i = 0; i < ad; ++i) out[i] = input_grad[sd + i];
        return;
    }
    for (size_t i = 0; i < ad; ++i) {
        const double gc = input_grad[2 * sd + 2 * i];
        const double gs = input_grad[2 * sd + 2 * i + 1];
        out[i] = -std::sin(action[i]) * gc + std::cos(action[i]) * gs;
    }
}

nn::DenseNet make_actor(const AgentConfig& cfg, std::mt19937_64& rng) {
    const int d = cfg.action_dim();
    const int in = cfg.trig_input ? 2 * d : d;
    const int h = cfg.actor_hidden_units();
    return nn::DenseNet::random(
        {in, h, h, d},
        {nn::Activation::Relu, nn::Activation::Relu, nn::Activation::TanhScaled}, kPi, rng);
}

nn::DenseNet make_q_net(const AgentConfig& cfg, std::mt19937_64& rng) {
    const int d = cfg.action_dim();
    const int in = cfg.trig_input ? 4 * d : 2 * d;
    const int h = cfg.critic_hidden_units();
    return nn::DenseNet::random(
        {in, h, h, 1},
        {nn::Activation::Relu, nn::Activation::Relu, nn::Activation::Linear}, 1.0, rng);
}

nn::DenseNet make_selector(const AgentConfig& cfg, std::mt19937_64& rng) {
    const int d = cfg.action_dim();
    const int in = cfg.trig_input ? 4 * d : 2 * d;
    const int h = cfg.selector_hidden;
    auto net = nn::DenseNet::random(
        {in, h, h, d},
        {nn::Activation::Relu, nn::Activation::Relu, nn::Activation::Sigmoid}, 1.0, rng);
    double bias = cfg.selector_init_bias;
    if (bias >= 1e299) {
        const double p = std::clamp(cfg.curriculum.pr_start, 0.05, 0.995);
        bias = std::log(p / (1.0 - p));
    }
    for (double& b : net.bias_vectors().back()) b += bias;
    return net;
}

double q_value(const nn::DenseNet& net, std::span<const double> state,
               std::span<const double> action, const uint8_t* mask,
               std::vector<double>& scratch_in, std::vector<double>& scratch_out) {
    fill_state_action(net, state, action, mask, scratch_in);
    net.infer_into(scratch_in, scratch_out);
    return scratch_out[0];
}

void check_batch(const std::vector<const Transition*>& batch, int d) {
    if (batch.empty()) throw std::invalid_argument("update: empty batch");
    for (const Transition* t : batch) {
        if (static_cast<int>(t->state.size()) != d ||
            static_cast<int>(t->action.size()) != d ||
            static_cast<int>(t->next_state.size()) != d)
            throw std::invalid_argument("update: transition dimension mismatch");
    }
}

}  // namespace

ReplayBuffer::ReplayBuffer(size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
    items_.reserve(std::min<size_t>(capacity, 1 << 20));
}

void ReplayBuffer::push(Transition t) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
    } else {
        items_[write_pos_] = std::move(t);
        write_pos_ = (write_pos_ + 1) % capacity_;
    }
}

std::vector<const Transition*> ReplayBuffer::sample(size_t batch, std::mt19937_64& rng) const {
    if (items_.empty()) throw std::logic_error("cannot sample from an empty replay buffer");
    std::uniform_int_distribution<size_t> pick(0, items_.size() - 1);
    std::vector<const Transition*> out(batch);
    for (size_t i = 0; i < batch; ++i) out[i] = &items_[pick(rng)];
    return out;
}

const char* to_string(AgentKind k) {
    switch (k) {
        case AgentKind::Ddpg: return "ddpg";
        case AgentKind::Td3: return "td3";
        case AgentKind::Td3Invase: return "td3-invase";
    }
    return "ddpg";
}

AgentKind agent_kind_from_string(std::string_view name) {
    if (name == "ddpg") return AgentKind::Ddpg;
    if (name == "td3") return AgentKind::Td3;
    if (name == "td3-invase") return AgentKind::Td3Invase;
    throw std::invalid_argument("unknown agent kind: " + std::string(name));
}

double CurriculumSchedule::lambda_at(long step) const {
    const double ramp = std::max(1.0, ramp_fraction * static_cast<double>(total_steps));
    const double f = std::min(1.0, static_cast<double>(step) / ramp);
    return lambda_start + (lambda_end - lambda_start) * f;
}

double CurriculumSchedule::pr_at(long step) const {
    const double ramp = std::max(1.0, ramp_fraction * static_cast<double>(total_steps));
    const double f = std::min(1.0, static_cast<double>(step) / ramp);
    return pr_start + (pr_end - pr_start) * f;
}

int SelectionMask::selected_count() const {
    int n = 0;
    for (uint8_t b : bits) n += b;
    return n;
}

SelectionMask select_mask(const nn::DenseNet& selector, std::span<const double> state,
                          std::span<const double> action, bool stochastic, int n_rounds,
                          std::mt19937_64* rng) {
    if (n_rounds < 1) throw std::invalid_argument("select_mask: n_rounds must be >= 1");
    if (stochastic && rng == nullptr)
        throw std::invalid_argument("select_mask: stochastic mode needs an rng");
    const size_t d = action.size();
    SelectionMask mask;
    mask.bits.assign(d, 1);
    std::vector<double> input, probs;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int round = 0; round < n_rounds; ++round) {
        fill_state_action(selector, state, action, mask.bits.data(), input);
        selector.infer_into(input, probs);
        for (size_t i = 0; i < d; ++i) {
            const bool keep = stochastic ? (unit(*rng) < probs[i]) : (probs[i] >= 0.5);
            if (!keep) mask.bits[i] = 0;
        }
        if (round == 0) mask.probs = probs;
    }
    return mask;
}

bool LossReport::finite() const {
    return std::isfinite(critic_loss) && std::isfinite(baseline_loss) &&
           std::isfinite(selector_objective) && std::isfinite(actor_objective);
}

// ---------------------------------------------------------------------------
// shared act() behavior
// ---------------------------------------------------------------------------

namespace {

std::vector<double> act_impl(const nn::DenseNet& actor, const AgentConfig& cfg,
                             std::span<const double> state, bool explore, long& act_count,
                             std::mt19937_64& rng) {
    const int d = cfg.action_dim();
    if (static_cast<int>(state.size()) != d)
        throw std::invalid_argument("act: state dimension mismatch");
    if (explore && act_count < cfg.buffering_steps) {
        ++act_count;
        std::uniform_real_distribution<double> dist(-kPi, kPi);
        std::vector<double> a(d);
        for (double& x : a) x = -dist(rng);  // (-pi, pi]
        return a;
    }
    static thread_local std::vector<double> actor_in;
    fill_state(actor, state, actor_in);
    std::vector<double> a = actor.infer(actor_in);
    if (explore) {
        ++act_count;
        std::normal_distribution<double> noise(0.0, cfg.explore_noise_std);
        for (double& x : a) x = radio::wrap_phase(x + noise(rng));
    }
    return a;
}

// Critic regression toward fixed targets; returns per-sample squared errors.
// Gradients are averaged over the batch inside the accumulation weight.
struct QTrainer {
    nn::DenseNet& net;
    nn::Gradients grads;
    double loss_sum = 0.0;

    explicit QTrainer(nn::DenseNet& n) : net(n), grads(n.zero_gradients()) {}

    double train_sample(std::span<const double> input, double target, double inv_batch) {
        const double pred = net.forward(input)[0];
        const double err = pred - target;
        const double upstream = 2.0 * err * inv_batch;
        net.backward_accumulate(std::span<const double>(&upstream, 1), grads);
        loss_sum += err * err;
        return err * err;
    }
};

}  // namespace

// ---------------------------------------------------------------------------
// DDPG
// ---------------------------------------------------------------------------

DdpgAgent::DdpgAgent(AgentConfig cfg, uint64_t seed)
    : cfg_(cfg),
      opt_actor_(cfg.lr_actor),
      opt_critic_(cfg.lr_critic),
      noise_rng_(seed ^ 0x9e3779b97f4a7c15ULL) {
    std::mt19937_64 init_rng(seed);
    actor = make_actor(cfg_, init_rng);
    critic = make_q_net(cfg_, init_rng);
    actor_target = actor;
    critic_target = critic;
}

std::vector<double> DdpgAgent::act(std::span<const double> state, bool explore) {
    return act_impl(actor, cfg_, state, explore, act_count_, noise_rng_);
}

LossReport DdpgAgent::update(const std::vector<const Transition*>& batch) {
    const int d = cfg_.action_dim();
    check_batch(batch, d);
    const double inv_b = 1.0 / static_cast<double>(batch.size());

    LossReport report;
    QTrainer critic_trainer(critic);
    std::vector<double> sa, scratch, next_action, actor_in;
    for (const Transition* t : batch) {
        fill_state(actor_target, t->next_state, actor_in);
        actor_target.infer_into(actor_in, next_action);
        const double target_q =
            t->reward + cfg_.gamma * q_value(critic_target, t->next_state, next_action,
                                             nullptr, sa, scratch);
        fill_state_action(critic, t->state, t->action, nullptr, sa);
        critic_trainer.train_sample(sa, target_q, inv_b);
    }
    opt_critic_.apply(critic, critic_trainer.grads);
    report.critic_loss = critic_trainer.loss_sum * inv_b;

    // actor ascends the critic every update
    nn::Gradients actor_grads = actor.zero_gradients();
    nn::Gradients critic_scratch = critic.zero_gradients();
    std::vector<double> input_grad, pi_grad;
    double actor_obj = 0.0;
    for (const Transition* t : batch) {
        fill_state(actor, t->state, actor_in);
        const std::vector<double>& pi = actor.forward(actor_in);
        fill_state_action(critic, t->state, pi, nullptr, sa);
        const double q = critic.forward(sa)[0];
        actor_obj += q * inv_b;
        const double upstream = -inv_b;  // maximize Q
        critic.backward_accumulate(std::span<const double>(&upstream, 1), critic_scratch, 1.0,
                                   &input_grad);
        action_gradient(critic, t->state, pi, input_grad, pi_grad);
        actor.backward_accumulate(pi_grad, actor_grads);
    }
    opt_actor_.apply(actor, actor_grads);
    report.actor_objective = actor_obj;
    report.actor_updated = true;

    nn::soft_update(critic_target, critic, cfg_.tau);
    nn::soft_update(actor_target, actor, cfg_.tau);
    ++update_count_;
    return report;
}

// ---------------------------------------------------------------------------
// TD3
// ---------------------------------------------------------------------------

Td3Agent::Td3Agent(AgentConfig cfg, uint64_t seed)
    : cfg_(cfg),
      opt_actor_(cfg.lr_actor),
      opt_critic1_(cfg.lr_critic),
      opt_critic2_(cfg.lr_critic),
      noise_rng_(seed ^ 0x9e3779b97f4a7c15ULL) {
    std::mt19937_64 init_rng(seed);
    actor = make_actor(cfg_, init_rng);
    critic1 = make_q_net(cfg_, init_rng);
    critic2 = make_q_net(cfg_, init_rng);
    actor_target = actor;
    critic1_target = critic1;
    critic2_target = critic2;
}

std::vector<double> Td3Agent::act(std::span<const double> state, bool explore) {
    return act_impl(actor, cfg_, state, explore, act_count_, noise_rng_);
}

LossReport Td3Agent::update(const std::vector<const Transition*>& batch) {
    const int d = cfg_.action_dim();
    check_batch(batch, d);
    const double inv_b = 1.0 / static_cast<double>(batch.size());

    LossReport report;
    QTrainer c1(critic1), c2(critic2);
    std::vector<double> sa, scratch, smoothed, actor_in;
    std::normal_distribution<double> smooth(0.0, cfg_.smoothing_noise_std);
    for (const Transition* t : batch) {
        fill_state(actor_target, t->next_state, actor_in);
        actor_target.infer_into(actor_in, smoothed);
        if (cfg_.smoothing_noise_std > 0.0) {
            for (double& x : smoothed) {
                const double eps = std::clamp(smooth(noise_rng_), -cfg_.smoothing_noise_clip,
                                              cfg_.smoothing_noise_clip);
                x = clamp_phase(x + eps);
            }
        }
        const double q1 = q_value(critic1_target, t->next_state, smoothed, nullptr, sa, scratch);
        const double q2 = q_value(critic2_target, t->next_state, smoothed, nullptr, sa, scratch);
        const double target_q = t->reward + cfg_.gamma * std::min(q1, q2);
        fill_state_action(critic1, t->state, t->action, nullptr, sa);
        c1.train_sample(sa, target_q, inv_b);
        c2.train_sample(sa, target_q, inv_b);
    }
    opt_critic1_.apply(critic1, c1.grads);
    opt_critic2_.apply(critic2, c2.grads);
    report.critic_loss = 0.5 * (c1.loss_sum + c2.loss_sum) * inv_b;

    ++update_count_;
    if (update_count_ % cfg_.policy_delay == 0) {
        nn::Gradients actor_grads = actor.zero_gradients();
        nn::Gradients critic_scratch = critic1.zero_gradients();
        std::vector<double> input_grad, pi_grad;
        double actor_obj = 0.0;
        for (const Transition* t : batch) {
            fill_state(actor, t->state, actor_in);
            const std::vector<double>& pi = actor.forward(actor_in);
            fill_state_action(critic1, t->state, pi, nullptr, sa);
            actor_obj += critic1.forward(sa)[0] * inv_b;
            const double upstream = -inv_b;
            critic1.backward_accumulate(std::span<const double>(&upstream, 1), critic_scratch,
                                        1.0, &input_grad);
            action_gradient(critic1, t->state, pi, input_grad, pi_grad);
            actor.backward_accumulate(pi_grad, actor_grads);
        }
        opt_actor_.apply(actor, actor_grads);
        report.actor_objective = actor_obj;
        report.actor_updated = true;
        nn::soft_update(critic1_target, critic1, cfg_.tau);
        nn::soft_update(critic2_target, critic2, cfg_.tau);
        nn::soft_update(actor_target, actor, cfg_.tau);
    }
    return report;
}

// ---------------------------------------------------------------------------
// TD3-INVASE
// ---------------------------------------------------------------------------

Td3InvaseAgent::Td3InvaseAgent(AgentConfig cfg, uint64_t seed)
    : cfg_(cfg),
      opt_actor_(cfg.lr_actor),
      opt_critic1_(cfg.lr_critic),
      opt_critic2_(cfg.lr_critic),
      opt_baseline1_(cfg.lr_critic),
      opt_baseline2_(cfg.lr_critic),
      opt_selector_(cfg.lr_selector),
      noise_rng_(seed ^ 0x9e3779b97f4a7c15ULL),
      mask_rng_(seed ^ 0xc2b2ae3d27d4eb4fULL) {
    std::mt19937_64 init_rng(seed);
    actor = make_actor(cfg_, init_rng);
    critic1 = make_q_net(cfg_, init_rng);
    critic2 = make_q_net(cfg_, init_rng);
    baseline1 = make_q_net(cfg_, init_rng);
    baseline2 = make_q_net(cfg_, init_rng);
    selector = make_selector(cfg_, init_rng);
    actor_target = actor;
    critic1_target = critic1;
    critic2_target = critic2;
    baseline1_target = baseline1;
    baseline2_target = baseline2;
    selector_target = selector;
}

std::vector<double> Td3InvaseAgent::act(std::span<const double> state, bool explore) {
    return act_impl(actor, cfg_, state, explore, act_count_, noise_rng_);
}

double Td3InvaseAgent::current_lambda() const {
    return cfg_.curriculum.lambda_at(update_count_);
}

double Td3InvaseAgent::current_pr() const { return cfg_.curriculum.pr_at(update_count_); }

std::optional<SelectionMask> Td3InvaseAgent::eval_mask(std::span<const double> state,
                                                       std::span<const double> action) const {
    return select_mask(selector, state, action, /*stochastic=*/false,
                       cfg_.curriculum.n_rounds, nullptr);
}

LossReport Td3InvaseAgent::update(const std::vector<const Transition*>& batch) {
    const int d = cfg_.action_dim();
    check_batch(batch, d);
    const size_t b = batch.size();
    const double inv_b = 1.0 / static_cast<double>(b);
    const double lambda = cfg_.curriculum.lambda_at(update_count_);
    const double pr = cfg_.curriculum.pr_at(update_count_);
    const int rounds = cfg_.curriculum.n_rounds;

    LossReport report;
    QTrainer c1(critic1), c2(critic2), b1(baseline1), b2(baseline2);
    nn::Gradients selector_grads = selector.zero_gradients();
    double selector_obj = 0.0;

    std::vector<double> sa, scratch, smoothed, actor_in, sel_upstream;
    std::normal_distribution<double> smooth(0.0, cfg_.smoothing_noise_std);

    for (const Transition* t : batch) {
        // perturbed next action and its target-selector refinement
        fill_state(actor_target, t->next_state, actor_in);
        actor_target.infer_into(actor_in, smoothed);
        if (cfg_.smoothing_noise_std > 0.0) {
            for (double& x : smoothed) {
                const double eps = std::clamp(smooth(noise_rng_), -cfg_.smoothing_noise_clip,
                                              cfg_.smoothing_noise_clip);
                x = clamp_phase(x + eps);
            }
        }
        const SelectionMask next_mask = select_mask(selector_target, t->next_state, smoothed,
                                                    /*stochastic=*/false, rounds, nullptr);

        const double yc =
            t->reward + cfg_.gamma * std::min(q_value(critic1_target, t->next_state, smoothed,
                                                      next_mask.bits.data(), sa, scratch),
                                              q_value(critic2_target, t->next_state, smoothed,
                                                      next_mask.bits.data(), sa, scratch));
        const double yb =
            t->reward + cfg_.gamma * std::min(q_value(baseline1_target, t->next_state,
                                                      smoothed, nullptr, sa, scratch),
                                              q_value(baseline2_target, t->next_state,
                                                      smoothed, nullptr, sa, scratch));

        // Live stochastic selection, round by round. The same sampled bits
        // feed the critic input and the selector's log-likelihood below.
        std::vector<std::vector<double>> round_inputs(rounds);
        std::vector<std::vector<double>> round_probs(rounds);
        std::vector<std::vector<uint8_t>> round_bits(rounds);
        std::vector<uint8_t> combined(d, 1);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        int selected_count = 0;
        for (int round = 0; round < rounds; ++round) {
            fill_state_action(selector, t->state, t->action, combined.data(),
                              round_inputs[round]);
            selector.infer_into(round_inputs[round], round_probs[round]);
            round_bits[round].resize(d);
            for (int i = 0; i < d; ++i) {
                const bool bit = unit(mask_rng_) < round_probs[round][i];
                round_bits[round][i] = bit ? 1 : 0;
                if (!bit) combined[i] = 0;
            }
        }
        for (int i = 0; i < d; ++i) selected_count += combined[i];

        fill_state_action(critic1, t->state, t->action, combined.data(), sa);
        const double lc_k =
            0.5 * (c1.train_sample(sa, yc, inv_b) + c2.train_sample(sa, yc, inv_b));
        fill_state_action(baseline1, t->state, t->action, nullptr, sa);
        const double lb_k =
            0.5 * (b1.train_sample(sa, yb, inv_b) + b2.train_sample(sa, yb, inv_b));

        // selector policy gradient: per-sample weight = loss gap + sparsity penalty
        const double sparsity = std::fabs(static_cast<double>(selected_count) - d * pr);
        const double weight = (lc_k - lb_k) + lambda * sparsity;

        for (int round = 0; round < rounds; ++round) {
            selector.forward(round_inputs[round]);
            const std::vector<double>& probs = round_probs[round];
            sel_upstream.resize(d);
            double loglik = 0.0;
            for (int i = 0; i < d; ++i) {
                const double p = probs[i];
                if (round_bits[round][i]) {
                    loglik += std::log(p);
                    sel_upstream[i] = weight * inv_b / p;
                } else {
                    loglik += std::log(1.0 - p);
                    sel_upstream[i] = -weight * inv_b / (1.0 - p);
                }
            }
            selector.backward_accumulate(sel_upstream, selector_grads);
            selector_obj += weight * loglik * inv_b;
        }

        report.critic_loss += lc_k * inv_b;
        report.baseline_loss += lb_k * inv_b;
    }

    opt_critic1_.apply(critic1, c1.grads);
    opt_critic2_.apply(critic2, c2.grads);
    opt_baseline1_.apply(baseline1, b1.grads);
    opt_baseline2_.apply(baseline2, b2.grads);
    opt_selector_.apply(selector, selector_grads);
    report.selector_objective = selector_obj;

    ++update_count_;
    if (update_count_ % cfg_.policy_delay == 0) {
        nn::Gradients actor_grads = actor.zero_gradients();
        nn::Gradients critic_scratch = critic1.zero_gradients();
        std::vector<double> input_grad, pi_grad;
        double actor_obj = 0.0;
        for (const Transition* t : batch) {
            fill_state(actor, t->state, actor_in);
            const std::vector<double>& pi = actor.forward(actor_in);
            fill_state_action(critic1, t->state, pi, nullptr, sa);
            actor_obj += critic1.forward(sa)[0] * inv_b;
            const double upstream = -inv_b;
            critic1.backward_accumulate(std::span<const double>(&upstream, 1), critic_scratch,
                                        1.0, &input_grad);
            action_gradient(critic1, t->state, pi, input_grad, pi_grad);
            actor.backward_accumulate(pi_grad, actor_grads);
        }
        opt_actor_.apply(actor, actor_grads);
        report.actor_objective = actor_obj;
        report.actor_updated = true;
        nn::soft_update(critic1_target, critic1, cfg_.tau);
        nn::soft_update(critic2_target, critic2, cfg_.tau);
        nn::soft_update(baseline1_target, baseline1, cfg_.tau);
        nn::soft_update(baseline2_target, baseline2, cfg_.tau);
        nn::soft_update(actor_target, actor, cfg_.tau);
        nn::soft_update(selector_target, selector, cfg_.tau);
    }
    return report;
}

// ---------------------------------------------------------------------------
// checkpointing
// ---------------------------------------------------------------------------

namespace {

nlohmann::ordered_json config_to_json(const AgentConfig& cfg) {
    nlohmann::ordered_json j;
    j["num_antennas"] = cfg.num_antennas;
    j["num_redundant"] = cfg.num_redundant;
    j["actor_hidden"] = cfg.actor_hidden;
    j["critic_hidden"] = cfg.critic_hidden;
    j["selector_hidden"] = cfg.selector_hidden;
    j["gamma"] = cfg.gamma;
    j["tau"] = cfg.tau;
    j["smoothing_noise_std"] = cfg.smoothing_noise_std;
    j["smoothing_noise_clip"] = cfg.smoothing_noise_clip;
    j["explore_noise_std"] = cfg.explore_noise_std;
    j["policy_delay"] = cfg.policy_delay;
    j["lr_actor"] = cfg.lr_actor;
    j["lr_critic"] = cfg.lr_critic;
    j["lr_selector"] = cfg.lr_selector;
    j["buffering_steps"] = cfg.buffering_steps;
    j["selector_init_bias"] = cfg.selector_init_bias;
    j["trig_input"] = cfg.trig_input;
    j["curriculum"] = {{"lambda_start", cfg.curriculum.lambda_start},
                       {"lambda_end", cfg.curriculum.lambda_end},
                       {"pr_start", cfg.curriculum.pr_start},
                       {"pr_end", cfg.curriculum.pr_end},
                       {"ramp_fraction", cfg.curriculum.ramp_fraction},
                       {"total_steps", cfg.curriculum.total_steps},
                       {"n_rounds", cfg.curriculum.n_rounds}};
    return j;
}

AgentConfig config_from_json(const nlohmann::json& j) {
    AgentConfig cfg;
    cfg.num_antennas = j.at("num_antennas").get<int>();
    cfg.num_redundant = j.at("num_redundant").get<int>();
    cfg.actor_hidden = j.at("actor_hidden").get<int>();
    cfg.critic_hidden = j.at("critic_hidden").get<int>();
    cfg.selector_hidden = j.at("selector_hidden").get<int>();
    cfg.gamma = j.at("gamma").get<double>();
    cfg.tau = j.at("tau").get<double>();
    cfg.smoothing_noise_std = j.at("smoothing_noise_std").get<double>();
    cfg.smoothing_noise_clip = j.at("smoothing_noise_clip").get<double>();
    cfg.explore_noise_std = j.at("explore_noise_std").get<double>();
    cfg.policy_delay = j.at("policy_delay").get<int>();
    cfg.lr_actor = j.at("lr_actor").get<double>();
    cfg.lr_critic = j.at("lr_critic").get<double>();
    cfg.lr_selector = j.at("lr_selector").get<double>();
    cfg.buffering_steps = j.at("buffering_steps").get<long>();
    cfg.selector_init_bias = j.value("selector_init_bias", 1e300);
    cfg.trig_input = j.value("trig_input", true);
    const auto& c = j.at("curriculum");
    cfg.curriculum.lambda_start = c.at("lambda_start").get<double>();
    cfg.curriculum.lambda_end = c.at("lambda_end").get<double>();
    cfg.curriculum.pr_start = c.at("pr_start").get<double>();
    cfg.curriculum.pr_end = c.at("pr_end").get<double>();
    cfg.curriculum.ramp_fraction = c.at("ramp_fraction").get<double>();
    cfg.curriculum.total_steps = c.at("total_steps").get<long>();
    cfg.curriculum.n_rounds = c.at("n_rounds").get<int>();
    return cfg;
}

void write_manifest(const std::filesystem::path& dir, AgentKind kind, const AgentConfig& cfg,
                    const std::vector<std::pair<std::string, const nn::DenseNet*>>& nets,
                    long update_count) {
    std::filesystem::create_directories(dir);
    nlohmann::ordered_json manifest;
    manifest["kind"] = to_string(kind);
    manifest["config"] = config_to_json(cfg);
    manifest["update_count"] = update_count;
    if (kind == AgentKind::Td3Invase) {
        manifest["curriculum_state"] = {
            {"lambda", cfg.curriculum.lambda_at(update_count)},
            {"p_r", cfg.curriculum.pr_at(update_count)}};
    }
    nlohmann::ordered_json files;
    for (const auto& [role, net] : nets) {
        const std::string filename = role + ".net";
        net->save_binary(dir / filename);
        files[role] = filename;
    }
    manifest["networks"] = files;
    std::ofstream out(dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
    out << manifest.dump(2) << '\n';
}

}  // namespace

void DdpgAgent::save(const std::filesystem::path& dir) const {
    write_manifest(dir, AgentKind::Ddpg, cfg_,
                   {{"actor", &actor},
                    {"actor_target", &actor_target},
                    {"critic", &critic},
                    {"critic_target", &critic_target}},
                   update_count_);
}

void Td3Agent::save(const std::filesystem::path& dir) const {
    write_manifest(dir, AgentKind::Td3, cfg_,
                   {{"actor", &actor},
                    {"actor_target", &actor_target},
                    {"critic1", &critic1},
                    {"critic2", &critic2},
                    {"critic1_target", &critic1_target},
                    {"critic2_target", &critic2_target}},
                   update_count_);
}

void Td3InvaseAgent::save(const std::filesystem::path& dir) const {
    write_manifest(dir, AgentKind::Td3Invase, cfg_,
                   {{"actor", &actor},
                    {"actor_target", &actor_target},
                    {"critic1", &critic1},
                    {"critic2", &critic2},
                    {"critic1_target", &critic1_target},
                    {"critic2_target", &critic2_target},
                    {"baseline1", &baseline1},
                    {"baseline2", &baseline2},
                    {"baseline1_target", &baseline1_target},
                    {"baseline2_target", &baseline2_target},
                    {"selector", &selector},
                    {"selector_target", &selector_target}},
                   update_count_);
}

std::unique_ptr<Agent> make_agent(AgentKind kind, const AgentConfig& cfg, uint64_t seed) {
    switch (kind) {
        case AgentKind::Ddpg: return std::make_unique<DdpgAgent>(cfg, seed);
        case AgentKind::Td3: return std::make_unique<Td3Agent>(cfg, seed);
        case AgentKind::Td3Invase: return std::make_unique<Td3InvaseAgent>(cfg, seed);
    }
    throw std::invalid_argument("unknown agent kind");
}

std::unique_ptr<Agent> load_agent(const std::filesystem::path& manifest_path) {
    const std::filesystem::path path = std::filesystem::is_directory(manifest_path)
                                           ? manifest_path / "manifest.json"
                                           : manifest_path;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint manifest: " + path.string());
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("corrupt checkpoint manifest " + path.string() + ": " +
                                 e.what());
    }
    const AgentKind kind = agent_kind_from_string(manifest.at("kind").get<std::string>());
    const AgentConfig cfg = config_from_json(manifest.at("config"));
    const auto dir = path.parent_path();
    auto net = [&](const std::string& role) {
        const std::string file = manifest.at("networks").at(role).get<std::string>();
        return nn::DenseNet::load_binary(dir / file);
    };
    auto agent = make_agent(kind, cfg, /*seed=*/0);
    const long update_count = manifest.value("update_count", 0L);
    switch (kind) {
        case AgentKind::Ddpg: {
            auto* a = static_cast<DdpgAgent*>(agent.get());
            a->actor = net("actor");
            a->actor_target = net("actor_target");
            a->critic = net("critic");
            a->critic_target = net("critic_target");
            a->update_count_ = update_count;
            break;
        }
        case AgentKind::Td3: {
            auto* a = static_cast<Td3Agent*>(agent.get());
            a->actor = net("actor");
            a->actor_target = net("actor_target");
            a->critic1 = net("critic1");
            a->critic2 = net("critic2");
            a->critic1_target = net("critic1_target");
            a->critic2_target = net("critic2_target");
            a->update_count_ = update_count;
            break;
        }
        case AgentKind::Td3Invase: {
            auto* a = static_cast<Td3InvaseAgent*>(agent.get());
            a->actor = net("actor");
            a->actor_target = net("actor_target");
            a->critic1 = net("critic1");
            a->critic2 = net("critic2");
            a->critic1_target = net("critic1_target");
            a->critic2_target = net("critic2_target");
            a->baseline1 = net("baseline1");
            a->baseline2 = net("baseline2");
            a->baseline1_target = net("baseline1_target");
            a->baseline2_target = net("baseline2_target");
            a->selector = net("selector");
            a->selector_target = net("selector_target");
            a->update_count_ = update_count;
            break;
        }
    }
    return agent;
}

}  // namespace jcas::agents
