#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "jcas/agents.hpp"

using namespace jcas;
using agents::AgentConfig;
using agents::Transition;

namespace {
constexpr double kPi = std::numbers::pi;

AgentConfig tiny_config(int m, int m_red) {
    AgentConfig cfg;
    cfg.num_antennas = m;
    cfg.num_redundant = m_red;
    cfg.actor_hidden = 8;
    cfg.critic_hidden = 8;
    cfg.selector_hidden = 8;
    cfg.buffering_steps = 0;
    cfg.curriculum.total_steps = 100;
    cfg.curriculum.pr_end = static_cast<double>(m) / (m + m_red);
    cfg.trig_input = false;  // raw inputs keep the stub nets below simple
    return cfg;
}

nn::DenseNet scalar_linear(std::vector<int> sizes, const std::vector<double>& weights,
                           double bias) {
    std::vector<nn::Activation> acts(sizes.size() - 1, nn::Activation::Linear);
    nn::DenseNet net(sizes, acts);
    net.weight_matrices()[0] = weights;
    net.bias_vectors()[0] = {bias};
    return net;
}

// Selector stub with forced output bias; zero weights give probs = sigmoid(bias).
nn::DenseNet selector_stub(int d, double output_bias) {
    nn::DenseNet net({2 * d, 4, d},
                     {nn::Activation::Relu, nn::Activation::Sigmoid});
    for (auto& b : net.bias_vectors()[1]) b = output_bias;
    return net;
}

std::vector<const Transition*> as_batch(const std::vector<Transition>& transitions) {
    std::vector<const Transition*> batch;
    for (const auto& t : transitions) batch.push_back(&t);
    return batch;
}
}  // namespace

TEST_CASE("replay buffer: capacity ring, uniform sampling with replacement") {
    agents::ReplayBuffer buffer(4);
    for (int i = 0; i < 6; ++i)
        buffer.push({{static_cast<double>(i)}, {0.0}, 0.0, {0.0}});
    CHECK(buffer.size() == 4);
    std::mt19937_64 rng(3);
    const auto batch = buffer.sample(16, rng);
    CHECK(batch.size() == 16);
    for (const auto* t : batch) {
        bool found = false;
        for (size_t i = 0; i < buffer.size(); ++i) found |= (&buffer.at(i) == t);
        CHECK(found);
    }
    agents::ReplayBuffer empty(2);
    CHECK_THROWS_AS((void)empty.sample(1, rng), std::logic_error);
}

TEST_CASE("curriculum: lambda nondecreasing, p_r nonincreasing, ramp then flat") {
    agents::CurriculumSchedule c;
    c.lambda_start = 0.0;
    c.lambda_end = 1.0;
    c.pr_start = 0.9;
    c.pr_end = 0.25;
    c.ramp_fraction = 0.5;
    c.total_steps = 100;
    double prev_l = -1.0, prev_p = 2.0;
    for (long t = 0; t <= 120; ++t) {
        const double l = c.lambda_at(t);
        const double p = c.pr_at(t);
        CHECK(l >= prev_l);
        CHECK(p <= prev_p);
        prev_l = l;
        prev_p = p;
    }
    CHECK(c.lambda_at(0) == 0.0);
    CHECK(c.lambda_at(50) == doctest::Approx(1.0));
    CHECK(c.lambda_at(100) == doctest::Approx(1.0));
    CHECK(c.pr_at(50) == doctest::Approx(0.25));
}

TEST_CASE("select_mask: degenerate probabilities force the mask in both modes") {
    // probs ~ [1,1,0,0]: output bias +-50 per dimension
    const int d = 4;
    nn::DenseNet selector({2 * d, 2, d}, {nn::Activation::Relu, nn::Activation::Sigmoid});
    selector.bias_vectors()[1] = {50.0, 50.0, -50.0, -50.0};
    std::vector<double> state(d, 0.3), action(d, -0.2);
    std::mt19937_64 rng(5);
    const auto train_mask = agents::select_mask(selector, state, action, true, 1, &rng);
    const auto eval_mask = agents::select_mask(selector, state, action, false, 1, nullptr);
    CHECK(train_mask.bits == std::vector<uint8_t>{1, 1, 0, 0});
    CHECK(eval_mask.bits == std::vector<uint8_t>{1, 1, 0, 0});

    // all probs ~ 0 -> empty mask
    nn::DenseNet never = selector_stub(d, -50.0);
    const auto none = agents::select_mask(never, state, action, false, 1, nullptr);
    CHECK(none.selected_count() == 0);
}

TEST_CASE("select_mask: expected fractions 50/25/12.5 percent at p=0.5 per round") {
    const int d = 16;
    nn::DenseNet half = selector_stub(d, 0.0);  // sigmoid(0) = 0.5 for every input
    std::vector<double> state(d, 0.1), action(d, 0.2);
    std::mt19937_64 rng(11);
    for (int rounds = 1; rounds <= 3; ++rounds) {
        double total = 0.0;
        const int trials = 3000;
        for (int t = 0; t < trials; ++t) {
            const auto mask = agents::select_mask(half, state, action, true, rounds, &rng);
            total += mask.selected_count();
        }
        const double frac = total / (static_cast<double>(trials) * d);
        CHECK(frac == doctest::Approx(std::pow(0.5, rounds)).epsilon(0.08));
    }
}

TEST_CASE("select_mask: round i+1 selections are a subset of round i") {
    const int d = 12;
    std::mt19937_64 rng(13);
    auto selector = nn::DenseNet::random(
        {2 * d, 16, d}, {nn::Activation::Relu, nn::Activation::Sigmoid}, 1.0, rng);
    std::uniform_real_distribution<double> dist(-kPi, kPi);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> state(d), action(d);
        for (double& v : state) v = dist(rng);
        for (double& v : action) v = dist(rng);
        std::vector<uint8_t> prev(d, 1);
        for (int rounds = 1; rounds <= 3; ++rounds) {
            const auto mask =
                agents::select_mask(selector, state, action, false, rounds, nullptr);
            for (int i = 0; i < d; ++i)
                if (mask.bits[i]) CHECK(prev[i] == 1);
            prev = mask.bits;
        }
    }
}

TEST_CASE("selector likelihood gradient matches finite differences") {
    const int d = 3;
    std::mt19937_64 rng(17);
    auto selector = nn::DenseNet::random(
        {2 * d, 5, d}, {nn::Activation::Relu, nn::Activation::Sigmoid}, 1.0, rng);
    std::vector<double> input{0.2, -0.4, 0.9, 0.5, -0.1, 0.3};
    const std::vector<uint8_t> mask{1, 0, 1};

    auto loglik = [&] {
        const auto probs = selector.infer(input);
        double ll = 0.0;
        for (int i = 0; i < d; ++i)
            ll += mask[i] ? std::log(probs[i]) : std::log(1.0 - probs[i]);
        return ll;
    };

    const auto probs = selector.forward(input);
    std::vector<double> upstream(d);
    for (int i = 0; i < d; ++i)
        upstream[i] = mask[i] ? 1.0 / probs[i] : -1.0 / (1.0 - probs[i]);
    const auto analytic = selector.backward(upstream);

    const double step = 1e-5;
    for (size_t l = 0; l < analytic.weights.size(); ++l) {
        for (size_t i = 0; i < analytic.weights[l].size(); ++i) {
            double& w = selector.weight_matrices()[l][i];
            const double orig = w;
            w = orig + step;
            const double hi = loglik();
            w = orig - step;
            const double lo = loglik();
            w = orig;
            const double fd = (hi - lo) / (2.0 * step);
            const double diff = std::fabs(analytic.weights[l][i] - fd);
            CHECK(diff <= std::max(1e-7, 1e-4 * std::fabs(fd)));
        }
    }
}

TEST_CASE("act: deterministic actor output in range; zero-weight actor gives zeros") {
    AgentConfig cfg = tiny_config(3, 1);
    agents::Td3Agent agent(cfg, 7);
    std::vector<double> state(4, 0.5);
    const auto a = agent.act(state, false);
    CHECK(a.size() == 4);
    for (double v : a) {
        CHECK(v > -kPi);
        CHECK(v <= kPi);
    }
    for (auto& w : agent.actor.weight_matrices()) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : agent.actor.bias_vectors()) std::fill(b.begin(), b.end(), 0.0);
    const auto zero = agent.act(state, false);
    for (double v : zero) CHECK(v == 0.0);
}

TEST_CASE("act: buffering-phase actions are uniform on (-pi, pi] (KS at 0.01)") {
    AgentConfig cfg = tiny_config(4, 0);
    cfg.buffering_steps = 4000;
    agents::DdpgAgent agent(cfg, 21);
    std::vector<double> state(4, 0.0);
    std::vector<double> samples;
    for (int i = 0; i < 2000; ++i) {
        const auto a = agent.act(state, true);
        for (double v : a) {
            CHECK(v > -kPi);
            CHECK(v <= kPi);
            samples.push_back(v);
        }
    }
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d_stat = 0.0;
    for (size_t i = 0; i < samples.size(); ++i) {
        const double cdf = (samples[i] + kPi) / (2.0 * kPi);
        d_stat = std::max(d_stat, std::fabs(cdf - static_cast<double>(i) / n));
        d_stat = std::max(d_stat, std::fabs(static_cast<double>(i + 1) / n - cdf));
    }
    const double critical_001 = 1.628 / std::sqrt(n);
    CHECK(d_stat < critical_001);
}

TEST_CASE("act: exploration noise keeps actions in range") {
    AgentConfig cfg = tiny_config(4, 2);
    cfg.buffering_steps = 0;
    agents::Td3InvaseAgent agent(cfg, 31);
    std::vector<double> state(6, 1.0);
    for (int i = 0; i < 500; ++i) {
        const auto a = agent.act(state, true);
        for (double v : a) {
            CHECK(v > -kPi);
            CHECK(v <= kPi);
        }
    }
}

TEST_CASE("td-swar update: hand-computed scalar oracle") {
    // d = 1 throughout; every net collapses to one linear unit.
    AgentConfig cfg = tiny_config(1, 0);
    cfg.gamma = 0.9;
    cfg.smoothing_noise_std = 0.0;  // deterministic target action
    cfg.policy_delay = 1000;        // keep the actor frozen in this test
    cfg.curriculum.lambda_start = cfg.curriculum.lambda_end = 0.5;
    cfg.curriculum.pr_start = cfg.curriculum.pr_end = 1.0;
    agents::Td3InvaseAgent agent(cfg, 3);

    agent.actor_target = scalar_linear({1, 1}, {0.5}, 0.1);
    agent.critic1_target = scalar_linear({2, 1}, {0.3, -0.2}, 0.05);
    agent.critic2_target = scalar_linear({2, 1}, {0.1, 0.4}, -0.02);
    agent.baseline1_target = scalar_linear({2, 1}, {-0.25, 0.15}, 0.0);
    agent.baseline2_target = scalar_linear({2, 1}, {0.2, 0.2}, 0.3);
    agent.critic1 = scalar_linear({2, 1}, {0.7, -0.6}, 0.01);
    agent.critic2 = scalar_linear({2, 1}, {-0.3, 0.8}, -0.04);
    agent.baseline1 = scalar_linear({2, 1}, {0.45, 0.05}, 0.2);
    agent.baseline2 = scalar_linear({2, 1}, {-0.15, -0.35}, 0.1);
    agent.selector = selector_stub(1, 50.0);         // mask ~ always selected
    agent.selector_target = selector_stub(1, 50.0);  // eval mask = 1

    const double s = 0.4, a = -0.7, r = 1.0, s2 = 0.9;
    std::vector<Transition> transitions{{{s}, {a}, r, {s2}}};
    const auto report = agent.update(as_batch(transitions));

    // Hand evaluation.
    const double a_tilde = 0.5 * s2 + 0.1;  // clamp inactive (|value| < pi)
    const double yc =
        r + 0.9 * std::min(0.3 * s2 - 0.2 * a_tilde + 0.05, 0.1 * s2 + 0.4 * a_tilde - 0.02);
    const double yb =
        r + 0.9 * std::min(-0.25 * s2 + 0.15 * a_tilde, 0.2 * s2 + 0.2 * a_tilde + 0.3);
    const double e1 = (0.7 * s - 0.6 * a + 0.01) - yc;
    const double e2 = (-0.3 * s + 0.8 * a - 0.04) - yc;
    const double f1 = (0.45 * s + 0.05 * a + 0.2) - yb;
    const double f2 = (-0.15 * s - 0.35 * a + 0.1) - yb;
    CHECK(report.critic_loss == doctest::Approx(0.5 * (e1 * e1 + e2 * e2)).epsilon(1e-10));
    CHECK(report.baseline_loss == doctest::Approx(0.5 * (f1 * f1 + f2 * f2)).epsilon(1e-10));
    CHECK_FALSE(report.actor_updated);
}

TEST_CASE("td-swar update: gamma=0 reduces the target to the reward") {
    AgentConfig cfg = tiny_config(1, 0);
    cfg.gamma = 0.0;
    cfg.smoothing_noise_std = 0.0;
    cfg.policy_delay = 1000;
    cfg.curriculum.lambda_start = cfg.curriculum.lambda_end = 0.0;
    agents::Td3InvaseAgent agent(cfg, 5);
    agent.critic1 = scalar_linear({2, 1}, {0.7, -0.6}, 0.01);
    agent.critic2 = scalar_linear({2, 1}, {-0.3, 0.8}, -0.04);
    agent.selector = selector_stub(1, 50.0);
    agent.selector_target = selector_stub(1, 50.0);

    const double s = 0.2, a = 0.6, r = -1.0;
    std::vector<Transition> transitions{{{s}, {a}, r, {0.5}}};
    const auto report = agent.update(as_batch(transitions));
    const double e1 = (0.7 * s - 0.6 * a + 0.01) - r;
    const double e2 = (-0.3 * s + 0.8 * a - 0.04) - r;
    CHECK(report.critic_loss == doctest::Approx(0.5 * (e1 * e1 + e2 * e2)).epsilon(1e-10));
}

TEST_CASE("td-swar: identical critics/baselines with full mask give l_c == l_b") {
    AgentConfig cfg = tiny_config(2, 0);
    cfg.gamma = 0.8;
    cfg.smoothing_noise_std = 0.0;
    cfg.policy_delay = 1000;
    cfg.curriculum.lambda_start = cfg.curriculum.lambda_end = 0.7;
    cfg.curriculum.pr_start = cfg.curriculum.pr_end = 0.5;
    agents::Td3InvaseAgent agent(cfg, 9);
    agent.baseline1 = agent.critic1;
    agent.baseline2 = agent.critic2;
    agent.baseline1_target = agent.critic1_target;
    agent.baseline2_target = agent.critic2_target;
    agent.selector = selector_stub(2, 50.0);
    agent.selector_target = selector_stub(2, 50.0);

    std::vector<Transition> transitions{{{0.1, -0.2}, {0.3, 0.4}, 1.0, {0.5, -0.6}},
                                        {{0.7, 0.2}, {-0.3, 0.1}, -1.0, {0.0, 0.9}}};
    const auto report = agent.update(as_batch(transitions));
    CHECK(report.critic_loss == doctest::Approx(report.baseline_loss).epsilon(1e-12));
    // selector weight reduces to the sparsity term alone: with full mask and
    // p_r = 0.5, |sum m - d p_r| = |2 - 1| = 1, so the objective is
    // lambda * 1 * loglik, loglik = d * log(1 - 1e-6) per sample
    const double expected_obj = 0.7 * 1.0 * 2.0 * std::log(1.0 - 1e-6);
    CHECK(report.selector_objective == doctest::Approx(expected_obj).epsilon(1e-6));
}

TEST_CASE("td3 update: gamma=0 target is the reward; losses nonnegative") {
    AgentConfig cfg = tiny_config(1, 0);
    cfg.gamma = 0.0;
    cfg.smoothing_noise_std = 0.0;
    cfg.policy_delay = 1000;
    agents::Td3Agent agent(cfg, 5);
    agent.critic1 = scalar_linear({2, 1}, {0.7, -0.6}, 0.01);
    agent.critic2 = scalar_linear({2, 1}, {-0.3, 0.8}, -0.04);
    const double s = 0.2, a = 0.6, r = -1.0;
    std::vector<Transition> transitions{{{s}, {a}, r, {0.5}}};
    const auto report = agent.update(as_batch(transitions));
    const double e1 = (0.7 * s - 0.6 * a + 0.01) - r;
    const double e2 = (-0.3 * s + 0.8 * a - 0.04) - r;
    CHECK(report.critic_loss == doctest::Approx(0.5 * (e1 * e1 + e2 * e2)).epsilon(1e-10));
    CHECK(report.critic_loss >= 0.0);
}

TEST_CASE("td3 equals the td-swar critic path under a forced full mask") {
    AgentConfig cfg = tiny_config(3, 2);
    cfg.gamma = 0.95;
    cfg.smoothing_noise_std = 0.0;  // align the noise streams
    cfg.policy_delay = 2;
    cfg.curriculum.lambda_start = cfg.curriculum.lambda_end = 0.3;
    const uint64_t seed = 41;
    agents::Td3Agent td3(cfg, seed);
    agents::Td3InvaseAgent invase(cfg, seed);
    invase.actor = td3.actor;
    invase.actor_target = td3.actor_target;
    invase.critic1 = td3.critic1;
    invase.critic2 = td3.critic2;
    invase.critic1_target = td3.critic1_target;
    invase.critic2_target = td3.critic2_target;
    invase.selector = selector_stub(5, 50.0);
    invase.selector_target = selector_stub(5, 50.0);

    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> dist(-kPi, kPi);
    std::vector<Transition> transitions;
    for (int i = 0; i < 8; ++i) {
        Transition t;
        t.state.resize(5);
        t.action.resize(5);
        t.next_state.resize(5);
        for (double& v : t.state) v = dist(rng);
        for (double& v : t.action) v = dist(rng);
        for (double& v : t.next_state) v = dist(rng);
        t.reward = (i % 3 == 0) ? 1.0 : -1.0;
        transitions.push_back(std::move(t));
    }
    const auto batch = as_batch(transitions);
    for (int step = 0; step < 2; ++step) {
        (void)td3.update(batch);
        (void)invase.update(batch);
    }
    CHECK(invase.critic1.weight_matrices() == td3.critic1.weight_matrices());
    CHECK(invase.critic2.weight_matrices() == td3.critic2.weight_matrices());
    CHECK(invase.actor.weight_matrices() == td3.actor.weight_matrices());
    CHECK(invase.critic1_target.weight_matrices() == td3.critic1_target.weight_matrices());
}

TEST_CASE("ddpg: gamma=0 target is the reward; overfits a fixed batch; deterministic") {
    AgentConfig cfg = tiny_config(2, 0);
    cfg.gamma = 0.0;
    agents::DdpgAgent agent(cfg, 13);
    agent.critic = scalar_linear({4, 1}, {0.2, -0.1, 0.3, 0.4}, 0.0);
    agent.critic_target = agent.critic;
    std::vector<Transition> transitions{{{0.3, -0.3}, {0.2, 0.2}, 1.0, {0.0, 0.0}}};
    const auto report = agent.update(as_batch(transitions));
    const double pred = 0.2 * 0.3 - 0.1 * (-0.3) + 0.3 * 0.2 + 0.4 * 0.2;
    CHECK(report.critic_loss == doctest::Approx((pred - 1.0) * (pred - 1.0)).epsilon(1e-10));

    // overfit-one-batch: critic MSE shrinks over 100 updates
    agents::DdpgAgent learner(cfg, 17);
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> dist(-kPi, kPi);
    std::vector<Transition> fixed;
    for (int i = 0; i < 16; ++i) {
        Transition t;
        t.state = {dist(rng), dist(rng)};
        t.action = {dist(rng), dist(rng)};
        t.next_state = {dist(rng), dist(rng)};
        t.reward = (i % 2 == 0) ? 1.0 : -1.0;
        fixed.push_back(std::move(t));
    }
    const auto fixed_batch = as_batch(fixed);
    double first_loss = 0.0, last_loss = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto rep = learner.update(fixed_batch);
        if (i == 0) first_loss = rep.critic_loss;
        last_loss = rep.critic_loss;
    }
    CHECK(last_loss < first_loss);

    // determinism: same seed, same batches -> identical parameters
    agents::DdpgAgent a1(cfg, 23), a2(cfg, 23);
    for (int i = 0; i < 5; ++i) {
        (void)a1.update(fixed_batch);
        (void)a2.update(fixed_batch);
    }
    CHECK(a1.critic.weight_matrices() == a2.critic.weight_matrices());
    CHECK(a1.actor.weight_matrices() == a2.actor.weight_matrices());
}

TEST_CASE("update rejects an empty batch") {
    AgentConfig cfg = tiny_config(2, 0);
    agents::Td3Agent agent(cfg, 1);
    CHECK_THROWS_AS((void)agent.update({}), std::invalid_argument);
}

TEST_CASE("target drift: tau=0 freezes targets, tau=1 copies the live nets") {
    AgentConfig cfg = tiny_config(2, 1);
    cfg.policy_delay = 1;
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> dist(-kPi, kPi);
    std::vector<Transition> transitions;
    for (int i = 0; i < 4; ++i) {
        Transition t;
        t.state = {dist(rng), dist(rng), dist(rng)};
        t.action = {dist(rng), dist(rng), dist(rng)};
        t.next_state = {dist(rng), dist(rng), dist(rng)};
        t.reward = 1.0;
        transitions.push_back(std::move(t));
    }
    const auto batch = as_batch(transitions);

    cfg.tau = 0.0;
    agents::Td3Agent frozen(cfg, 47);
    const auto target_before = frozen.critic1_target.weight_matrices();
    (void)frozen.update(batch);
    CHECK(frozen.critic1_target.weight_matrices() == target_before);

    cfg.tau = 1.0;
    agents::Td3Agent copier(cfg, 47);
    (void)copier.update(batch);
    CHECK(copier.critic1_target.weight_matrices() == copier.critic1.weight_matrices());
    CHECK(copier.actor_target.weight_matrices() == copier.actor.weight_matrices());
}

TEST_CASE("checkpoint: save and load restore every network") {
    AgentConfig cfg = tiny_config(2, 1);
    agents::Td3InvaseAgent agent(cfg, 53);
    const auto dir = std::filesystem::temp_directory_path() / "jcas_agent_ckpt";
    std::filesystem::remove_all(dir);
    agent.save(dir);
    auto loaded = agents::load_agent(dir);
    REQUIRE(loaded->kind() == agents::AgentKind::Td3Invase);
    auto* inv = dynamic_cast<agents::Td3InvaseAgent*>(loaded.get());
    REQUIRE(inv != nullptr);
    CHECK(inv->actor.weight_matrices() == agent.actor.weight_matrices());
    CHECK(inv->selector.weight_matrices() == agent.selector.weight_matrices());
    CHECK(inv->baseline2_target.weight_matrices() ==
          agent.baseline2_target.weight_matrices());
    CHECK(inv->config().num_redundant == 1);
    std::filesystem::remove_all(dir);
}
