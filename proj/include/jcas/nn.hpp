#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace jcas::nn {

enum class Activation { Linear, Relu, TanhScaled, Sigmoid };

const char* to_string(Activation a);
Activation activation_from_string(std::string_view name);

// Sigmoid outputs are clamped away from {0,1} so log-likelihoods stay finite.
inline constexpr double kSigmoidClamp = 1e-6;

struct Gradients {
    std::vector<std::vector<double>> weights;  // same shapes as DenseNet layers
    std::vector<std::vector<double>> biases;

    void set_zero();
    void add_scaled(const Gradients& other, double factor);
    void scale(double factor);
};

// Dense feedforward network, double precision throughout.
// Weight matrices are row-major [out][in]; one activation tag per layer.
// `scale` multiplies TanhScaled outputs (e.g. pi for a phase-emitting actor).
class DenseNet {
public:
    DenseNet() = default;
    DenseNet(std::vector<int> layer_sizes, std::vector<Activation> activations,
             double scale = 1.0);

    // Uniform init in +-1/sqrt(fan_in).
    static DenseNet random(std::vector<int> layer_sizes,
                           std::vector<Activation> activations, double scale,
                           std::mt19937_64& rng);

    int input_size() const { return layer_sizes_.front(); }
    int output_size() const { return layer_sizes_.back(); }
    int num_layers() const { return static_cast<int>(layer_sizes_.size()); }
    const std::vector<int>& layer_sizes() const { return layer_sizes_; }
    const std::vector<Activation>& activations() const { return activations_; }
    double scale() const { return scale_; }

    // Pure inference; does not touch the training cache.
    std::vector<double> infer(std::span<const double> input) const;
    void infer_into(std::span<const double> input, std::vector<double>& out) const;

    // Forward pass that caches intermediates for backward().
    const std::vector<double>& forward(std::span<const double> input);

    // Gradients of sum(upstream . output) w.r.t. every parameter.
    // Requires a prior forward(); throws std::logic_error otherwise.
    Gradients backward(std::span<const double> upstream,
                       std::vector<double>* input_gradient = nullptr) const;

    // Accumulates `weight * grad` into `accum` without allocating.
    void backward_accumulate(std::span<const double> upstream, Gradients& accum,
                             double weight = 1.0,
                             std::vector<double>* input_gradient = nullptr) const;

    Gradients zero_gradients() const;
    size_t parameter_count() const;
    bool same_architecture(const DenseNet& other) const;

    std::vector<std::vector<double>>& weight_matrices() { return weights_; }
    const std::vector<std::vector<double>>& weight_matrices() const { return weights_; }
    std::vector<std::vector<double>>& bias_vectors() { return biases_; }
    const std::vector<std::vector<double>>& bias_vectors() const { return biases_; }

    void save_binary(const std::filesystem::path& path) const;
    static DenseNet load_binary(const std::filesystem::path& path);
    nlohmann::ordered_json to_json() const;
    static DenseNet from_json(const nlohmann::json& j);

private:
    std::vector<int> layer_sizes_;
    std::vector<Activation> activations_;  // one per layer transition
    std::vector<std::vector<double>> weights_;
    std::vector<std::vector<double>> biases_;
    double scale_ = 1.0;

    // forward() cache: activations_[0] is the input copy.
    mutable std::vector<std::vector<double>> cached_activations_;
    mutable std::vector<std::vector<double>> cached_preacts_;
    mutable bool has_cache_ = false;

    void check_consistent() const;
};

// Adaptive-moment optimizer (decay 0.9/0.999, eps 1e-8 defaults).
class AdamOptimizer {
public:
    explicit AdamOptimizer(double learning_rate = 1e-3, double beta1 = 0.9,
                           double beta2 = 0.999, double epsilon = 1e-8);

    // One update step; gradient shapes must match the net.
    void apply(DenseNet& net, const Gradients& grads);

    long step_count() const { return step_; }
    double learning_rate() const { return learning_rate_; }
    void set_learning_rate(double lr) { learning_rate_ = lr; }

private:
    double learning_rate_;
    double beta1_, beta2_, epsilon_;
    long step_ = 0;
    std::vector<std::vector<double>> m_weights_, v_weights_;
    std::vector<std::vector<double>> m_biases_, v_biases_;
    bool initialized_ = false;

    void ensure_buffers(const DenseNet& net, const Gradients& grads);
};

// target <- tau*source + (1-tau)*target, elementwise; architectures must match.
void soft_update(DenseNet& target, const DenseNet& source, double tau);

}  // namespace jcas::nn
