#include "jcas/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace jcas::nn {

namespace {

constexpr char kBinaryMagic[4] = {'J', 'N', 'N', '1'};

double activate(Activation act, double z, double scale) {
    switch (act) {
        case Activation::Linear:
            return z;
        case Activation::Relu:
            return z > 0.0 ? z : 0.0;
        case Activation::TanhScaled:
            return scale * std::tanh(z);
        case Activation::Sigmoid: {
            double s = 1.0 / (1.0 + std::exp(-z));
            return std::clamp(s, kSigmoidClamp, 1.0 - kSigmoidClamp);
        }
    }
    return z;
}

double activate_derivative(Activation act, double z, double scale) {
    switch (act) {
        case Activation::Linear:
            return 1.0;
        case Activation::Relu:
            return z > 0.0 ? 1.0 : 0.0;
        case Activation::TanhScaled: {
            double t = std::tanh(z);
            return scale * (1.0 - t * t);
        }
        case Activation::Sigmoid: {
            double s = 1.0 / (1.0 + std::exp(-z));
            return s * (1.0 - s);
        }
    }
    return 1.0;
}

template <typename T>
void write_raw(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_raw(std::istream& in, T& value) {
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("network checkpoint: truncated file");
}

}  // namespace

const char* to_string(Activation a) {
    switch (a) {
        case Activation::Linear: return "linear";
        case Activation::Relu: return "relu";
        case Activation::TanhScaled: return "tanh-scaled";
        case Activation::Sigmoid: return "sigmoid";
    }
    return "linear";
}

Activation activation_from_string(std::string_view name) {
    if (name == "linear") return Activation::Linear;
    if (name == "relu") return Activation::Relu;
    if (name == "tanh-scaled") return Activation::TanhScaled;
    if (name == "sigmoid") return Activation::Sigmoid;
    throw std::invalid_argument("unknown activation tag: " + std::string(name));
}

void Gradients::set_zero() {
    for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
}

void Gradients::add_scaled(const Gradients& other, double factor) {
    if (weights.size() != other.weights.size())
        throw std::invalid_argument("gradient layer count mismatch");
    for (size_t l = 0; l < weights.size(); ++l) {
        for (size_t i = 0; i < weights[l].size(); ++i) weights[l][i] += factor * other.weights[l][i];
        for (size_t i = 0; i < biases[l].size(); ++i) biases[l][i] += factor * other.biases[l][i];
    }
}

void Gradients::scale(double factor) {
    for (auto& w : weights)
        for (double& x : w) x *= factor;
    for (auto& b : biases)
        for (double& x : b) x *= factor;
}

DenseNet::DenseNet(std::vector<int> layer_sizes, std::vector<Activation> activations,
                   double scale)
    : layer_sizes_(std::move(layer_sizes)),
      activations_(std::move(activations)),
      scale_(scale) {
    if (layer_sizes_.size() < 2)
        throw std::invalid_argument("DenseNet needs at least input and output layers");
    for (int s : layer_sizes_)
        if (s <= 0) throw std::invalid_argument("layer sizes must be positive");
    if (activations_.size() != layer_sizes_.size() - 1)
        throw std::invalid_argument("need one activation per layer transition");
    weights_.resize(layer_sizes_.size() - 1);
    biases_.resize(layer_sizes_.size() - 1);
    for (size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
        weights_[l].assign(static_cast<size_t>(layer_sizes_[l + 1]) * layer_sizes_[l], 0.0);
        biases_[l].assign(layer_sizes_[l + 1], 0.0);
    }
}

DenseNet DenseNet::random(std::vector<int> layer_sizes, std::vector<Activation> activations,
                          double scale, std::mt19937_64& rng) {
    DenseNet net(std::move(layer_sizes), std::move(activations), scale);
    for (size_t l = 0; l < net.weights_.size(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(net.layer_sizes_[l]));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (double& w : net.weights_[l]) w = dist(rng);
        for (double& b : net.biases_[l]) b = dist(rng);
    }
    return net;
}

void DenseNet::check_consistent() const {
    if (layer_sizes_.size() < 2) throw std::logic_error("uninitialized DenseNet");
}

void DenseNet::infer_into(std::span<const double> input, std::vector<double>& out) const {
    check_consistent();
    if (static_cast<int>(input.size()) != input_size())
        throw std::invalid_argument("forward: input length " + std::to_string(input.size()) +
                                    " != first layer size " + std::to_string(input_size()));
    static thread_local std::vector<double> scratch_a, scratch_b;
    scratch_a.assign(input.begin(), input.end());
    const double* cur = scratch_a.data();
    size_t cur_n = scratch_a.size();
    for (size_t l = 0; l < weights_.size(); ++l) {
        const int n_out = layer_sizes_[l + 1];
        const int n_in = layer_sizes_[l];
        std::vector<double>& dst = (l + 1 == weights_.size()) ? out : scratch_b;
        dst.resize(n_out);
        const double* W = weights_[l].data();
        for (int o = 0; o < n_out; ++o) {
            double z = biases_[l][o];
            const double* row = W + static_cast<size_t>(o) * n_in;
            for (int i = 0; i < n_in; ++i) z += row[i] * cur[i];
            dst[o] = activate(activations_[l], z, scale_);
        }
        if (l + 1 != weights_.size()) {
            scratch_a.swap(scratch_b);
            cur = scratch_a.data();
            cur_n = scratch_a.size();
        }
    }
    (void)cur_n;
}

std::vector<double> DenseNet::infer(std::span<const double> input) const {
    std::vector<double> out;
    infer_into(input, out);
    return out;
}

const std::vector<double>& DenseNet::forward(std::span<const double> input) {
    check_consistent();
    if (static_cast<int>(input.size()) != input_size())
        throw std::invalid_argument("forward: input length " + std::to_string(input.size()) +
                                    " != first layer size " + std::to_string(input_size()));
    cached_activations_.resize(layer_sizes_.size());
    cached_preacts_.resize(weights_.size());
    cached_activations_[0].assign(input.begin(), input.end());
    for (size_t l = 0; l < weights_.size(); ++l) {
        const int n_out = layer_sizes_[l + 1];
        const int n_in = layer_sizes_[l];
        cached_preacts_[l].resize(n_out);
        cached_activations_[l + 1].resize(n_out);
        const double* prev = cached_activations_[l].data();
        const double* W = weights_[l].data();
        for (int o = 0; o < n_out; ++o) {
            double z = biases_[l][o];
            const double* row = W + static_cast<size_t>(o) * n_in;
            for (int i = 0; i < n_in; ++i) z += row[i] * prev[i];
            cached_preacts_[l][o] = z;
            cached_activations_[l + 1][o] = activate(activations_[l], z, scale_);
        }
    }
    has_cache_ = true;
    return cached_activations_.back();
}

void DenseNet::backward_accumulate(std::span<const double> upstream, Gradients& accum,
                                   double weight,
                                   std::vector<double>* input_gradient) const {
    if (!has_cache_)
        throw std::logic_error("backward called before forward");
    if (static_cast<int>(upstream.size()) != output_size())
        throw std::invalid_argument("backward: upstream gradient length mismatch");
    if (accum.weights.size() != weights_.size())
        throw std::invalid_argument("backward: gradient accumulator shape mismatch");

    static thread_local std::vector<double> delta, delta_prev;
    delta.assign(upstream.begin(), upstream.end());
    for (int l = static_cast<int>(weights_.size()) - 1; l >= 0; --l) {
        const int n_out = layer_sizes_[l + 1];
        const int n_in = layer_sizes_[l];
        for (int o = 0; o < n_out; ++o)
            delta[o] *= activate_derivative(activations_[l], cached_preacts_[l][o], scale_);
        const double* prev = cached_activations_[l].data();
        double* gw = accum.weights[l].data();
        double* gb = accum.biases[l].data();
        for (int o = 0; o < n_out; ++o) {
            const double d = weight * delta[o];
            double* row = gw + static_cast<size_t>(o) * n_in;
            for (int i = 0; i < n_in; ++i) row[i] += d * prev[i];
            gb[o] += d;
        }
        if (l > 0 || input_gradient != nullptr) {
            delta_prev.assign(n_in, 0.0);
            const double* W = weights_[l].data();
            for (int o = 0; o < n_out; ++o) {
                const double d = delta[o];
                const double* row = W + static_cast<size_t>(o) * n_in;
                for (int i = 0; i < n_in; ++i) delta_prev[i] += row[i] * d;
            }
            delta.swap(delta_prev);
        }
    }
    if (input_gradient != nullptr) {
        input_gradient->resize(input_size());
        for (int i = 0; i < input_size(); ++i)
            (*input_gradient)[i] = weight * delta[i];
    }
}

Gradients DenseNet::backward(std::span<const double> upstream,
                             std::vector<double>* input_gradient) const {
    Gradients g = zero_gradients();
    backward_accumulate(upstream, g, 1.0, input_gradient);
    return g;
}

Gradients DenseNet::zero_gradients() const {
    Gradients g;
    g.weights.resize(weights_.size());
    g.biases.resize(biases_.size());
    for (size_t l = 0; l < weights_.size(); ++l) {
        g.weights[l].assign(weights_[l].size(), 0.0);
        g.biases[l].assign(biases_[l].size(), 0.0);
    }
    return g;
}

size_t DenseNet::parameter_count() const {
    size_t n = 0;
    for (const auto& w : weights_) n += w.size();
    for (const auto& b : biases_) n += b.size();
    return n;
}

bool DenseNet::same_architecture(const DenseNet& other) const {
    return layer_sizes_ == other.layer_sizes_ && activations_ == other.activations_ &&
           scale_ == other.scale_;
}

void DenseNet::save_binary(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out.write(kBinaryMagic, 4);
    const uint32_t n_layers = static_cast<uint32_t>(layer_sizes_.size());
    write_raw(out, n_layers);
    for (int s : layer_sizes_) write_raw(out, static_cast<int64_t>(s));
    for (Activation a : activations_) write_raw(out, static_cast<uint8_t>(a));
    write_raw(out, scale_);
    for (size_t l = 0; l < weights_.size(); ++l) {
        out.write(reinterpret_cast<const char*>(weights_[l].data()),
                  static_cast<std::streamsize>(weights_[l].size() * sizeof(double)));
        out.write(reinterpret_cast<const char*>(biases_[l].data()),
                  static_cast<std::streamsize>(biases_[l].size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

DenseNet DenseNet::load_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open network checkpoint: " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kBinaryMagic, 4) != 0)
        throw std::runtime_error("not a network checkpoint: " + path.string());
    uint32_t n_layers = 0;
    read_raw(in, n_layers);
    if (n_layers < 2 || n_layers > 64)
        throw std::runtime_error("network checkpoint: implausible layer count");
    std::vector<int> sizes(n_layers);
    for (auto& s : sizes) {
        int64_t v = 0;
        read_raw(in, v);
        s = static_cast<int>(v);
    }
    std::vector<Activation> acts(n_layers - 1);
    for (auto& a : acts) {
        uint8_t v = 0;
        read_raw(in, v);
        if (v > 3) throw std::runtime_error("network checkpoint: bad activation tag");
        a = static_cast<Activation>(v);
    }
    double scale = 1.0;
    read_raw(in, scale);
    DenseNet net(sizes, acts, scale);
    for (size_t l = 0; l < net.weights_.size(); ++l) {
        in.read(reinterpret_cast<char*>(net.weights_[l].data()),
                static_cast<std::streamsize>(net.weights_[l].size() * sizeof(double)));
        in.read(reinterpret_cast<char*>(net.biases_[l].data()),
                static_cast<std::streamsize>(net.biases_[l].size() * sizeof(double)));
        if (!in) throw std::runtime_error("network checkpoint: truncated parameters");
    }
    return net;
}

nlohmann::ordered_json DenseNet::to_json() const {
    nlohmann::ordered_json j;
    j["layer_sizes"] = layer_sizes_;
    std::vector<std::string> acts;
    for (Activation a : activations_) acts.emplace_back(to_string(a));
    j["activations"] = acts;
    j["scale"] = scale_;
    j["weights"] = weights_;
    j["biases"] = biases_;
    return j;
}

DenseNet DenseNet::from_json(const nlohmann::json& j) {
    std::vector<int> sizes = j.at("layer_sizes").get<std::vector<int>>();
    std::vector<Activation> acts;
    for (const auto& name : j.at("activations"))
        acts.push_back(activation_from_string(name.get<std::string>()));
    DenseNet net(sizes, acts, j.at("scale").get<double>());
    auto w = j.at("weights").get<std::vector<std::vector<double>>>();
    auto b = j.at("biases").get<std::vector<std::vector<double>>>();
    if (w.size() != net.weights_.size() || b.size() != net.biases_.size())
        throw std::runtime_error("network json: layer count mismatch");
    for (size_t l = 0; l < w.size(); ++l) {
        if (w[l].size() != net.weights_[l].size() || b[l].size() != net.biases_[l].size())
            throw std::runtime_error("network json: parameter shape mismatch");
        net.weights_[l] = std::move(w[l]);
        net.biases_[l] = std::move(b[l]);
    }
    return net;
}

AdamOptimizer::AdamOptimizer(double learning_rate, double beta1, double beta2, double epsilon)
    : learning_rate_(learning_rate), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}

void AdamOptimizer::ensure_buffers(const DenseNet& net, const Gradients& grads) {
    if (grads.weights.size() != net.weight_matrices().size())
        throw std::invalid_argument("optimizer: gradient layer count mismatch");
    for (size_t l = 0; l < grads.weights.size(); ++l) {
        if (grads.weights[l].size() != net.weight_matrices()[l].size() ||
            grads.biases[l].size() != net.bias_vectors()[l].size())
            throw std::invalid_argument("optimizer: gradient shape mismatch");
    }
    if (!initialized_) {
        m_weights_.resize(grads.weights.size());
        v_weights_.resize(grads.weights.size());
        m_biases_.resize(grads.biases.size());
        v_biases_.resize(grads.biases.size());
        for (size_t l = 0; l < grads.weights.size(); ++l) {
            m_weights_[l].assign(grads.weights[l].size(), 0.0);
            v_weights_[l].assign(grads.weights[l].size(), 0.0);
            m_biases_[l].assign(grads.biases[l].size(), 0.0);
            v_biases_[l].assign(grads.biases[l].size(), 0.0);
        }
        initialized_ = true;
    } else if (m_weights_.size() != grads.weights.size() ||
               (m_weights_.size() > 0 && m_weights_[0].size() != grads.weights[0].size())) {
        throw std::invalid_argument("optimizer: moment buffers do not match gradients");
    }
}

void AdamOptimizer::apply(DenseNet& net, const Gradients& grads) {
    ensure_buffers(net, grads);
    ++step_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
    auto update = [&](std::vector<double>& param, const std::vector<double>& g,
                      std::vector<double>& m, std::vector<double>& v) {
        for (size_t i = 0; i < param.size(); ++i) {
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            param[i] -= learning_rate_ * m_hat / (std::sqrt(v_hat) + epsilon_);
        }
    };
    for (size_t l = 0; l < grads.weights.size(); ++l) {
        update(net.weight_matrices()[l], grads.weights[l], m_weights_[l], v_weights_[l]);
        update(net.bias_vectors()[l], grads.biases[l], m_biases_[l], v_biases_[l]);
    }
}

void soft_update(DenseNet& target, const DenseNet& source, double tau) {
    if (!target.same_architecture(source))
        throw std::invalid_argument("soft_update: architecture mismatch");
    for (size_t l = 0; l < target.weight_matrices().size(); ++l) {
        auto& tw = target.weight_matrices()[l];
        const auto& sw = source.weight_matrices()[l];
        for (size_t i = 0; i < tw.size(); ++i) tw[i] = tau * sw[i] + (1.0 - tau) * tw[i];
        auto& tb = target.bias_vectors()[l];
        const auto& sb = source.bias_vectors()[l];
        for (size_t i = 0; i < tb.size(); ++i) tb[i] = tau * sb[i] + (1.0 - tau) * tb[i];
    }
}

}  // namespace jcas::nn
