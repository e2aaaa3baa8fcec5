#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ad/gradcheck.hpp"
#include "model/ddnet_model.hpp"

namespace ddnet::testing {

inline ModelConfig tiny_config() {
    ModelConfig c;
    c.filters = 2;
    c.num_joints = 4;
    c.coord_dim = 3;
    c.seq_len = 16;
    c.num_classes = 3;
    return c;
}

inline ModelInputs<double> random_inputs(const ModelConfig& c, std::size_t batch, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    auto make = [&](std::size_t t, std::size_t w) {
        ad::NdArray<double> a({batch, t, w});
        for (auto& v : a.data) v = n(rng);
        return ad::Tensor<double>(std::move(a));
    };
    return {make(c.seq_len, c.jcd_dim()), make(c.seq_len, c.motion_dim()), make(c.seq_len / 2, c.motion_dim())};
}

// Which branch every piecewise-linear unit took: the sign of each LeakyReLU
// input and the winner of each pooling pair.
template <typename Real>
std::vector<std::uint8_t> activation_pattern(const ad::Tape<Real>& tape) {
    std::vector<std::uint8_t> out;
    for (const auto& rec : tape.records()) {
        const std::string op = rec.op;
        const auto& v = rec.inputs.front()->value;
        if (op == "leaky_relu") {
            for (Real x : v.data) out.push_back(x >= Real(0));
        } else if (op == "maxpool1d") {
            const std::size_t steps = v.shape[1], ch = v.shape[2];
            for (std::size_t n = 0; n < v.shape[0]; ++n)
                for (std::size_t t = 0; t + 1 < steps; t += 2)
                    for (std::size_t c = 0; c < ch; ++c)
                        out.push_back(v.data[(n * steps + t) * ch + c] >= v.data[(n * steps + t + 1) * ch + c]);
        }
    }
    return out;
}

struct ModelGradcheck {
    double max_rel_error = 0.0;
    int rejected_points = 0;  // draws discarded because a probe crossed a kink
};

// Max relative error between recorded and finite-difference gradients of the
// cross-entropy loss with respect to every parameter and every input stream.
//
// A central difference only measures the derivative where the function is
// smooth across [x - eps, x + eps]. Points where some probe flips a
// LeakyReLU or pooling branch are discarded whole and a fresh point drawn.
inline ModelGradcheck model_gradcheck(std::uint64_t seed, Mode mode, double eps, std::size_t batch = 4) {
    const ModelConfig config = tiny_config();
    ModelGradcheck result;
    for (std::uint64_t draw = 0;; ++draw) {
        auto model = init_model<double>(config, seed * 1000 + draw);
        std::mt19937_64 rng(seed * 7919 + draw);
        // Non-trivial affine terms and running stats so nothing is
        // structurally zero.
        std::normal_distribution<double> n(0.0, 0.1);
        for (auto& p : model.parameters()) {
            if (p.name.ends_with(".b") || p.name.ends_with(".beta")) {
                for (auto& v : p.tensor.mutable_data()) v = n(rng);
            }
        }
        for (auto& s : model.norm_stats()) {
            for (auto& v : s.running_mean) v = n(rng);
            for (auto& v : s.running_var) v = 1.0 + std::abs(n(rng));
        }
        auto inputs = random_inputs(config, batch, rng);
        std::vector<int> labels(batch);
        for (std::size_t i = 0; i < batch; ++i) labels[i] = static_cast<int>((i * 2) % config.num_classes);

        std::vector<ad::Tensor<double>> leaves;
        for (auto& p : model.parameters()) leaves.push_back(p.tensor);
        leaves.push_back(inputs.jcd);
        leaves.push_back(inputs.slow);
        leaves.push_back(inputs.fast);

        const auto stats = model.norm_stats();
        std::vector<std::uint8_t> reference;
        struct Crossed {};
        auto f = [&](ad::Tape<double>& tape) {
            model.norm_stats() = stats;
            std::mt19937_64 drop(seed);
            auto logits = model.forward(&tape, inputs, mode, &drop);
            auto pattern = activation_pattern(tape);
            if (reference.empty()) {
                reference = std::move(pattern);
            } else if (pattern != reference) {
                throw Crossed{};  // this draw is unusable, stop probing it
            }
            return ad::softmax_cross_entropy(&tape, logits, std::span<const int>(labels));
        };
        try {
            result.max_rel_error = ad::finite_diff_check(f, leaves, eps);
            return result;
        } catch (const Crossed&) {
            ++result.rejected_points;
        }
    }
}

}  // namespace ddnet::testing
