#pragma once

// Finite-difference checks of every differentiable operator, shared by the
// unit tests and the acceptance run.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ad/gradcheck.hpp"
#include "ad/ops.hpp"

namespace ddnet::testing {

struct OpCheck {
    std::string name;
    double error;
    double bound;
};

namespace detail {

using T = ad::Tensor<double>;

inline T random_tensor(std::mt19937_64& rng, ad::Shape shape, double scale = 1.0, bool grad = true) {
    std::normal_distribution<double> n(0.0, scale);
    ad::NdArray<double> a(std::move(shape));
    for (auto& v : a.data) v = n(rng);
    return T(std::move(a), grad);
}

// Weighted sum with fixed random weights so that every output coordinate
// carries a distinct upstream gradient. The weight stream is offset from the
// input stream: weights proportional to the input make the normalization
// gradient vanish identically.
inline T weighted(ad::Tape<double>& tape, const T& y, std::uint64_t seed) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL);
    auto w = random_tensor(rng, y.shape(), 1.0, false);
    return ad::sum(&tape, ad::mul(&tape, y, w));
}

}  // namespace detail

inline std::vector<OpCheck> operator_gradchecks(std::uint64_t seed) {
    using detail::T;
    using detail::random_tensor;
    using detail::weighted;
    using ad::Tape;
    std::mt19937_64 rng(seed);
    std::vector<OpCheck> out;

    for (std::size_t k : {1u, 3u}) {
        std::vector<T> in = {random_tensor(rng, {2, 5, 3}), random_tensor(rng, {k, 3, 4}), random_tensor(rng, {4})};
        auto f = [&](Tape<double>& t) { return weighted(t, ad::conv1d(&t, in[0], in[1], in[2]), seed); };
        out.push_back({"conv1d k=" + std::to_string(k), ad::finite_diff_check(f, in, 1e-4), 1e-4});
    }
    {
        std::vector<T> in = {random_tensor(rng, {2, 5, 3}), random_tensor(rng, {3, 3, 4})};
        auto f = [&](Tape<double>& t) { return weighted(t, ad::conv1d(&t, in[0], in[1], T{}), seed); };
        out.push_back({"conv1d no bias", ad::finite_diff_check(f, in, 1e-4), 1e-4});
    }
    {
        // Distinct, well separated values keep each pooling winner stable.
        std::vector<double> vals(2 * 7 * 3);
        for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = 0.05 * static_cast<double>(i);
        std::shuffle(vals.begin(), vals.end(), rng);
        std::vector<T> in = {T(ad::NdArray<double>({2, 7, 3}, vals), true)};
        auto f = [&](Tape<double>& t) { return weighted(t, ad::maxpool1d(&t, in[0]), seed); };
        out.push_back({"maxpool1d", ad::finite_diff_check(f, in, 1e-4), 1e-4});
    }
    {
        std::vector<T> in = {random_tensor(rng, {3, 4, 5})};
        auto f = [&](Tape<double>& t) { return weighted(t, ad::global_avg_pool(&t, in[0]), seed); };
        out.push_back({"global_avg_pool", ad::finite_diff_check(f, in, 1e-4), 1e-4});
    }
    {
        std::vector<T> in = {random_tensor(rng, {3, 6}), random_tensor(rng, {6, 4}), random_tensor(rng, {4})};
        auto f = [&](Tape<double>& t) { return weighted(t, ad::dense(&t, in[0], in[1], in[2]), seed); };
        out.push_back({"dense", ad::finite_diff_check(f, in, 1e-4), 1e-4});
    }
    {
        auto x = random_tensor(rng, {20});
        for (auto& v : x.mutable_data()) v += v >= 0 ? 0.1 : -0.1;  // keep away from the kink
        std::vector<T> in = {x};
        auto f = [&](Tape<double>& t) { return weighted(t, ad::leaky_relu(&t, in[0], 0.1), seed); };
        out.push_back({"leaky_relu", ad::finite_diff_check(f, in, 1e-4), 1e-4});
    }
    {
        std::vector<T> in = {random_tensor(rng, {3, 4, 2}, 2.0), random_tensor(rng, {2}), random_tensor(rng, {2})};
        auto train = [&](Tape<double>& t) {
            std::vector<double> m(2, 0.0), v(2, 1.0);
            return weighted(t, ad::batch_norm(&t, in[0], in[1], in[2], std::span(m), std::span(v),
                                              {ad::BatchNormMode::Train, 1e-5, 0.1}), seed);
        };
        out.push_back({"batch_norm train", ad::finite_diff_check(train, in, 1e-5), 1e-3});
        std::vector<double> m2 = {0.3, -0.2}, v2 = {1.5, 0.7};
        auto infer = [&](Tape<double>& t) {
            return weighted(t, ad::batch_norm(&t, in[0], in[1], in[2], std::span(m2), std::span(v2),
                                              {ad::BatchNormMode::Infer, 1e-5, 0.1}), seed);
        };
        out.push_back({"batch_norm infer", ad::finite_diff_check(infer, in, 1e-4), 1e-4});
    }
    {
        std::vector<T> in = {random_tensor(rng, {2, 3, 2}), random_tensor(rng, {2, 3, 3}), random_tensor(rng, {2, 3, 1})};
        auto f = [&](Tape<double>& t) { return weighted(t, ad::concat_channels(&t, {in[0], in[1], in[2]}), seed); };
        out.push_back({"concat_channels", ad::finite_diff_check(f, in, 1e-4), 1e-4});
    }
    {
        std::vector<T> in = {random_tensor(rng, {4, 6})};
        auto f = [&](Tape<double>& t) {
            std::mt19937_64 mask(seed);  // same mask on every evaluation
            return weighted(t, ad::dropout(&t, in[0], 0.5, mask), seed);
        };
        out.push_back({"dropout", ad::finite_diff_check(f, in, 1e-4), 1e-4});
    }
    {
        std::vector<T> in = {random_tensor(rng, {4, 5})};
        const std::vector<int> labels = {0, 3, 4, 1};
        auto f = [&](Tape<double>& t) { return ad::softmax_cross_entropy(&t, in[0], labels); };
        out.push_back({"softmax_cross_entropy", ad::finite_diff_check(f, in, 1e-4), 1e-4});
    }
    {
        std::vector<T> in = {random_tensor(rng, {3, 4}), random_tensor(rng, {3, 4})};
        auto f = [&](Tape<double>& t) { return weighted(t, ad::mul(&t, in[0], in[1]), seed); };
        out.push_back({"mul", ad::finite_diff_check(f, in, 1e-4), 1e-4});
    }
    {
        std::vector<T> in = {random_tensor(rng, {7})};
        auto f = [&](Tape<double>& t) { return ad::sum(&t, in[0]); };
        out.push_back({"sum", ad::finite_diff_check(f, in, 1e-4), 1e-4});
    }
    return out;
}

}  // namespace ddnet::testing
