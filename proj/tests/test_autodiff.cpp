#include <cmath>
#include <random>

#include "ad/gradcheck.hpp"
#include "ad/ops.hpp"
#include "core/error.hpp"
#include "doctest.h"
#include "support/op_checks.hpp"

using namespace ddnet;
using namespace ddnet::ad;

namespace {

using T = Tensor<double>;

T random_tensor(std::mt19937_64& rng, Shape shape, double scale = 1.0, bool grad = true) {
    std::normal_distribution<double> n(0.0, scale);
    NdArray<double> a(std::move(shape));
    for (auto& v : a.data) v = n(rng);
    return T(std::move(a), grad);
}

template <typename Real>
Tensor<Real> constant(Shape shape, std::vector<Real> values, bool grad = false) {
    return Tensor<Real>(NdArray<Real>(std::move(shape), std::move(values)), grad);
}

}  // namespace

TEST_CASE("conv1d examples") {
    auto x = constant<float>({1, 2, 3}, {1, 2, 3, 4, 5, 6});
    auto eye = constant<float>({1, 3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    auto zero = constant<float>({3}, {0, 0, 0});
    auto y = conv1d<float>(nullptr, x, eye, zero);
    CHECK(y.shape() == Shape{1, 2, 3});
    for (std::size_t i = 0; i < 6; ++i) CHECK(y.data()[i] == x.data()[i]);

    auto x3 = constant<float>({1, 3, 1}, {1, 2, 3});
    auto w3 = constant<float>({3, 1, 1}, {1, 1, 1});
    auto b = constant<float>({1}, {0});
    auto y3 = conv1d<float>(nullptr, x3, w3, b);
    CHECK(y3.data()[0] == 3.f);
    CHECK(y3.data()[1] == 6.f);
    CHECK(y3.data()[2] == 5.f);

    auto bad = constant<float>({3, 2, 1}, {1, 1, 1, 1, 1, 1});
    CHECK_THROWS_AS(conv1d<float>(nullptr, x3, bad, b), Error);
}

TEST_CASE("maxpool1d examples") {
    auto x = constant<double>({1, 4, 1}, {1, 3, 2, 4}, true);
    Tape<double> tape;
    auto y = maxpool1d(&tape, x);
    REQUIRE(y.shape() == Shape{1, 2, 1});
    CHECK(y.data()[0] == 3.0);
    CHECK(y.data()[1] == 4.0);

    auto c = constant<double>({1, 5, 1}, {7, 7, 7, 7, 7}, true);
    auto yc = maxpool1d(&tape, c);
    CHECK(yc.shape() == Shape{1, 2, 1});
    for (double v : yc.data()) CHECK(v == 7.0);
    tape.backward(sum(&tape, yc));
    const std::vector<double> want = {1, 0, 1, 0, 0};
    for (std::size_t i = 0; i < 5; ++i) CHECK(c.grad()[i] == want[i]);
}

TEST_CASE("global_avg_pool examples") {
    auto x = constant<float>({1, 3, 1}, {0, 2, 4});
    CHECK(global_avg_pool<float>(nullptr, x).item() == 2.f);
    auto c = constant<float>({2, 4, 2}, std::vector<float>(16, 1.5f));
    auto y = global_avg_pool<float>(nullptr, c);
    CHECK(y.shape() == Shape{2, 2});
    for (float v : y.data()) CHECK(v == 1.5f);
}

TEST_CASE("dense examples") {
    auto x = constant<float>({1, 2}, {1, 2});
    auto w = constant<float>({2, 1}, {1, 1});
    auto b = constant<float>({1}, {0.5f});
    CHECK(dense<float>(nullptr, x, w, b).item() == 3.5f);
    auto eye = constant<float>({2, 2}, {1, 0, 0, 1});
    auto zero = constant<float>({2}, {0, 0});
    auto y = dense<float>(nullptr, x, eye, zero);
    CHECK(y.data()[0] == 1.f);
    CHECK(y.data()[1] == 2.f);
}

TEST_CASE("leaky_relu examples") {
    auto x = constant<double>({3}, {5, -2, 0}, true);
    Tape<double> tape;
    auto y = leaky_relu(&tape, x, 0.1);
    CHECK(y.data()[0] == 5.0);
    CHECK(y.data()[1] == doctest::Approx(-0.2));
    CHECK(y.data()[2] == 0.0);
    tape.backward(sum(&tape, y));
    CHECK(x.grad()[0] == 1.0);
    CHECK(x.grad()[1] == doctest::Approx(0.1));
    CHECK(x.grad()[2] == 1.0);
}

TEST_CASE("batch_norm infer mode with unit stats is the identity") {
    std::mt19937_64 rng(1);
    auto x = random_tensor(rng, {2, 5, 3}, 1.0, false);
    auto gamma = constant<double>({3}, {1, 1, 1});
    auto beta = constant<double>({3}, {0, 0, 0});
    std::vector<double> rm(3, 0.0), rv(3, 1.0);
    auto y = batch_norm<double>(nullptr, x, gamma, beta, rm, rv, {BatchNormMode::Infer, 1e-5, 0.1});
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y.data()[i] == doctest::Approx(x.data()[i]).epsilon(1e-5));
}

TEST_CASE("batch_norm train mode moments and running stats") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(3.0, 2.0);
    NdArray<double> a({8, 16, 4});
    for (auto& v : a.data) v = n(rng);
    T x(a);
    auto gamma = constant<double>({4}, {1, 1, 1, 1});
    auto beta = constant<double>({4}, {0, 0, 0, 0});
    std::vector<double> rm(4, 0.0), rv(4, 1.0);
    auto y = batch_norm<double>(nullptr, x, gamma, beta, rm, rv, {BatchNormMode::Train, 1e-5, 0.1});
    for (std::size_t c = 0; c < 4; ++c) {
        double mean = 0, var = 0, xm = 0, xv = 0;
        const double rows = 128;
        for (std::size_t r = 0; r < 128; ++r) {
            mean += y.data()[r * 4 + c];
            xm += a.data[r * 4 + c];
        }
        mean /= rows;
        xm /= rows;
        for (std::size_t r = 0; r < 128; ++r) {
            var += std::pow(y.data()[r * 4 + c] - mean, 2);
            xv += std::pow(a.data[r * 4 + c] - xm, 2);
        }
        var /= rows;
        CHECK(std::abs(mean) < 1e-5);
        CHECK(std::abs(var - 1.0) < 1e-3);
        CHECK(rm[c] == doctest::Approx(0.1 * xm));
        CHECK(rv[c] == doctest::Approx(0.9 + 0.1 * xv / (rows - 1)));
    }
}

TEST_CASE("batch_norm train mode needs two elements") {
    auto x = constant<double>({1, 2}, {1, 2});
    auto gamma = constant<double>({2}, {1, 1});
    auto beta = constant<double>({2}, {0, 0});
    std::vector<double> rm(2, 0.0), rv(2, 1.0);
    try {
        batch_norm<double>(nullptr, x, gamma, beta, rm, rv, {BatchNormMode::Train, 1e-5, 0.1});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateBatch);
    }
}

TEST_CASE("concat_channels examples") {
    auto a = constant<float>({1, 2, 1}, {1, 2});
    auto b = constant<float>({1, 2, 1}, {3, 4});
    auto single = concat_channels<float>(nullptr, {a});
    CHECK(single.shape() == a.shape());
    auto y = concat_channels<float>(nullptr, {a, b});
    CHECK(y.shape() == Shape{1, 2, 2});
    const std::vector<float> want = {1, 3, 2, 4};
    for (std::size_t i = 0; i < 4; ++i) CHECK(y.data()[i] == want[i]);
}

TEST_CASE("softmax_cross_entropy examples") {
    auto logits = constant<double>({1, 14}, std::vector<double>(14, 0.3));
    const int label = 5;
    CHECK(softmax_cross_entropy<double>(nullptr, logits, std::span<const int>(&label, 1)).item() ==
          doctest::Approx(std::log(14.0)));
    auto sharp = constant<double>({1, 2}, {10, -10});
    const int zero = 0;
    CHECK(softmax_cross_entropy<double>(nullptr, sharp, std::span<const int>(&zero, 1)).item() < 1e-4);

    auto p = softmax(NdArray<double>({2, 3}, {1, 2, 3, 1000, 1000, 1000}));
    CHECK(p.data[0] + p.data[1] + p.data[2] == doctest::Approx(1.0));
    CHECK(p.data[3] == doctest::Approx(1.0 / 3));
}

TEST_CASE("backward on simple graphs") {
    Tape<double> tape;
    auto x = constant<double>({1}, {3.0}, true);
    tape.backward(x);
    CHECK(x.grad()[0] == 1.0);

    auto y = constant<double>({1}, {3.0}, true);
    tape.backward(sum(&tape, mul(&tape, y, y)));
    CHECK(y.grad()[0] == 6.0);

    // Leaf gradients accumulate across backward calls.
    tape.backward(sum(&tape, mul(&tape, y, y)));
    CHECK(y.grad()[0] == 12.0);
}

TEST_CASE("inference calls record nothing") {
    Tape<float> tape;
    auto x = constant<float>({1, 3, 1}, {1, 2, 3});
    auto w = constant<float>({3, 1, 1}, {1, 1, 1});
    auto b = constant<float>({1}, {0});
    conv1d(&tape, x, w, b);
    CHECK(tape.size() == 0);
}

TEST_CASE("finite_diff_check sanity") {
    NdArray<double> x({4}, {0.5, -1.0, 2.0, 3.0});
    CHECK(finite_diff_check([](Tape<double>& tape, const T& v) { return sum(&tape, v); }, x, 1e-4) < 1e-8);
    CHECK(finite_diff_check([](Tape<double>& tape, const T& v) { return sum(&tape, mul(&tape, v, v)); }, x, 1e-4) <
          1e-6);
}

TEST_CASE("operator gradient checks") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        for (const auto& c : testing::operator_gradchecks(seed)) {
            INFO(c.name << " seed " << seed);
            CHECK(c.error < c.bound);
        }
    }
}

TEST_CASE("dropout scales survivors and rate 0 is the identity") {
    std::mt19937_64 rng(1);
    auto x = constant<float>({1, 1000}, std::vector<float>(1000, 1.0f));
    auto same = dropout<float>(nullptr, x, 0.0, rng);
    CHECK(same.impl() == x.impl());
    auto y = dropout<float>(nullptr, x, 0.5, rng);
    std::size_t kept = 0;
    for (float v : y.data()) {
        CHECK((v == 0.0f || v == 2.0f));
        kept += v != 0.0f;
    }
    CHECK(kept > 400);
    CHECK(kept < 600);
}

TEST_CASE("conv1d with k=1 matches dense applied per time step") {
    std::mt19937_64 rng(12);
    auto x = random_tensor(rng, {2, 4, 3}, 1.0, false);
    auto w = random_tensor(rng, {1, 3, 5}, 1.0, false);
    auto b = random_tensor(rng, {5}, 1.0, false);
    auto y = conv1d<double>(nullptr, x, w, b);
    T flat(NdArray<double>({8, 3}, x.value().data));
    T w2(NdArray<double>({3, 5}, w.value().data));
    auto z = dense<double>(nullptr, flat, w2, b);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y.data()[i] == doctest::Approx(z.data()[i]).epsilon(1e-12));
}

TEST_CASE("forward is deterministic and tapes are independent") {
    std::mt19937_64 rng(13);
    auto x = random_tensor(rng, {2, 6, 3});
    auto w = random_tensor(rng, {3, 3, 2});
    auto b = random_tensor(rng, {2});
    Tape<double> t1, t2;
    auto y1 = conv1d(&t1, x, w, b);
    auto y2 = conv1d(&t2, x, w, b);
    for (std::size_t i = 0; i < y1.size(); ++i) CHECK(y1.data()[i] == y2.data()[i]);
    t1.backward(sum(&t1, y1));
    std::vector<double> g(w.grad().begin(), w.grad().end());
    w.zero_grad();
    x.zero_grad();
    b.zero_grad();
    t2.backward(sum(&t2, y2));
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(w.grad()[i] == g[i]);
}
