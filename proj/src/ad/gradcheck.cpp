#include "ad/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace ddnet::ad {

namespace {

double evaluate(const ScalarFn& f) {
    Tape<double> scratch;
    const Tensor<double> out = f(scratch);
    return out.item();
}

}  // namespace

double finite_diff_check(const ScalarFn& f, std::span<Tensor<double>> inputs, double eps) {
    for (auto& t : inputs) {
        t.set_requires_grad(true);
        t.zero_grad();
    }
    std::vector<std::vector<double>> analytic;
    {
        Tape<double> tape;
        const Tensor<double> loss = f(tape);
        require(loss.size() == 1, ErrorCode::Shape, "finite_diff_check: function must be scalar-valued");
        tape.backward(loss);
        for (auto& t : inputs) {
            if (t.has_grad()) {
                analytic.emplace_back(t.grad().begin(), t.grad().end());
            } else {
                analytic.emplace_back(t.size(), 0.0);
            }
        }
    }

    double worst = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        auto values = inputs[i].mutable_data();
        for (std::size_t j = 0; j < values.size(); ++j) {
            const double saved = values[j];
            values[j] = saved + eps;
            const double up = evaluate(f);
            values[j] = saved - eps;
            const double down = evaluate(f);
            values[j] = saved;
            const double numeric = (up - down) / (2.0 * eps);
            const double a = analytic[i][j];
            const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
            worst = std::max(worst, std::abs(a - numeric) / denom);
        }
    }
    return worst;
}

double finite_diff_check(const PointFn& f, const NdArray<double>& x, double eps) {
    std::vector<Tensor<double>> leaf{Tensor<double>(x, true)};
    Tensor<double> handle = leaf.front();
    return finite_diff_check([&](Tape<double>& tape) { return f(tape, handle); }, leaf, eps);
}

}  // namespace ddnet::ad
