#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ad/tensor.hpp"

namespace ddnet::ad {

using ScalarFn = std::function<Tensor<double>(Tape<double>&)>;
using PointFn = std::function<Tensor<double>(Tape<double>&, const Tensor<double>&)>;

// Compares the recorded gradient of a scalar function against central
// differences (f(x+eps) - f(x-eps)) / 2eps, one coordinate at a time.
// Returns max over coordinates of |a - n| / max(|a|, |n|, 1e-8).
//
// `inputs` are the leaves being checked; f must read them and may close over
// anything else. Their values are perturbed in place and restored.
double finite_diff_check(const ScalarFn& f, std::span<Tensor<double>> inputs, double eps);

double finite_diff_check(const PointFn& f, const NdArray<double>& x, double eps);

}  // namespace ddnet::ad
