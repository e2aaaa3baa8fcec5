#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "ad/tensor.hpp"

namespace ddnet::ad {

// Operators take an optional tape. When the tape is null, or no input
// requires a gradient, nothing is recorded and the call is a plain forward
// computation that is safe to run concurrently on shared inputs.
//
// Sequence tensors are laid out batch x time x channels.

// Zero-padded ("same") 1D convolution. w is k x Cin x Cout with odd k; an
// undefined bias tensor means no bias.
template <typename Real>
Tensor<Real> conv1d(Tape<Real>* tape, const Tensor<Real>& x, const Tensor<Real>& w, const Tensor<Real>& b);

// Window 2, stride 2. A trailing odd step is dropped; ties route the
// gradient to the earlier element.
template <typename Real>
Tensor<Real> maxpool1d(Tape<Real>* tape, const Tensor<Real>& x);

// B x T x C -> B x C
template <typename Real>
Tensor<Real> global_avg_pool(Tape<Real>* tape, const Tensor<Real>& x);

// B x Cin times Cin x Cout plus bias.
template <typename Real>
Tensor<Real> dense(Tape<Real>* tape, const Tensor<Real>& x, const Tensor<Real>& w, const Tensor<Real>& b);

template <typename Real>
Tensor<Real> leaky_relu(Tape<Real>* tape, const Tensor<Real>& x, Real slope);

enum class BatchNormMode { Train, Infer };

struct BatchNormOptions {
    BatchNormMode mode = BatchNormMode::Infer;
    double epsilon = 1e-5;
    // Weight of the current batch statistic in the running average.
    double momentum = 0.1;
};

// Per-channel normalization over every leading axis (batch and time).
// Train mode uses batch statistics and updates the running ones in place.
template <typename Real>
Tensor<Real> batch_norm(Tape<Real>* tape, const Tensor<Real>& x, const Tensor<Real>& gamma,
                        const Tensor<Real>& beta, std::span<Real> running_mean, std::span<Real> running_var,
                        const BatchNormOptions& options);

template <typename Real>
Tensor<Real> concat_channels(Tape<Real>* tape, const std::vector<Tensor<Real>>& xs);

// Inverted dropout; rate 0 returns the input unchanged.
template <typename Real>
Tensor<Real> dropout(Tape<Real>* tape, const Tensor<Real>& x, double rate, std::mt19937_64& rng);

// Mean over the batch of -log softmax(logits)[label].
template <typename Real>
Tensor<Real> softmax_cross_entropy(Tape<Real>* tape, const Tensor<Real>& logits, std::span<const int> labels);

template <typename Real>
Tensor<Real> mul(Tape<Real>* tape, const Tensor<Real>& a, const Tensor<Real>& b);

template <typename Real>
Tensor<Real> sum(Tape<Real>* tape, const Tensor<Real>& x);

// Row-wise softmax of a B x C array, max-subtracted.
template <typename Real>
NdArray<Real> softmax(const NdArray<Real>& logits);

}  // namespace ddnet::ad
