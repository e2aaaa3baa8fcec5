#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "io/dataset.hpp"
#include "model/ddnet_model.hpp"

namespace ddnet {

struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t step = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
};

// Bias-corrected Adam update using the gradients stored on each parameter.
// A missing gradient counts as zero. Throws Diverged, naming the parameter,
// on a non-finite gradient; nothing is modified in that case.
void adam_step(std::vector<NamedParameter<float>>& params, AdamState& state, double lr);

struct TrainConfig {
    std::size_t epochs = 600;
    std::size_t batch_size = 256;  // 0 = whole training set per step
    double lr_max = 1e-3;
    double lr_min = 1e-5;
    std::size_t plateau_patience = 20;
    double plateau_factor = 0.5;
    double augment_ratio = 0.9;
    std::uint64_t seed = 0;

    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_acc = 0.0;
    double lr = 0.0;

    bool operator==(const EpochRecord&) const = default;
};

using TrainHistory = std::vector<EpochRecord>;

// Reduce-on-plateau: starts at lr_max and multiplies by plateau_factor each
// time validation accuracy has gone plateau_patience epochs without a new
// best, never dropping below lr_min.
double lr_schedule(const TrainHistory& history, const TrainConfig& config);

struct TrainResult {
    DDNetModel<float> model;  // weights from the best validation epoch
    TrainHistory history;
    std::size_t best_epoch = 0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// When `validation` is null the training set, without augmentation, serves
// for model selection.
TrainResult train(const CanonicalDataset& train_set, const CanonicalDataset* validation,
                  const ModelConfig& model_config, const TrainConfig& config, const EpochCallback& on_epoch = {});

struct Evaluation {
    double accuracy = 0.0;
    std::vector<std::vector<std::int64_t>> confusion;  // [true][predicted]
};

Evaluation evaluate(const DDNetModel<float>& model, const CanonicalDataset& dataset);

// Checks that a model can consume a dataset (joints, dims, classes).
void check_compatible(const ModelConfig& config, const CanonicalDataset& dataset);

}  // namespace ddnet
