#include "train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "core/error.hpp"

namespace ddnet {

void adam_step(std::vector<NamedParameter<float>>& params, AdamState& state, double lr) {
    if (state.m.size() != params.size()) {
        state.m.clear();
        state.v.clear();
        for (const auto& p : params) {
            state.m.emplace_back(p.tensor.size(), 0.0);
            state.v.emplace_back(p.tensor.size(), 0.0);
        }
    }
    for (const auto& p : params) {
        if (!p.tensor.has_grad()) continue;
        for (float g : p.tensor.grad()) {
            require(std::isfinite(g), ErrorCode::Diverged, "non-finite gradient in parameter " + p.name);
        }
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correct1 = 1.0 - std::pow(state.beta1, t);
    const double correct2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& tensor = params[i].tensor;
        auto values = tensor.mutable_data();
        auto& m = state.m[i];
        auto& v = state.v[i];
        const bool has = tensor.has_grad();
        for (std::size_t j = 0; j < values.size(); ++j) {
            const double g = has ? static_cast<double>(tensor.grad()[j]) : 0.0;
            m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g;
            v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g * g;
            const double step = lr * (m[j] / correct1) / (std::sqrt(v[j] / correct2) + state.epsilon);
            if (step != 0.0) values[j] = static_cast<float>(static_cast<double>(values[j]) - step);
        }
    }
}

void TrainConfig::validate() const {
    require(epochs >= 1, ErrorCode::Config, "epochs must be >= 1");
    require(lr_min > 0.0 && lr_min <= lr_max, ErrorCode::Config, "need 0 < lr_min <= lr_max");
    require(plateau_factor > 0.0 && plateau_factor < 1.0, ErrorCode::Config, "plateau_factor must lie in (0, 1)");
    require(plateau_patience >= 1, ErrorCode::Config, "plateau_patience must be >= 1");
    require(augment_ratio > 0.0 && augment_ratio <= 1.0, ErrorCode::Config, "augment_ratio must lie in (0, 1]");
}

double lr_schedule(const TrainHistory& history, const TrainConfig& config) {
    double lr = config.lr_max;
    double best = -1.0;
    std::size_t stale = 0;
    for (const auto& rec : history) {
        if (rec.val_acc > best) {
            best = rec.val_acc;
            stale = 0;
            continue;
        }
        if (++stale >= config.plateau_patience) {
            lr = std::max(lr * config.plateau_factor, config.lr_min);
            stale = 0;
        }
    }
    return lr;
}

void check_compatible(const ModelConfig& config, const CanonicalDataset& dataset) {
    require(config.num_joints == dataset.num_joints && config.coord_dim == dataset.coord_dim, ErrorCode::Config,
            "model expects " + std::to_string(config.num_joints) + " joints x " + std::to_string(config.coord_dim) +
                "D, dataset has " + std::to_string(dataset.num_joints) + " x " + std::to_string(dataset.coord_dim) +
                "D");
    require(config.num_classes == dataset.num_classes(), ErrorCode::Config,
            "model has " + std::to_string(config.num_classes) + " classes, dataset has " +
                std::to_string(dataset.num_classes()));
}

namespace {

std::vector<FeatureBundle> bundles_of(const CanonicalDataset& ds, std::size_t seq_len) {
    std::vector<FeatureBundle> out;
    out.reserve(ds.size());
    for (const auto& s : ds.samples) out.push_back(build_feature_bundle(s.sequence, seq_len));
    return out;
}

Evaluation evaluate_bundles(const DDNetModel<float>& model, std::span<const FeatureBundle> bundles,
                            const std::vector<int>& labels) {
    const std::size_t classes = model.config().num_classes;
    Evaluation ev;
    ev.confusion.assign(classes, std::vector<std::int64_t>(classes, 0));
    constexpr std::size_t kChunk = 256;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < bundles.size(); start += kChunk) {
        const std::size_t n = std::min(kChunk, bundles.size() - start);
        const auto preds = predict(model, bundles.subspan(start, n));
        for (std::size_t i = 0; i < n; ++i) {
            const int truth = labels[start + i];
            ++ev.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(preds[i].class_id)];
            correct += preds[i].class_id == truth ? 1 : 0;
        }
    }
    ev.accuracy = static_cast<double>(correct) / static_cast<double>(bundles.size());
    return ev;
}

std::vector<int> labels_of(const CanonicalDataset& ds) {
    std::vector<int> out;
    for (const auto& s : ds.samples) out.push_back(s.label);
    return out;
}

}  // namespace

Evaluation evaluate(const DDNetModel<float>& model, const CanonicalDataset& dataset) {
    require(!dataset.samples.empty(), ErrorCode::InvalidInput, "cannot evaluate on an empty dataset");
    dataset.validate();
    check_compatible(model.config(), dataset);
    const auto bundles = bundles_of(dataset, model.config().seq_len);
    return evaluate_bundles(model, bundles, labels_of(dataset));
}

TrainResult train(const CanonicalDataset& train_set, const CanonicalDataset* validation,
                  const ModelConfig& model_config, const TrainConfig& config, const EpochCallback& on_epoch) {
    require(!train_set.samples.empty(), ErrorCode::InvalidInput, "training set is empty");
    train_set.validate();
    config.validate();
    model_config.validate();
    check_compatible(model_config, train_set);
    if (validation != nullptr) {
        validation->validate();
        check_compatible(model_config, *validation);
    }

    const std::size_t seq_len = model_config.seq_len;
    const std::vector<FeatureBundle> val_bundles = bundles_of(validation ? *validation : train_set, seq_len);
    const std::vector<int> val_labels = labels_of(validation ? *validation : train_set);

    std::mt19937_64 rng(config.seed);
    TrainResult result{init_model<float>(model_config, rng()), {}, 0};
    DDNetModel<float>& model = result.model;
    DDNetModel<float> best = model.cast<float>();
    double best_acc = -1.0;
    AdamState adam;

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t batch = config.batch_size == 0 ? order.size() : std::min(config.batch_size, order.size());

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr = lr_schedule(result.history, config);
        std::shuffle(order.begin(), order.end(), rng);

        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t n = std::min(batch, order.size() - start);
            std::vector<FeatureBundle> bundles;
            std::vector<int> labels;
            bundles.reserve(n);
            for (std::size_t i = 0; i < n; ++i) {
                const auto& sample = train_set.samples[order[start + i]];
                const std::uint64_t aug_seed = rng();
                if (config.augment_ratio < 1.0 && sample.sequence.num_frames() > 2) {
                    bundles.push_back(
                        build_feature_bundle(augment_subsample(sample.sequence, config.augment_ratio, aug_seed), seq_len));
                } else {
                    bundles.push_back(build_feature_bundle(sample.sequence, seq_len));
                }
                labels.push_back(sample.label);
            }

            ad::Tape<float> tape;
            model.zero_grad();
            const auto logits = model.forward(&tape, stack_bundles<float>(bundles), Mode::Train, &rng);
            const auto loss = ad::softmax_cross_entropy<float>(&tape, logits, labels);
            tape.backward(loss);
            adam_step(model.parameters(), adam, lr);

            loss_sum += static_cast<double>(loss.item()) * static_cast<double>(n);
            const auto ld = logits.data();
            const std::size_t classes = model_config.num_classes;
            for (std::size_t i = 0; i < n; ++i) {
                const float* row = ld.data() + i * classes;
                correct += (std::max_element(row, row + classes) - row) == labels[i] ? 1 : 0;
            }
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(order.size());
        rec.train_acc = static_cast<double>(correct) / static_cast<double>(order.size());
        rec.val_acc = evaluate_bundles(model, val_bundles, val_labels).accuracy;
        rec.lr = lr;
        result.history.push_back(rec);
        if (rec.val_acc > best_acc) {
            best_acc = rec.val_acc;
            best = model.cast<float>();
            result.best_epoch = epoch;
        }
        if (on_epoch) on_epoch(rec);
    }
    result.model = std::move(best);
    return result;
}

}  // namespace ddnet
