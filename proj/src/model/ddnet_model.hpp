#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ad/ops.hpp"
#include "ad/tensor.hpp"
#include "skel/skeleton.hpp"

namespace ddnet {

enum StreamMask : unsigned {
    kStreamJcd = 1u << 0,
    kStreamSlow = 1u << 1,
    kStreamFast = 1u << 2,
    kAllStreams = kStreamJcd | kStreamSlow | kStreamFast,
};

struct ModelConfig {
    std::size_t filters = 64;
    std::size_t num_joints = 22;
    std::size_t coord_dim = 3;
    std::size_t seq_len = 32;  // K
    std::size_t num_classes = 14;
    float leaky_slope = 0.1f;
    float dropout_rate = 0.5f;
    float bn_epsilon = 1e-3f;  // Keras default; smaller values blow up near-constant channels
    float bn_momentum = 0.1f;
    // Which input streams get an embedding branch. Disabled streams have no
    // parameters at all, which is how the ablation variants are sized.
    unsigned streams = kAllStreams;

    std::size_t jcd_dim() const { return jcd_width(num_joints); }
    std::size_t motion_dim() const { return num_joints * coord_dim; }
    std::size_t stream_count() const;
    bool uses(StreamMask s) const { return (streams & s) != 0; }

    // Throws Config on any violated invariant.
    void validate() const;

    bool operator==(const ModelConfig&) const = default;
};

inline constexpr std::size_t kHiddenWidth = 128;

struct ParameterSpec {
    std::string name;
    ad::Shape shape;
};

// Names and shapes of every trainable parameter, in a fixed order. The same
// names key the weight file.
std::vector<ParameterSpec> parameter_specs(const ModelConfig& config);

// Names of batch-norm layers in the same fixed order, each with its width.
std::vector<std::pair<std::string, std::size_t>> norm_layer_specs(const ModelConfig& config);

std::size_t param_count(const ModelConfig& config);

enum class Mode { Train, Infer };
enum class EmbedVariant { Pooled, Unpooled };

template <typename Real>
struct NamedParameter {
    std::string name;
    ad::Tensor<Real> tensor;
};

template <typename Real>
struct NormStats {
    std::string name;
    std::vector<Real> running_mean;
    std::vector<Real> running_var;
    // Train-mode batches seen. Update n weighs the batch statistic by
    // max(momentum, 1/(n+1)), so the first batch replaces the (0, 1) start
    // values instead of being blended into them. Not persisted.
    std::uint64_t updates = 0;
};

// Batched model inputs, each batch x time x width.
template <typename Real>
struct ModelInputs {
    ad::Tensor<Real> jcd;
    ad::Tensor<Real> slow;
    ad::Tensor<Real> fast;
};

template <typename Real>
ModelInputs<Real> stack_bundles(std::span<const FeatureBundle> bundles);

template <typename Real>
class DDNetModel {
public:
    // Parameters are zero-filled; see init_model for a usable starting point.
    explicit DDNetModel(const ModelConfig& config);

    const ModelConfig& config() const { return config_; }

    std::vector<NamedParameter<Real>>& parameters() { return params_; }
    const std::vector<NamedParameter<Real>>& parameters() const { return params_; }
    std::vector<NormStats<Real>>& norm_stats() { return norms_; }
    const std::vector<NormStats<Real>>& norm_stats() const { return norms_; }

    const ad::Tensor<Real>& param(const std::string& name) const;
    std::size_t param_count() const;
    void zero_grad();

    // One embedding branch, e.g. prefix "embed_jcd". Pooled halves T.
    ad::Tensor<Real> embed_stream(ad::Tape<Real>* tape, const ad::Tensor<Real>& x, EmbedVariant variant,
                                  const std::string& prefix, Mode mode, std::mt19937_64* rng = nullptr);

    // Returns raw logits (batch x classes). Train mode updates the
    // normalization running statistics and applies dropout drawn from rng.
    ad::Tensor<Real> forward(ad::Tape<Real>* tape, const ModelInputs<Real>& inputs, Mode mode,
                             std::mt19937_64* rng = nullptr);

    // Inference only: reads but never writes model state, so concurrent calls
    // on one model are safe.
    ad::Tensor<Real> infer(const ModelInputs<Real>& inputs) const;

    // The embedded streams just before concatenation; exposed for shape checks.
    std::vector<ad::Tensor<Real>> embed_all(const ModelInputs<Real>& inputs) const;

    template <typename Other>
    DDNetModel<Other> cast() const;

private:
    ad::Tensor<Real> conv_block(ad::Tape<Real>* tape, const ad::Tensor<Real>& x, const std::string& conv,
                                const std::string& norm, Mode mode);
    std::vector<ad::Tensor<Real>> embed_streams(ad::Tape<Real>* tape, const ModelInputs<Real>& inputs, Mode mode);
    NormStats<Real>& norm(const std::string& name);

    ModelConfig config_;
    std::vector<NamedParameter<Real>> params_;
    std::vector<NormStats<Real>> norms_;
};

// Glorot-uniform weights, zero biases, unit gamma, zero beta.
template <typename Real>
DDNetModel<Real> init_model(const ModelConfig& config, std::uint64_t rng_seed);

struct Prediction {
    int class_id = 0;
    std::vector<float> probabilities;
};

std::vector<Prediction> predict(const DDNetModel<float>& model, std::span<const FeatureBundle> bundles);
Prediction predict(const DDNetModel<float>& model, const FeatureBundle& bundle);

}  // namespace ddnet
