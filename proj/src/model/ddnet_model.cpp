#include "model/ddnet_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/error.hpp"

namespace ddnet {

namespace {

struct StreamInfo {
    StreamMask mask;
    const char* prefix;
};

constexpr StreamInfo kStreams[] = {
    {kStreamJcd, "embed_jcd"},
    {kStreamSlow, "embed_slow"},
    {kStreamFast, "embed_fast"},
};

// Conv layers in execution order: name, kernel, in, out, norm name.
struct ConvSpec {
    std::string name;
    std::size_t kernel;
    std::size_t in;
    std::size_t out;
    std::string norm;
};

std::vector<ConvSpec> conv_specs(const ModelConfig& c) {
    const std::size_t f = c.filters;
    std::vector<ConvSpec> convs;
    for (const auto& s : kStreams) {
        if (!c.uses(s.mask)) continue;
        const std::string p = s.prefix;
        const std::size_t in = s.mask == kStreamJcd ? c.jcd_dim() : c.motion_dim();
        convs.push_back({p + ".conv1", 1, in, 2 * f, p + ".bn1"});
        convs.push_back({p + ".conv2", 3, 2 * f, f, p + ".bn2"});
        convs.push_back({p + ".conv3", 1, f, f, p + ".bn3"});
    }
    const std::size_t widths[] = {2 * f, 4 * f, 8 * f};
    std::size_t in = c.stream_count() * f;
    for (std::size_t block = 0; block < 3; ++block) {
        const std::string p = "block" + std::to_string(block + 1);
        convs.push_back({p + ".conv1", 3, in, widths[block], p + ".bn1"});
        convs.push_back({p + ".conv2", 3, widths[block], widths[block], p + ".bn2"});
        in = widths[block];
    }
    return convs;
}

}  // namespace

std::size_t ModelConfig::stream_count() const {
    std::size_t n = 0;
    for (const auto& s : kStreams) n += uses(s.mask) ? 1 : 0;
    return n;
}

void ModelConfig::validate() const {
    auto check = [](bool ok, const std::string& msg) { require(ok, ErrorCode::Config, msg); };
    check(filters >= 1, "filters must be positive");
    check(num_joints >= 2, "num_joints must be >= 2");
    check(coord_dim == 2 || coord_dim == 3, "coord_dim must be 2 or 3");
    check(seq_len >= 8 && seq_len % 8 == 0, "seq_len must be a positive multiple of 8, got " + std::to_string(seq_len));
    check(num_classes >= 2, "num_classes must be >= 2");
    check(leaky_slope >= 0.0f && leaky_slope < 1.0f, "leaky_slope must lie in [0, 1)");
    check(dropout_rate >= 0.0f && dropout_rate < 1.0f, "dropout_rate must lie in [0, 1)");
    check(bn_epsilon > 0.0f, "bn_epsilon must be positive");
    check(bn_momentum > 0.0f && bn_momentum <= 1.0f, "bn_momentum must lie in (0, 1]");
    check(streams != 0 && (streams & ~static_cast<unsigned>(kAllStreams)) == 0, "stream mask must select 1-3 streams");
}

std::vector<ParameterSpec> parameter_specs(const ModelConfig& config) {
    config.validate();
    std::vector<ParameterSpec> specs;
    for (const auto& conv : conv_specs(config)) {
        specs.push_back({conv.name + ".w", {conv.kernel, conv.in, conv.out}});
        specs.push_back({conv.norm + ".gamma", {conv.out}});
        specs.push_back({conv.norm + ".beta", {conv.out}});
    }
    specs.push_back({"fc1.w", {8 * config.filters, kHiddenWidth}});
    specs.push_back({"fc1.b", {kHiddenWidth}});
    specs.push_back({"fc2.w", {kHiddenWidth, config.num_classes}});
    specs.push_back({"fc2.b", {config.num_classes}});
    return specs;
}

std::vector<std::pair<std::string, std::size_t>> norm_layer_specs(const ModelConfig& config) {
    config.validate();
    std::vector<std::pair<std::string, std::size_t>> out;
    for (const auto& conv : conv_specs(config)) out.emplace_back(conv.norm, conv.out);
    return out;
}

std::size_t param_count(const ModelConfig& config) {
    std::size_t total = 0;
    for (const auto& spec : parameter_specs(config)) total += ad::numel(spec.shape);
    return total;
}

template <typename Real>
ModelInputs<Real> stack_bundles(std::span<const FeatureBundle> bundles) {
    require(!bundles.empty(), ErrorCode::InvalidInput, "empty batch");
    auto stack = [&](auto member) {
        const Matrix& first = bundles.front().*member;
        ad::NdArray<Real> out({bundles.size(), first.rows, first.cols});
        for (std::size_t n = 0; n < bundles.size(); ++n) {
            const Matrix& m = bundles[n].*member;
            require(m.rows == first.rows && m.cols == first.cols, ErrorCode::Shape,
                    "feature bundles in one batch must share shapes");
            std::copy(m.data.begin(), m.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(n * m.data.size()));
        }
        return ad::Tensor<Real>(std::move(out));
    };
    return {stack(&FeatureBundle::jcd), stack(&FeatureBundle::slow), stack(&FeatureBundle::fast)};
}

template <typename Real>
DDNetModel<Real>::DDNetModel(const ModelConfig& config) : config_(config) {
    for (auto& spec : parameter_specs(config_)) {
        params_.push_back({spec.name, ad::Tensor<Real>::zeros(spec.shape, true)});
    }
    for (auto& [name, width] : norm_layer_specs(config_)) {
        norms_.push_back({name, std::vector<Real>(width, Real(0)), std::vector<Real>(width, Real(1))});
    }
}

template <typename Real>
const ad::Tensor<Real>& DDNetModel<Real>::param(const std::string& name) const {
    for (const auto& p : params_) {
        if (p.name == name) return p.tensor;
    }
    fail(ErrorCode::NotFound, "no parameter named " + name);
}

template <typename Real>
NormStats<Real>& DDNetModel<Real>::norm(const std::string& name) {
    for (auto& n : norms_) {
        if (n.name == name) return n;
    }
    fail(ErrorCode::NotFound, "no normalization layer named " + name);
}

template <typename Real>
std::size_t DDNetModel<Real>::param_count() const {
    std::size_t total = 0;
    for (const auto& p : params_) total += p.tensor.size();
    return total;
}

template <typename Real>
void DDNetModel<Real>::zero_grad() {
    for (auto& p : params_) p.tensor.zero_grad();
}

template <typename Real>
ad::Tensor<Real> DDNetModel<Real>::conv_block(ad::Tape<Real>* tape, const ad::Tensor<Real>& x,
                                              const std::string& conv, const std::string& norm_name, Mode mode) {
    // No conv bias: the normalization that follows subtracts it out.
    auto y = ad::conv1d(tape, x, param(conv + ".w"), ad::Tensor<Real>{});
    auto& stats = norm(norm_name);
    ad::BatchNormOptions opts;
    opts.mode = mode == Mode::Train ? ad::BatchNormMode::Train : ad::BatchNormMode::Infer;
    opts.epsilon = config_.bn_epsilon;
    opts.momentum = std::max(static_cast<double>(config_.bn_momentum), 1.0 / static_cast<double>(stats.updates + 1));
    y = ad::batch_norm(tape, y, param(norm_name + ".gamma"), param(norm_name + ".beta"),
                       std::span<Real>(stats.running_mean), std::span<Real>(stats.running_var), opts);
    if (mode == Mode::Train) ++stats.updates;
    return ad::leaky_relu(tape, y, static_cast<Real>(config_.leaky_slope));
}

template <typename Real>
ad::Tensor<Real> DDNetModel<Real>::embed_stream(ad::Tape<Real>* tape, const ad::Tensor<Real>& x,
                                                EmbedVariant variant, const std::string& prefix, Mode mode,
                                                std::mt19937_64*) {
    require(x.rank() == 3, ErrorCode::Shape, prefix + ": input must be batch x time x width");
    const std::size_t expected = variant == EmbedVariant::Pooled ? config_.seq_len : config_.seq_len / 2;
    require(x.dim(1) == expected, ErrorCode::Shape,
            prefix + ": expected " + std::to_string(expected) + " time steps, got " + std::to_string(x.dim(1)));
    auto y = conv_block(tape, x, prefix + ".conv1", prefix + ".bn1", mode);
    y = conv_block(tape, y, prefix + ".conv2", prefix + ".bn2", mode);
    y = conv_block(tape, y, prefix + ".conv3", prefix + ".bn3", mode);
    if (variant == EmbedVariant::Pooled) y = ad::maxpool1d(tape, y);
    return y;
}

template <typename Real>
std::vector<ad::Tensor<Real>> DDNetModel<Real>::embed_streams(ad::Tape<Real>* tape, const ModelInputs<Real>& in,
                                                              Mode mode) {
    std::vector<ad::Tensor<Real>> streams;
    // JCD and slow motion span K steps and are pooled to K/2; fast motion
    // already has K/2 steps.
    if (config_.uses(kStreamJcd)) streams.push_back(embed_stream(tape, in.jcd, EmbedVariant::Pooled, "embed_jcd", mode));
    if (config_.uses(kStreamSlow)) streams.push_back(embed_stream(tape, in.slow, EmbedVariant::Pooled, "embed_slow", mode));
    if (config_.uses(kStreamFast)) streams.push_back(embed_stream(tape, in.fast, EmbedVariant::Unpooled, "embed_fast", mode));
    return streams;
}

template <typename Real>
std::vector<ad::Tensor<Real>> DDNetModel<Real>::embed_all(const ModelInputs<Real>& inputs) const {
    // Infer mode leaves the running statistics untouched.
    return const_cast<DDNetModel*>(this)->embed_streams(nullptr, inputs, Mode::Infer);
}

template <typename Real>
ad::Tensor<Real> DDNetModel<Real>::forward(ad::Tape<Real>* tape, const ModelInputs<Real>& inputs, Mode mode,
                                           std::mt19937_64* rng) {
    if (config_.uses(kStreamJcd)) {
        require(inputs.jcd.rank() == 3 && inputs.jcd.dim(2) == config_.jcd_dim(), ErrorCode::Shape,
                "JCD input width does not match the model's joint count");
    }
    for (const auto* m : {&inputs.slow, &inputs.fast}) {
        if (m->defined()) {
            require(m->rank() == 3 && m->dim(2) == config_.motion_dim(), ErrorCode::Shape,
                    "motion input width does not match the model's joint layout");
        }
    }
    auto x = ad::concat_channels(tape, embed_streams(tape, inputs, mode));
    x = conv_block(tape, x, "block1.conv1", "block1.bn1", mode);
    x = conv_block(tape, x, "block1.conv2", "block1.bn2", mode);
    x = ad::maxpool1d(tape, x);
    x = conv_block(tape, x, "block2.conv1", "block2.bn1", mode);
    x = conv_block(tape, x, "block2.conv2", "block2.bn2", mode);
    x = ad::maxpool1d(tape, x);
    x = conv_block(tape, x, "block3.conv1", "block3.bn1", mode);
    x = conv_block(tape, x, "block3.conv2", "block3.bn2", mode);
    x = ad::global_avg_pool(tape, x);
    if (mode == Mode::Train && config_.dropout_rate > 0.0f) {
        require(rng != nullptr, ErrorCode::InvalidArgument, "train-mode forward with dropout needs an rng");
        x = ad::dropout(tape, x, config_.dropout_rate, *rng);
    }
    x = ad::dense(tape, x, param("fc1.w"), param("fc1.b"));
    x = ad::leaky_relu(tape, x, static_cast<Real>(config_.leaky_slope));
    return ad::dense(tape, x, param("fc2.w"), param("fc2.b"));
}

template <typename Real>
ad::Tensor<Real> DDNetModel<Real>::infer(const ModelInputs<Real>& inputs) const {
    return const_cast<DDNetModel*>(this)->forward(nullptr, inputs, Mode::Infer);
}

template <typename Real>
template <typename Other>
DDNetModel<Other> DDNetModel<Real>::cast() const {
    DDNetModel<Other> out(config_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto src = params_[i].tensor.data();
        auto dst = out.parameters()[i].tensor.mutable_data();
        std::transform(src.begin(), src.end(), dst.begin(), [](Real v) { return static_cast<Other>(v); });
    }
    for (std::size_t i = 0; i < norms_.size(); ++i) {
        auto& n = out.norm_stats()[i];
        std::transform(norms_[i].running_mean.begin(), norms_[i].running_mean.end(), n.running_mean.begin(),
                       [](Real v) { return static_cast<Other>(v); });
        std::transform(norms_[i].running_var.begin(), norms_[i].running_var.end(), n.running_var.begin(),
                       [](Real v) { return static_cast<Other>(v); });
        n.updates = norms_[i].updates;
    }
    return out;
}

template <typename Real>
DDNetModel<Real> init_model(const ModelConfig& config, std::uint64_t rng_seed) {
    DDNetModel<Real> model(config);
    std::mt19937_64 rng(rng_seed);
    for (auto& p : model.parameters()) {
        const auto& shape = p.tensor.shape();
        const std::string& name = p.name;
        auto values = p.tensor.mutable_data();
        if (name.ends_with(".gamma")) {
            std::fill(values.begin(), values.end(), Real(1));
        } else if (name.ends_with(".w")) {
            // conv: k x in x out, dense: in x out
            const std::size_t receptive = shape.size() == 3 ? shape[0] : 1;
            const double fan_in = static_cast<double>(receptive * shape[shape.size() - 2]);
            const double fan_out = static_cast<double>(receptive * shape.back());
            const double limit = std::sqrt(6.0 / (fan_in + fan_out));
            std::uniform_real_distribution<double> dist(-limit, limit);
            for (auto& v : values) v = static_cast<Real>(dist(rng));
        }
        // biases and beta stay zero
    }
    return model;
}

std::vector<Prediction> predict(const DDNetModel<float>& model, std::span<const FeatureBundle> bundles) {
    const auto logits = model.infer(stack_bundles<float>(bundles));
    const auto probs = ad::softmax(logits.value());
    const std::size_t classes = model.config().num_classes;
    std::vector<Prediction> out(bundles.size());
    for (std::size_t n = 0; n < bundles.size(); ++n) {
        auto first = probs.data.begin() + static_cast<std::ptrdiff_t>(n * classes);
        out[n].probabilities.assign(first, first + static_cast<std::ptrdiff_t>(classes));
        // max_element returns the first maximum, so ties go to the lowest id.
        const auto& lrow = logits.data();
        const auto* lbeg = lrow.data() + n * classes;
        out[n].class_id = static_cast<int>(std::max_element(lbeg, lbeg + classes) - lbeg);
    }
    return out;
}

Prediction predict(const DDNetModel<float>& model, const FeatureBundle& bundle) {
    return predict(model, std::span<const FeatureBundle>(&bundle, 1)).front();
}

template class DDNetModel<float>;
template class DDNetModel<double>;
template DDNetModel<double> DDNetModel<float>::cast<double>() const;
template DDNetModel<float> DDNetModel<double>::cast<float>() const;
template DDNetModel<float> DDNetModel<float>::cast<float>() const;
template DDNetModel<float> init_model<float>(const ModelConfig&, std::uint64_t);
template DDNetModel<double> init_model<double>(const ModelConfig&, std::uint64_t);
template ModelInputs<float> stack_bundles<float>(std::span<const FeatureBundle>);
template ModelInputs<double> stack_bundles<double>(std::span<const FeatureBundle>);

}  // namespace ddnet
