#include "ad/ops.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace ddnet::ad {

std::string shape_string(const Shape& shape) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? ", " : "") << shape[i];
    os << ')';
    return os.str();
}

namespace {

template <typename Real>
bool should_record(Tape<Real>* tape, std::initializer_list<const Tensor<Real>*> inputs) {
    if (tape == nullptr) return false;
    for (const auto* t : inputs) {
        if (t->defined() && t->requires_grad()) return true;
    }
    return false;
}

template <typename Real>
std::span<Real> grad_of(const std::shared_ptr<TensorImpl<Real>>& t) {
    return t->ensure_grad();
}

void expect_rank(const Shape& shape, std::size_t rank, const char* op, const char* what) {
    require(shape.size() == rank, ErrorCode::Shape,
            std::string(op) + ": " + what + " must have rank " + std::to_string(rank) + ", got " + shape_string(shape));
}

}  // namespace

template <typename Real>
Tensor<Real> conv1d(Tape<Real>* tape, const Tensor<Real>& x, const Tensor<Real>& w, const Tensor<Real>& b) {
    expect_rank(x.shape(), 3, "conv1d", "input");
    expect_rank(w.shape(), 3, "conv1d", "kernel");
    const std::size_t batch = x.dim(0), steps = x.dim(1), cin = x.dim(2);
    const std::size_t k = w.dim(0), cout = w.dim(2);
    require(k % 2 == 1, ErrorCode::Shape, "conv1d: kernel size must be odd");
    require(w.dim(1) == cin, ErrorCode::Shape,
            "conv1d: kernel " + shape_string(w.shape()) + " does not match input " + shape_string(x.shape()));
    const bool has_bias = b.defined();
    require(!has_bias || b.shape() == Shape{cout}, ErrorCode::Shape, "conv1d: bias must have shape (Cout)");
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(k / 2);
    const auto T = static_cast<std::ptrdiff_t>(steps);

    NdArray<Real> out({batch, steps, cout});
    const Real* xd = x.data().data();
    const Real* wd = w.data().data();
    const Real* bd = has_bias ? b.data().data() : nullptr;
    for (std::size_t n = 0; n < batch; ++n) {
        for (std::ptrdiff_t t = 0; t < T; ++t) {
            Real* o = out.data.data() + (n * steps + static_cast<std::size_t>(t)) * cout;
            if (bd) std::copy(bd, bd + cout, o);
            for (std::size_t d = 0; d < k; ++d) {
                const std::ptrdiff_t src = t + static_cast<std::ptrdiff_t>(d) - half;
                if (src < 0 || src >= T) continue;
                const Real* xrow = xd + (n * steps + static_cast<std::size_t>(src)) * cin;
                const Real* wslab = wd + d * cin * cout;
                for (std::size_t c = 0; c < cin; ++c) {
                    const Real xv = xrow[c];
                    if (xv == Real(0)) continue;
                    const Real* wrow = wslab + c * cout;
                    for (std::size_t oc = 0; oc < cout; ++oc) o[oc] += xv * wrow[oc];
                }
            }
        }
    }

    Tensor<Real> y(std::move(out), should_record(tape, {&x, &w, &b}));
    if (!y.requires_grad()) return y;
    auto xi = x.shared(), wi = w.shared(), bi = b.shared(), yi = y.shared();
    std::vector<std::shared_ptr<TensorImpl<Real>>> inputs{xi, wi};
    if (bi) inputs.push_back(bi);
    tape->record("conv1d", std::move(inputs), yi, [=]() {
        const Real* g = yi->grad.data();
        const Real* xv = xi->value.data.data();
        const Real* wv = wi->value.data.data();
        Real* dx = xi->requires_grad ? grad_of(xi).data() : nullptr;
        Real* dw = wi->requires_grad ? grad_of(wi).data() : nullptr;
        Real* db = bi && bi->requires_grad ? grad_of(bi).data() : nullptr;
        for (std::size_t n = 0; n < batch; ++n) {
            for (std::ptrdiff_t t = 0; t < T; ++t) {
                const Real* grow = g + (n * steps + static_cast<std::size_t>(t)) * cout;
                if (db) {
                    for (std::size_t oc = 0; oc < cout; ++oc) db[oc] += grow[oc];
                }
                for (std::size_t d = 0; d < k; ++d) {
                    const std::ptrdiff_t src = t + static_cast<std::ptrdiff_t>(d) - half;
                    if (src < 0 || src >= T) continue;
                    const std::size_t xoff = (n * steps + static_cast<std::size_t>(src)) * cin;
                    for (std::size_t c = 0; c < cin; ++c) {
                        const std::size_t woff = (d * cin + c) * cout;
                        if (dx) {
                            Real acc = 0;
                            for (std::size_t oc = 0; oc < cout; ++oc) acc += grow[oc] * wv[woff + oc];
                            dx[xoff + c] += acc;
                        }
                        if (dw) {
                            const Real xc = xv[xoff + c];
                            for (std::size_t oc = 0; oc < cout; ++oc) dw[woff + oc] += xc * grow[oc];
                        }
                    }
                }
            }
        }
    });
    return y;
}

template <typename Real>
Tensor<Real> maxpool1d(Tape<Real>* tape, const Tensor<Real>& x) {
    expect_rank(x.shape(), 3, "maxpool1d", "input");
    const std::size_t batch = x.dim(0), steps = x.dim(1), ch = x.dim(2);
    require(steps >= 2, ErrorCode::Shape, "maxpool1d: needs at least 2 time steps");
    const std::size_t out_steps = steps / 2;
    NdArray<Real> out({batch, out_steps, ch});
    std::vector<std::size_t> argmax(out.size());
    const Real* xd = x.data().data();
    for (std::size_t n = 0; n < batch; ++n) {
        for (std::size_t t = 0; t < out_steps; ++t) {
            const std::size_t a = (n * steps + 2 * t) * ch;
            const std::size_t b = a + ch;
            const std::size_t o = (n * out_steps + t) * ch;
            for (std::size_t c = 0; c < ch; ++c) {
                const bool second = xd[b + c] > xd[a + c];
                argmax[o + c] = second ? b + c : a + c;
                out.data[o + c] = second ? xd[b + c] : xd[a + c];
            }
        }
    }
    Tensor<Real> y(std::move(out), should_record(tape, {&x}));
    if (!y.requires_grad()) return y;
    auto xi = x.shared(), yi = y.shared();
    tape->record("maxpool1d", {xi}, yi, [xi, yi, argmax = std::move(argmax)]() {
        auto dx = grad_of(xi);
        for (std::size_t i = 0; i < argmax.size(); ++i) dx[argmax[i]] += yi->grad[i];
    });
    return y;
}

template <typename Real>
Tensor<Real> global_avg_pool(Tape<Real>* tape, const Tensor<Real>& x) {
    expect_rank(x.shape(), 3, "global_avg_pool", "input");
    const std::size_t batch = x.dim(0), steps = x.dim(1), ch = x.dim(2);
    NdArray<Real> out({batch, ch});
    const Real inv = Real(1) / static_cast<Real>(steps);
    const Real* xd = x.data().data();
    for (std::size_t n = 0; n < batch; ++n) {
        Real* o = out.data.data() + n * ch;
        for (std::size_t t = 0; t < steps; ++t) {
            const Real* row = xd + (n * steps + t) * ch;
            for (std::size_t c = 0; c < ch; ++c) o[c] += row[c];
        }
        for (std::size_t c = 0; c < ch; ++c) o[c] *= inv;
    }
    Tensor<Real> y(std::move(out), should_record(tape, {&x}));
    if (!y.requires_grad()) return y;
    auto xi = x.shared(), yi = y.shared();
    tape->record("global_avg_pool", {xi}, yi, [=]() {
        auto dx = grad_of(xi);
        for (std::size_t n = 0; n < batch; ++n) {
            const Real* g = yi->grad.data() + n * ch;
            for (std::size_t t = 0; t < steps; ++t) {
                Real* row = dx.data() + (n * steps + t) * ch;
                for (std::size_t c = 0; c < ch; ++c) row[c] += g[c] * inv;
            }
        }
    });
    return y;
}

template <typename Real>
Tensor<Real> dense(Tape<Real>* tape, const Tensor<Real>& x, const Tensor<Real>& w, const Tensor<Real>& b) {
    expect_rank(x.shape(), 2, "dense", "input");
    expect_rank(w.shape(), 2, "dense", "weight");
    const std::size_t batch = x.dim(0), cin = x.dim(1), cout = w.dim(1);
    require(w.dim(0) == cin, ErrorCode::Shape,
            "dense: weight " + shape_string(w.shape()) + " does not match input " + shape_string(x.shape()));
    require(b.shape() == Shape{cout}, ErrorCode::Shape, "dense: bias must have shape (Cout)");
    NdArray<Real> out({batch, cout});
    const Real* xd = x.data().data();
    const Real* wd = w.data().data();
    for (std::size_t n = 0; n < batch; ++n) {
        Real* o = out.data.data() + n * cout;
        std::copy(b.data().begin(), b.data().end(), o);
        for (std::size_t c = 0; c < cin; ++c) {
            const Real xv = xd[n * cin + c];
            const Real* wrow = wd + c * cout;
            for (std::size_t oc = 0; oc < cout; ++oc) o[oc] += xv * wrow[oc];
        }
    }
    Tensor<Real> y(std::move(out), should_record(tape, {&x, &w, &b}));
    if (!y.requires_grad()) return y;
    auto xi = x.shared(), wi = w.shared(), bi = b.shared(), yi = y.shared();
    tape->record("dense", {xi, wi, bi}, yi, [=]() {
        const Real* g = yi->grad.data();
        Real* dx = xi->requires_grad ? grad_of(xi).data() : nullptr;
        Real* dw = wi->requires_grad ? grad_of(wi).data() : nullptr;
        Real* db = bi && bi->requires_grad ? grad_of(bi).data() : nullptr;
        const Real* xv = xi->value.data.data();
        const Real* wv = wi->value.data.data();
        for (std::size_t n = 0; n < batch; ++n) {
            const Real* grow = g + n * cout;
            if (db) {
                for (std::size_t oc = 0; oc < cout; ++oc) db[oc] += grow[oc];
            }
            for (std::size_t c = 0; c < cin; ++c) {
                if (dx) {
                    Real acc = 0;
                    for (std::size_t oc = 0; oc < cout; ++oc) acc += grow[oc] * wv[c * cout + oc];
                    dx[n * cin + c] += acc;
                }
                if (dw) {
                    const Real xc = xv[n * cin + c];
                    for (std::size_t oc = 0; oc < cout; ++oc) dw[c * cout + oc] += xc * grow[oc];
                }
            }
        }
    });
    return y;
}

template <typename Real>
Tensor<Real> leaky_relu(Tape<Real>* tape, const Tensor<Real>& x, Real slope) {
    NdArray<Real> out(x.shape());
    const auto xd = x.data();
    for (std::size_t i = 0; i < xd.size(); ++i) out.data[i] = xd[i] >= Real(0) ? xd[i] : slope * xd[i];
    Tensor<Real> y(std::move(out), should_record(tape, {&x}));
    if (!y.requires_grad()) return y;
    auto xi = x.shared(), yi = y.shared();
    tape->record("leaky_relu", {xi}, yi, [=]() {
        auto dx = grad_of(xi);
        const auto& xv = xi->value.data;
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += xv[i] >= Real(0) ? yi->grad[i] : slope * yi->grad[i];
    });
    return y;
}

template <typename Real>
Tensor<Real> batch_norm(Tape<Real>* tape, const Tensor<Real>& x, const Tensor<Real>& gamma,
                        const Tensor<Real>& beta, std::span<Real> running_mean, std::span<Real> running_var,
                        const BatchNormOptions& options) {
    require(x.rank() >= 2, ErrorCode::Shape, "batch_norm: input must have rank >= 2");
    const std::size_t ch = x.shape().back();
    const std::size_t rows = x.size() / ch;
    require(gamma.shape() == Shape{ch} && beta.shape() == Shape{ch}, ErrorCode::Shape,
            "batch_norm: gamma/beta must have shape (C)");
    require(running_mean.size() == ch && running_var.size() == ch, ErrorCode::Shape,
            "batch_norm: running statistics must have C entries");
    const bool train = options.mode == BatchNormMode::Train;
    if (train) {
        require(rows >= 2, ErrorCode::DegenerateBatch,
                "batch_norm: train mode needs at least 2 elements per channel");
    }

    const auto xd = x.data();
    std::vector<Real> mean(ch, Real(0)), inv_std(ch);
    if (train) {
        std::vector<double> acc(ch, 0.0), acc_sq(ch, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < ch; ++c) acc[c] += static_cast<double>(xd[r * ch + c]);
        }
        for (std::size_t c = 0; c < ch; ++c) acc[c] /= static_cast<double>(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < ch; ++c) {
                const double d = static_cast<double>(xd[r * ch + c]) - acc[c];
                acc_sq[c] += d * d;
            }
        }
        const double m = options.momentum;
        for (std::size_t c = 0; c < ch; ++c) {
            const double var = acc_sq[c] / static_cast<double>(rows);
            mean[c] = static_cast<Real>(acc[c]);
            inv_std[c] = static_cast<Real>(1.0 / std::sqrt(var + options.epsilon));
            const double unbiased = acc_sq[c] / static_cast<double>(rows - 1);
            running_mean[c] = static_cast<Real>((1.0 - m) * running_mean[c] + m * acc[c]);
            running_var[c] = static_cast<Real>((1.0 - m) * running_var[c] + m * unbiased);
        }
    } else {
        for (std::size_t c = 0; c < ch; ++c) {
            mean[c] = running_mean[c];
            inv_std[c] = static_cast<Real>(1.0 / std::sqrt(static_cast<double>(running_var[c]) + options.epsilon));
        }
    }

    NdArray<Real> out(x.shape());
    std::vector<Real> xhat(x.size());
    const auto gd = gamma.data();
    const auto bd = beta.data();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < ch; ++c) {
            const std::size_t i = r * ch + c;
            xhat[i] = (xd[i] - mean[c]) * inv_std[c];
            out.data[i] = gd[c] * xhat[i] + bd[c];
        }
    }

    Tensor<Real> y(std::move(out), should_record(tape, {&x, &gamma, &beta}));
    if (!y.requires_grad()) return y;
    auto xi = x.shared(), gi = gamma.shared(), bi = beta.shared(), yi = y.shared();
    tape->record("batch_norm", {xi, gi, bi}, yi,
                 [=, xhat = std::move(xhat), inv_std = std::move(inv_std)]() {
        const Real* g = yi->grad.data();
        std::vector<Real> sum_g(ch, Real(0)), sum_gx(ch, Real(0));
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < ch; ++c) {
                sum_g[c] += g[r * ch + c];
                sum_gx[c] += g[r * ch + c] * xhat[r * ch + c];
            }
        }
        if (gi->requires_grad) {
            auto dg = grad_of(gi);
            for (std::size_t c = 0; c < ch; ++c) dg[c] += sum_gx[c];
        }
        if (bi->requires_grad) {
            auto db = grad_of(bi);
            for (std::size_t c = 0; c < ch; ++c) db[c] += sum_g[c];
        }
        if (!xi->requires_grad) return;
        auto dx = grad_of(xi);
        const auto& gam = gi->value.data;
        if (train) {
            const Real inv_rows = Real(1) / static_cast<Real>(rows);
            for (std::size_t r = 0; r < rows; ++r) {
                for (std::size_t c = 0; c < ch; ++c) {
                    const std::size_t i = r * ch + c;
                    dx[i] += gam[c] * inv_std[c] * (g[i] - inv_rows * (sum_g[c] + xhat[i] * sum_gx[c]));
                }
            }
        } else {
            for (std::size_t i = 0; i < rows * ch; ++i) dx[i] += g[i] * gam[i % ch] * inv_std[i % ch];
        }
    });
    return y;
}

template <typename Real>
Tensor<Real> concat_channels(Tape<Real>* tape, const std::vector<Tensor<Real>>& xs) {
    require(!xs.empty(), ErrorCode::Shape, "concat_channels: no inputs");
    const std::size_t rank = xs.front().rank();
    require(rank >= 2, ErrorCode::Shape, "concat_channels: inputs must have rank >= 2");
    Shape lead(xs.front().shape().begin(), xs.front().shape().end() - 1);
    std::size_t total = 0;
    std::vector<std::size_t> widths;
    bool grad = false;
    for (const auto& t : xs) {
        require(t.rank() == rank && Shape(t.shape().begin(), t.shape().end() - 1) == lead, ErrorCode::Shape,
                "concat_channels: leading dimensions differ: " + shape_string(t.shape()) + " vs " +
                    shape_string(xs.front().shape()));
        widths.push_back(t.shape().back());
        total += t.shape().back();
        grad = grad || t.requires_grad();
    }
    Shape out_shape = lead;
    out_shape.push_back(total);
    NdArray<Real> out(out_shape);
    const std::size_t rows = out.size() / total;
    std::size_t offset = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto src = xs[i].data();
        for (std::size_t r = 0; r < rows; ++r) {
            std::copy_n(src.data() + r * widths[i], widths[i], out.data.data() + r * total + offset);
        }
        offset += widths[i];
    }
    Tensor<Real> y(std::move(out), tape != nullptr && grad);
    if (!y.requires_grad()) return y;
    std::vector<std::shared_ptr<TensorImpl<Real>>> inputs;
    for (const auto& t : xs) inputs.push_back(t.shared());
    auto yi = y.shared();
    tape->record("concat_channels", inputs, yi, [=]() {
        std::size_t off = 0;
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            if (inputs[i]->requires_grad) {
                auto dx = grad_of(inputs[i]);
                for (std::size_t r = 0; r < rows; ++r) {
                    const Real* g = yi->grad.data() + r * total + off;
                    for (std::size_t c = 0; c < widths[i]; ++c) dx[r * widths[i] + c] += g[c];
                }
            }
            off += widths[i];
        }
    });
    return y;
}

template <typename Real>
Tensor<Real> dropout(Tape<Real>* tape, const Tensor<Real>& x, double rate, std::mt19937_64& rng) {
    require(rate >= 0.0 && rate < 1.0, ErrorCode::InvalidArgument, "dropout rate must lie in [0, 1)");
    if (rate == 0.0) return x;
    const Real keep_scale = static_cast<Real>(1.0 / (1.0 - rate));
    std::bernoulli_distribution keep(1.0 - rate);
    std::vector<Real> mask(x.size());
    for (auto& m : mask) m = keep(rng) ? keep_scale : Real(0);
    NdArray<Real> out(x.shape());
    const auto xd = x.data();
    for (std::size_t i = 0; i < mask.size(); ++i) out.data[i] = xd[i] * mask[i];
    Tensor<Real> y(std::move(out), should_record(tape, {&x}));
    if (!y.requires_grad()) return y;
    auto xi = x.shared(), yi = y.shared();
    tape->record("dropout", {xi}, yi, [xi, yi, mask = std::move(mask)]() {
        auto dx = grad_of(xi);
        for (std::size_t i = 0; i < mask.size(); ++i) dx[i] += yi->grad[i] * mask[i];
    });
    return y;
}

template <typename Real>
NdArray<Real> softmax(const NdArray<Real>& logits) {
    require(logits.rank() == 2, ErrorCode::Shape, "softmax: logits must be B x C");
    const std::size_t batch = logits.dim(0), classes = logits.dim(1);
    NdArray<Real> out(logits.shape);
    for (std::size_t n = 0; n < batch; ++n) {
        const Real* row = logits.data.data() + n * classes;
        Real* o = out.data.data() + n * classes;
        const Real peak = *std::max_element(row, row + classes);
        double total = 0.0;
        for (std::size_t c = 0; c < classes; ++c) {
            o[c] = static_cast<Real>(std::exp(static_cast<double>(row[c] - peak)));
            total += o[c];
        }
        for (std::size_t c = 0; c < classes; ++c) o[c] = static_cast<Real>(o[c] / total);
    }
    return out;
}

template <typename Real>
Tensor<Real> softmax_cross_entropy(Tape<Real>* tape, const Tensor<Real>& logits, std::span<const int> labels) {
    expect_rank(logits.shape(), 2, "softmax_cross_entropy", "logits");
    const std::size_t batch = logits.dim(0), classes = logits.dim(1);
    require(labels.size() == batch, ErrorCode::Shape, "softmax_cross_entropy: one label per row required");
    for (int label : labels) {
        require(label >= 0 && static_cast<std::size_t>(label) < classes, ErrorCode::InvalidInput,
                "softmax_cross_entropy: label " + std::to_string(label) + " outside [0, " +
                    std::to_string(classes) + ")");
    }
    double loss = 0.0;
    const auto ld = logits.data();
    for (std::size_t n = 0; n < batch; ++n) {
        const Real* row = ld.data() + n * classes;
        const double peak = *std::max_element(row, row + classes);
        double total = 0.0;
        for (std::size_t c = 0; c < classes; ++c) total += std::exp(static_cast<double>(row[c]) - peak);
        loss += std::log(total) + peak - static_cast<double>(row[labels[n]]);
    }
    loss /= static_cast<double>(batch);

    Tensor<Real> y(NdArray<Real>({1}, {static_cast<Real>(loss)}), should_record(tape, {&logits}));
    if (!y.requires_grad()) return y;
    auto probs = softmax(logits.value());
    std::vector<int> owned(labels.begin(), labels.end());
    auto li = logits.shared(), yi = y.shared();
    tape->record("softmax_cross_entropy", {li}, yi, [=, probs = std::move(probs), owned = std::move(owned)]() {
        auto dl = grad_of(li);
        const Real scale = yi->grad[0] / static_cast<Real>(batch);
        for (std::size_t n = 0; n < batch; ++n) {
            for (std::size_t c = 0; c < classes; ++c) {
                const Real onehot = static_cast<std::size_t>(owned[n]) == c ? Real(1) : Real(0);
                dl[n * classes + c] += scale * (probs.data[n * classes + c] - onehot);
            }
        }
    });
    return y;
}

template <typename Real>
Tensor<Real> mul(Tape<Real>* tape, const Tensor<Real>& a, const Tensor<Real>& b) {
    require(a.shape() == b.shape(), ErrorCode::Shape, "mul: shapes differ");
    NdArray<Real> out(a.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = a.data()[i] * b.data()[i];
    Tensor<Real> y(std::move(out), should_record(tape, {&a, &b}));
    if (!y.requires_grad()) return y;
    auto ai = a.shared(), bi = b.shared(), yi = y.shared();
    tape->record("mul", {ai, bi}, yi, [=]() {
        if (ai->requires_grad) {
            auto da = grad_of(ai);
            for (std::size_t i = 0; i < da.size(); ++i) da[i] += yi->grad[i] * bi->value.data[i];
        }
        if (bi->requires_grad) {
            auto db = grad_of(bi);
            for (std::size_t i = 0; i < db.size(); ++i) db[i] += yi->grad[i] * ai->value.data[i];
        }
    });
    return y;
}

template <typename Real>
Tensor<Real> sum(Tape<Real>* tape, const Tensor<Real>& x) {
    double total = 0.0;
    for (Real v : x.data()) total += v;
    Tensor<Real> y(NdArray<Real>({1}, {static_cast<Real>(total)}), should_record(tape, {&x}));
    if (!y.requires_grad()) return y;
    auto xi = x.shared(), yi = y.shared();
    tape->record("sum", {xi}, yi, [=]() {
        auto dx = grad_of(xi);
        for (auto& v : dx) v += yi->grad[0];
    });
    return y;
}

#define DDNET_INSTANTIATE_OPS(Real)                                                                               \
    template Tensor<Real> conv1d(Tape<Real>*, const Tensor<Real>&, const Tensor<Real>&, const Tensor<Real>&);     \
    template Tensor<Real> maxpool1d(Tape<Real>*, const Tensor<Real>&);                                            \
    template Tensor<Real> global_avg_pool(Tape<Real>*, const Tensor<Real>&);                                      \
    template Tensor<Real> dense(Tape<Real>*, const Tensor<Real>&, const Tensor<Real>&, const Tensor<Real>&);      \
    template Tensor<Real> leaky_relu(Tape<Real>*, const Tensor<Real>&, Real);                                     \
    template Tensor<Real> batch_norm(Tape<Real>*, const Tensor<Real>&, const Tensor<Real>&, const Tensor<Real>&,  \
                                     std::span<Real>, std::span<Real>, const BatchNormOptions&);                  \
    template Tensor<Real> concat_channels(Tape<Real>*, const std::vector<Tensor<Real>>&);                         \
    template Tensor<Real> dropout(Tape<Real>*, const Tensor<Real>&, double, std::mt19937_64&);                    \
    template Tensor<Real> softmax_cross_entropy(Tape<Real>*, const Tensor<Real>&, std::span<const int>);          \
    template Tensor<Real> mul(Tape<Real>*, const Tensor<Real>&, const Tensor<Real>&);                             \
    template Tensor<Real> sum(Tape<Real>*, const Tensor<Real>&);                                                  \
    template NdArray<Real> softmax(const NdArray<Real>&);

DDNET_INSTANTIATE_OPS(float)
DDNET_INSTANTIATE_OPS(double)

#undef DDNET_INSTANTIATE_OPS

}  // namespace ddnet::ad
