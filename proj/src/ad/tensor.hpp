#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "core/error.hpp"

namespace ddnet::ad {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape);

// Plain dense array, row-major, no gradient bookkeeping.
template <typename Real>
struct NdArray {
    Shape shape;
    std::vector<Real> data;

    NdArray() = default;
    explicit NdArray(Shape s, Real fill = Real(0)) : shape(std::move(s)), data(numel(shape), fill) {
        for (auto d : shape) require(d > 0, ErrorCode::Shape, "tensor dimensions must be positive");
    }
    NdArray(Shape s, std::vector<Real> values) : shape(std::move(s)), data(std::move(values)) {
        require(data.size() == numel(shape), ErrorCode::Shape,
                "data length " + std::to_string(data.size()) + " does not match shape " + shape_string(shape));
    }

    std::size_t size() const { return data.size(); }
    std::size_t dim(std::size_t axis) const { return shape.at(axis); }
    std::size_t rank() const { return shape.size(); }
};

template <typename Real>
struct TensorImpl {
    NdArray<Real> value;
    std::vector<Real> grad;  // empty until a backward pass touches it
    bool requires_grad = false;

    std::span<Real> ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), Real(0));
        return grad;
    }
};

// Shared handle to a value that can take part in recorded differentiation.
// Copies alias the same storage.
template <typename Real>
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(NdArray<Real> value, bool requires_grad = false)
        : impl_(std::make_shared<TensorImpl<Real>>()) {
        impl_->value = std::move(value);
        impl_->requires_grad = requires_grad;
    }

    static Tensor zeros(Shape shape, bool requires_grad = false) {
        return Tensor(NdArray<Real>(std::move(shape)), requires_grad);
    }

    bool defined() const { return static_cast<bool>(impl_); }
    const Shape& shape() const { return impl_->value.shape; }
    std::size_t dim(std::size_t axis) const { return impl_->value.shape.at(axis); }
    std::size_t rank() const { return impl_->value.shape.size(); }
    std::size_t size() const { return impl_->value.size(); }

    const NdArray<Real>& value() const { return impl_->value; }
    std::span<const Real> data() const { return impl_->value.data; }
    std::span<Real> mutable_data() { return impl_->value.data; }
    Real item() const {
        require(size() == 1, ErrorCode::Shape, "item() on a tensor with " + std::to_string(size()) + " elements");
        return impl_->value.data[0];
    }

    bool requires_grad() const { return impl_->requires_grad; }
    void set_requires_grad(bool on) { impl_->requires_grad = on; }

    bool has_grad() const { return impl_->grad.size() == impl_->value.size(); }
    std::span<const Real> grad() const { return impl_->grad; }
    std::span<Real> mutable_grad() { return impl_->ensure_grad(); }
    void zero_grad() {
        if (!impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), Real(0));
    }

    TensorImpl<Real>* impl() const { return impl_.get(); }
    const std::shared_ptr<TensorImpl<Real>>& shared() const { return impl_; }

private:
    std::shared_ptr<TensorImpl<Real>> impl_;
};

// Ordered log of differentiable operations. Records are appended in
// execution order, so every record's inputs were produced before it.
template <typename Real>
class Tape {
public:
    struct Record {
        const char* op;
        std::vector<std::shared_ptr<TensorImpl<Real>>> inputs;
        std::shared_ptr<TensorImpl<Real>> output;
        std::function<void()> backward;
    };

    void record(const char* op, std::vector<std::shared_ptr<TensorImpl<Real>>> inputs,
                std::shared_ptr<TensorImpl<Real>> output, std::function<void()> backward) {
        produced_.insert(output.get());
        records_.push_back({op, std::move(inputs), std::move(output), std::move(backward)});
    }

    std::size_t size() const { return records_.size(); }
    const std::vector<Record>& records() const { return records_; }

    void clear() {
        records_.clear();
        produced_.clear();
    }

    // Seeds d(loss)/d(loss) = 1 and propagates back through every record the
    // loss depends on. Intermediate gradients are reset for each call; leaf
    // gradients accumulate.
    void backward(const Tensor<Real>& loss) {
        require(loss.size() == 1, ErrorCode::Shape, "backward() needs a scalar loss");
        TensorImpl<Real>* root = loss.impl();
        if (!produced_.contains(root)) {
            if (root->requires_grad) root->ensure_grad()[0] += Real(1);
            return;
        }

        std::size_t end = records_.size();
        while (end > 0 && records_[end - 1].output.get() != root) --end;

        std::unordered_set<const TensorImpl<Real>*> needed{root};
        std::vector<bool> active(end, false);
        for (std::size_t i = end; i-- > 0;) {
            const Record& rec = records_[i];
            if (!needed.contains(rec.output.get())) continue;
            active[i] = true;
            for (const auto& in : rec.inputs) {
                if (in->requires_grad) needed.insert(in.get());
            }
        }
        for (std::size_t i = 0; i < end; ++i) {
            if (!active[i]) continue;
            auto& g = records_[i].output->grad;
            g.assign(records_[i].output->value.size(), Real(0));
        }
        root->grad[0] = Real(1);
        for (std::size_t i = end; i-- > 0;) {
            if (active[i]) records_[i].backward();
        }
    }

private:
    std::vector<Record> records_;
    std::unordered_set<const TensorImpl<Real>*> produced_;
};

}  // namespace ddnet::ad
