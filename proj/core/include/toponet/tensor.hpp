#pragma once

#include <memory>
#include <vector>

namespace toponet {

// Dense rank-<=2 float32 array with a same-shape gradient buffer.
// Handles share storage; ops hold the storage alive through the tape.
struct Tensor {
    struct Data {
        int rows = 0, cols = 0;
        std::vector<float> val, grad;
    };
    std::shared_ptr<Data> d = std::make_shared<Data>();

    Tensor() = default;
    Tensor(int rows, int cols) {
        d->rows = rows;
        d->cols = cols;
        d->val.assign(size_t(rows) * cols, 0.0f);
        d->grad.assign(size_t(rows) * cols, 0.0f);
    }

    static Tensor scalar(float v) {
        Tensor t(1, 1);
        t.d->val[0] = v;
        return t;
    }

    int rows() const { return d->rows; }
    int cols() const { return d->cols; }
    size_t size() const { return d->val.size(); }
    bool is_scalar() const { return rows() == 1 && cols() == 1; }

    float* val() { return d->val.data(); }
    const float* val() const { return d->val.data(); }
    float* grad() { return d->grad.data(); }
    const float* grad() const { return d->grad.data(); }

    float& at(int r, int c) { return d->val[size_t(r) * cols() + c]; }
    float at(int r, int c) const { return d->val[size_t(r) * cols() + c]; }

    void zero_grad() { std::fill(d->grad.begin(), d->grad.end(), 0.0f); }

    // Independent deep copy (value only, grad zeroed).
    Tensor clone() const {
        Tensor t(rows(), cols());
        t.d->val = d->val;
        return t;
    }
};

enum class ParamRole { NodeWeight, EdgeAlpha, Head, Classifier, NormScale, NormShift };

// A trainable tensor with its role tag and momentum buffer.
struct Parameter {
    Tensor value;
    ParamRole role = ParamRole::NodeWeight;
    std::vector<float> velocity;

    Parameter() = default;
    Parameter(Tensor v, ParamRole r) : value(std::move(v)), role(r) {}

    void zero_grad() { value.zero_grad(); }

    // Weight decay applies to the network weights only, never to edge
    // weights or normalization parameters.
    bool decayable() const {
        return role == ParamRole::NodeWeight || role == ParamRole::Head ||
               role == ParamRole::Classifier;
    }
};

} // namespace toponet
