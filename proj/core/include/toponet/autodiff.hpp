#pragma once

#include "toponet/rng.hpp"
#include "toponet/tensor.hpp"

#include <functional>
#include <vector>

namespace toponet {

// Define-by-run tape: records one adjoint closure per executed primitive and
// replays them in reverse. Rebuilt every forward pass.
class Tape {
public:
    void record(std::function<void()> fn) { ops_.push_back(std::move(fn)); }
    void clear() { ops_.clear(); }
    size_t size() const { return ops_.size(); }

    friend void backward(Tape& tape, Tensor& loss);

private:
    std::vector<std::function<void()>> ops_;
};

// Seeds d loss/d loss = 1 and replays the tape in reverse. Loss must be scalar.
void backward(Tape& tape, Tensor& loss);

// y = sum_k alpha_k * x_k, elementwise. Each alpha is a scalar parameter.
Tensor weighted_sum(Tape& tape, const std::vector<Tensor>& inputs,
                    const std::vector<Parameter*>& alphas);

// y = x W + b with W of shape (in, out) and b of shape (1, out).
Tensor linear(Tape& tape, const Tensor& x, Parameter& W, Parameter& b);

Tensor relu(Tape& tape, const Tensor& x);

// Zero-pad columns up to new_cols.
Tensor pad_cols(Tape& tape, const Tensor& x, int new_cols);

struct BatchNormState {
    std::vector<float> running_mean, running_var;
    explicit BatchNormState(int cols = 0)
        : running_mean(cols, 0.0f), running_var(cols, 1.0f) {}
};

// Per-column batch normalization with biased variance, eps 1e-5 and running
// stat momentum 0.9. Train mode needs batch size >= 2. Eval mode uses the
// running stats and leaves them untouched.
Tensor batch_norm(Tape& tape, const Tensor& x, Parameter& scale, Parameter& shift,
                  BatchNormState& state, bool train, bool update_stats = true);

// Mean cross-entropy over the batch against the smoothed target
// distribution t = eps/K + (1-eps)*onehot(label).
Tensor softmax_cross_entropy(Tape& tape, const Tensor& logits,
                             const std::vector<int>& labels, float smoothing);

struct GradCheckResult {
    double max_rel_err = 0.0;
    size_t coords_checked = 0;
};

// Central-difference check of analytic gradients. populate_analytic must
// zero and fill every parameter's gradient; loss_fp64 evaluates the same
// loss in double precision at the current parameter values.
// sample_per_param = 0 checks every coordinate.
GradCheckResult grad_check(const std::vector<Parameter*>& params,
                           const std::function<void()>& populate_analytic,
                           const std::function<double()>& loss_fp64, double eps,
                           size_t sample_per_param, Rng& rng);

} // namespace toponet
