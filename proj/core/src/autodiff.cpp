#include "toponet/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace toponet {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

} // namespace

void backward(Tape& tape, Tensor& loss) {
    if (!loss.is_scalar()) throw std::invalid_argument("backward: loss must be scalar");
    loss.grad()[0] = 1.0f;
    for (auto it = tape.ops_.rbegin(); it != tape.ops_.rend(); ++it) (*it)();
}

Tensor weighted_sum(Tape& tape, const std::vector<Tensor>& inputs,
                    const std::vector<Parameter*>& alphas) {
    if (inputs.empty()) throw std::invalid_argument("weighted_sum: empty input list");
    if (inputs.size() != alphas.size())
        throw std::invalid_argument("weighted_sum: inputs/alphas length mismatch");
    for (size_t k = 1; k < inputs.size(); ++k)
        require_same_shape(inputs[0], inputs[k], "weighted_sum");
    for (auto* a : alphas)
        if (!a->value.is_scalar())
            throw std::invalid_argument("weighted_sum: alphas must be scalar");

    const size_t n = inputs[0].size();
    Tensor y(inputs[0].rows(), inputs[0].cols());
    for (size_t e = 0; e < n; ++e) {
        double s = 0.0;
        for (size_t k = 0; k < inputs.size(); ++k)
            s += double(alphas[k]->value.val()[0]) * inputs[k].val()[e];
        y.val()[e] = float(s);
    }

    std::vector<std::shared_ptr<Tensor::Data>> xs;
    xs.reserve(inputs.size());
    for (auto& t : inputs) xs.push_back(t.d);
    std::vector<std::shared_ptr<Tensor::Data>> as;
    as.reserve(alphas.size());
    for (auto* a : alphas) as.push_back(a->value.d);
    auto yd = y.d;
    tape.record([xs, as, yd, n]() {
        for (size_t k = 0; k < xs.size(); ++k) {
            const float a = as[k]->val[0];
            double s = 0.0;
            for (size_t e = 0; e < n; ++e) {
                xs[k]->grad[e] += a * yd->grad[e];
                s += double(yd->grad[e]) * xs[k]->val[e];
            }
            as[k]->grad[0] += float(s);
        }
    });
    return y;
}

Tensor linear(Tape& tape, const Tensor& x, Parameter& W, Parameter& b) {
    const int in = W.value.rows(), out = W.value.cols();
    if (x.cols() != in) throw std::invalid_argument("linear: dimension mismatch");
    if (b.value.rows() != 1 || b.value.cols() != out)
        throw std::invalid_argument("linear: bias shape mismatch");
    const int rows = x.rows();
    Tensor y(rows, out);
    for (int r = 0; r < rows; ++r)
        for (int o = 0; o < out; ++o) {
            double s = b.value.val()[o];
            for (int i = 0; i < in; ++i)
                s += double(x.at(r, i)) * W.value.at(i, o);
            y.at(r, o) = float(s);
        }

    auto xd = x.d;
    auto wd = W.value.d;
    auto bd = b.value.d;
    auto yd = y.d;
    tape.record([xd, wd, bd, yd, rows, in, out]() {
        for (int r = 0; r < rows; ++r)
            for (int i = 0; i < in; ++i) {
                double s = 0.0;
                for (int o = 0; o < out; ++o)
                    s += double(yd->grad[size_t(r) * out + o]) * wd->val[size_t(i) * out + o];
                xd->grad[size_t(r) * in + i] += float(s);
            }
        for (int i = 0; i < in; ++i)
            for (int o = 0; o < out; ++o) {
                double s = 0.0;
                for (int r = 0; r < rows; ++r)
                    s += double(xd->val[size_t(r) * in + i]) * yd->grad[size_t(r) * out + o];
                wd->grad[size_t(i) * out + o] += float(s);
            }
        for (int o = 0; o < out; ++o) {
            double s = 0.0;
            for (int r = 0; r < rows; ++r) s += yd->grad[size_t(r) * out + o];
            bd->grad[o] += float(s);
        }
    });
    return y;
}

Tensor relu(Tape& tape, const Tensor& x) {
    Tensor y(x.rows(), x.cols());
    const size_t n = x.size();
    for (size_t e = 0; e < n; ++e) y.val()[e] = x.val()[e] > 0.0f ? x.val()[e] : 0.0f;
    auto xd = x.d;
    auto yd = y.d;
    tape.record([xd, yd, n]() {
        // subgradient at 0 is 0
        for (size_t e = 0; e < n; ++e)
            if (xd->val[e] > 0.0f) xd->grad[e] += yd->grad[e];
    });
    return y;
}

Tensor pad_cols(Tape& tape, const Tensor& x, int new_cols) {
    if (new_cols < x.cols()) throw std::invalid_argument("pad_cols: cannot shrink");
    if (new_cols == x.cols()) return x;
    Tensor y(x.rows(), new_cols);
    for (int r = 0; r < x.rows(); ++r)
        for (int c = 0; c < x.cols(); ++c) y.at(r, c) = x.at(r, c);
    auto xd = x.d;
    auto yd = y.d;
    const int rows = x.rows(), oc = x.cols();
    tape.record([xd, yd, rows, oc, new_cols]() {
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < oc; ++c)
                xd->grad[size_t(r) * oc + c] += yd->grad[size_t(r) * new_cols + c];
    });
    return y;
}

Tensor batch_norm(Tape& tape, const Tensor& x, Parameter& scale, Parameter& shift,
                  BatchNormState& state, bool train, bool update_stats) {
    const int B = x.rows(), C = x.cols();
    constexpr double kEps = 1e-5;
    constexpr float kMomentum = 0.9f;
    if (scale.value.cols() != C || shift.value.cols() != C)
        throw std::invalid_argument("batch_norm: parameter shape mismatch");
    if (int(state.running_mean.size()) != C)
        throw std::invalid_argument("batch_norm: state shape mismatch");
    Tensor y(B, C);

    if (train) {
        if (B < 2) throw std::invalid_argument("batch_norm: train mode needs batch size >= 2");
        std::vector<float> inv_std(C);
        auto xhat = std::make_shared<std::vector<float>>(size_t(B) * C);
        for (int c = 0; c < C; ++c) {
            double m = 0.0;
            for (int r = 0; r < B; ++r) m += x.at(r, c);
            m /= B;
            double v = 0.0;
            for (int r = 0; r < B; ++r) {
                double d = x.at(r, c) - m;
                v += d * d;
            }
            v /= B; // biased variance
            const double inv = 1.0 / std::sqrt(v + kEps);
            inv_std[c] = float(inv);
            if (update_stats) {
                state.running_mean[c] = kMomentum * state.running_mean[c] + (1.0f - kMomentum) * float(m);
                state.running_var[c] = kMomentum * state.running_var[c] + (1.0f - kMomentum) * float(v);
            }
            for (int r = 0; r < B; ++r) {
                (*xhat)[size_t(r) * C + c] = float((x.at(r, c) - m) * inv);
                y.at(r, c) = float(double(scale.value.val()[c]) * (x.at(r, c) - m) * inv +
                                   double(shift.value.val()[c]));
            }
        }
        auto xd = x.d;
        auto sd = scale.value.d;
        auto hd = shift.value.d;
        auto yd = y.d;
        tape.record([xd, sd, hd, yd, xhat, inv_std, B, C]() {
            for (int c = 0; c < C; ++c) {
                double sum_dy = 0.0, sum_dy_xhat = 0.0;
                for (int r = 0; r < B; ++r) {
                    const double dy = yd->grad[size_t(r) * C + c];
                    sum_dy += dy;
                    sum_dy_xhat += dy * (*xhat)[size_t(r) * C + c];
                }
                sd->grad[c] += float(sum_dy_xhat);
                hd->grad[c] += float(sum_dy);
                const double g = double(sd->val[c]) * inv_std[c] / B;
                for (int r = 0; r < B; ++r) {
                    const double dy = yd->grad[size_t(r) * C + c];
                    xd->grad[size_t(r) * C + c] +=
                        float(g * (B * dy - sum_dy - (*xhat)[size_t(r) * C + c] * sum_dy_xhat));
                }
            }
        });
    } else {
        std::vector<float> inv_std(C);
        auto xhat = std::make_shared<std::vector<float>>(size_t(B) * C);
        for (int c = 0; c < C; ++c) {
            const double m = state.running_mean[c];
            const double inv = 1.0 / std::sqrt(double(state.running_var[c]) + kEps);
            inv_std[c] = float(inv);
            for (int r = 0; r < B; ++r) {
                (*xhat)[size_t(r) * C + c] = float((x.at(r, c) - m) * inv);
                y.at(r, c) = float(double(scale.value.val()[c]) * (x.at(r, c) - m) * inv +
                                   double(shift.value.val()[c]));
            }
        }
        auto xd = x.d;
        auto sd = scale.value.d;
        auto hd = shift.value.d;
        auto yd = y.d;
        tape.record([xd, sd, hd, yd, xhat, inv_std, B, C]() {
            for (int c = 0; c < C; ++c) {
                double sum_dy = 0.0, sum_dy_xhat = 0.0;
                for (int r = 0; r < B; ++r) {
                    const double dy = yd->grad[size_t(r) * C + c];
                    sum_dy += dy;
                    sum_dy_xhat += dy * (*xhat)[size_t(r) * C + c];
                    xd->grad[size_t(r) * C + c] += float(dy * sd->val[c] * inv_std[c]);
                }
                sd->grad[c] += float(sum_dy_xhat);
                hd->grad[c] += float(sum_dy);
            }
        });
    }
    return y;
}

Tensor softmax_cross_entropy(Tape& tape, const Tensor& logits,
                             const std::vector<int>& labels, float smoothing) {
    const int B = logits.rows(), K = logits.cols();
    if (int(labels.size()) != B)
        throw std::invalid_argument("softmax_cross_entropy: batch sizes disagree");
    if (smoothing < 0.0f || smoothing >= 1.0f)
        throw std::invalid_argument("softmax_cross_entropy: smoothing must be in [0,1)");
    for (int y : labels)
        if (y < 0 || y >= K) throw std::invalid_argument("softmax_cross_entropy: label out of range");

    auto probs = std::make_shared<std::vector<float>>(size_t(B) * K);
    double loss = 0.0;
    const double eps = smoothing;
    for (int r = 0; r < B; ++r) {
        double mx = logits.at(r, 0);
        for (int c = 1; c < K; ++c) mx = std::max(mx, double(logits.at(r, c)));
        double z = 0.0;
        for (int c = 0; c < K; ++c) z += std::exp(double(logits.at(r, c)) - mx);
        const double logz = std::log(z) + mx;
        for (int c = 0; c < K; ++c) {
            const double logp = double(logits.at(r, c)) - logz;
            (*probs)[size_t(r) * K + c] = float(std::exp(logp));
            const double t = eps / K + (c == labels[r] ? 1.0 - eps : 0.0);
            loss -= t * logp;
        }
    }
    Tensor out = Tensor::scalar(float(loss / B));

    auto ld = logits.d;
    auto od = out.d;
    tape.record([ld, od, probs, labels, eps, B, K]() {
        const float up = od->grad[0];
        for (int r = 0; r < B; ++r)
            for (int c = 0; c < K; ++c) {
                const double t = eps / K + (c == labels[r] ? 1.0 - eps : 0.0);
                ld->grad[size_t(r) * K + c] +=
                    up * float(((*probs)[size_t(r) * K + c] - t) / B);
            }
    });
    return out;
}

GradCheckResult grad_check(const std::vector<Parameter*>& params,
                           const std::function<void()>& populate_analytic,
                           const std::function<double()>& loss_fp64, double eps,
                           size_t sample_per_param, Rng& rng) {
    if (eps <= 0.0) throw std::invalid_argument("grad_check: invalid step");
    populate_analytic();
    GradCheckResult res;
    for (auto* p : params) {
        const size_t n = p->value.size();
        std::vector<size_t> coords;
        if (sample_per_param == 0 || sample_per_param >= n) {
            coords.resize(n);
            for (size_t i = 0; i < n; ++i) coords[i] = i;
        } else {
            std::vector<size_t> all(n);
            for (size_t i = 0; i < n; ++i) all[i] = i;
            rng.shuffle(all);
            coords.assign(all.begin(), all.begin() + sample_per_param);
        }
        for (size_t c : coords) {
            const float w0 = p->value.val()[c];
            const float analytic = p->value.grad()[c];
            const float wp = float(double(w0) + eps);
            const float wm = float(double(w0) - eps);
            p->value.val()[c] = wp;
            const double lp = loss_fp64();
            p->value.val()[c] = wm;
            const double lm = loss_fp64();
            p->value.val()[c] = w0;
            if (!std::isfinite(lp) || !std::isfinite(lm) || !std::isfinite(analytic))
                throw std::runtime_error("grad_check: non-finite value encountered");
            const double numeric = (lp - lm) / (double(wp) - double(wm));
            const double denom = std::max(1e-8, std::fabs(double(analytic)) + std::fabs(numeric));
            const double rel = std::fabs(double(analytic) - numeric) / denom;
            res.max_rel_err = std::max(res.max_rel_err, rel);
            ++res.coords_checked;
        }
    }
    return res;
}

} // namespace toponet
