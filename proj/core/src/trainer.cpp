#include "toponet/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace toponet {

Tensor total_loss(Tape& tape, const Tensor& task_loss, double l1_alpha, double lambda,
                  SparsityType type) {
    if (lambda < 0.0) throw std::invalid_argument("total_loss: lambda must be >= 0");
    if (!task_loss.is_scalar()) throw std::invalid_argument("total_loss: task loss must be scalar");
    const double l = (type == SparsityType::None) ? 0.0 : lambda;
    Tensor out = Tensor::scalar(float(double(task_loss.val()[0]) + l * l1_alpha));
    auto td = task_loss.d;
    auto od = out.d;
    tape.record([td, od]() { td->grad[0] += od->grad[0]; });
    return out;
}

double sparsity_subgradient(double alpha_value, double lambda, SparsityType type, int in_degree) {
    if (type == SparsityType::None) return 0.0;
    if (in_degree < 1) throw std::invalid_argument("sparsity_subgradient: in-degree must be >= 1");
    const double sign = alpha_value > 0.0 ? 1.0 : (alpha_value < 0.0 ? -1.0 : 0.0);
    if (type == SparsityType::Uniform) return lambda * sign;
    return lambda * std::log(double(in_degree)) * sign;
}

void sgd_step(const std::vector<Parameter*>& params, double lr, double momentum,
              bool nesterov, double weight_decay) {
    for (auto* p : params) {
        const size_t n = p->value.size();
        if (p->velocity.size() != n) p->velocity.assign(n, 0.0f);
        const bool decay = weight_decay != 0.0 && p->decayable();
        for (size_t e = 0; e < n; ++e) {
            float g = p->value.grad()[e];
            if (!std::isfinite(g))
                throw std::runtime_error("sgd_step: non-finite gradient detected");
            if (decay) g += float(weight_decay) * p->value.val()[e];
            float& v = p->velocity[e];
            v = float(momentum) * v + g;
            const float step = nesterov ? g + float(momentum) * v : v;
            p->value.val()[e] -= float(lr) * step;
        }
    }
}

double lr_at(const TrainConfig& config, int epoch) {
    if (epoch < 0 || epoch >= config.epochs)
        throw std::invalid_argument("lr_at: epoch out of range");
    if (config.schedule == Schedule::Step) {
        double lr = config.lr;
        for (int m : config.milestones)
            if (epoch >= m) lr *= config.factor;
        return lr;
    }
    return config.lr * 0.5 * (1.0 + std::cos(M_PI * double(epoch) / double(config.epochs)));
}

namespace {

double alpha_l1(Network& net) {
    double s = 0.0;
    for (auto& st : net.stages)
        for (auto& a : st.alpha) s += std::fabs(double(a.value.val()[0]));
    return s;
}

double frac_alpha_below(Network& net, double t) {
    size_t total = 0, small = 0;
    for (auto& st : net.stages)
        for (auto& a : st.alpha) {
            ++total;
            if (std::fabs(double(a.value.val()[0])) < t) ++small;
        }
    return total == 0 ? 0.0 : double(small) / double(total);
}

Snapshot take_snapshot(Network& net, int epoch) {
    Snapshot s;
    s.epoch = epoch;
    for (auto& st : net.stages) {
        s.graphs.push_back(st.graph);
        s.alphas.push_back(st.alpha_matrix());
    }
    return s;
}

bool contains(const std::vector<int>& v, int x) {
    for (int e : v)
        if (e == x) return true;
    return false;
}

} // namespace

TrainResult train(Network& net, const Dataset& train_set, const Dataset& val_set,
                  const TrainConfig& config, const std::function<void(int)>& epoch_hook) {
    if (train_set.size() == 0 || val_set.size() == 0)
        throw std::invalid_argument("train: empty dataset");
    if (config.lr < 0.0) throw std::invalid_argument("train: lr must be nonnegative");
    if (config.momentum < 0.0 || config.momentum >= 1.0)
        throw std::invalid_argument("train: momentum must be in [0,1)");
    if (config.lambda < 0.0) throw std::invalid_argument("train: lambda must be >= 0");

    TrainResult result;
    if (contains(config.snapshot_epochs, 0)) result.snapshots.push_back(take_snapshot(net, 0));
    if (epoch_hook && contains(config.snapshot_epochs, 0)) epoch_hook(0);

    // static in-degrees per stage for the adaptive penalty
    std::vector<std::vector<int>> in_deg;
    for (auto& st : net.stages) in_deg.push_back(st.graph.in_degrees());

    const size_t n = train_set.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;

    auto params = net.parameters();
    std::vector<Parameter*> step_params;
    for (auto* p : params)
        if (!(config.freeze_alpha && p->role == ParamRole::EdgeAlpha)) step_params.push_back(p);

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const double lr = lr_at(config, epoch - 1);
        Rng shuffle_rng(Rng::derive(config.seed, 0x50000 + uint64_t(epoch)));
        shuffle_rng.shuffle(order);

        double sum_total = 0.0, sum_task = 0.0;
        size_t seen = 0, correct = 0;
        for (size_t start = 0; start < n; start += size_t(config.batch_size)) {
            const size_t end = std::min(n, start + size_t(config.batch_size));
            const int bs = int(end - start);
            if (bs < 2) continue; // batch norm needs >= 2 samples
            Tensor batch(bs, train_set.dim());
            std::vector<int> labels(bs);
            for (int r = 0; r < bs; ++r) {
                const size_t idx = order[start + r];
                for (int c = 0; c < train_set.dim(); ++c)
                    batch.at(r, c) = train_set.X.at(int(idx), c);
                labels[r] = train_set.y[idx];
            }

            Tape tape;
            Tensor logits = forward(net, tape, batch, Mode::Train);
            Tensor task = softmax_cross_entropy(tape, logits, labels,
                                                float(config.label_smoothing));
            const double l1 = alpha_l1(net);
            Tensor loss = total_loss(tape, task, l1, config.lambda, config.sparsity);
            if (!std::isfinite(loss.val()[0]))
                throw std::runtime_error("train: non-finite loss at epoch " +
                                         std::to_string(epoch) + " batch " +
                                         std::to_string(start / config.batch_size));

            net.zero_grad();
            backward(tape, loss);

            // L1 subgradient enters the alpha gradients directly
            if (config.sparsity != SparsityType::None && !config.freeze_alpha) {
                for (size_t k = 0; k < net.stages.size(); ++k) {
                    auto& st = net.stages[k];
                    for (size_t e = 0; e < st.graph.edges.size(); ++e) {
                        const int dst = st.graph.edges[e].second;
                        auto& a = st.alpha[e];
                        a.value.grad()[0] += float(sparsity_subgradient(
                            a.value.val()[0], config.lambda, config.sparsity, in_deg[k][dst]));
                    }
                }
            }

            sgd_step(step_params, lr, config.momentum, config.nesterov, config.weight_decay);

            sum_total += double(loss.val()[0]) * bs;
            sum_task += double(task.val()[0]) * bs;
            for (int r = 0; r < bs; ++r) {
                int best = 0;
                for (int c = 1; c < logits.cols(); ++c)
                    if (logits.at(r, c) > logits.at(r, best)) best = c;
                if (best == labels[r]) ++correct;
            }
            seen += size_t(bs);
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = seen ? sum_total / double(seen) : 0.0;
        rec.task_loss = seen ? sum_task / double(seen) : 0.0;
        rec.l1_alpha = alpha_l1(net);
        rec.train_acc = seen ? double(correct) / double(seen) : 0.0;
        rec.val_acc = accuracy(net, val_set.X, val_set.y);
        rec.frac_alpha_small = frac_alpha_below(net, 0.1);
        rec.lr = lr;
        result.metrics.records.push_back(rec);

        if (contains(config.snapshot_epochs, epoch))
            result.snapshots.push_back(take_snapshot(net, epoch));
        if (epoch_hook) epoch_hook(epoch);
    }
    return result;
}

namespace {

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

} // namespace

void write_metrics_csv(std::ostream& os, const Metrics& m) {
    os << "epoch,train_loss,task_loss,l1_alpha,train_acc,val_acc,frac_alpha_small,lr\n";
    for (auto& r : m.records)
        os << r.epoch << ',' << fmt6(r.train_loss) << ',' << fmt6(r.task_loss) << ','
           << fmt6(r.l1_alpha) << ',' << fmt6(r.train_acc) << ',' << fmt6(r.val_acc) << ','
           << fmt6(r.frac_alpha_small) << ',' << fmt6(r.lr) << '\n';
}

std::string metrics_to_csv(const Metrics& m) {
    std::ostringstream ss;
    write_metrics_csv(ss, m);
    return ss.str();
}

} // namespace toponet
