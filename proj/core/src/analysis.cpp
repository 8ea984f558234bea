#include "toponet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace toponet {

namespace {

// Scoped alpha masking; restores the exact float values on destruction.
class AlphaMask {
public:
    explicit AlphaMask(Network& net) : net_(net) {
        for (auto& st : net.stages)
            for (auto& a : st.alpha) saved_.push_back(a.value.val()[0]);
    }
    ~AlphaMask() { restore(); }
    void restore() {
        size_t i = 0;
        for (auto& st : net_.stages)
            for (auto& a : st.alpha) a.value.val()[0] = saved_[i++];
    }
    void mask_outgoing(size_t stage, int node) {
        auto& st = net_.stages[stage];
        for (size_t e = 0; e < st.graph.edges.size(); ++e)
            if (st.graph.edges[e].first == node) st.alpha[e].value.val()[0] = 0.0f;
    }
    // Mask all edges below the threshold; returns the masked fraction.
    double mask_below(double threshold) {
        size_t total = 0, masked = 0;
        for (auto& st : net_.stages)
            for (auto& a : st.alpha) {
                ++total;
                if (std::fabs(double(a.value.val()[0])) < threshold) {
                    a.value.val()[0] = 0.0f;
                    ++masked;
                }
            }
        return total == 0 ? 0.0 : double(masked) / double(total);
    }

private:
    Network& net_;
    std::vector<float> saved_;
};

} // namespace

SweepResult node_ablation_sweep(Network& net, const Dataset& eval_set) {
    SweepResult r;
    r.axis_name = "node_index";
    r.metric_name = "accuracy";
    r.seed = net.spec.seed;
    r.baseline = accuracy(net, eval_set.X, eval_set.y);
    AlphaMask mask(net);
    int global = 0;
    for (size_t k = 0; k < net.stages.size(); ++k) {
        const int n = net.stages[k].graph.n_nodes;
        for (int i = 1; i < n - 1; ++i) {
            mask.mask_outgoing(k, i);
            const double acc = accuracy(net, eval_set.X, eval_set.y);
            mask.restore();
            r.points.push_back({double(global + i), acc, 0.0});
        }
        global += n;
    }
    return r;
}

SweepResult edge_pruning_sweep(Network& net, const Dataset& eval_set,
                               const std::vector<double>& thresholds, bool retrain,
                               const TrainConfig* retrain_config, const Dataset* retrain_set) {
    for (size_t i = 1; i < thresholds.size(); ++i)
        if (thresholds[i] < thresholds[i - 1])
            throw std::invalid_argument("edge_pruning_sweep: thresholds must ascend");
    if (retrain && (!retrain_config || !retrain_set))
        throw std::invalid_argument("edge_pruning_sweep: retrain requested without config");

    SweepResult r;
    r.axis_name = "threshold";
    r.metric_name = "accuracy";
    r.extra_name = "pruned_fraction";
    r.seed = net.spec.seed;
    r.baseline = accuracy(net, eval_set.X, eval_set.y);

    const auto trained_alpha = net.alpha_matrices();
    for (double t : thresholds) {
        double frac, acc;
        if (retrain) {
            Network fresh = build_network(net.spec);
            fresh.install_alpha(trained_alpha);
            AlphaMask mask(fresh);
            frac = mask.mask_below(t);
            TrainConfig cfg = *retrain_config;
            cfg.freeze_alpha = true;
            train(fresh, *retrain_set, eval_set, cfg);
            acc = accuracy(fresh, eval_set.X, eval_set.y);
        } else {
            AlphaMask mask(net);
            frac = mask.mask_below(t);
            acc = accuracy(net, eval_set.X, eval_set.y);
        }
        r.points.push_back({t, acc, frac});
    }
    return r;
}

AlphaHistogram alpha_histogram(const Network& net, int num_bins) {
    if (num_bins < 2) throw std::invalid_argument("alpha_histogram: need at least 2 bins");
    std::vector<double> vals;
    for (auto& st : net.stages)
        for (auto& a : st.alpha) vals.push_back(double(a.value.val()[0]));
    if (vals.empty()) throw std::invalid_argument("alpha_histogram: no edges");

    const double lo = *std::min_element(vals.begin(), vals.end());
    const double hi = *std::max_element(vals.begin(), vals.end());
    AlphaHistogram h;
    h.bin_edges.resize(size_t(num_bins) + 1);
    for (int b = 0; b <= num_bins; ++b)
        h.bin_edges[b] = lo + (hi - lo) * double(b) / double(num_bins);
    h.counts.assign(size_t(num_bins), 0);
    for (double v : vals) {
        int b = (hi > lo) ? int((v - lo) / (hi - lo) * num_bins) : 0;
        if (b >= num_bins) b = num_bins - 1;
        ++h.counts[size_t(b)];
    }
    h.per_stage = net.alpha_matrices();
    return h;
}

SweepResult snapshot_retrain_study(const NetworkSpec& spec,
                                   const std::vector<Snapshot>& snapshots,
                                   const Dataset& train_set, const Dataset& val_set,
                                   const TrainConfig& retrain_config) {
    if (snapshots.size() < 2)
        throw std::invalid_argument("snapshot_retrain_study: need at least 2 snapshots");
    SweepResult r;
    r.axis_name = "snapshot_epoch";
    r.metric_name = "retrained_val_accuracy";
    r.seed = spec.seed;
    for (auto& snap : snapshots) {
        Network net = build_network(spec);
        if (snap.alphas.size() != net.stages.size())
            throw std::invalid_argument("snapshot_retrain_study: snapshot/architecture mismatch");
        net.install_alpha(snap.alphas);
        TrainConfig cfg = retrain_config;
        cfg.freeze_alpha = true;
        train(net, train_set, val_set, cfg);
        r.points.push_back({double(snap.epoch), accuracy(net, val_set.X, val_set.y), 0.0});
    }
    return r;
}

namespace {

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

} // namespace

void write_sweep_csv(std::ostream& os, const SweepResult& r) {
    os << r.axis_name << ',' << r.metric_name;
    if (!r.extra_name.empty()) os << ',' << r.extra_name;
    os << '\n';
    for (auto& p : r.points) {
        os << fmt6(p.axis) << ',' << fmt6(p.metric);
        if (!r.extra_name.empty()) os << ',' << fmt6(p.extra);
        os << '\n';
    }
}

void write_histogram_csv(std::ostream& os, const AlphaHistogram& h) {
    os << "bin_lo,bin_hi,count\n";
    for (size_t b = 0; b < h.counts.size(); ++b)
        os << fmt6(h.bin_edges[b]) << ',' << fmt6(h.bin_edges[b + 1]) << ',' << h.counts[b]
           << '\n';
}

} // namespace toponet
