#include "toponet/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace toponet {

namespace {

Graph generate_stage_graph(const StageTopoSpec& topo, int n, uint64_t seed) {
    switch (topo.kind) {
    case TopologyKind::Complete: return complete_graph(n);
    case TopologyKind::Residual: return residual_graph(n, topo.interval);
    case TopologyKind::RandomP: return random_graph(n, topo.p, seed);
    case TopologyKind::ER:
        return classic_random_graph({ClassicKind::ER, topo.p, 0, 0}, n - 2, seed);
    case TopologyKind::BA:
        return classic_random_graph({ClassicKind::BA, 0.0, topo.m, 0}, n - 2, seed);
    case TopologyKind::WS:
        return classic_random_graph({ClassicKind::WS, topo.p, 0, topo.k}, n - 2, seed);
    case TopologyKind::Explicit: return build_graph(n, topo.edges);
    }
    throw std::logic_error("unknown topology kind");
}

Parameter he_linear(Rng& rng, int in, int out, ParamRole role) {
    Tensor w(in, out);
    const double std = std::sqrt(2.0 / in);
    for (size_t e = 0; e < w.size(); ++e) w.val()[e] = float(std * rng.normal());
    return Parameter(std::move(w), role);
}

// ---- plain float evaluation helpers (no tape), used by the natural
// residual reference path ----

Tensor plain_linear(const Tensor& x, const Parameter& W, const Parameter& b) {
    const int in = W.value.rows(), out = W.value.cols(), rows = x.rows();
    Tensor y(rows, out);
    for (int r = 0; r < rows; ++r)
        for (int o = 0; o < out; ++o) {
            double s = b.value.val()[o];
            for (int i = 0; i < in; ++i) s += double(x.at(r, i)) * W.value.at(i, o);
            y.at(r, o) = float(s);
        }
    return y;
}

Tensor plain_node_transform(const NodeParams& np, const Tensor& x, Mode mode) {
    Tensor h(x.rows(), x.cols());
    for (size_t e = 0; e < x.size(); ++e)
        h.d->val[e] = x.d->val[e] > 0.0f ? x.d->val[e] : 0.0f;
    h = plain_linear(h, np.W, np.b);
    const int B = h.rows(), C = h.cols();
    constexpr double kEps = 1e-5;
    for (int c = 0; c < C; ++c) {
        double m, v;
        if (mode == Mode::Train) {
            m = 0.0;
            for (int r = 0; r < B; ++r) m += h.at(r, c);
            m /= B;
            v = 0.0;
            for (int r = 0; r < B; ++r) v += (h.at(r, c) - m) * (h.at(r, c) - m);
            v /= B;
        } else {
            m = np.bn.running_mean[c];
            v = np.bn.running_var[c];
        }
        const double inv = 1.0 / std::sqrt(v + kEps);
        for (int r = 0; r < B; ++r)
            h.at(r, c) = float(np.scale.value.val()[c] * (h.at(r, c) - m) * inv +
                               np.shift.value.val()[c]);
    }
    return h;
}

} // namespace

AlphaMatrix StageSpec::alpha_matrix() const {
    AlphaMatrix a(graph.n_nodes);
    for (size_t e = 0; e < graph.edges.size(); ++e)
        a.set(graph.edges[e].second, graph.edges[e].first, alpha[e].value.val()[0]);
    return a;
}

void StageSpec::set_alpha(const AlphaMatrix& a) {
    if (a.n_nodes != graph.n_nodes)
        throw std::invalid_argument("set_alpha: size mismatch");
    for (size_t e = 0; e < graph.edges.size(); ++e)
        alpha[e].value.val()[0] = a.at(graph.edges[e].second, graph.edges[e].first);
}

std::vector<Parameter*> Network::parameters() {
    std::vector<Parameter*> ps{&head_W, &head_b};
    for (auto& st : stages) {
        for (auto& a : st.alpha) ps.push_back(&a);
        for (auto& np : st.nodes) {
            ps.push_back(&np.W);
            ps.push_back(&np.b);
            ps.push_back(&np.scale);
            ps.push_back(&np.shift);
        }
    }
    ps.push_back(&cls_W);
    ps.push_back(&cls_b);
    return ps;
}

std::vector<Parameter*> Network::alpha_parameters() {
    std::vector<Parameter*> ps;
    for (auto& st : stages)
        for (auto& a : st.alpha) ps.push_back(&a);
    return ps;
}

void Network::zero_grad() {
    for (auto* p : parameters()) p->zero_grad();
}

std::vector<AlphaMatrix> Network::alpha_matrices() const {
    std::vector<AlphaMatrix> mats;
    for (auto& st : stages) mats.push_back(st.alpha_matrix());
    return mats;
}

void Network::install_alpha(const std::vector<AlphaMatrix>& mats) {
    if (mats.size() != stages.size())
        throw std::invalid_argument("install_alpha: stage count mismatch");
    for (size_t k = 0; k < stages.size(); ++k) stages[k].set_alpha(mats[k]);
}

Network build_network(const NetworkSpec& spec) {
    if (spec.stage_sizes.empty()) throw std::invalid_argument("build_network: no stages");
    if (spec.topo.size() != spec.stage_sizes.size())
        throw std::invalid_argument("build_network: topology spec count mismatch");
    if (spec.base_width < 1 || spec.input_dim < 1 || spec.num_classes < 2)
        throw std::invalid_argument("build_network: invalid dimensions");

    Network net;
    net.spec = spec;
    Rng rng(Rng::derive(spec.seed, 0xA11CE));

    const int C = spec.base_width;
    net.head_W = he_linear(rng, spec.input_dim, C, ParamRole::Head);
    net.head_b = Parameter(Tensor(1, C), ParamRole::Head);

    int prev_out = C;
    for (size_t k = 0; k < spec.stage_sizes.size(); ++k) {
        StageSpec st;
        st.topo = spec.topo[k];
        st.width_in = prev_out;
        st.width_out = (k == 0) ? C : prev_out * 2;
        try {
            st.graph = generate_stage_graph(st.topo, spec.stage_sizes[k],
                                            Rng::derive(spec.seed, 0x6000 + k));
        } catch (const std::exception& e) {
            throw std::invalid_argument("stage " + std::to_string(k) + ": " + e.what());
        }
        for (size_t e = 0; e < st.graph.edges.size(); ++e)
            st.alpha.emplace_back(Tensor::scalar(1.0f), ParamRole::EdgeAlpha);
        const int internal = st.graph.n_nodes - 2;
        for (int i = 0; i < internal; ++i) {
            NodeParams np;
            const int in_w = (i == 0) ? st.width_in : st.width_out;
            np.W = he_linear(rng, in_w, st.width_out, ParamRole::NodeWeight);
            np.b = Parameter(Tensor(1, st.width_out), ParamRole::NodeWeight);
            Tensor sc(1, st.width_out);
            std::fill(sc.d->val.begin(), sc.d->val.end(), 1.0f);
            np.scale = Parameter(std::move(sc), ParamRole::NormScale);
            np.shift = Parameter(Tensor(1, st.width_out), ParamRole::NormShift);
            np.bn = BatchNormState(st.width_out);
            st.nodes.push_back(std::move(np));
        }
        prev_out = st.width_out;
        net.stages.push_back(std::move(st));
    }

    net.cls_W = he_linear(rng, prev_out, spec.num_classes, ParamRole::Classifier);
    net.cls_b = Parameter(Tensor(1, spec.num_classes), ParamRole::Classifier);
    return net;
}

namespace {

Tensor stage_forward(StageSpec& st, Tape& tape, const Tensor& in, Mode mode,
                     std::vector<Tensor>* trace) {
    const int n = st.graph.n_nodes;
    const int rows = in.rows();
    std::vector<Tensor> memo(n);
    memo[0] = in;
    if (trace) trace->assign(n, Tensor());

    // incoming edges per destination, with alpha indices
    std::vector<std::vector<std::pair<int, int>>> incoming(n); // (src, edge_idx)
    for (size_t e = 0; e < st.graph.edges.size(); ++e)
        incoming[st.graph.edges[e].second].emplace_back(st.graph.edges[e].first, int(e));

    Tensor out;
    for (int i = 1; i < n; ++i) {
        std::vector<Tensor> xs;
        std::vector<Parameter*> as;
        for (auto& [src, e] : incoming[i]) {
            Tensor x = memo[src];
            // widen the raw stage input when mixed with internal features
            if (src == 0 && i >= 2 && st.width_in < st.width_out)
                x = pad_cols(tape, x, st.width_out);
            xs.push_back(std::move(x));
            as.push_back(&st.alpha[e]);
        }
        const int agg_w = (i == 1) ? st.width_in : st.width_out;
        Tensor agg = xs.empty() ? Tensor(rows, agg_w) : weighted_sum(tape, xs, as);
        if (trace) (*trace)[i] = agg;
        if (i == n - 1) {
            out = agg;
            if (out.cols() < st.width_out) out = pad_cols(tape, out, st.width_out);
            break;
        }
        NodeParams& np = st.nodes[i - 1];
        Tensor h = relu(tape, agg);
        h = linear(tape, h, np.W, np.b);
        h = batch_norm(tape, h, np.scale, np.shift, np.bn, mode == Mode::Train);
        memo[i] = h;
    }
    return out;
}

} // namespace

Tensor forward(Network& net, Tape& tape, const Tensor& batch, Mode mode, ForwardTrace* trace) {
    if (batch.cols() != net.spec.input_dim)
        throw std::invalid_argument("forward: batch width mismatch");
    if (trace) trace->agg.assign(net.stages.size(), {});
    Tensor h = linear(tape, batch, net.head_W, net.head_b);
    for (size_t k = 0; k < net.stages.size(); ++k)
        h = stage_forward(net.stages[k], tape, h, mode,
                          trace ? &trace->agg[k] : nullptr);
    return linear(tape, h, net.cls_W, net.cls_b);
}

Tensor forward(Network& net, const Tensor& batch, Mode mode) {
    Tape tape;
    return forward(net, tape, batch, mode);
}

Tensor natural_residual_forward(Network& net, const Tensor& batch, Mode mode) {
    if (batch.cols() != net.spec.input_dim)
        throw std::invalid_argument("natural_residual_forward: batch width mismatch");
    for (auto& st : net.stages) {
        if (st.topo.kind != TopologyKind::Residual)
            throw std::invalid_argument("natural_residual_forward: stage is not residual");
        for (auto& a : st.alpha)
            if (a.value.val()[0] != 1.0f)
                throw std::invalid_argument("natural_residual_forward: requires alpha == 1");
    }
    Tensor h = plain_linear(batch, net.head_W, net.head_b);
    for (auto& st : net.stages) {
        const int l = st.topo.interval;
        const int blocks = (st.graph.n_nodes - 2) / l;
        const int rows = h.rows();
        // running sum, accumulated in double and starting at the widened stage input
        std::vector<double> s(size_t(rows) * st.width_out, 0.0);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < h.cols(); ++c) s[size_t(r) * st.width_out + c] = h.at(r, c);
        auto rounded = [&] {
            Tensor t(rows, st.width_out);
            for (size_t e = 0; e < t.size(); ++e) t.d->val[e] = float(s[e]);
            return t;
        };
        for (int b = 0; b < blocks; ++b) {
            Tensor t = (b == 0) ? h : rounded();
            for (int m = 1 + b * l; m <= (b + 1) * l; ++m)
                t = plain_node_transform(st.nodes[m - 1], t, mode);
            for (size_t e = 0; e < s.size(); ++e) s[e] += t.d->val[e];
        }
        h = rounded();
    }
    return plain_linear(h, net.cls_W, net.cls_b);
}

// ---- double-precision reference loss ----

namespace {

struct DMat {
    int rows = 0, cols = 0;
    std::vector<double> v;
    DMat() = default;
    DMat(int r, int c) : rows(r), cols(c), v(size_t(r) * c, 0.0) {}
    double& at(int r, int c) { return v[size_t(r) * cols + c]; }
    double at(int r, int c) const { return v[size_t(r) * cols + c]; }
};

DMat dmat_of(const Tensor& t) {
    DMat m(t.rows(), t.cols());
    for (size_t e = 0; e < t.size(); ++e) m.v[e] = t.d->val[e];
    return m;
}

DMat dlinear(const DMat& x, const Parameter& W, const Parameter& b) {
    const int in = W.value.rows(), out = W.value.cols();
    DMat y(x.rows, out);
    for (int r = 0; r < x.rows; ++r)
        for (int o = 0; o < out; ++o) {
            double s = b.value.val()[o];
            for (int i = 0; i < in; ++i) s += x.at(r, i) * double(W.value.at(i, o));
            y.at(r, o) = s;
        }
    return y;
}

DMat dnode(const NodeParams& np, const DMat& x, Mode mode) {
    DMat h = x;
    for (auto& e : h.v) e = e > 0.0 ? e : 0.0;
    h = dlinear(h, np.W, np.b);
    const int B = h.rows, C = h.cols;
    for (int c = 0; c < C; ++c) {
        double m, v;
        if (mode == Mode::Train) {
            m = 0.0;
            for (int r = 0; r < B; ++r) m += h.at(r, c);
            m /= B;
            v = 0.0;
            for (int r = 0; r < B; ++r) v += (h.at(r, c) - m) * (h.at(r, c) - m);
            v /= B;
        } else {
            m = np.bn.running_mean[c];
            v = np.bn.running_var[c];
        }
        const double inv = 1.0 / std::sqrt(v + 1e-5);
        for (int r = 0; r < B; ++r)
            h.at(r, c) = double(np.scale.value.val()[c]) * (h.at(r, c) - m) * inv +
                         double(np.shift.value.val()[c]);
    }
    return h;
}

} // namespace

double forward_loss_fp64(const Network& net, const Tensor& batch,
                         const std::vector<int>& labels, float smoothing, Mode mode) {
    DMat h = dlinear(dmat_of(batch), net.head_W, net.head_b);
    for (auto& st : net.stages) {
        const int n = st.graph.n_nodes;
        std::vector<DMat> memo(n);
        memo[0] = h;
        std::vector<std::vector<std::pair<int, int>>> incoming(n);
        for (size_t e = 0; e < st.graph.edges.size(); ++e)
            incoming[st.graph.edges[e].second].emplace_back(st.graph.edges[e].first, int(e));
        DMat out;
        for (int i = 1; i < n; ++i) {
            const int agg_w = (i == 1) ? st.width_in : st.width_out;
            DMat agg(h.rows, agg_w);
            for (auto& [src, e] : incoming[i]) {
                const double a = st.alpha[e].value.val()[0];
                const DMat& x = memo[src];
                for (int r = 0; r < x.rows; ++r)
                    for (int c = 0; c < x.cols; ++c) agg.at(r, c) += a * x.at(r, c);
            }
            if (i == n - 1) {
                out = DMat(h.rows, st.width_out);
                for (int r = 0; r < agg.rows; ++r)
                    for (int c = 0; c < agg.cols; ++c) out.at(r, c) = agg.at(r, c);
                break;
            }
            memo[i] = dnode(st.nodes[i - 1], agg, mode);
        }
        h = out;
    }
    h = dlinear(h, net.cls_W, net.cls_b);

    const int B = h.rows, K = h.cols;
    const double eps = smoothing;
    double loss = 0.0;
    for (int r = 0; r < B; ++r) {
        double mx = h.at(r, 0);
        for (int c = 1; c < K; ++c) mx = std::max(mx, h.at(r, c));
        double z = 0.0;
        for (int c = 0; c < K; ++c) z += std::exp(h.at(r, c) - mx);
        const double logz = std::log(z) + mx;
        for (int c = 0; c < K; ++c) {
            const double t = eps / K + (c == labels[r] ? 1.0 - eps : 0.0);
            loss -= t * (h.at(r, c) - logz);
        }
    }
    return loss / B;
}

std::vector<int> predict(Network& net, const Tensor& batch) {
    Tensor logits = forward(net, batch, Mode::Eval);
    std::vector<int> out(logits.rows());
    for (int r = 0; r < logits.rows(); ++r) {
        int best = 0;
        for (int c = 1; c < logits.cols(); ++c)
            if (logits.at(r, c) > logits.at(r, best)) best = c;
        out[r] = best;
    }
    return out;
}

double accuracy(Network& net, const Tensor& X, const std::vector<int>& y) {
    auto pred = predict(net, X);
    size_t correct = 0;
    for (size_t i = 0; i < y.size(); ++i)
        if (pred[i] == y[i]) ++correct;
    return y.empty() ? 0.0 : double(correct) / double(y.size());
}

uint64_t state_hash(const Network& net) {
    uint64_t h = 0xcbf29ce484222325ULL;
    auto& mut = const_cast<Network&>(net);
    for (auto* p : mut.parameters())
        h = fnv1a64(p->value.val(), p->value.size() * sizeof(float), h);
    for (auto& st : net.stages)
        for (auto& np : st.nodes) {
            h = fnv1a64(np.bn.running_mean.data(), np.bn.running_mean.size() * sizeof(float), h);
            h = fnv1a64(np.bn.running_var.data(), np.bn.running_var.size() * sizeof(float), h);
        }
    return h;
}

} // namespace toponet
