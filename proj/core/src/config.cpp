#include "toponet/config.hpp"

#include "toponet/rng.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <stdexcept>

namespace toponet {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::runtime_error("config: unknown key '" + it.key() + "' in " + where);
}

void require(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key))
        throw std::runtime_error("config: missing key '" + std::string(key) + "' in " + where);
}

StageTopoSpec parse_topology(const json& t, const std::string& where) {
    check_keys(t, {"type", "interval", "p", "m", "k", "edges"}, where);
    require(t, "type", where);
    StageTopoSpec s;
    const std::string kind = t.at("type").get<std::string>();
    if (kind == "complete") {
        s.kind = TopologyKind::Complete;
    } else if (kind == "residual") {
        s.kind = TopologyKind::Residual;
        require(t, "interval", where);
        s.interval = t.at("interval").get<int>();
    } else if (kind == "random") {
        s.kind = TopologyKind::RandomP;
        require(t, "p", where);
        s.p = t.at("p").get<double>();
    } else if (kind == "er") {
        s.kind = TopologyKind::ER;
        require(t, "p", where);
        s.p = t.at("p").get<double>();
    } else if (kind == "ba") {
        s.kind = TopologyKind::BA;
        require(t, "m", where);
        s.m = t.at("m").get<int>();
    } else if (kind == "ws") {
        s.kind = TopologyKind::WS;
        require(t, "k", where);
        require(t, "p", where);
        s.k = t.at("k").get<int>();
        s.p = t.at("p").get<double>();
    } else if (kind == "explicit") {
        s.kind = TopologyKind::Explicit;
        require(t, "edges", where);
        for (auto& e : t.at("edges"))
            s.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    } else {
        throw std::runtime_error("config: unknown topology type '" + kind + "'");
    }
    return s;
}

TrainConfig parse_train(const json& t) {
    check_keys(t,
               {"epochs", "batch_size", "lr", "schedule", "milestones", "factor", "momentum",
                "nesterov", "weight_decay", "lambda", "sparsity", "label_smoothing",
                "snapshot_epochs"},
               "train");
    TrainConfig c;
    require(t, "epochs", "train");
    c.epochs = t.at("epochs").get<int>();
    if (t.contains("batch_size")) c.batch_size = t.at("batch_size").get<int>();
    if (t.contains("lr")) c.lr = t.at("lr").get<double>();
    if (t.contains("schedule")) {
        const std::string s = t.at("schedule").get<std::string>();
        if (s == "cosine")
            c.schedule = Schedule::Cosine;
        else if (s == "step")
            c.schedule = Schedule::Step;
        else
            throw std::runtime_error("config: unknown schedule '" + s + "'");
    }
    if (t.contains("milestones")) c.milestones = t.at("milestones").get<std::vector<int>>();
    if (t.contains("factor")) c.factor = t.at("factor").get<double>();
    if (t.contains("momentum")) c.momentum = t.at("momentum").get<double>();
    if (t.contains("nesterov")) c.nesterov = t.at("nesterov").get<bool>();
    if (t.contains("weight_decay")) c.weight_decay = t.at("weight_decay").get<double>();
    if (t.contains("lambda")) c.lambda = t.at("lambda").get<double>();
    if (t.contains("sparsity")) {
        const std::string s = t.at("sparsity").get<std::string>();
        if (s == "none")
            c.sparsity = SparsityType::None;
        else if (s == "uniform")
            c.sparsity = SparsityType::Uniform;
        else if (s == "adaptive")
            c.sparsity = SparsityType::Adaptive;
        else
            throw std::runtime_error("config: unknown sparsity type '" + s + "'");
    }
    if (t.contains("label_smoothing")) c.label_smoothing = t.at("label_smoothing").get<double>();
    if (t.contains("snapshot_epochs"))
        c.snapshot_epochs = t.at("snapshot_epochs").get<std::vector<int>>();
    return c;
}

DataSpec parse_data(const json& t) {
    check_keys(t, {"source", "n", "noise", "clusters", "path", "images", "labels",
                   "train_fraction"},
               "data");
    require(t, "source", "data");
    DataSpec d;
    const std::string s = t.at("source").get<std::string>();
    if (s == "synthetic-spirals")
        d.source = DataSource::Spirals;
    else if (s == "synthetic-blobs")
        d.source = DataSource::Blobs;
    else if (s == "csv")
        d.source = DataSource::Csv;
    else if (s == "idx")
        d.source = DataSource::Idx;
    else
        throw std::runtime_error("config: unknown data source '" + s + "'");
    if (t.contains("n")) d.n = t.at("n").get<size_t>();
    if (t.contains("noise")) d.noise = t.at("noise").get<double>();
    if (t.contains("clusters")) d.clusters = t.at("clusters").get<int>();
    if (t.contains("path")) d.path = t.at("path").get<std::string>();
    if (t.contains("images")) d.images = t.at("images").get<std::string>();
    if (t.contains("labels")) d.labels = t.at("labels").get<std::string>();
    if (t.contains("train_fraction")) d.train_fraction = t.at("train_fraction").get<double>();
    if (d.source == DataSource::Csv && d.path.empty())
        throw std::runtime_error("config: csv source needs 'path'");
    if (d.source == DataSource::Idx && (d.images.empty() || d.labels.empty()))
        throw std::runtime_error("config: idx source needs 'images' and 'labels'");
    return d;
}

AnalysisSpec parse_analysis(const json& t) {
    check_keys(t, {"node_ablation", "histogram_bins", "edge_pruning", "snapshot_retrain"},
               "analysis");
    AnalysisSpec a;
    if (t.contains("node_ablation")) a.node_ablation = t.at("node_ablation").get<bool>();
    if (t.contains("histogram_bins")) a.histogram_bins = t.at("histogram_bins").get<int>();
    if (t.contains("edge_pruning")) {
        const json& p = t.at("edge_pruning");
        check_keys(p, {"thresholds", "retrain", "retrain_epochs"}, "analysis.edge_pruning");
        require(p, "thresholds", "analysis.edge_pruning");
        a.edge_pruning.enabled = true;
        a.edge_pruning.thresholds = p.at("thresholds").get<std::vector<double>>();
        if (p.contains("retrain")) a.edge_pruning.retrain = p.at("retrain").get<bool>();
        if (p.contains("retrain_epochs"))
            a.edge_pruning.retrain_epochs = p.at("retrain_epochs").get<int>();
    }
    if (t.contains("snapshot_retrain")) {
        const json& p = t.at("snapshot_retrain");
        check_keys(p, {"enabled", "retrain_epochs"}, "analysis.snapshot_retrain");
        if (p.contains("enabled")) a.snapshot_retrain.enabled = p.at("enabled").get<bool>();
        if (p.contains("retrain_epochs"))
            a.snapshot_retrain.retrain_epochs = p.at("retrain_epochs").get<int>();
    }
    return a;
}

} // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json doc = json::parse(json_text);
    check_keys(doc, {"arch", "data", "train", "analysis", "output_dir", "seed"}, "top level");
    require(doc, "arch", "top level");
    require(doc, "data", "top level");
    require(doc, "train", "top level");
    require(doc, "output_dir", "top level");
    require(doc, "seed", "top level");

    ExperimentConfig cfg;
    const json& arch = doc.at("arch");
    check_keys(arch, {"stage_sizes", "topology", "base_width", "num_classes"}, "arch");
    require(arch, "stage_sizes", "arch");
    require(arch, "topology", "arch");
    require(arch, "num_classes", "arch");
    cfg.arch.stage_sizes = arch.at("stage_sizes").get<std::vector<int>>();
    const json& topo = arch.at("topology");
    if (topo.is_array()) {
        for (size_t k = 0; k < topo.size(); ++k)
            cfg.arch.topo.push_back(parse_topology(topo[k], "arch.topology[" + std::to_string(k) + "]"));
    } else {
        // one topology broadcast to all stages
        for (size_t k = 0; k < cfg.arch.stage_sizes.size(); ++k)
            cfg.arch.topo.push_back(parse_topology(topo, "arch.topology"));
    }
    if (cfg.arch.topo.size() != cfg.arch.stage_sizes.size())
        throw std::runtime_error("config: topology count does not match stage count");
    if (arch.contains("base_width")) cfg.arch.base_width = arch.at("base_width").get<int>();
    cfg.arch.num_classes = arch.at("num_classes").get<int>();

    cfg.data = parse_data(doc.at("data"));
    cfg.train = parse_train(doc.at("train"));
    if (doc.contains("analysis")) cfg.analysis = parse_analysis(doc.at("analysis"));
    cfg.output_dir = doc.at("output_dir").get<std::string>();
    cfg.seed = doc.at("seed").get<uint64_t>();
    cfg.arch.seed = cfg.seed;
    cfg.train.seed = cfg.seed;

    json canonical = doc;
    canonical.erase("output_dir");
    const std::string dump = canonical.dump();
    cfg.hash = fnv1a64(dump.data(), dump.size());
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_experiment_config(text);
}

} // namespace toponet
