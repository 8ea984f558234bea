#include "toponet/experiment.hpp"

#include "toponet/analysis.hpp"
#include "toponet/checkpoint.hpp"
#include "toponet/dataset.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace toponet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string hex64(uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Exclusive lock on the output directory for the lifetime of a run.
class DirLock {
public:
    explicit DirLock(const fs::path& dir) : path_(dir / ".lock") {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (fs::exists(path_))
            throw std::runtime_error("output directory is locked by another run: " +
                                     dir.string());
        std::ofstream(path_) << "locked\n";
    }
    ~DirLock() {
        std::error_code ec;
        fs::remove(path_, ec);
    }

private:
    fs::path path_;
};

std::pair<Dataset, Dataset> load_dataset(const DataSpec& spec, uint64_t seed) {
    Dataset all;
    switch (spec.source) {
    case DataSource::Spirals: all = make_spirals(spec.n, spec.noise, seed); break;
    case DataSource::Blobs: all = make_blobs(spec.n, spec.clusters, spec.noise, seed); break;
    case DataSource::Csv: all = load_csv(spec.path); break;
    case DataSource::Idx: all = load_idx(spec.images, spec.labels); break;
    }
    return split_dataset(all, spec.train_fraction, seed);
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << content;
}

void write_manifest(const fs::path& dir, const ExperimentConfig& cfg) {
    json m;
    m["config_hash"] = hex64(cfg.hash);
    m["seed"] = cfg.seed;
    m["checkpoint_version"] = kCheckpointVersion;
    m["tool"] = "toponet 0.1.0";
    write_file(dir / "manifest.json", m.dump(2) + "\n");
}

void write_sweep(const fs::path& base, const SweepResult& r) {
    std::ofstream os(base);
    write_sweep_csv(os, r);
    json meta;
    meta["axis"] = r.axis_name;
    meta["metric"] = r.metric_name;
    meta["baseline"] = r.baseline;
    meta["seed"] = r.seed;
    meta["config_hash"] = hex64(r.config_hash);
    write_file(fs::path(base.string() + ".meta.json"), meta.dump(2) + "\n");
}

void export_topologies(const fs::path& dir, Network& net) {
    for (size_t k = 0; k < net.stages.size(); ++k) {
        std::ofstream os(dir / ("stage_" + std::to_string(k) + ".graph"));
        write_graph_text(os, net.stages[k].graph, net.stages[k].alpha_matrix());
    }
}

void run_analysis(const fs::path& dir, const ExperimentConfig& cfg, Network& net,
                  const Dataset& train_set, const Dataset& val_set,
                  const std::vector<Snapshot>& snapshots) {
    const AnalysisSpec& a = cfg.analysis;
    if (a.node_ablation) {
        SweepResult r = node_ablation_sweep(net, val_set);
        r.config_hash = cfg.hash;
        write_sweep(dir / "node_ablation.csv", r);
    }
    if (a.edge_pruning.enabled) {
        TrainConfig rc = cfg.train;
        rc.epochs = a.edge_pruning.retrain_epochs;
        rc.sparsity = SparsityType::None;
        SweepResult r = edge_pruning_sweep(net, val_set, a.edge_pruning.thresholds,
                                           a.edge_pruning.retrain, &rc, &train_set);
        r.config_hash = cfg.hash;
        write_sweep(dir / "edge_pruning.csv", r);
    }
    if (a.histogram_bins > 0) {
        AlphaHistogram h = alpha_histogram(net, a.histogram_bins);
        std::ofstream os(dir / "alpha_histogram.csv");
        write_histogram_csv(os, h);
    }
    if (a.snapshot_retrain.enabled && snapshots.size() >= 2) {
        TrainConfig rc = cfg.train;
        rc.epochs = a.snapshot_retrain.retrain_epochs;
        rc.sparsity = SparsityType::None;
        SweepResult r = snapshot_retrain_study(net.spec, snapshots, train_set, val_set, rc);
        r.config_hash = cfg.hash;
        write_sweep(dir / "snapshot_retrain.csv", r);
    }
}

ExperimentConfig load_with_overrides(const std::string& config_path,
                                     const CliOverrides& overrides) {
    ExperimentConfig cfg = load_experiment_config(config_path);
    if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;
    if (overrides.seed) {
        cfg.seed = *overrides.seed;
        cfg.arch.seed = *overrides.seed;
        cfg.train.seed = *overrides.seed;
        // the seed is part of the config identity
        std::ifstream in(config_path);
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        json doc = json::parse(text);
        doc["seed"] = *overrides.seed;
        doc.erase("output_dir");
        const std::string dump = doc.dump();
        cfg.hash = fnv1a64(dump.data(), dump.size());
    }
    return cfg;
}

} // namespace

void run_experiment(const std::string& config_path, const CliOverrides& overrides) {
    ExperimentConfig cfg = load_with_overrides(config_path, overrides);
    const fs::path dir(cfg.output_dir);
    DirLock lock(dir);

    auto [train_set, val_set] = load_dataset(cfg.data, cfg.seed);
    cfg.arch.input_dim = train_set.dim();
    Network net = build_network(cfg.arch);

    write_manifest(dir, cfg);
    save_checkpoint((dir / "checkpoint_epoch_0.bin").string(), net, cfg.hash, 0);

    const auto& snaps = cfg.train.snapshot_epochs;
    TrainResult result = train(net, train_set, val_set, cfg.train, [&](int epoch) {
        if (epoch > 0 && std::find(snaps.begin(), snaps.end(), epoch) != snaps.end())
            save_checkpoint((dir / ("checkpoint_epoch_" + std::to_string(epoch) + ".bin")).string(),
                            net, cfg.hash, epoch);
    });

    {
        std::ofstream os(dir / "metrics.csv", std::ios::binary);
        write_metrics_csv(os, result.metrics);
    }
    if (cfg.train.epochs > 0)
        save_checkpoint((dir / "checkpoint_final.bin").string(), net, cfg.hash,
                        cfg.train.epochs);
    export_topologies(dir, net);
    run_analysis(dir, cfg, net, train_set, val_set, result.snapshots);
}

void analyze_checkpoint(const std::string& checkpoint_path, const std::string& config_path,
                        const CliOverrides& overrides) {
    ExperimentConfig cfg = load_with_overrides(config_path, overrides);
    const fs::path dir(cfg.output_dir);
    DirLock lock(dir);

    auto [train_set, val_set] = load_dataset(cfg.data, cfg.seed);
    cfg.arch.input_dim = train_set.dim();
    Network net = build_network(cfg.arch);
    load_checkpoint(checkpoint_path, net);

    write_manifest(dir, cfg);
    export_topologies(dir, net);
    run_analysis(dir, cfg, net, train_set, val_set, {});
}

std::string inspect_checkpoint(const std::string& checkpoint_path) {
    return describe_checkpoint(checkpoint_path);
}

std::string generate_topology(const std::string& spec_json) {
    json doc = json::parse(spec_json);
    const std::string kind = doc.at("type").get<std::string>();
    const uint64_t seed = doc.value("seed", uint64_t(0));
    Graph g;
    if (kind == "complete") {
        g = complete_graph(doc.at("n").get<int>());
    } else if (kind == "residual") {
        g = residual_graph(doc.at("n").get<int>(), doc.at("interval").get<int>());
    } else if (kind == "random") {
        g = random_graph(doc.at("n").get<int>(), doc.at("p").get<double>(), seed);
    } else if (kind == "er") {
        g = classic_random_graph({ClassicKind::ER, doc.at("p").get<double>(), 0, 0},
                                 doc.at("n_internal").get<int>(), seed);
    } else if (kind == "ba") {
        g = classic_random_graph({ClassicKind::BA, 0.0, doc.at("m").get<int>(), 0},
                                 doc.at("n_internal").get<int>(), seed);
    } else if (kind == "ws") {
        g = classic_random_graph(
            {ClassicKind::WS, doc.at("p").get<double>(), 0, doc.at("k").get<int>()},
            doc.at("n_internal").get<int>(), seed);
    } else {
        throw std::runtime_error("gen-topology: unknown type '" + kind + "'");
    }
    return graph_to_text(g, AlphaMatrix::ones_on(g));
}

} // namespace toponet
