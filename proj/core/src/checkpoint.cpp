#include "toponet/checkpoint.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace toponet {

namespace {

constexpr char kMagic[4] = {'T', 'P', 'N', 'C'};

void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, uint64_t v) {
    put_u32(os, uint32_t(v));
    put_u32(os, uint32_t(v >> 32));
}

void put_i32(std::ostream& os, int32_t v) { put_u32(os, uint32_t(v)); }

void put_f32(std::ostream& os, float v) {
    uint32_t u;
    std::memcpy(&u, &v, 4);
    put_u32(os, u);
}

void put_f64(std::ostream& os, double v) {
    uint64_t u;
    std::memcpy(&u, &v, 8);
    put_u64(os, u);
}

void put_floats(std::ostream& os, const float* p, size_t n) {
    for (size_t i = 0; i < n; ++i) put_f32(os, p[i]);
}

uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error("unexpected end of checkpoint");
    return uint32_t(b[0]) | (uint32_t(b[1]) << 8) | (uint32_t(b[2]) << 16) |
           (uint32_t(b[3]) << 24);
}

uint64_t get_u64(std::istream& is) {
    uint64_t lo = get_u32(is);
    uint64_t hi = get_u32(is);
    return lo | (hi << 32);
}

int32_t get_i32(std::istream& is) { return int32_t(get_u32(is)); }

float get_f32(std::istream& is) {
    uint32_t u = get_u32(is);
    float v;
    std::memcpy(&v, &u, 4);
    return v;
}

double get_f64(std::istream& is) {
    uint64_t u = get_u64(is);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

void get_floats(std::istream& is, float* p, size_t n) {
    for (size_t i = 0; i < n; ++i) p[i] = get_f32(is);
}

void put_tensor(std::ostream& os, const Tensor& t) {
    put_u32(os, uint32_t(t.rows()));
    put_u32(os, uint32_t(t.cols()));
    put_floats(os, t.val(), t.size());
}

void get_tensor_into(std::istream& is, Tensor& t, const char* what) {
    const uint32_t rows = get_u32(is), cols = get_u32(is);
    if (int(rows) != t.rows() || int(cols) != t.cols())
        throw std::runtime_error(std::string("checkpoint: shape disagreement in ") + what);
    get_floats(is, t.val(), t.size());
}

CheckpointInfo read_header(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("checkpoint: bad magic");
    CheckpointInfo info;
    info.version = get_u32(is);
    if (info.version != kCheckpointVersion)
        throw std::runtime_error("checkpoint: unsupported version " +
                                 std::to_string(info.version));
    info.config_hash = get_u64(is);
    info.epoch = get_i32(is);
    return info;
}

} // namespace

void save_checkpoint(const std::string& path, const Network& net, uint64_t config_hash,
                     int epoch) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
    os.write(kMagic, 4);
    put_u32(os, kCheckpointVersion);
    put_u64(os, config_hash);
    put_i32(os, epoch);
    put_i32(os, net.spec.input_dim);
    put_i32(os, net.spec.num_classes);
    put_i32(os, net.spec.base_width);
    put_u64(os, net.spec.seed);
    put_u32(os, uint32_t(net.stages.size()));
    for (auto& st : net.stages) {
        put_i32(os, st.width_in);
        put_i32(os, st.width_out);
        put_u32(os, uint32_t(st.topo.kind));
        put_i32(os, st.topo.interval);
        put_f64(os, st.topo.p);
        put_i32(os, st.topo.m);
        put_i32(os, st.topo.k);
        put_u32(os, uint32_t(st.graph.n_nodes));
        put_u32(os, uint32_t(st.graph.edges.size()));
        for (auto& [j, i] : st.graph.edges) {
            put_u32(os, uint32_t(j));
            put_u32(os, uint32_t(i));
        }
        for (auto& a : st.alpha) put_f32(os, a.value.val()[0]);
        put_u32(os, uint32_t(st.nodes.size()));
        for (auto& np : st.nodes) {
            put_tensor(os, np.W.value);
            put_tensor(os, np.b.value);
            put_tensor(os, np.scale.value);
            put_tensor(os, np.shift.value);
            put_floats(os, np.bn.running_mean.data(), np.bn.running_mean.size());
            put_floats(os, np.bn.running_var.data(), np.bn.running_var.size());
        }
    }
    put_tensor(os, net.head_W.value);
    put_tensor(os, net.head_b.value);
    put_tensor(os, net.cls_W.value);
    put_tensor(os, net.cls_b.value);
    if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

CheckpointInfo load_checkpoint(const std::string& path, Network& net) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    CheckpointInfo info = read_header(is);
    if (get_i32(is) != net.spec.input_dim || get_i32(is) != net.spec.num_classes ||
        get_i32(is) != net.spec.base_width)
        throw std::runtime_error("checkpoint: shape disagreement with config");
    (void)get_u64(is); // seed; informational
    if (get_u32(is) != net.stages.size())
        throw std::runtime_error("checkpoint: stage count disagreement with config");
    for (auto& st : net.stages) {
        if (get_i32(is) != st.width_in || get_i32(is) != st.width_out)
            throw std::runtime_error("checkpoint: stage width disagreement with config");
        (void)get_u32(is); // topology kind
        (void)get_i32(is);
        (void)get_f64(is);
        (void)get_i32(is);
        (void)get_i32(is);
        const uint32_t n_nodes = get_u32(is);
        const uint32_t n_edges = get_u32(is);
        if (int(n_nodes) != st.graph.n_nodes || n_edges != st.graph.edges.size())
            throw std::runtime_error("checkpoint: graph disagreement with config");
        for (auto& [j, i] : st.graph.edges)
            if (get_u32(is) != uint32_t(j) || get_u32(is) != uint32_t(i))
                throw std::runtime_error("checkpoint: edge disagreement with config");
        for (auto& a : st.alpha) a.value.val()[0] = get_f32(is);
        if (get_u32(is) != st.nodes.size())
            throw std::runtime_error("checkpoint: node count disagreement with config");
        for (auto& np : st.nodes) {
            get_tensor_into(is, np.W.value, "node weight");
            get_tensor_into(is, np.b.value, "node bias");
            get_tensor_into(is, np.scale.value, "norm scale");
            get_tensor_into(is, np.shift.value, "norm shift");
            get_floats(is, np.bn.running_mean.data(), np.bn.running_mean.size());
            get_floats(is, np.bn.running_var.data(), np.bn.running_var.size());
        }
    }
    get_tensor_into(is, net.head_W.value, "head weight");
    get_tensor_into(is, net.head_b.value, "head bias");
    get_tensor_into(is, net.cls_W.value, "classifier weight");
    get_tensor_into(is, net.cls_b.value, "classifier bias");
    return info;
}

std::string describe_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    CheckpointInfo info = read_header(is);
    std::ostringstream out;
    char hashbuf[32];
    std::snprintf(hashbuf, sizeof(hashbuf), "%016llx",
                  static_cast<unsigned long long>(info.config_hash));
    out << "version: " << info.version << "\n"
        << "config_hash: " << hashbuf << "\n"
        << "epoch: " << info.epoch << "\n";
    const int input_dim = get_i32(is);
    const int num_classes = get_i32(is);
    const int base_width = get_i32(is);
    const uint64_t seed = get_u64(is);
    out << "input_dim: " << input_dim << "\nnum_classes: " << num_classes
        << "\nbase_width: " << base_width << "\nseed: " << seed << "\n";
    const uint32_t n_stages = get_u32(is);
    out << "stages: " << n_stages << "\n";
    for (uint32_t s = 0; s < n_stages; ++s) {
        const int win = get_i32(is), wout = get_i32(is);
        (void)get_u32(is);
        (void)get_i32(is);
        (void)get_f64(is);
        (void)get_i32(is);
        (void)get_i32(is);
        const uint32_t n_nodes = get_u32(is), n_edges = get_u32(is);
        for (uint32_t e = 0; e < 2 * n_edges; ++e) (void)get_u32(is);
        double l1 = 0.0;
        size_t nonzero = 0;
        for (uint32_t e = 0; e < n_edges; ++e) {
            const float a = get_f32(is);
            l1 += std::abs(double(a));
            if (a != 0.0f) ++nonzero;
        }
        out << "  stage " << s << ": nodes=" << n_nodes << " edges=" << n_edges
            << " nonzero_alpha=" << nonzero << " l1_alpha=" << l1 << " width=" << win << "->"
            << wout << "\n";
        const uint32_t n_internal = get_u32(is);
        for (uint32_t i = 0; i < n_internal; ++i) {
            for (int t = 0; t < 4; ++t) {
                const uint32_t r = get_u32(is), c = get_u32(is);
                for (uint32_t e = 0; e < r * c; ++e) (void)get_f32(is);
            }
            for (int e = 0; e < 2 * wout; ++e) (void)get_f32(is);
        }
    }
    return out.str();
}

} // namespace toponet
