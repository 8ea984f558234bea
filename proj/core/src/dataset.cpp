#include "toponet/dataset.hpp"

#include "toponet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace toponet {

Dataset Dataset::subset(const std::vector<size_t>& idx) const {
    Dataset out;
    out.X = Tensor(int(idx.size()), X.cols());
    out.y.resize(idx.size());
    for (size_t r = 0; r < idx.size(); ++r) {
        for (int c = 0; c < X.cols(); ++c) out.X.at(int(r), c) = X.at(int(idx[r]), c);
        out.y[r] = y[idx[r]];
    }
    return out;
}

Dataset make_spirals(size_t n, double noise, uint64_t seed) {
    if (n < 2) throw std::invalid_argument("make_spirals: need at least 2 points");
    Rng rng(seed);
    Dataset d;
    d.X = Tensor(int(n), 2);
    d.y.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const int cls = int(i % 2);
        const double t = double(i / 2) / double((n + 1) / 2); // [0,1)
        const double r = 0.2 + 0.8 * t;
        const double theta = cls * M_PI + t * 3.0 * M_PI;
        d.X.at(int(i), 0) = float(r * std::cos(theta) + noise * rng.normal());
        d.X.at(int(i), 1) = float(r * std::sin(theta) + noise * rng.normal());
        d.y[i] = cls;
    }
    return d;
}

Dataset make_blobs(size_t n, int clusters, double noise, uint64_t seed) {
    if (clusters < 2) throw std::invalid_argument("make_blobs: need at least 2 clusters");
    Rng rng(seed);
    Dataset d;
    d.X = Tensor(int(n), 2);
    d.y.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const int cls = int(i % clusters);
        const double a = 2.0 * M_PI * cls / clusters;
        d.X.at(int(i), 0) = float(2.0 * std::cos(a) + noise * rng.normal());
        d.X.at(int(i), 1) = float(2.0 * std::sin(a) + noise * rng.normal());
        d.y[i] = cls;
    }
    return d;
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("csv: cannot open " + path);
    std::vector<std::vector<float>> rows;
    std::vector<int> labels;
    std::string line;
    size_t width = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<float> vals;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            size_t pos = 0;
            float v = std::stof(cell, &pos);
            vals.push_back(v);
        }
        if (vals.size() < 2) throw std::runtime_error("csv: row needs features and a label");
        if (width == 0)
            width = vals.size();
        else if (vals.size() != width)
            throw std::runtime_error("csv: row-length mismatch");
        const float lab = vals.back();
        vals.pop_back();
        if (lab < 0.0f || lab != std::floor(lab))
            throw std::runtime_error("csv: label must be a nonnegative integer");
        labels.push_back(int(lab));
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw std::runtime_error("csv: empty file");
    Dataset d;
    d.X = Tensor(int(rows.size()), int(width - 1));
    d.y = std::move(labels);
    for (size_t r = 0; r < rows.size(); ++r)
        for (size_t c = 0; c + 1 < width; ++c) d.X.at(int(r), int(c)) = rows[r][c];
    return d;
}

namespace {

uint32_t read_be32(std::istream& in, const char* what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error(std::string("idx: truncated ") + what);
    return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) | (uint32_t(b[2]) << 8) | b[3];
}

} // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("idx: cannot open " + images_path);
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("idx: cannot open " + labels_path);

    if (read_be32(img, "image header") != 0x00000803u)
        throw std::runtime_error("idx: bad image magic");
    const uint32_t n = read_be32(img, "image header");
    const uint32_t rows = read_be32(img, "image header");
    const uint32_t cols = read_be32(img, "image header");

    if (read_be32(lab, "label header") != 0x00000801u)
        throw std::runtime_error("idx: bad label magic");
    const uint32_t nl = read_be32(lab, "label header");
    if (n != nl) throw std::runtime_error("idx: image/label count mismatch");

    const size_t px = size_t(rows) * cols;
    Dataset d;
    d.X = Tensor(int(n), int(px));
    d.y.resize(n);
    std::vector<unsigned char> buf(px);
    for (uint32_t i = 0; i < n; ++i) {
        if (!img.read(reinterpret_cast<char*>(buf.data()), std::streamsize(px)))
            throw std::runtime_error("idx: truncated image file");
        for (size_t p = 0; p < px; ++p) d.X.at(int(i), int(p)) = float(buf[p]) / 255.0f;
        char c;
        if (!lab.read(&c, 1)) throw std::runtime_error("idx: truncated label file");
        d.y[i] = int(static_cast<unsigned char>(c));
    }
    return d;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& d, double train_fraction, uint64_t seed) {
    if (train_fraction <= 0.0 || train_fraction >= 1.0)
        throw std::invalid_argument("split: fraction must be in (0,1)");
    std::vector<size_t> idx(d.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(Rng::derive(seed, 0xDA7A));
    rng.shuffle(idx);
    const size_t n_train = size_t(double(d.size()) * train_fraction);
    if (n_train == 0 || n_train == d.size())
        throw std::invalid_argument("split: empty split");
    std::vector<size_t> a(idx.begin(), idx.begin() + n_train);
    std::vector<size_t> b(idx.begin() + n_train, idx.end());
    return {d.subset(a), d.subset(b)};
}

int num_classes_of(const Dataset& d) {
    int mx = 0;
    for (int v : d.y) mx = std::max(mx, v);
    return mx + 1;
}

} // namespace toponet
