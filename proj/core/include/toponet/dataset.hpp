#pragma once

#include "toponet/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace toponet {

struct Dataset {
    Tensor X; // n x d
    std::vector<int> y;

    size_t size() const { return y.size(); }
    int dim() const { return X.cols(); }
    Dataset subset(const std::vector<size_t>& idx) const;
};

// Two-class interleaved spirals with Gaussian noise.
Dataset make_spirals(size_t n, double noise, uint64_t seed);

// k Gaussian clusters on a circle, one class per cluster.
Dataset make_blobs(size_t n, int clusters, double noise, uint64_t seed);

// Numeric features, final column is the integer class label.
Dataset load_csv(const std::string& path);

// Standard IDX image/label pair, big-endian headers, pixels scaled to [0,1].
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// Deterministic shuffled split. Errors on an empty side.
std::pair<Dataset, Dataset> split_dataset(const Dataset& d, double train_fraction, uint64_t seed);

int num_classes_of(const Dataset& d);

} // namespace toponet
