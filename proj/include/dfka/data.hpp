#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dfka/tensor.hpp"

namespace dfka {

struct SyntheticMultiLabelDataset {
    Tensor images;  // [N,3,S,S], values in [0,1]
    Tensor labels;  // [N,C], binary
    std::vector<std::string> label_names;
    std::string split;  // "train" or "eval"
    std::uint64_t seed = 0;

    int size() const { return images.dim(0); }
    int num_labels() const { return labels.dim(1); }
    /// Row-range batch copy.
    Tensor image_batch(int begin, int count) const;
    Tensor label_batch(int begin, int count) const;
};

/// Rendering statistics; the defaults define the primary toy dataset,
/// the alternates feed the similar-data baseline.
struct DatasetStyle {
    int min_shapes = 1;
    int max_shapes = 3;
    double min_half_size = 5.0;
    double max_half_size = 9.0;
    double color_jitter = 0.08;
    double background_level = 0.2;
    bool rotate_palette = false;  // cycle RGB, shifting color statistics
};

DatasetStyle similar_data_style();

/// Renders colored geometric shapes on a noisy background; label c is 1
/// iff shape/color combination c appears. Deterministic in seed.
SyntheticMultiLabelDataset generate_dataset(std::uint64_t seed, int n, int c_total,
                                            const DatasetStyle& style = {}, int image_size = 32,
                                            const std::string& split = "train");

struct TaskSplit {
    std::vector<std::vector<int>> teacher_labels;  // Y_m
    std::vector<int> y_cst;

    void validate(int c_total) const;
};

void save_dataset(const SyntheticMultiLabelDataset& ds, const std::string& path);
SyntheticMultiLabelDataset load_dataset(const std::string& path);

}  // namespace dfka
