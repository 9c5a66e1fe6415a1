#pragma once

#include <span>
#include <string>
#include <vector>

#include "dfka/tensor.hpp"

namespace dfka {

struct MetricsReport {
    std::vector<double> per_label_ap;  // NaN for labels skipped (no positives)
    double map = 0.0;
    double overall_precision = 0.0, overall_recall = 0.0, overall_f1 = 0.0;
    double class_precision = 0.0, class_recall = 0.0, class_f1 = 0.0;
    int top_k = 0;
};

/// All-points interpolated average precision of one label. Throws when
/// the label has no positives.
double average_precision(std::span<const float> scores, std::span<const float> labels);

/// Mean AP over columns; columns without positives are skipped with a
/// warning to stderr (and NaN in per_label_ap).
double mean_average_precision(const Tensor& scores, const Tensor& labels,
                              std::vector<double>* per_label = nullptr);

/// Top-k binarization per image, then overall (micro) and per-class
/// (macro) precision/recall/F1. Per-class averages skip empty classes.
MetricsReport coco_style_metrics(const Tensor& scores, const Tensor& labels, int k);

void write_metrics_csv(const MetricsReport& report, const std::vector<std::string>& label_names,
                       const std::string& path);

}  // namespace dfka
