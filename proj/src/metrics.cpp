#include "dfka/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <stdexcept>

namespace dfka {

double average_precision(std::span<const float> scores, std::span<const float> labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("average_precision: size mismatch");
    const size_t n = scores.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return scores[a] > scores[b]; });

    double n_pos = 0.0;
    for (float l : labels) n_pos += (l >= 0.5f);
    if (n_pos == 0.0)
        throw std::invalid_argument("average_precision: label column has no positives");

    // PR points at tie-group boundaries, then all-points interpolation.
    std::vector<std::pair<double, double>> points;  // (recall, precision)
    double tp = 0.0, fp = 0.0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]] >= 0.5f) tp += 1.0;
            else fp += 1.0;
            ++j;
        }
        points.emplace_back(tp / n_pos, tp / (tp + fp));
        i = j;
    }

    double ap = 0.0, max_p = 0.0, next_r = points.back().first;
    (void)next_r;
    double prev_r = 0.0;
    // Interpolated precision is the running max from the high-recall end.
    std::vector<double> interp(points.size());
    for (size_t k = points.size(); k-- > 0;) {
        max_p = std::max(max_p, points[k].second);
        interp[k] = max_p;
    }
    for (size_t k = 0; k < points.size(); ++k) {
        ap += (points[k].first - prev_r) * interp[k];
        prev_r = points[k].first;
    }
    return ap;
}

double mean_average_precision(const Tensor& scores, const Tensor& labels,
                              std::vector<double>* per_label) {
    if (scores.shape() != labels.shape() || scores.ndim() != 2)
        throw std::invalid_argument("mean_average_precision: scores " + shape_str(scores.shape()) +
                                    " vs labels " + shape_str(labels.shape()));
    const int n = scores.dim(0), c = scores.dim(1);
    double acc = 0.0;
    int counted = 0;
    if (per_label) per_label->assign(static_cast<size_t>(c), std::nan(""));
    std::vector<float> col_s(static_cast<size_t>(n)), col_l(static_cast<size_t>(n));
    for (int j = 0; j < c; ++j) {
        for (int r = 0; r < n; ++r) {
            col_s[static_cast<size_t>(r)] = scores.data()[static_cast<size_t>(r) * c + j];
            col_l[static_cast<size_t>(r)] = labels.data()[static_cast<size_t>(r) * c + j];
        }
        bool any_pos = std::any_of(col_l.begin(), col_l.end(), [](float v) { return v >= 0.5f; });
        if (!any_pos) {
            std::cerr << "warning: label column " << j << " has no positives, excluded from mAP\n";
            continue;
        }
        const double ap = average_precision(col_s, col_l);
        if (per_label) (*per_label)[static_cast<size_t>(j)] = ap;
        acc += ap;
        ++counted;
    }
    if (counted == 0) throw std::invalid_argument("mean_average_precision: no label has positives");
    return acc / counted;
}

MetricsReport coco_style_metrics(const Tensor& scores, const Tensor& labels, int k) {
    if (scores.shape() != labels.shape() || scores.ndim() != 2)
        throw std::invalid_argument("coco_style_metrics: scores " + shape_str(scores.shape()) +
                                    " vs labels " + shape_str(labels.shape()));
    const int n = scores.dim(0), c = scores.dim(1);
    if (k > c) throw std::invalid_argument("coco_style_metrics: k exceeds label count");

    std::vector<double> tp(static_cast<size_t>(c), 0.0), fp(static_cast<size_t>(c), 0.0),
        fn(static_cast<size_t>(c), 0.0), pos(static_cast<size_t>(c), 0.0);
    std::vector<int> idx(static_cast<size_t>(c));
    for (int r = 0; r < n; ++r) {
        const float* row = scores.data().data() + static_cast<std::int64_t>(r) * c;
        const float* lab = labels.data().data() + static_cast<std::int64_t>(r) * c;
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return row[a] > row[b]; });
        std::vector<char> pred(static_cast<size_t>(c), 0);
        for (int t = 0; t < k; ++t) pred[static_cast<size_t>(idx[static_cast<size_t>(t)])] = 1;
        for (int j = 0; j < c; ++j) {
            const bool truth = lab[j] >= 0.5f;
            pos[static_cast<size_t>(j)] += truth;
            if (pred[static_cast<size_t>(j)] && truth) tp[static_cast<size_t>(j)] += 1.0;
            else if (pred[static_cast<size_t>(j)] && !truth) fp[static_cast<size_t>(j)] += 1.0;
            else if (!pred[static_cast<size_t>(j)] && truth) fn[static_cast<size_t>(j)] += 1.0;
        }
    }

    MetricsReport rep;
    rep.top_k = k;
    double stp = 0.0, sfp = 0.0, sfn = 0.0;
    double cp = 0.0, cr = 0.0;
    int classes = 0;
    for (int j = 0; j < c; ++j) {
        stp += tp[static_cast<size_t>(j)];
        sfp += fp[static_cast<size_t>(j)];
        sfn += fn[static_cast<size_t>(j)];
        if (pos[static_cast<size_t>(j)] == 0.0) continue;  // empty class skipped
        const double pred_j = tp[static_cast<size_t>(j)] + fp[static_cast<size_t>(j)];
        cp += pred_j > 0.0 ? tp[static_cast<size_t>(j)] / pred_j : 0.0;
        cr += tp[static_cast<size_t>(j)] / pos[static_cast<size_t>(j)];
        ++classes;
    }
    rep.overall_precision = (stp + sfp) > 0.0 ? stp / (stp + sfp) : 0.0;
    rep.overall_recall = (stp + sfn) > 0.0 ? stp / (stp + sfn) : 0.0;
    rep.overall_f1 = (rep.overall_precision + rep.overall_recall) > 0.0
                         ? 2.0 * rep.overall_precision * rep.overall_recall /
                               (rep.overall_precision + rep.overall_recall)
                         : 0.0;
    if (classes > 0) {
        rep.class_precision = cp / classes;
        rep.class_recall = cr / classes;
        rep.class_f1 = (rep.class_precision + rep.class_recall) > 0.0
                           ? 2.0 * rep.class_precision * rep.class_recall /
                                 (rep.class_precision + rep.class_recall)
                           : 0.0;
    }
    rep.map = mean_average_precision(scores, labels, &rep.per_label_ap);
    return rep;
}

void write_metrics_csv(const MetricsReport& report, const std::vector<std::string>& label_names,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_metrics_csv: cannot write " + path);
    out << "label,ap\n";
    out.precision(6);
    out << std::fixed;
    for (size_t i = 0; i < report.per_label_ap.size(); ++i) {
        const std::string name = i < label_names.size() ? label_names[i] : "label" + std::to_string(i);
        out << name << ",";
        if (std::isnan(report.per_label_ap[i])) out << "skipped";
        else out << report.per_label_ap[i];
        out << "\n";
    }
    out << "mAP," << report.map << "\n";
    out << "O-P," << report.overall_precision << "\nO-R," << report.overall_recall << "\nO-F1,"
        << report.overall_f1 << "\n";
    out << "C-P," << report.class_precision << "\nC-R," << report.class_recall << "\nC-F1,"
        << report.class_f1 << "\n";
    out << "top_k," << report.top_k << "\n";
}

}  // namespace dfka
