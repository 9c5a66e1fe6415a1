#pragma once

#include <vector>

#include "dfka/nets.hpp"
#include "dfka/tensor.hpp"

namespace dfka {

struct LossConfig {
    float epsilon = 0.5f;  // label threshold
    float alpha = 0.1f;    // activation-loss weight
    float beta = 5.0f;     // information-entropy weight
    float gamma = 1.0f;    // discrete-loss weight; sign intentionally unconstrained
    std::vector<float> lambda_m;  // per-teacher weights; empty means all 1
    float lambda_in1 = 1.0f;
    float lambda_in2 = 1.0f;

    void validate() const;
    float teacher_weight(size_t m) const {
        return lambda_m.empty() ? 1.0f : lambda_m.at(m);
    }
};

/// Binarize predictions: 1 iff y >= epsilon. Constant (no gradient).
Tensor threshold_labels(const Tensor& y, float epsilon);

/// Mean per-label BCE of y against its own thresholded labels.
Tensor one_hot_loss(const Tensor& y, float epsilon = 0.5f);

/// -mean(|y|), as printed; rewards large activations when weighted
/// positively.
Tensor discrete_loss(const Tensor& y);

/// -mean(|F|) on the discriminator's pre-head feature.
Tensor activation_loss(const Tensor& feature);

/// Negative entropy of the renormalized per-label batch mean; minimal
/// (-ln C) when the mean prediction is uniform.
Tensor info_entropy_loss(const Tensor& y);

/// L_oh + alpha*L_a + beta*L_ie + gamma*L_dis on the concatenated
/// per-teacher predictions; L_a averages over the given feature maps.
Tensor gan_loss(const Tensor& predictions, const std::vector<Tensor>& features, const LossConfig& cfg);

/// Image-level gan loss plus the mean consistency BCE tying each
/// intermediate group's predictions to the image predictions (treated as
/// constant soft targets). group_predictions[j-1] belongs to group j;
/// the last entry is the image level.
Tensor joint_generator_loss(const std::vector<Tensor>& group_predictions,
                            const std::vector<Tensor>& image_features, const LossConfig& cfg);

/// BCE of task-filtered student-branch predictions against task-filtered
/// teacher predictions on the synthesized image (constant soft targets).
Tensor dual_branch_loss(const Tensor& student_predictions, const Tensor& teacher_predictions,
                        const TaskFilter& task_filter);

/// lambda_in1 * sum_m lambda_m * L^{b,m}(stream1) +
/// lambda_in2 * sum_m lambda_m * L^{b,m}(stream2).
Tensor dual_block_loss(const std::vector<Tensor>& stream1_losses,
                       const std::vector<Tensor>& stream2_losses, const LossConfig& cfg);

}  // namespace dfka
