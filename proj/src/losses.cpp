#include "dfka/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace dfka {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void require_unit_interval(const Tensor& y, const char* who) {
    // Saturated sigmoids reach the endpoints in float, so the closed
    // interval is the right domain; the BCE terms clamp internally.
    for (float v : y.data()) {
        if (!(v >= 0.0f && v <= 1.0f)) {
            throw std::invalid_argument(std::string(who) + ": prediction " + std::to_string(v) +
                                        " outside [0,1]");
        }
    }
}

}  // namespace

void LossConfig::validate() const {
    require(epsilon > 0.0f && epsilon < 1.0f, "LossConfig: epsilon must lie in (0,1)");
    require(alpha >= 0.0f && beta >= 0.0f, "LossConfig: alpha/beta must be nonnegative");
    for (float l : lambda_m) require(l >= 0.0f, "LossConfig: lambda_m must be nonnegative");
    require(lambda_in1 >= 0.0f && lambda_in2 >= 0.0f, "LossConfig: lambda_in must be nonnegative");
}

Tensor threshold_labels(const Tensor& y, float epsilon) {
    std::vector<float> t(static_cast<size_t>(y.numel()));
    for (size_t i = 0; i < t.size(); ++i) t[i] = y.data()[i] >= epsilon ? 1.0f : 0.0f;
    return Tensor::from(y.shape(), std::move(t));
}

Tensor one_hot_loss(const Tensor& y, float epsilon) {
    require_unit_interval(y, "one_hot_loss");
    Tensor t = threshold_labels(y, epsilon);
    return bce_with_const_target(y, {t.data().begin(), t.data().end()});
}

Tensor discrete_loss(const Tensor& y) { return neg_mean_abs(y); }

Tensor activation_loss(const Tensor& feature) { return neg_mean_abs(feature); }

Tensor info_entropy_loss(const Tensor& y) {
    require(y.ndim() == 2, "info_entropy_loss: expected [N,C], got " + shape_str(y.shape()));
    require_unit_interval(y, "info_entropy_loss");
    const int n = y.dim(0), c = y.dim(1);
    std::vector<double> s(static_cast<size_t>(c), 0.0);
    for (int r = 0; r < n; ++r)
        for (int j = 0; j < c; ++j) s[static_cast<size_t>(j)] += y.data()[static_cast<size_t>(r) * c + j];
    double total = 0.0;
    for (auto& v : s) {
        v /= n;
        total += v;
    }
    require(total > 0.0, "info_entropy_loss: degenerate all-zero batch");
    double loss = 0.0;
    std::vector<float> logp(static_cast<size_t>(c));
    for (int j = 0; j < c; ++j) {
        // Clamp away from zero: a fully suppressed label would otherwise
        // produce log(0) here.
        const double p = std::max(s[static_cast<size_t>(j)] / total, 1e-12);
        loss += p * std::log(p);
        logp[static_cast<size_t>(j)] = static_cast<float>(std::log(p));
    }
    auto ys = y.node();
    const float inv_ns = static_cast<float>(1.0 / (n * total));
    const float lval = static_cast<float>(loss);
    return record_op({1}, {lval}, {ys}, [ys, logp, n, c, inv_ns, lval](Node& self) {
        if (!ys->requires_grad) return;
        ys->ensure_grad();
        const float g = self.grad[0];
        // dL/dy[r,j] = (log p_j - L) / (N * S)
        for (int r = 0; r < n; ++r)
            for (int j = 0; j < c; ++j)
                ys->grad[static_cast<size_t>(r) * c + j] +=
                    g * (logp[static_cast<size_t>(j)] - lval) * inv_ns;
    });
}

Tensor gan_loss(const Tensor& predictions, const std::vector<Tensor>& features, const LossConfig& cfg) {
    cfg.validate();
    Tensor loss = one_hot_loss(predictions, cfg.epsilon);
    if (cfg.alpha != 0.0f) {
        require(!features.empty(), "gan_loss: alpha > 0 requires discriminator features");
        Tensor act = activation_loss(features[0]);
        for (size_t i = 1; i < features.size(); ++i) act = add(act, activation_loss(features[i]));
        loss = add(loss, scale_shift(act, cfg.alpha / static_cast<float>(features.size()), 0.0f));
    }
    if (cfg.beta != 0.0f) loss = add(loss, scale_shift(info_entropy_loss(predictions), cfg.beta, 0.0f));
    if (cfg.gamma != 0.0f) loss = add(loss, scale_shift(discrete_loss(predictions), cfg.gamma, 0.0f));
    return loss;
}

Tensor joint_generator_loss(const std::vector<Tensor>& group_predictions,
                            const std::vector<Tensor>& image_features, const LossConfig& cfg) {
    require(!group_predictions.empty(), "joint_generator_loss: no predictions");
    const size_t b = group_predictions.size();
    const Tensor& image_preds = group_predictions.back();
    Tensor loss = gan_loss(image_preds, image_features, cfg);
    if (b == 1) return loss;  // degenerate stack: no consistency term
    const std::vector<float> target(image_preds.data().begin(), image_preds.data().end());
    Tensor consistency = bce_with_const_target(group_predictions[0], target);
    for (size_t j = 1; j + 1 < b; ++j)
        consistency = add(consistency, bce_with_const_target(group_predictions[j], target));
    return add(loss, scale_shift(consistency, 1.0f / static_cast<float>(b - 1), 0.0f));
}

Tensor dual_branch_loss(const Tensor& student_predictions, const Tensor& teacher_predictions,
                        const TaskFilter& task_filter) {
    require(student_predictions.shape() == teacher_predictions.shape(),
            "dual_branch_loss: prediction widths differ, " + shape_str(student_predictions.shape()) +
                " vs " + shape_str(teacher_predictions.shape()));
    Tensor filtered = task_filter.apply(student_predictions);
    std::vector<float> tv;
    {
        NoGradGuard ng;
        Tensor target = task_filter.apply(teacher_predictions.detach());
        tv.assign(target.data().begin(), target.data().end());
    }
    return bce_with_const_target(filtered, tv);
}

Tensor dual_block_loss(const std::vector<Tensor>& stream1_losses,
                       const std::vector<Tensor>& stream2_losses, const LossConfig& cfg) {
    cfg.validate();
    require(cfg.lambda_in1 != 0.0f || cfg.lambda_in2 != 0.0f,
            "dual_block_loss: both lambda_in weights are zero, no training signal");
    Tensor loss = Tensor::scalar(0.0f);
    auto accumulate = [&](const std::vector<Tensor>& losses, float lambda_in) {
        if (lambda_in == 0.0f) return;
        require(!losses.empty(), "dual_block_loss: missing stream losses for nonzero lambda_in");
        for (size_t m = 0; m < losses.size(); ++m)
            loss = add(loss, scale_shift(losses[m], lambda_in * cfg.teacher_weight(m), 0.0f));
    };
    accumulate(stream1_losses, cfg.lambda_in1);
    accumulate(stream2_losses, cfg.lambda_in2);
    return loss;
}

}  // namespace dfka
