#pragma once

#include <vector>

#include "dfka/tensor.hpp"

namespace dfka {

enum class Act { Relu, Sigmoid, LeakyRelu, Tanh };
enum class PoolKind { Max, Avg, GlobalAvg };

/// Cross-correlation of x[N,C,H,W] with kernel[K,C,kh,kw].
Tensor conv2d(const Tensor& x, const Tensor& kernel, int stride = 1, int padding = 0);

Tensor elementwise(Act kind, const Tensor& x);

/// Non-overlapping pooling; window must divide H and W for max/avg.
/// GlobalAvg ignores the window and returns [N,C,1,1].
Tensor pool(PoolKind kind, const Tensor& x, int window = 1);

/// x[N,D] * w[D,E] + b[E].
Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b);

Tensor upsample_nearest(const Tensor& x, int factor);

/// Nearest-neighbor upsample by `factor`, then a spatial-size-preserving
/// conv (stride 1, pad = kh/2).
Tensor upsample_conv(const Tensor& x, const Tensor& kernel, int factor);

Tensor reshape(const Tensor& x, Shape new_shape);

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
/// a*x + b with scalar coefficients.
Tensor scale_shift(const Tensor& x, float a, float b);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

/// Concatenate [N,C_i] matrices along columns.
Tensor concat_cols(const std::vector<Tensor>& parts);

/// Column subset of x[N,C] at the given (sorted, in-range) indices.
Tensor select_cols(const Tensor& x, const std::vector<int>& indices);

/// x[N,C,H,W] scaled per channel by gate[N,C].
Tensor channel_scale(const Tensor& x, const Tensor& gate);

/// Mean binary cross-entropy of predictions in (0,1) against constant
/// targets. No gradient flows to the target side.
Tensor bce_with_const_target(const Tensor& pred, const std::vector<float>& target);

/// -mean(|x|).
Tensor neg_mean_abs(const Tensor& x);

/// Central-difference gradient verification. Runs f at x with recording
/// to get the analytic gradient, then perturbs every coordinate.
/// Returns max_i |analytic_i - central_i| / max(|analytic_i|, |central_i|, 1),
/// i.e. relative error floored at unit scale so float32 evaluation noise on
/// near-zero gradients does not dominate.
double finite_difference_check(const std::function<Tensor(const Tensor&)>& f, Tensor& x,
                               double step = 1e-2);

}  // namespace dfka
