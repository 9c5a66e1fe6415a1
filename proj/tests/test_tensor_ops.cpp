#include <doctest.h>

#include <cmath>

#include "dfka/ops.hpp"
#include "dfka/rng.hpp"
#include "dfka/tensor.hpp"

using namespace dfka;

namespace {

constexpr double kGradTol = 2e-3;

Tensor random_tensor(Shape shape, Rng& rng, bool requires_grad = true, double scale = 1.0) {
    Tensor t(std::move(shape), requires_grad);
    for (auto& v : t.data()) v = static_cast<float>(rng.uniform(-scale, scale));
    return t;
}

/// Keep values away from activation kinks so central differences stay
/// well-behaved.
void push_from_kink(Tensor& t, float kink, float margin = 0.05f) {
    for (auto& v : t.data()) {
        if (std::fabs(v - kink) < margin) v = v < kink ? kink - margin : kink + margin;
    }
}

}  // namespace

TEST_CASE("tensor basics") {
    Tensor t = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(t.numel() == 6);
    CHECK(t.ndim() == 2);
    CHECK(t.dim(1) == 3);
    CHECK(t.all_finite());
    t.data()[0] = std::numeric_limits<float>::quiet_NaN();
    CHECK_FALSE(t.all_finite());

    CHECK(Tensor::scalar(3.5f).value() == doctest::Approx(3.5));
    CHECK_THROWS(Tensor::from({2, 2}, {1.0f}));
}

TEST_CASE("copying a tensor aliases storage, clone does not") {
    Tensor a = Tensor::from({3}, {1, 2, 3});
    Tensor b = a;
    b.data()[0] = 9;
    CHECK(a.data()[0] == 9);
    Tensor c = a.clone();
    c.data()[1] = 7;
    CHECK(a.data()[1] == 2);
}

TEST_CASE("backward accumulates into leaves and resets intermediates") {
    Tensor x = Tensor::from({2}, {1, 2}, true);
    Tensor loss = sum(mul(x, x));
    backward(loss);
    CHECK(x.grad()[0] == doctest::Approx(2));
    CHECK(x.grad()[1] == doctest::Approx(4));
    // Leaves accumulate: a second pass doubles the gradient.
    Tensor loss2 = sum(mul(x, x));
    backward(loss2);
    CHECK(x.grad()[0] == doctest::Approx(4));
    CHECK(x.grad()[1] == doctest::Approx(8));
}

TEST_CASE("backward rejects non-scalar and disconnected losses") {
    Tensor x = Tensor::from({2}, {1, 2}, true);
    CHECK_THROWS(backward(mul(x, x)));          // not a scalar
    CHECK_THROWS(backward(Tensor::scalar(1)));  // constant: nothing to differentiate
}

TEST_CASE("detach and NoGradGuard stop gradient flow") {
    Tensor x = Tensor::from({2}, {1, 2}, true);
    Tensor d = x.detach();
    CHECK_FALSE(d.requires_grad());
    {
        NoGradGuard ng;
        Tensor y = mul(x, x);
        CHECK_FALSE(y.requires_grad());
    }
    Tensor y = mul(x, x);
    CHECK(y.requires_grad());
}

TEST_CASE("conv2d matches a hand-computed 1x1 example") {
    // x: one 2x2 plane; kernel 1x1 with weight 2 -> output doubles.
    Tensor x = Tensor::from({1, 1, 2, 2}, {1, 2, 3, 4});
    Tensor k = Tensor::from({1, 1, 1, 1}, {2});
    Tensor y = conv2d(x, k);
    CHECK(y.data()[3] == doctest::Approx(8));
}

TEST_CASE("gradient oracle: conv2d") {
    Rng rng(42, "gc-conv");
    for (int trial = 0; trial < 10; ++trial) {
        Tensor x = random_tensor({2, 3, 6, 6}, rng);
        Tensor k = random_tensor({4, 3, 3, 3}, rng, true, 0.5);
        const int stride = 1 + trial % 2;
        CHECK(finite_difference_check([&](const Tensor& t) { return sum(conv2d(t, k, stride, 1)); },
                                      x) < kGradTol);
        CHECK(finite_difference_check([&](const Tensor& t) { return sum(conv2d(x, t, stride, 1)); },
                                      k) < kGradTol);
    }
}

TEST_CASE("gradient oracle: activations") {
    Rng rng(42, "gc-act");
    for (int trial = 0; trial < 10; ++trial) {
        for (Act a : {Act::Relu, Act::Sigmoid, Act::LeakyRelu, Act::Tanh}) {
            Tensor x = random_tensor({3, 7}, rng);
            if (a == Act::Relu || a == Act::LeakyRelu) push_from_kink(x, 0.0f);
            CHECK(finite_difference_check(
                      [&](const Tensor& t) { return sum(mul(elementwise(a, t), t)); }, x) < kGradTol);
        }
    }
}

TEST_CASE("gradient oracle: pooling") {
    Rng rng(42, "gc-pool");
    for (int trial = 0; trial < 10; ++trial) {
        Tensor x = random_tensor({2, 3, 4, 4}, rng);
        CHECK(finite_difference_check([&](const Tensor& t) { return sum(pool(PoolKind::Avg, t, 2)); },
                                      x) < kGradTol);
        CHECK(finite_difference_check(
                  [&](const Tensor& t) { return sum(pool(PoolKind::GlobalAvg, t)); }, x) < kGradTol);
        // Max pool: separate the elements so the argmax is stable under
        // the probe step.
        Tensor m = random_tensor({1, 2, 4, 4}, rng, true, 8.0);
        CHECK(finite_difference_check([&](const Tensor& t) { return sum(pool(PoolKind::Max, t, 2)); },
                                      m) < kGradTol);
    }
}

TEST_CASE("pooling rejects non-dividing windows") {
    Tensor x = Tensor::zeros({1, 1, 5, 5});
    CHECK_THROWS(pool(PoolKind::Avg, x, 2));
}

TEST_CASE("gradient oracle: dense, upsample_conv, reshape") {
    Rng rng(42, "gc-dense");
    for (int trial = 0; trial < 10; ++trial) {
        Tensor x = random_tensor({3, 5}, rng);
        Tensor w = random_tensor({5, 4}, rng);
        Tensor b = random_tensor({4}, rng);
        CHECK(finite_difference_check([&](const Tensor& t) { return sum(mul(dense(t, w, b), dense(t, w, b))); },
                                      x) < kGradTol);
        CHECK(finite_difference_check([&](const Tensor& t) { return sum(mul(dense(x, t, b), dense(x, t, b))); },
                                      w) < kGradTol);
        CHECK(finite_difference_check([&](const Tensor& t) { return sum(dense(x, w, t)); }, b) <
              kGradTol);

        Tensor u = random_tensor({1, 2, 3, 3}, rng);
        Tensor k = random_tensor({2, 2, 3, 3}, rng, true, 0.5);
        CHECK(finite_difference_check(
                  [&](const Tensor& t) { return sum(mul(upsample_conv(t, k, 2), upsample_conv(t, k, 2))); },
                  u) < kGradTol);

        Tensor r = random_tensor({2, 6}, rng);
        CHECK(finite_difference_check(
                  [&](const Tensor& t) { return sum(mul(reshape(t, {2, 3, 1, 2}), reshape(t, {2, 3, 1, 2}))); },
                  r) < kGradTol);
    }
}

TEST_CASE("gradient oracle: elementwise combinators and reductions") {
    Rng rng(42, "gc-comb");
    for (int trial = 0; trial < 10; ++trial) {
        Tensor a = random_tensor({4, 3}, rng);
        Tensor b = random_tensor({4, 3}, rng);
        CHECK(finite_difference_check([&](const Tensor& t) { return sum(mul(add(t, b), t)); }, a) <
              kGradTol);
        CHECK(finite_difference_check([&](const Tensor& t) { return mean(mul(t, t)); }, a) < kGradTol);
        CHECK(finite_difference_check(
                  [&](const Tensor& t) { return sum(mul(scale_shift(t, 1.7f, -0.3f), t)); }, a) <
              kGradTol);
    }
}

TEST_CASE("gradient oracle: column ops and channel_scale") {
    Rng rng(42, "gc-col");
    for (int trial = 0; trial < 10; ++trial) {
        Tensor a = random_tensor({3, 4}, rng);
        Tensor b = random_tensor({3, 2}, rng);
        CHECK(finite_difference_check(
                  [&](const Tensor& t) {
                      Tensor c = concat_cols({t, b});
                      return sum(mul(c, c));
                  },
                  a) < kGradTol);
        CHECK(finite_difference_check(
                  [&](const Tensor& t) {
                      Tensor s = select_cols(t, {0, 2});
                      return sum(mul(s, s));
                  },
                  a) < kGradTol);

        Tensor x = random_tensor({2, 3, 2, 2}, rng);
        Tensor gate = random_tensor({2, 3}, rng);
        CHECK(finite_difference_check(
                  [&](const Tensor& t) { return sum(mul(channel_scale(t, gate), channel_scale(t, gate))); },
                  x) < kGradTol);
        CHECK(finite_difference_check(
                  [&](const Tensor& t) { return sum(mul(channel_scale(x, t), channel_scale(x, t))); },
                  gate) < kGradTol);
    }
}

TEST_CASE("gradient oracle: bce and neg_mean_abs") {
    Rng rng(42, "gc-bce");
    for (int trial = 0; trial < 10; ++trial) {
        Tensor p(Shape{3, 4}, true);
        std::vector<float> target(12);
        for (auto& v : p.data()) v = static_cast<float>(rng.uniform(0.05, 0.95));
        for (auto& v : target) v = rng.uniform() < 0.5 ? 0.0f : 1.0f;
        CHECK(finite_difference_check(
                  [&](const Tensor& t) { return bce_with_const_target(t, target); }, p, 1e-3) <
              kGradTol);

        Tensor x = random_tensor({4, 4}, rng);
        push_from_kink(x, 0.0f);
        CHECK(finite_difference_check([&](const Tensor& t) { return neg_mean_abs(t); }, x) < kGradTol);
    }
}

TEST_CASE("bce matches the analytic value") {
    // BCE(0.5, anything) = ln 2.
    Tensor p = Tensor::from({1, 2}, {0.5f, 0.5f});
    CHECK(bce_with_const_target(p, {0.0f, 1.0f}).value() ==
          doctest::Approx(std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("upsample_nearest repeats pixels") {
    Tensor x = Tensor::from({1, 1, 1, 2}, {1, 2});
    Tensor y = upsample_nearest(x, 2);
    CHECK(y.shape() == Shape{1, 1, 2, 4});
    CHECK(y.data()[0] == 1);
    CHECK(y.data()[1] == 1);
    CHECK(y.data()[2] == 2);
    CHECK(y.data()[7] == 2);
}

TEST_CASE("conv2d rejects mismatched channel counts with a diagnostic") {
    Tensor x = Tensor::zeros({1, 3, 4, 4});
    Tensor k = Tensor::zeros({2, 4, 3, 3});
    CHECK_THROWS(conv2d(x, k));
}
