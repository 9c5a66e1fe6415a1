#include "dfka/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dfka {

namespace {

using MatRM = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatRM>;
using CMapRM = Eigen::Map<const MatRM>;

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

struct ConvDims {
    int n, c, h, w, k, kh, kw, stride, pad, ho, wo;
};

ConvDims conv_dims(const Tensor& x, const Tensor& kernel, int stride, int padding) {
    require(x.ndim() == 4, "conv2d: input must be 4-d, got " + shape_str(x.shape()));
    require(kernel.ndim() == 4, "conv2d: kernel must be 4-d, got " + shape_str(kernel.shape()));
    require(stride >= 1, "conv2d: stride must be >= 1");
    require(padding >= 0, "conv2d: padding must be >= 0");
    ConvDims d{x.dim(0), x.dim(1), x.dim(2), x.dim(3),
               kernel.dim(0), kernel.dim(2), kernel.dim(3), stride, padding, 0, 0};
    require(kernel.dim(1) == d.c, "conv2d: channel mismatch between input " + shape_str(x.shape()) +
                                      " and kernel " + shape_str(kernel.shape()));
    require(d.kh <= d.h + 2 * padding && d.kw <= d.w + 2 * padding,
            "conv2d: kernel " + shape_str(kernel.shape()) + " larger than padded input " +
                shape_str(x.shape()));
    d.ho = (d.h + 2 * padding - d.kh) / stride + 1;
    d.wo = (d.w + 2 * padding - d.kw) / stride + 1;
    return d;
}

// Column matrix of one sample: (C*kh*kw) x (ho*wo), row-major.
void im2col(const float* x, const ConvDims& d, float* cols) {
    const int l = d.ho * d.wo;
    int r = 0;
    for (int c = 0; c < d.c; ++c) {
        const float* xc = x + static_cast<std::int64_t>(c) * d.h * d.w;
        for (int ki = 0; ki < d.kh; ++ki) {
            for (int kj = 0; kj < d.kw; ++kj, ++r) {
                float* row = cols + static_cast<std::int64_t>(r) * l;
                for (int oh = 0; oh < d.ho; ++oh) {
                    const int ih = oh * d.stride - d.pad + ki;
                    for (int ow = 0; ow < d.wo; ++ow) {
                        const int iw = ow * d.stride - d.pad + kj;
                        row[oh * d.wo + ow] =
                            (ih >= 0 && ih < d.h && iw >= 0 && iw < d.w) ? xc[ih * d.w + iw] : 0.0f;
                    }
                }
            }
        }
    }
}

void col2im_add(const float* cols, const ConvDims& d, float* dx) {
    const int l = d.ho * d.wo;
    int r = 0;
    for (int c = 0; c < d.c; ++c) {
        float* xc = dx + static_cast<std::int64_t>(c) * d.h * d.w;
        for (int ki = 0; ki < d.kh; ++ki) {
            for (int kj = 0; kj < d.kw; ++kj, ++r) {
                const float* row = cols + static_cast<std::int64_t>(r) * l;
                for (int oh = 0; oh < d.ho; ++oh) {
                    const int ih = oh * d.stride - d.pad + ki;
                    if (ih < 0 || ih >= d.h) continue;
                    for (int ow = 0; ow < d.wo; ++ow) {
                        const int iw = ow * d.stride - d.pad + kj;
                        if (iw >= 0 && iw < d.w) xc[ih * d.w + iw] += row[oh * d.wo + ow];
                    }
                }
            }
        }
    }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& kernel, int stride, int padding) {
    const ConvDims d = conv_dims(x, kernel, stride, padding);
    const int rows = d.c * d.kh * d.kw;
    const int l = d.ho * d.wo;

    FloatBuf out(static_cast<size_t>(d.n) * d.k * l);
    FloatBuf cols(static_cast<size_t>(rows) * l);
    CMapRM wmat(kernel.data().data(), d.k, rows);
    for (int n = 0; n < d.n; ++n) {
        im2col(x.data().data() + static_cast<std::int64_t>(n) * d.c * d.h * d.w, d, cols.data());
        CMapRM m(cols.data(), rows, l);
        MapRM y(out.data() + static_cast<std::int64_t>(n) * d.k * l, d.k, l);
        y.noalias() = wmat * m;
    }

    auto xs = x.node();
    auto ks = kernel.node();
    return record_op({d.n, d.k, d.ho, d.wo}, std::move(out), {xs, ks}, [xs, ks, d](Node& self) {
        const int rows = d.c * d.kh * d.kw;
        const int l = d.ho * d.wo;
        FloatBuf cols(static_cast<size_t>(rows) * l);
        FloatBuf dcols(static_cast<size_t>(rows) * l);
        const bool need_dk = ks->requires_grad;
        const bool need_dx = xs->requires_grad;
        if (need_dk) ks->ensure_grad();
        if (need_dx) xs->ensure_grad();
        CMapRM wmat(ks->data.data(), d.k, rows);
        for (int n = 0; n < d.n; ++n) {
            CMapRM dy(self.grad.data() + static_cast<std::int64_t>(n) * d.k * l, d.k, l);
            if (need_dk) {
                im2col(xs->data.data() + static_cast<std::int64_t>(n) * d.c * d.h * d.w, d, cols.data());
                CMapRM m(cols.data(), rows, l);
                MapRM dw(ks->grad.data(), d.k, rows);
                dw.noalias() += dy * m.transpose();
            }
            if (need_dx) {
                MapRM dm(dcols.data(), rows, l);
                dm.noalias() = wmat.transpose() * dy;
                col2im_add(dcols.data(), d,
                           xs->grad.data() + static_cast<std::int64_t>(n) * d.c * d.h * d.w);
            }
        }
    });
}

Tensor elementwise(Act kind, const Tensor& x) {
    const size_t n = static_cast<size_t>(x.numel());
    FloatBuf out(n);
    const auto in = x.data();
    constexpr float kLeakySlope = 0.2f;
    switch (kind) {
        case Act::Relu:
            for (size_t i = 0; i < n; ++i) out[i] = in[i] > 0.0f ? in[i] : 0.0f;
            break;
        case Act::Sigmoid:
            for (size_t i = 0; i < n; ++i) out[i] = 1.0f / (1.0f + std::exp(-in[i]));
            break;
        case Act::LeakyRelu:
            for (size_t i = 0; i < n; ++i) out[i] = in[i] > 0.0f ? in[i] : kLeakySlope * in[i];
            break;
        case Act::Tanh:
            for (size_t i = 0; i < n; ++i) out[i] = std::tanh(in[i]);
            break;
    }

    auto xs = x.node();
    return record_op(x.shape(), std::move(out), {xs}, [xs, kind](Node& self) {
        if (!xs->requires_grad) return;
        xs->ensure_grad();
        const size_t n = self.data.size();
        constexpr float kLeakySlope = 0.2f;
        for (size_t i = 0; i < n; ++i) {
            float d = 0.0f;
            switch (kind) {
                case Act::Relu: d = xs->data[i] > 0.0f ? 1.0f : 0.0f; break;
                case Act::Sigmoid: d = self.data[i] * (1.0f - self.data[i]); break;
                case Act::LeakyRelu: d = xs->data[i] > 0.0f ? 1.0f : kLeakySlope; break;
                case Act::Tanh: d = 1.0f - self.data[i] * self.data[i]; break;
            }
            xs->grad[i] += d * self.grad[i];
        }
    });
}

Tensor pool(PoolKind kind, const Tensor& x, int window) {
    require(x.ndim() == 4, "pool: input must be 4-d, got " + shape_str(x.shape()));
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    auto xs = x.node();

    if (kind == PoolKind::GlobalAvg) {
        FloatBuf out(static_cast<size_t>(n) * c);
        const float inv = 1.0f / static_cast<float>(h * w);
        for (int i = 0; i < n * c; ++i) {
            double acc = 0.0;
            const float* p = x.data().data() + static_cast<std::int64_t>(i) * h * w;
            for (int j = 0; j < h * w; ++j) acc += p[j];
            out[static_cast<size_t>(i)] = static_cast<float>(acc) * inv;
        }
        return record_op({n, c, 1, 1}, std::move(out), {xs}, [xs, h, w](Node& self) {
            if (!xs->requires_grad) return;
            xs->ensure_grad();
            const float inv = 1.0f / static_cast<float>(h * w);
            for (size_t i = 0; i < self.data.size(); ++i) {
                float g = self.grad[i] * inv;
                float* p = xs->grad.data() + static_cast<std::int64_t>(i) * h * w;
                for (int j = 0; j < h * w; ++j) p[j] += g;
            }
        });
    }

    require(window >= 1, "pool: window must be positive");
    require(h % window == 0 && w % window == 0,
            "pool: window " + std::to_string(window) + " does not divide input " + shape_str(x.shape()));
    const int ho = h / window, wo = w / window;
    FloatBuf out(static_cast<size_t>(n) * c * ho * wo);
    std::vector<int> argmax;
    if (kind == PoolKind::Max) argmax.resize(out.size());
    const float inv = 1.0f / static_cast<float>(window * window);
    for (int i = 0; i < n * c; ++i) {
        const float* p = x.data().data() + static_cast<std::int64_t>(i) * h * w;
        float* q = out.data() + static_cast<std::int64_t>(i) * ho * wo;
        for (int oh = 0; oh < ho; ++oh) {
            for (int ow = 0; ow < wo; ++ow) {
                if (kind == PoolKind::Max) {
                    float best = -std::numeric_limits<float>::infinity();
                    int best_idx = 0;
                    for (int a = 0; a < window; ++a) {
                        for (int b = 0; b < window; ++b) {
                            int idx = (oh * window + a) * w + ow * window + b;
                            if (p[idx] > best) {
                                best = p[idx];
                                best_idx = idx;
                            }
                        }
                    }
                    q[oh * wo + ow] = best;
                    argmax[static_cast<size_t>(i) * ho * wo + oh * wo + ow] = best_idx;
                } else {
                    double acc = 0.0;
                    for (int a = 0; a < window; ++a)
                        for (int b = 0; b < window; ++b)
                            acc += p[(oh * window + a) * w + ow * window + b];
                    q[oh * wo + ow] = static_cast<float>(acc) * inv;
                }
            }
        }
    }
    return record_op({n, c, ho, wo}, std::move(out), {xs},
                     [xs, kind, window, h, w, ho, wo, inv, argmax = std::move(argmax)](Node& self) {
                         if (!xs->requires_grad) return;
                         xs->ensure_grad();
                         const std::int64_t planes = static_cast<std::int64_t>(self.data.size()) / (ho * wo);
                         for (std::int64_t i = 0; i < planes; ++i) {
                             float* dx = xs->grad.data() + i * h * w;
                             const float* dq = self.grad.data() + i * ho * wo;
                             for (int oh = 0; oh < ho; ++oh) {
                                 for (int ow = 0; ow < wo; ++ow) {
                                     float g = dq[oh * wo + ow];
                                     if (kind == PoolKind::Max) {
                                         dx[argmax[static_cast<size_t>(i) * ho * wo + oh * wo + ow]] += g;
                                     } else {
                                         for (int a = 0; a < window; ++a)
                                             for (int b = 0; b < window; ++b)
                                                 dx[(oh * window + a) * w + ow * window + b] += g * inv;
                                     }
                                 }
                             }
                         }
                     });
}

Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b) {
    require(x.ndim() == 2, "dense: input must be 2-d, got " + shape_str(x.shape()));
    require(w.ndim() == 2, "dense: weight must be 2-d, got " + shape_str(w.shape()));
    require(b.ndim() == 1, "dense: bias must be 1-d, got " + shape_str(b.shape()));
    const int n = x.dim(0), d = x.dim(1), e = w.dim(1);
    require(w.dim(0) == d, "dense: inner dims disagree, input " + shape_str(x.shape()) + " vs weight " +
                               shape_str(w.shape()));
    require(b.dim(0) == e, "dense: bias " + shape_str(b.shape()) + " vs weight " + shape_str(w.shape()));

    FloatBuf out(static_cast<size_t>(n) * e);
    {
        CMapRM xm(x.data().data(), n, d);
        CMapRM wm(w.data().data(), d, e);
        MapRM ym(out.data(), n, e);
        ym.noalias() = xm * wm;
        ym.rowwise() += Eigen::Map<const Eigen::RowVectorXf>(b.data().data(), e);
    }
    auto xs = x.node();
    auto ws = w.node();
    auto bs = b.node();
    return record_op({n, e}, std::move(out), {xs, ws, bs}, [xs, ws, bs, n, d, e](Node& self) {
        CMapRM dy(self.grad.data(), n, e);
        if (xs->requires_grad) {
            xs->ensure_grad();
            MapRM dx(xs->grad.data(), n, d);
            CMapRM wm(ws->data.data(), d, e);
            dx.noalias() += dy * wm.transpose();
        }
        if (ws->requires_grad) {
            ws->ensure_grad();
            MapRM dw(ws->grad.data(), d, e);
            CMapRM xm(xs->data.data(), n, d);
            dw.noalias() += xm.transpose() * dy;
        }
        if (bs->requires_grad) {
            bs->ensure_grad();
            Eigen::Map<Eigen::RowVectorXf> db(bs->grad.data(), e);
            db += dy.colwise().sum();
        }
    });
}

Tensor upsample_nearest(const Tensor& x, int factor) {
    require(x.ndim() == 4, "upsample_nearest: input must be 4-d, got " + shape_str(x.shape()));
    require(factor >= 1, "upsample_nearest: factor must be >= 1");
    if (factor == 1) return scale_shift(x, 1.0f, 0.0f);
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const int ho = h * factor, wo = w * factor;
    FloatBuf out(static_cast<size_t>(n) * c * ho * wo);
    for (int i = 0; i < n * c; ++i) {
        const float* p = x.data().data() + static_cast<std::int64_t>(i) * h * w;
        float* q = out.data() + static_cast<std::int64_t>(i) * ho * wo;
        for (int oh = 0; oh < ho; ++oh)
            for (int ow = 0; ow < wo; ++ow) q[oh * wo + ow] = p[(oh / factor) * w + ow / factor];
    }
    auto xs = x.node();
    return record_op({n, c, ho, wo}, std::move(out), {xs}, [xs, factor, h, w, ho, wo](Node& self) {
        if (!xs->requires_grad) return;
        xs->ensure_grad();
        const std::int64_t planes = static_cast<std::int64_t>(self.data.size()) / (ho * wo);
        for (std::int64_t i = 0; i < planes; ++i) {
            float* dx = xs->grad.data() + i * h * w;
            const float* dq = self.grad.data() + i * ho * wo;
            for (int oh = 0; oh < ho; ++oh)
                for (int ow = 0; ow < wo; ++ow) dx[(oh / factor) * w + ow / factor] += dq[oh * wo + ow];
        }
    });
}

Tensor upsample_conv(const Tensor& x, const Tensor& kernel, int factor) {
    Tensor up = upsample_nearest(x, factor);
    return conv2d(up, kernel, 1, kernel.dim(2) / 2);
}

Tensor reshape(const Tensor& x, Shape new_shape) {
    require(shape_numel(new_shape) == x.numel(), "reshape: " + shape_str(x.shape()) + " to " +
                                                     shape_str(new_shape) + " changes element count");
    FloatBuf out(x.data().begin(), x.data().end());
    auto xs = x.node();
    return record_op(std::move(new_shape), std::move(out), {xs}, [xs](Node& self) {
        if (!xs->requires_grad) return;
        xs->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) xs->grad[i] += self.grad[i];
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    require(a.shape() == b.shape(),
            "add: shapes " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    FloatBuf out(static_cast<size_t>(a.numel()));
    for (size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
    auto as = a.node();
    auto bs = b.node();
    return record_op(a.shape(), std::move(out), {as, bs}, [as, bs](Node& self) {
        for (auto& p : {as, bs}) {
            if (!p->requires_grad) continue;
            p->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require(a.shape() == b.shape(),
            "mul: shapes " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    FloatBuf out(static_cast<size_t>(a.numel()));
    for (size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
    auto as = a.node();
    auto bs = b.node();
    return record_op(a.shape(), std::move(out), {as, bs}, [as, bs](Node& self) {
        if (as->requires_grad) {
            as->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) as->grad[i] += bs->data[i] * self.grad[i];
        }
        if (bs->requires_grad) {
            bs->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) bs->grad[i] += as->data[i] * self.grad[i];
        }
    });
}

Tensor scale_shift(const Tensor& x, float a, float b) {
    FloatBuf out(static_cast<size_t>(x.numel()));
    for (size_t i = 0; i < out.size(); ++i) out[i] = a * x.data()[i] + b;
    auto xs = x.node();
    return record_op(x.shape(), std::move(out), {xs}, [xs, a](Node& self) {
        if (!xs->requires_grad) return;
        xs->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) xs->grad[i] += a * self.grad[i];
    });
}

Tensor sum(const Tensor& x) {
    double acc = 0.0;
    for (float v : x.data()) acc += v;
    auto xs = x.node();
    return record_op({1}, {static_cast<float>(acc)}, {xs}, [xs](Node& self) {
        if (!xs->requires_grad) return;
        xs->ensure_grad();
        const float g = self.grad[0];
        for (auto& v : xs->grad) v += g;
    });
}

Tensor mean(const Tensor& x) { return scale_shift(sum(x), 1.0f / static_cast<float>(x.numel()), 0.0f); }

Tensor concat_cols(const std::vector<Tensor>& parts) {
    require(!parts.empty(), "concat_cols: empty input list");
    const int n = parts[0].dim(0);
    int total = 0;
    for (const auto& p : parts) {
        require(p.ndim() == 2 && p.dim(0) == n,
                "concat_cols: all parts must be [N,C] with matching N, got " + shape_str(p.shape()));
        total += p.dim(1);
    }
    FloatBuf out(static_cast<size_t>(n) * total);
    int off = 0;
    std::vector<std::shared_ptr<Node>> nodes;
    std::vector<int> widths;
    for (const auto& p : parts) {
        const int c = p.dim(1);
        for (int r = 0; r < n; ++r)
            std::copy_n(p.data().data() + static_cast<std::int64_t>(r) * c, c,
                        out.data() + static_cast<std::int64_t>(r) * total + off);
        off += c;
        nodes.push_back(p.node());
        widths.push_back(c);
    }
    return record_op({n, total}, std::move(out), nodes,
                     [nodes, widths, n, total](Node& self) {
                         int off = 0;
                         for (size_t k = 0; k < nodes.size(); ++k) {
                             const int c = widths[k];
                             if (nodes[k]->requires_grad) {
                                 nodes[k]->ensure_grad();
                                 for (int r = 0; r < n; ++r)
                                     for (int j = 0; j < c; ++j)
                                         nodes[k]->grad[static_cast<size_t>(r) * c + j] +=
                                             self.grad[static_cast<size_t>(r) * total + off + j];
                             }
                             off += c;
                         }
                     });
}

Tensor select_cols(const Tensor& x, const std::vector<int>& indices) {
    require(x.ndim() == 2, "select_cols: input must be 2-d, got " + shape_str(x.shape()));
    require(!indices.empty(), "select_cols: empty index set");
    const int n = x.dim(0), c = x.dim(1);
    for (int i : indices)
        require(i >= 0 && i < c, "select_cols: index " + std::to_string(i) + " out of range for width " +
                                     std::to_string(c));
    const int e = static_cast<int>(indices.size());
    FloatBuf out(static_cast<size_t>(n) * e);
    for (int r = 0; r < n; ++r)
        for (int j = 0; j < e; ++j)
            out[static_cast<size_t>(r) * e + j] = x.data()[static_cast<size_t>(r) * c + indices[j]];
    auto xs = x.node();
    return record_op({n, e}, std::move(out), {xs}, [xs, indices, n, c, e](Node& self) {
        if (!xs->requires_grad) return;
        xs->ensure_grad();
        for (int r = 0; r < n; ++r)
            for (int j = 0; j < e; ++j)
                xs->grad[static_cast<size_t>(r) * c + indices[j]] +=
                    self.grad[static_cast<size_t>(r) * e + j];
    });
}

Tensor channel_scale(const Tensor& x, const Tensor& gate) {
    require(x.ndim() == 4, "channel_scale: input must be 4-d, got " + shape_str(x.shape()));
    require(gate.ndim() == 2 && gate.dim(0) == x.dim(0) && gate.dim(1) == x.dim(1),
            "channel_scale: gate " + shape_str(gate.shape()) + " does not match input " +
                shape_str(x.shape()));
    const int n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
    FloatBuf out(static_cast<size_t>(x.numel()));
    for (int i = 0; i < n * c; ++i) {
        const float g = gate.data()[static_cast<size_t>(i)];
        const float* p = x.data().data() + static_cast<std::int64_t>(i) * hw;
        float* q = out.data() + static_cast<std::int64_t>(i) * hw;
        for (int j = 0; j < hw; ++j) q[j] = g * p[j];
    }
    auto xs = x.node();
    auto gs = gate.node();
    return record_op(x.shape(), std::move(out), {xs, gs}, [xs, gs, n, c, hw](Node& self) {
        if (xs->requires_grad) xs->ensure_grad();
        if (gs->requires_grad) gs->ensure_grad();
        for (int i = 0; i < n * c; ++i) {
            const float g = gs->data[static_cast<size_t>(i)];
            const float* dq = self.grad.data() + static_cast<std::int64_t>(i) * hw;
            if (xs->requires_grad) {
                float* dx = xs->grad.data() + static_cast<std::int64_t>(i) * hw;
                for (int j = 0; j < hw; ++j) dx[j] += g * dq[j];
            }
            if (gs->requires_grad) {
                const float* p = xs->data.data() + static_cast<std::int64_t>(i) * hw;
                double acc = 0.0;
                for (int j = 0; j < hw; ++j) acc += static_cast<double>(p[j]) * dq[j];
                gs->grad[static_cast<size_t>(i)] += static_cast<float>(acc);
            }
        }
    });
}

Tensor bce_with_const_target(const Tensor& pred, const std::vector<float>& target) {
    require(static_cast<std::int64_t>(target.size()) == pred.numel(),
            "bce: target length " + std::to_string(target.size()) + " vs predictions " +
                shape_str(pred.shape()));
    constexpr float kClamp = 1e-7f;
    const size_t n = target.size();
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double p = std::clamp(pred.data()[i], kClamp, 1.0f - kClamp);
        const double t = target[i];
        acc -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
    }
    auto ps = pred.node();
    return record_op({1}, {static_cast<float>(acc / static_cast<double>(n))}, {ps},
                     [ps, target](Node& self) {
                         if (!ps->requires_grad) return;
                         ps->ensure_grad();
                         constexpr float kClamp = 1e-7f;
                         const float g = self.grad[0] / static_cast<float>(target.size());
                         for (size_t i = 0; i < target.size(); ++i) {
                             const float raw = ps->data[i];
                             if (raw <= kClamp || raw >= 1.0f - kClamp) continue;  // clamped: flat
                             ps->grad[i] += g * (raw - target[i]) / (raw * (1.0f - raw));
                         }
                     });
}

Tensor neg_mean_abs(const Tensor& x) {
    double acc = 0.0;
    for (float v : x.data()) acc += std::fabs(v);
    auto xs = x.node();
    const float inv = 1.0f / static_cast<float>(x.numel());
    return record_op({1}, {static_cast<float>(-acc) * inv}, {xs}, [xs, inv](Node& self) {
        if (!xs->requires_grad) return;
        xs->ensure_grad();
        const float g = self.grad[0] * inv;
        for (size_t i = 0; i < xs->data.size(); ++i) {
            const float s = xs->data[i] > 0.0f ? 1.0f : (xs->data[i] < 0.0f ? -1.0f : 0.0f);
            xs->grad[i] -= g * s;
        }
    });
}

double finite_difference_check(const std::function<Tensor(const Tensor&)>& f, Tensor& x,
                               double step) {
    x.set_requires_grad(true);
    x.zero_grad();
    Tensor loss = f(x);
    require(loss.numel() == 1, "finite_difference_check: f must return a scalar");
    backward(loss);
    std::vector<float> analytic(x.grad().begin(), x.grad().end());

    double max_rel = 0.0;
    NoGradGuard ng;
    auto vals = x.data();
    for (std::int64_t i = 0; i < x.numel(); ++i) {
        const float orig = vals[i];
        const float hi = static_cast<float>(orig + step);
        const float lo = static_cast<float>(orig - step);
        vals[i] = hi;
        const double fp = f(x).value();
        vals[i] = lo;
        const double fm = f(x).value();
        vals[i] = orig;
        // Divide by the perturbation actually realized in float32, not the
        // requested step, to avoid quantization bias near large values.
        const double central = (fp - fm) / (static_cast<double>(hi) - static_cast<double>(lo));
        const double a = analytic[static_cast<size_t>(i)];
        // Relative error, floored at unit scale: float32 forward noise makes
        // a pure relative criterion meaningless for near-zero gradients.
        const double rel = std::fabs(a - central) / std::max({std::fabs(a), std::fabs(central), 1.0});
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

}  // namespace dfka
