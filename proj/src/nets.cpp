#include "dfka/nets.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace dfka {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

Tensor he_kernel(int out_c, int in_c, int k, Rng& rng) {
    Tensor t({out_c, in_c, k, k}, true);
    const float std = std::sqrt(2.0f / static_cast<float>(in_c * k * k));
    for (auto& v : t.data()) v = rng.normal() * std;
    return t;
}

Tensor xavier_matrix(int in_d, int out_d, Rng& rng) {
    Tensor t({in_d, out_d}, true);
    const float std = std::sqrt(2.0f / static_cast<float>(in_d + out_d));
    for (auto& v : t.data()) v = rng.normal() * std;
    return t;
}

}  // namespace

std::uint64_t param_hash(const NamedParams& params) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& [name, t] : params) {
        h = fnv1a(name, h);
        const auto d = t.data();
        const char* bytes = reinterpret_cast<const char*>(d.data());
        h = fnv1a(std::string_view(bytes, d.size() * sizeof(float)), h);
    }
    return h;
}

int ArchSpec::out_res(int b) const {
    int res = image_size;
    for (int i = 1; i <= b; ++i) res /= strides.at(static_cast<size_t>(i - 1));
    return res;
}

Layer Layer::conv(Tensor kernel, int stride, int padding) {
    Layer l;
    l.kind = LayerKind::Conv;
    l.kernel = std::move(kernel);
    l.stride = stride;
    l.padding = padding;
    return l;
}

Layer Layer::activation(Act a) {
    Layer l;
    l.kind = LayerKind::Activation;
    l.act = a;
    return l;
}

Layer Layer::pooling(PoolKind p, int window) {
    Layer l;
    l.kind = LayerKind::Pool;
    l.pool_kind = p;
    l.window = window;
    return l;
}

Layer Layer::fully_connected(Tensor w, Tensor b) {
    Layer l;
    l.kind = LayerKind::Dense;
    l.weight = std::move(w);
    l.bias = std::move(b);
    return l;
}

Layer Layer::upsample(Tensor kernel, int factor) {
    Layer l;
    l.kind = LayerKind::UpsampleConv;
    l.kernel = std::move(kernel);
    l.factor = factor;
    return l;
}

Tensor Layer::forward(const Tensor& x) const {
    switch (kind) {
        case LayerKind::Conv: return conv2d(x, kernel, stride, padding);
        case LayerKind::Activation: return elementwise(act, x);
        case LayerKind::Pool: return pool(pool_kind, x, window);
        case LayerKind::Dense: return dense(x, weight, bias);
        case LayerKind::UpsampleConv: return upsample_conv(x, kernel, factor);
    }
    throw std::logic_error("Layer::forward: unknown kind");
}

void Layer::collect(const std::string& prefix, NamedParams& out) const {
    switch (kind) {
        case LayerKind::Conv:
        case LayerKind::UpsampleConv:
            out.emplace_back(prefix + ".kernel", kernel);
            break;
        case LayerKind::Dense:
            out.emplace_back(prefix + ".weight", weight);
            out.emplace_back(prefix + ".bias", bias);
            break;
        default:
            break;
    }
}

Layer Layer::deep_copy() const {
    Layer l = *this;
    if (l.kernel.defined()) l.kernel = l.kernel.clone();
    if (l.weight.defined()) l.weight = l.weight.clone();
    if (l.bias.defined()) l.bias = l.bias.clone();
    return l;
}

Tensor Block::forward(Tensor x) const {
    for (const auto& [name, layer] : layers) x = layer.forward(x);
    return x;
}

void Block::collect(const std::string& prefix, NamedParams& out) const {
    for (const auto& [name, layer] : layers) layer.collect(prefix + "." + name, out);
}

Block Block::deep_copy() const {
    Block b = *this;
    for (auto& [name, layer] : b.layers) layer = layer.deep_copy();
    return b;
}

Tensor ClassifierHead::forward(const Tensor& feature) const {
    Tensor pooled = pool(PoolKind::GlobalAvg, feature);
    Tensor flat = reshape(pooled, {feature.dim(0), feature.dim(1)});
    return elementwise(Act::Sigmoid, dense(flat, w, b));
}

void ClassifierHead::collect(const std::string& prefix, NamedParams& out) const {
    out.emplace_back(prefix + ".weight", w);
    out.emplace_back(prefix + ".bias", b);
}

ClassifierHead ClassifierHead::deep_copy() const { return {w.clone(), b.clone()}; }

Tensor TeacherNet::features(const Tensor& image, int upto) const {
    Tensor x = image;
    for (int b = 1; b <= upto; ++b) x = blocks[static_cast<size_t>(b - 1)].forward(x);
    return x;
}

Tensor TeacherNet::forward(const Tensor& image) const {
    return head.forward(features(image, static_cast<int>(blocks.size())));
}

NamedParams TeacherNet::named_params() const {
    NamedParams out;
    for (const auto& b : blocks) b.collect("block" + std::to_string(b.index), out);
    head.collect("head", out);
    return out;
}

TeacherNet make_teacher(const ArchSpec& arch, std::vector<int> label_indices,
                        std::vector<std::string> label_names, Rng& rng) {
    require(!label_indices.empty(), "make_teacher: empty label set");
    TeacherNet t;
    t.arch = arch;
    const int bcount = arch.num_blocks();
    for (int b = 1; b <= bcount; ++b) {
        Block blk;
        blk.index = b;
        blk.direction = Direction::Encoder;
        const int cin = arch.out_channels(b - 1);
        const int cout = arch.out_channels(b);
        blk.layers.emplace_back("conv1", Layer::conv(he_kernel(cout, cin, 3, rng),
                                                     arch.strides[static_cast<size_t>(b - 1)], 1));
        blk.layers.emplace_back("act1", Layer::activation(Act::LeakyRelu));
        blk.layers.emplace_back("conv2", Layer::conv(he_kernel(cout, cout, 3, rng), 1, 1));
        blk.layers.emplace_back("act2", Layer::activation(Act::LeakyRelu));
        t.blocks.push_back(std::move(blk));
    }
    const int feat_c = arch.out_channels(bcount);
    t.head.w = xavier_matrix(feat_c, static_cast<int>(label_indices.size()), rng);
    t.head.b = Tensor::zeros({static_cast<int>(label_indices.size())}, true);
    t.label_indices = std::move(label_indices);
    t.label_names = std::move(label_names);
    return t;
}

std::vector<int> Discriminator::block_indices() const {
    std::vector<int> out;
    const int bcount = static_cast<int>(teacher->blocks.size());
    for (int b = first_block; b <= bcount; ++b) out.push_back(b);
    return out;
}

Discriminator::Out Discriminator::run(const Tensor& f) const {
    Tensor x = f;
    const int bcount = static_cast<int>(teacher->blocks.size());
    for (int b = first_block; b <= bcount; ++b) x = teacher->blocks[static_cast<size_t>(b - 1)].forward(x);
    return {teacher->head.forward(x), x};
}

Discriminator assemble_discriminator(const TeacherNet& teacher, int j) {
    const int bcount = static_cast<int>(teacher.blocks.size());
    require(j >= 1 && j <= bcount,
            "assemble_discriminator: j=" + std::to_string(j) + " outside [1," + std::to_string(bcount) + "]");
    return {&teacher, bcount - j + 1};
}

Discriminator assemble_dual_discriminator(const TeacherNet& teacher, int b) {
    const int bcount = static_cast<int>(teacher.blocks.size());
    require(b >= 1 && b <= bcount,
            "assemble_dual_discriminator: b=" + std::to_string(b) + " outside [1," + std::to_string(bcount) +
                "]");
    return {&teacher, b + 1};
}

Tensor TeacherFilter::apply(const Tensor& f) const {
    require(f.ndim() == 4 && f.dim(1) == channels,
            "TeacherFilter: input " + shape_str(f.shape()) + " does not have the configured " +
                std::to_string(channels) + " channels");
    Tensor pooled = reshape(pool(PoolKind::GlobalAvg, f), {f.dim(0), channels});
    Tensor hidden = elementwise(Act::Relu, dense(pooled, w1, b1));
    Tensor gate = elementwise(Act::Sigmoid, dense(hidden, w2, b2));
    return channel_scale(f, gate);
}

void TeacherFilter::collect(const std::string& prefix, NamedParams& out) const {
    out.emplace_back(prefix + ".fc1.weight", w1);
    out.emplace_back(prefix + ".fc1.bias", b1);
    out.emplace_back(prefix + ".fc2.weight", w2);
    out.emplace_back(prefix + ".fc2.bias", b2);
}

TeacherFilter TeacherFilter::deep_copy() const {
    TeacherFilter f = *this;
    f.w1 = w1.clone();
    f.b1 = b1.clone();
    f.w2 = w2.clone();
    f.b2 = b2.clone();
    return f;
}

TeacherFilter make_teacher_filter(int channels, int reduction, Rng& rng) {
    TeacherFilter f;
    f.channels = channels;
    f.reduction = reduction;
    const int hidden = std::max(1, channels / reduction);
    f.w1 = xavier_matrix(channels, hidden, rng);
    f.b1 = Tensor::zeros({hidden}, true);
    f.w2 = xavier_matrix(hidden, channels, rng);
    f.b2 = Tensor::zeros({channels}, true);
    return f;
}

TaskFilter::TaskFilter(std::vector<int> idx) : indices(std::move(idx)) {
    require(!indices.empty(), "TaskFilter: empty task set");
    require(std::is_sorted(indices.begin(), indices.end()), "TaskFilter: indices must be sorted");
    require(std::adjacent_find(indices.begin(), indices.end()) == indices.end(),
            "TaskFilter: duplicate indices");
    require(indices.front() >= 0, "TaskFilter: negative index");
}

Tensor TaskFilter::apply(const Tensor& predictions) const { return select_cols(predictions, indices); }

std::vector<Tensor> GeneratorStack::forward(const Tensor& z) const {
    require(z.ndim() == 2 && z.dim(1) == noise_dim,
            "GeneratorStack: noise " + shape_str(z.shape()) + " must be [N," + std::to_string(noise_dim) +
                "]");
    Tensor x = dense(z, seed_w, seed_b);
    x = elementwise(Act::LeakyRelu, x);
    x = reshape(x, {z.dim(0), seed_channels, seed_res, seed_res});
    std::vector<Tensor> outs;
    for (size_t g = 0; g < groups.size(); ++g) {
        x = groups[g].forward(x);
        if (g + 1 == groups.size()) x = scale_shift(x, 0.5f, 0.5f);  // tanh -> [0,1]
        outs.push_back(x);
    }
    return outs;
}

NamedParams GeneratorStack::named_params() const {
    NamedParams out;
    out.emplace_back("seed.weight", seed_w);
    out.emplace_back("seed.bias", seed_b);
    for (const auto& g : groups) g.collect("group" + std::to_string(g.index), out);
    return out;
}

GeneratorStack make_generator(const ArchSpec& arch, int noise_dim, Rng& rng) {
    GeneratorStack gen;
    gen.arch = arch;
    gen.noise_dim = noise_dim;
    const int bcount = arch.num_blocks();

    // Group j must emit the input shape of teacher block B-j+1.
    std::vector<int> target_c(static_cast<size_t>(bcount));
    std::vector<int> target_res(static_cast<size_t>(bcount));
    for (int j = 1; j <= bcount; ++j) {
        target_c[static_cast<size_t>(j - 1)] = arch.out_channels(bcount - j);
        target_res[static_cast<size_t>(j - 1)] = arch.out_res(bcount - j);
    }

    gen.seed_channels = arch.out_channels(bcount);
    gen.seed_res = target_res[0] % 2 == 0 ? target_res[0] / 2 : target_res[0];
    gen.seed_w = xavier_matrix(noise_dim, gen.seed_channels * gen.seed_res * gen.seed_res, rng);
    gen.seed_b = Tensor::zeros({gen.seed_channels * gen.seed_res * gen.seed_res}, true);

    int cur_c = gen.seed_channels;
    int cur_res = gen.seed_res;
    for (int j = 1; j <= bcount; ++j) {
        const int tc = target_c[static_cast<size_t>(j - 1)];
        const int tres = target_res[static_cast<size_t>(j - 1)];
        if (tres % cur_res != 0) {
            throw std::invalid_argument("make_generator: shape drift at group " + std::to_string(j) +
                                        ": cannot reach resolution " + std::to_string(tres) + " from " +
                                        std::to_string(cur_res));
        }
        const int factor = tres / cur_res;
        Block grp;
        grp.index = j;
        grp.direction = Direction::Generator;
        grp.layers.emplace_back("up", Layer::upsample(he_kernel(tc, cur_c, 3, rng), factor));
        grp.layers.emplace_back("act1", Layer::activation(Act::LeakyRelu));
        grp.layers.emplace_back("conv", Layer::conv(he_kernel(tc, tc, 3, rng), 1, 1));
        grp.layers.emplace_back("act2", Layer::activation(j == bcount ? Act::Tanh : Act::LeakyRelu));
        gen.groups.push_back(std::move(grp));
        cur_c = tc;
        cur_res = tres;
    }
    return gen;
}

std::vector<std::vector<TeacherFilter>> make_generator_filters(const ArchSpec& arch, int num_teachers,
                                                               int reduction, Rng& rng) {
    // Only the intermediate groups need channel alignment; the image-level
    // group is already in every teacher's native input space.
    const int bcount = arch.num_blocks();
    std::vector<std::vector<TeacherFilter>> filters(static_cast<size_t>(bcount - 1));
    for (int j = 1; j < bcount; ++j) {
        for (int m = 0; m < num_teachers; ++m) {
            filters[static_cast<size_t>(j - 1)].push_back(
                make_teacher_filter(arch.out_channels(bcount - j), reduction, rng));
        }
    }
    return filters;
}

Tensor TargetNet::features(const Tensor& image, int upto) const {
    Tensor x = image;
    for (int b = 1; b <= upto; ++b) x = blocks[static_cast<size_t>(b - 1)].forward(x);
    return x;
}

NamedParams TargetNet::named_params() const {
    NamedParams out;
    for (const auto& b : blocks) b.collect("block" + std::to_string(b.index), out);
    for (size_t b = 0; b < filters.size(); ++b) {
        for (size_t m = 0; m < filters[b].size(); ++m) {
            filters[b][m].collect("filter.b" + std::to_string(b + 1) + ".m" + std::to_string(m + 1), out);
        }
    }
    return out;
}

TargetNet make_targetnet(const ArchSpec& arch, int num_teachers, int reduction, Rng& rng) {
    TargetNet t;
    t.arch = arch;
    // Same block architecture as the teachers.
    Rng body_rng(rng.raw());
    TeacherNet proto = make_teacher(arch, {0}, {"_"}, body_rng);
    t.blocks = std::move(proto.blocks);
    const int bcount = arch.num_blocks();
    t.filters.resize(static_cast<size_t>(bcount));
    for (int b = 1; b <= bcount; ++b) {
        for (int m = 0; m < num_teachers; ++m) {
            t.filters[static_cast<size_t>(b - 1)].push_back(
                make_teacher_filter(arch.out_channels(b), reduction, rng));
        }
    }
    return t;
}

}  // namespace dfka
