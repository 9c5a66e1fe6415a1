#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dfka/ops.hpp"
#include "dfka/rng.hpp"
#include "dfka/tensor.hpp"

namespace dfka {

using NamedParams = std::vector<std::pair<std::string, Tensor>>;

std::uint64_t param_hash(const NamedParams& params);

/// Block-structured CNN geometry shared by teachers, the dual generator
/// and (mirrored) the group-stack generator. Block b applies its stride
/// on entry; channels/strides are listed per block.
struct ArchSpec {
    int image_size = 32;
    int image_channels = 3;
    std::vector<int> channels = {16, 32, 64, 128};
    std::vector<int> strides = {1, 2, 2, 2};

    int num_blocks() const { return static_cast<int>(channels.size()); }
    /// Output resolution of block b (1-based); b=0 is the input image.
    int out_res(int b) const;
    /// Output channel count of block b (1-based); b=0 is the input image.
    int out_channels(int b) const { return b == 0 ? image_channels : channels.at(static_cast<size_t>(b - 1)); }
};

enum class LayerKind { Conv, Activation, Pool, Dense, UpsampleConv };
enum class Direction { Encoder, Generator };

struct Layer {
    LayerKind kind = LayerKind::Activation;
    Tensor kernel;  // conv / upsample_conv
    int stride = 1;
    int padding = 0;
    int factor = 1;  // upsample_conv
    Act act = Act::Relu;
    PoolKind pool_kind = PoolKind::GlobalAvg;
    int window = 1;
    Tensor weight, bias;  // dense

    static Layer conv(Tensor kernel, int stride, int padding);
    static Layer activation(Act a);
    static Layer pooling(PoolKind p, int window);
    static Layer fully_connected(Tensor w, Tensor b);
    static Layer upsample(Tensor kernel, int factor);

    Tensor forward(const Tensor& x) const;
    void collect(const std::string& prefix, NamedParams& out) const;
    Layer deep_copy() const;
};

struct Block {
    std::vector<std::pair<std::string, Layer>> layers;
    int index = 0;
    Direction direction = Direction::Encoder;

    Tensor forward(Tensor x) const;
    void collect(const std::string& prefix, NamedParams& out) const;
    Block deep_copy() const;
};

/// Global-average pool, dense, per-label sigmoid.
struct ClassifierHead {
    Tensor w, b;

    Tensor forward(const Tensor& feature) const;
    void collect(const std::string& prefix, NamedParams& out) const;
    ClassifierHead deep_copy() const;
};

struct TeacherNet {
    ArchSpec arch;
    std::vector<Block> blocks;
    ClassifierHead head;
    std::vector<int> label_indices;        // global dataset label ids (Y_m)
    std::vector<std::string> label_names;

    int num_labels() const { return static_cast<int>(label_indices.size()); }
    /// Features after block `upto` (1-based; 0 returns the input).
    Tensor features(const Tensor& image, int upto) const;
    Tensor forward(const Tensor& image) const;
    NamedParams named_params() const;
};

TeacherNet make_teacher(const ArchSpec& arch, std::vector<int> label_indices,
                        std::vector<std::string> label_names, Rng& rng);

/// Read-only composition of the trailing teacher blocks plus the head.
/// The head belongs to block B, so every assembly ends in label space.
struct Discriminator {
    const TeacherNet* teacher = nullptr;
    int first_block = 1;  // 1-based; B+1 means head only

    std::vector<int> block_indices() const;
    struct Out {
        Tensor predictions;  // [N,T_m]
        Tensor prehead;      // feature map entering the head
    };
    Out run(const Tensor& f) const;
};

Discriminator assemble_discriminator(const TeacherNet& teacher, int j);
Discriminator assemble_dual_discriminator(const TeacherNet& teacher, int b);

/// Squeeze-excitation-style per-channel gate: global pool, two dense
/// layers, sigmoid, multiplicative application.
struct TeacherFilter {
    int channels = 0;
    int reduction = 4;
    Tensor w1, b1, w2, b2;

    Tensor apply(const Tensor& f) const;
    void collect(const std::string& prefix, NamedParams& out) const;
    TeacherFilter deep_copy() const;
};

TeacherFilter make_teacher_filter(int channels, int reduction, Rng& rng);

/// Label-subset selector into one teacher's local prediction space.
struct TaskFilter {
    std::vector<int> indices;  // sorted, unique, nonempty

    explicit TaskFilter(std::vector<int> idx);
    TaskFilter() = default;
    Tensor apply(const Tensor& predictions) const;
};

struct GeneratorStack {
    ArchSpec arch;  // the teacher geometry the stack mirrors
    int noise_dim = 64;
    int seed_channels = 0;
    int seed_res = 0;
    Tensor seed_w, seed_b;
    std::vector<Block> groups;
    bool trained = false;

    int num_groups() const { return static_cast<int>(groups.size()); }
    /// Returns F_gan[1..B]; the last entry is the image.
    std::vector<Tensor> forward(const Tensor& z) const;
    NamedParams named_params() const;
};

GeneratorStack make_generator(const ArchSpec& arch, int noise_dim, Rng& rng);

/// Per-group generator filter bank: filters[j-1][m] gates F_gan[j] for
/// teacher m+1 (channel count aligned with teacher block B-j output).
std::vector<std::vector<TeacherFilter>> make_generator_filters(const ArchSpec& arch, int num_teachers,
                                                               int reduction, Rng& rng);

struct TargetNet {
    ArchSpec arch;
    std::vector<Block> blocks;
    std::vector<std::vector<TeacherFilter>> filters;  // [b-1][m]
    int trained_blocks = 0;

    Tensor features(const Tensor& image, int upto) const;
    NamedParams named_params() const;
};

TargetNet make_targetnet(const ArchSpec& arch, int num_teachers, int reduction, Rng& rng);

}  // namespace dfka
