#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dfka {

/// Every tunable of the pipeline, loadable from a plain-text key=value
/// file with [section] headers. Field defaults are the shipped defaults.
struct PipelineConfig {
    // [dataset]
    int n_train = 2000;
    int n_eval = 500;
    int c_total = 12;
    int image_size = 32;

    // [teachers]
    int num_teachers = 2;
    std::vector<std::vector<int>> teacher_labels;  // filled by finalize() when empty
    std::vector<int> y_cst;                        // ditto
    int teacher_epochs = 16;
    int batch = 16;
    // Pre-training needs a hotter schedule than amalgamation at this scale.
    float teacher_lr = 0.1f;
    float teacher_weight_decay = 1e-4f;

    // [generator]
    int noise_dim = 64;
    int gen_iters = 400;
    // Adversarial training destabilizes above this rate; the other stages
    // keep the shared optimizer default.
    float gen_lr = 0.003f;
    float alpha = 0.1f;
    float beta = 5.0f;
    float gamma = 1.0f;
    float epsilon = 0.5f;

    // [dual]
    int dual_iters_per_block = 250;
    float lambda_in1 = 1.0f;
    float lambda_in2 = 1.0f;
    std::vector<float> lambda_m;
    int window = 50;

    // [branch]
    int finetune_iters = 200;
    bool resynthesize = true;  // fresh images every fine-tune iteration

    // [optimizer]
    float base_lr = 0.01f;
    float momentum = 0.9f;
    float weight_decay = 5e-3f;
    float power = 0.9f;

    // [eval]
    int top_k = 3;

    // [misc]
    std::uint64_t seed = 1234;
    bool bit_exact = false;
    int filter_reduction = 4;
    int ablate_gen_iters = 150;
    int ablate_dual_iters = 100;
    int ablate_finetune_iters = 80;

    /// Fill the derived label-split defaults and check the TaskSplit
    /// constraint.
    void finalize();
};

PipelineConfig load_config(const std::string& path);
void write_default_config(const std::string& path);

}  // namespace dfka
