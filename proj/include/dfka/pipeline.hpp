#pragma once

#include <array>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "dfka/data.hpp"
#include "dfka/losses.hpp"
#include "dfka/metrics.hpp"
#include "dfka/nets.hpp"
#include "dfka/rng.hpp"

namespace dfka {

struct Schedule {
    int iterations = 0;
    int batch = 16;
    float base_lr = 0.01f;
    float momentum = 0.9f;
    float weight_decay = 5e-3f;
    float power = 0.9f;

    float lr_at(int iter) const;  // poly decay
};

class SgdOptimizer {
public:
    SgdOptimizer(std::vector<Tensor> params, Schedule schedule);
    void zero_grad();
    void step();
    int iteration() const { return iter_; }
    float current_lr() const { return schedule_.lr_at(iter_); }

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<float>> velocity_;
    Schedule schedule_;
    int iter_ = 0;
};

void set_trainable(const NamedParams& params, bool trainable);
std::vector<Tensor> param_tensors(const NamedParams& params);

struct LogRow {
    std::string step;
    int block = 0;
    int iteration = 0;
    double total = 0.0;
    std::array<double, 5> components{};
    double lr = 0.0;
};

class TrainingLog {
public:
    void add(LogRow row) { rows_.push_back(std::move(row)); }
    const std::vector<LogRow>& rows() const { return rows_; }
    void write_csv(const std::string& path) const;

private:
    std::vector<LogRow> rows_;
};

struct ConvergenceRecord {
    std::vector<std::vector<double>> eta;  // [B][M]
    int window = 50;

    ConvergenceRecord() = default;
    ConvergenceRecord(int num_blocks, int num_teachers, int window);
    void set(int block, int teacher, double value);
    bool complete() const;
};

struct BranchPlan {
    std::vector<int> s;  // branch-out block per teacher, 1-based

    int shared_depth() const;
};

/// S_m = argmin_b eta[b][m], ties toward the smaller block.
BranchPlan branch_out(const ConvergenceRecord& record);
void write_branch_plan(const BranchPlan& plan, const std::string& path);

/// Supplier of synthetic training batches for Steps II/III. sample()
/// returns F_gan[1..B]; sources without intermediate features leave all
/// but the final (image) entry undefined.
class SynthSource {
public:
    virtual ~SynthSource() = default;
    virtual std::vector<Tensor> sample(int batch, Rng& rng) = 0;
    virtual bool has_intermediate_features() const = 0;
};

class GeneratorSource final : public SynthSource {
public:
    explicit GeneratorSource(const GeneratorStack& gen);
    std::vector<Tensor> sample(int batch, Rng& rng) override;
    bool has_intermediate_features() const override { return true; }

private:
    const GeneratorStack* gen_;
};

class NoiseImageSource final : public SynthSource {
public:
    NoiseImageSource(int levels, Shape image_shape);
    std::vector<Tensor> sample(int batch, Rng& rng) override;
    bool has_intermediate_features() const override { return false; }

private:
    int levels_;
    Shape image_shape_;  // [C,H,W]
};

class DatasetImageSource final : public SynthSource {
public:
    DatasetImageSource(int levels, const SyntheticMultiLabelDataset& ds);
    std::vector<Tensor> sample(int batch, Rng& rng) override;
    bool has_intermediate_features() const override { return false; }

private:
    int levels_;
    const SyntheticMultiLabelDataset* ds_;
};

/// Step I: adversarial training of the group stack and its per-group
/// teacher filters against the frozen teacher discriminators.
/// image_level_only drops the per-group discriminators and the
/// consistency term, leaving image-level adversarial training only.
void train_generator(GeneratorStack& gen, std::vector<std::vector<TeacherFilter>>& gen_filters,
                     const std::vector<TeacherNet>& teachers, const LossConfig& loss_cfg,
                     const Schedule& schedule, Rng& rng, TrainingLog* log,
                     bool image_level_only = false);

/// All intermediate features plus the image for one noise batch, with no
/// gradient state.
std::vector<Tensor> synthesize_training_set(const GeneratorStack& gen, const Tensor& z);

/// Step II for one block. Blocks 1..b-1 must already be trained; only
/// block b and the filters f_.^b are updated. Returns the trailing-window
/// convergence value per teacher.
std::vector<double> train_dual_block(TargetNet& target, int b, SynthSource& source,
                                     const std::vector<TeacherNet>& teachers,
                                     const std::vector<TaskFilter>& task_filters,
                                     const LossConfig& loss_cfg, const Schedule& schedule, int window,
                                     Rng& rng, TrainingLog* log);

struct Branch {
    int teacher_index = 0;  // 0-based
    int branch_block = 0;   // S_m
    TeacherFilter filter;   // aliases the TargetNet filter at S_m
    std::vector<Block> teacher_blocks;  // deep copies; trainable in fine-tune
    ClassifierHead head;                // deep copy of the teacher head
    TaskFilter task;
};

struct RegroupedTargetNet {
    TargetNet student;
    std::vector<Branch> branches;
    BranchPlan plan;
    std::vector<int> y_cst;
    // y_cst position -> contributing (branch index, filtered column) pairs
    std::vector<std::vector<std::pair<int, int>>> label_sources;

    /// Task-filtered predictions of one branch: shared student blocks,
    /// the kept teacher filter, the grafted teacher blocks, head, g_m.
    Tensor branch_forward(int branch, const Tensor& image) const;
    /// Scores over y_cst; overlapping labels average their branches.
    Tensor predict(const Tensor& image) const;
    NamedParams named_params() const;
};

std::vector<TaskFilter> make_task_filters(const std::vector<TeacherNet>& teachers,
                                          const std::vector<int>& y_cst);

/// Step III assembly per the branch plan. Teacher blocks past each
/// branch point are deep-copied so the reference teachers stay pristine.
RegroupedTargetNet regroup(TargetNet target, const std::vector<TeacherNet>& teachers,
                           const std::vector<TaskFilter>& task_filters, const BranchPlan& plan,
                           const std::vector<int>& y_cst);

void fine_tune(RegroupedTargetNet& net, SynthSource& source, const std::vector<TeacherNet>& teachers,
               const LossConfig& loss_cfg, const Schedule& schedule, bool resynthesize, Rng& rng,
               TrainingLog* log);

/// Teacher pre-training on real data with per-label BCE.
TeacherNet pretrain_teacher(const SyntheticMultiLabelDataset& train, std::vector<int> label_indices,
                            std::vector<std::string> label_names, const Schedule& schedule, Rng& rng,
                            TrainingLog* log);

MetricsReport evaluate_teacher(const TeacherNet& teacher, const SyntheticMultiLabelDataset& eval,
                               int top_k, int batch);
MetricsReport evaluate_model(const RegroupedTargetNet& net, const SyntheticMultiLabelDataset& eval,
                             int top_k, int batch);

}  // namespace dfka
