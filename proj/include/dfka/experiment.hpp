#pragma once

#include <optional>
#include <string>

#include "dfka/checkpoint.hpp"
#include "dfka/config.hpp"
#include "dfka/pipeline.hpp"

namespace dfka {

/// Stage orchestration around one output directory. Every stage persists
/// its artifacts so CLI invocations can run stages independently; a
/// stage's prerequisites are loaded from disk when not in memory.
class Workspace {
public:
    Workspace(PipelineConfig cfg, std::string out_dir);

    const PipelineConfig& config() const { return cfg_; }
    const std::string& dir() const { return out_dir_; }

    void gen_data();
    /// Returns eval mAP per teacher.
    std::vector<double> pretrain();
    void train_generator_stage(bool image_level_only = false);
    /// Runs Step II over all blocks; returns the branch plan.
    BranchPlan train_dual_stage();
    /// Step III: regroup by the stored plan, fine-tune, evaluate; writes
    /// metrics.csv and the final checkpoint.
    MetricsReport finetune_stage();
    MetricsReport evaluate_stage();

    /// Runs gen-data through evaluation in sequence.
    MetricsReport full_pipeline();

    /// kind: random_noise | similar_data | dafl_style. Reuses the
    /// pre-trained teachers; trains its own student.
    MetricsReport run_baseline(const std::string& kind);

    /// Table-4-style lambda grid plus the discrete-loss harness; writes
    /// ablation_report.csv and returns the grid mAPs keyed {10,01,11}.
    std::vector<std::pair<std::string, MetricsReport>> run_ablation();

    // Loaded-state accessors (loading from disk on demand).
    const SyntheticMultiLabelDataset& train_set();
    const SyntheticMultiLabelDataset& eval_set();
    std::vector<TeacherNet>& teachers();
    GeneratorStack& generator();
    std::vector<std::vector<TeacherFilter>>& generator_filters();

    void flush_log();

private:
    ArchSpec arch() const;
    LossConfig loss_config() const;
    Schedule schedule_for(int iterations) const;
    void save_generator();
    void load_generator();
    MetricsReport finetune_and_eval(TargetNet target, const BranchPlan& plan, SynthSource& source,
                                    const Schedule& finetune_schedule, Rng& rng,
                                    const std::string& checkpoint_name, int* shared_depth = nullptr);
    BranchPlan dual_training(TargetNet& target, SynthSource& source, const LossConfig& loss_cfg,
                             int iters_per_block, Rng& rng, ConvergenceRecord* record_out);

    PipelineConfig cfg_;
    std::string out_dir_;
    TrainingLog log_;

    std::optional<SyntheticMultiLabelDataset> train_;
    std::optional<SyntheticMultiLabelDataset> eval_;
    std::vector<TeacherNet> teachers_;
    std::optional<GeneratorStack> gen_;
    std::vector<std::vector<TeacherFilter>> gen_filters_;
    std::optional<TargetNet> target_;
    std::optional<ConvergenceRecord> record_;
    std::optional<BranchPlan> plan_;
    std::optional<RegroupedTargetNet> final_;
};

void save_convergence_record(const ConvergenceRecord& record, const std::string& path);
ConvergenceRecord load_convergence_record(const std::string& path);
BranchPlan load_branch_plan(const std::string& path);

}  // namespace dfka
