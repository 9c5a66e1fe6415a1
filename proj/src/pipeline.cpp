#include "dfka/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

namespace dfka {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

Tensor sample_noise(int batch, int dim, Rng& rng) {
    Tensor z({batch, dim});
    for (auto& v : z.data()) v = rng.normal();
    return z;
}

void check_finite_loss(const Tensor& loss, const std::string& step, int iter) {
    if (!std::isfinite(loss.value())) {
        throw std::runtime_error("non-finite loss in " + step + " at iteration " + std::to_string(iter) +
                                 ": " + std::to_string(loss.value()));
    }
}

}  // namespace

float Schedule::lr_at(int iter) const {
    const float frac = iterations > 0 ? static_cast<float>(iter) / static_cast<float>(iterations) : 0.0f;
    return base_lr * std::pow(std::max(0.0f, 1.0f - frac), power);
}

SgdOptimizer::SgdOptimizer(std::vector<Tensor> params, Schedule schedule)
    : params_(std::move(params)), schedule_(schedule) {
    velocity_.resize(params_.size());
    for (size_t i = 0; i < params_.size(); ++i)
        velocity_[i].assign(static_cast<size_t>(params_[i].numel()), 0.0f);
}

void SgdOptimizer::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

void SgdOptimizer::step() {
    const float lr = schedule_.lr_at(iter_);
    for (size_t i = 0; i < params_.size(); ++i) {
        if (!params_[i].has_grad()) continue;
        auto data = params_[i].data();
        const auto grad = params_[i].grad();
        auto& vel = velocity_[i];
        for (size_t j = 0; j < vel.size(); ++j) {
            const float g = grad[j] + schedule_.weight_decay * data[j];
            vel[j] = schedule_.momentum * vel[j] + g;
            data[j] -= lr * vel[j];
        }
    }
    ++iter_;
}

void set_trainable(const NamedParams& params, bool trainable) {
    for (const auto& [name, t] : params) {
        Tensor mut = t;
        mut.set_requires_grad(trainable);
    }
}

std::vector<Tensor> param_tensors(const NamedParams& params) {
    std::vector<Tensor> out;
    out.reserve(params.size());
    for (const auto& [name, t] : params) out.push_back(t);
    return out;
}

void TrainingLog::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("TrainingLog: cannot write " + path);
    out << "step,block,iteration,total,c1,c2,c3,c4,c5,lr\n";
    out.precision(6);
    for (const auto& r : rows_) {
        out << r.step << "," << r.block << "," << r.iteration << "," << r.total;
        for (double c : r.components) out << "," << c;
        out << "," << r.lr << "\n";
    }
}

ConvergenceRecord::ConvergenceRecord(int num_blocks, int num_teachers, int w) : window(w) {
    eta.assign(static_cast<size_t>(num_blocks),
               std::vector<double>(static_cast<size_t>(num_teachers), std::nan("")));
}

void ConvergenceRecord::set(int block, int teacher, double value) {
    require(std::isfinite(value) && value >= 0.0,
            "ConvergenceRecord: eta must be finite and nonnegative, got " + std::to_string(value));
    eta.at(static_cast<size_t>(block - 1)).at(static_cast<size_t>(teacher)) = value;
}

bool ConvergenceRecord::complete() const {
    if (eta.empty()) return false;
    for (const auto& row : eta)
        for (double v : row)
            if (!std::isfinite(v)) return false;
    return true;
}

int BranchPlan::shared_depth() const {
    return s.empty() ? 0 : *std::min_element(s.begin(), s.end());
}

BranchPlan branch_out(const ConvergenceRecord& record) {
    require(record.complete(), "branch_out: incomplete convergence record");
    BranchPlan plan;
    const size_t num_teachers = record.eta.front().size();
    for (size_t m = 0; m < num_teachers; ++m) {
        int best_b = 1;
        double best = record.eta[0][m];
        for (size_t b = 1; b < record.eta.size(); ++b) {
            if (record.eta[b][m] < best) {  // strict: ties keep the smaller block
                best = record.eta[b][m];
                best_b = static_cast<int>(b) + 1;
            }
        }
        plan.s.push_back(best_b);
    }
    return plan;
}

void write_branch_plan(const BranchPlan& plan, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_branch_plan: cannot write " + path);
    for (size_t m = 0; m < plan.s.size(); ++m)
        out << "S[" << (m + 1) << "]=" << plan.s[m] << "\n";
}

GeneratorSource::GeneratorSource(const GeneratorStack& gen) : gen_(&gen) {
    require(gen.trained, "GeneratorSource: generator has not completed Step I training");
}

std::vector<Tensor> GeneratorSource::sample(int batch, Rng& rng) {
    Tensor z = sample_noise(batch, gen_->noise_dim, rng);
    return synthesize_training_set(*gen_, z);
}

NoiseImageSource::NoiseImageSource(int levels, Shape image_shape)
    : levels_(levels), image_shape_(std::move(image_shape)) {}

std::vector<Tensor> NoiseImageSource::sample(int batch, Rng& rng) {
    std::vector<Tensor> out(static_cast<size_t>(levels_));
    Tensor img({batch, image_shape_[0], image_shape_[1], image_shape_[2]});
    for (auto& v : img.data()) v = static_cast<float>(rng.uniform());
    out.back() = img;
    return out;
}

DatasetImageSource::DatasetImageSource(int levels, const SyntheticMultiLabelDataset& ds)
    : levels_(levels), ds_(&ds) {}

std::vector<Tensor> DatasetImageSource::sample(int batch, Rng& rng) {
    std::vector<Tensor> out(static_cast<size_t>(levels_));
    const int c = ds_->images.dim(1), h = ds_->images.dim(2), w = ds_->images.dim(3);
    Tensor img({batch, c, h, w});
    const std::int64_t stride = static_cast<std::int64_t>(c) * h * w;
    for (int i = 0; i < batch; ++i) {
        const int row = rng.uniform_int(0, ds_->size() - 1);
        std::copy_n(ds_->images.data().data() + row * stride, stride, img.data().data() + i * stride);
    }
    out.back() = img;
    return out;
}

void train_generator(GeneratorStack& gen, std::vector<std::vector<TeacherFilter>>& gen_filters,
                     const std::vector<TeacherNet>& teachers, const LossConfig& loss_cfg,
                     const Schedule& schedule, Rng& rng, TrainingLog* log, bool image_level_only) {
    require(!teachers.empty(), "train_generator: no teachers");
    const int bcount = gen.num_groups();
    for (const auto& t : teachers) {
        require(static_cast<int>(t.blocks.size()) == bcount,
                "train_generator: teacher block count differs from generator group count");
    }
    require(static_cast<int>(gen_filters.size()) == bcount - 1,
            "train_generator: filter bank must cover every intermediate group");

    NamedParams trainable = gen.named_params();
    for (size_t j = 0; j < gen_filters.size(); ++j)
        for (size_t m = 0; m < gen_filters[j].size(); ++m)
            gen_filters[j][m].collect("filter.j" + std::to_string(j + 1) + ".m" + std::to_string(m + 1),
                                      trainable);
    set_trainable(trainable, true);
    SgdOptimizer opt(param_tensors(trainable), schedule);

    for (int iter = 0; iter < schedule.iterations; ++iter) {
        opt.zero_grad();
        Tensor z = sample_noise(schedule.batch, gen.noise_dim, rng);
        std::vector<Tensor> feats = gen.forward(z);

        std::vector<Tensor> group_preds;
        std::vector<Tensor> image_features;
        for (int j = image_level_only ? bcount : 1; j <= bcount; ++j) {
            std::vector<Tensor> per_teacher;
            for (size_t m = 0; m < teachers.size(); ++m) {
                Tensor filtered = j == bcount
                                      ? feats[static_cast<size_t>(j - 1)]
                                      : gen_filters[static_cast<size_t>(j - 1)][m].apply(
                                            feats[static_cast<size_t>(j - 1)]);
                auto disc = assemble_discriminator(teachers[m], j);
                auto out = disc.run(filtered);
                per_teacher.push_back(out.predictions);
                if (j == bcount) image_features.push_back(out.prehead);
            }
            group_preds.push_back(per_teacher.size() == 1 ? per_teacher[0] : concat_cols(per_teacher));
        }

        Tensor loss = joint_generator_loss(group_preds, image_features, loss_cfg);
        check_finite_loss(loss, "train_generator", iter);
        backward(loss);
        opt.step();

        if (log) {
            NoGradGuard ng;
            const Tensor& image_preds = group_preds.back();
            LogRow row;
            row.step = "generator";
            row.block = bcount;
            row.iteration = iter;
            row.total = loss.value();
            row.components[0] = one_hot_loss(image_preds.detach(), loss_cfg.epsilon).value();
            Tensor act = activation_loss(image_features[0].detach());
            for (size_t m = 1; m < image_features.size(); ++m)
                act = add(act, activation_loss(image_features[m].detach()));
            row.components[1] = act.value() / static_cast<double>(image_features.size());
            row.components[2] = info_entropy_loss(image_preds.detach()).value();
            row.components[3] = discrete_loss(image_preds.detach()).value();
            // Mean adversarial loss of the intermediate groups, logged only.
            if (group_preds.size() > 1) {
                double acc = 0.0;
                for (size_t j = 0; j + 1 < group_preds.size(); ++j)
                    acc += one_hot_loss(group_preds[j].detach(), loss_cfg.epsilon).value();
                row.components[4] = acc / static_cast<double>(group_preds.size() - 1);
            }
            row.lr = opt.current_lr();
            log->add(row);
        }
    }
    gen.trained = true;
}

std::vector<Tensor> synthesize_training_set(const GeneratorStack& gen, const Tensor& z) {
    NoGradGuard ng;
    return gen.forward(z);
}

std::vector<double> train_dual_block(TargetNet& target, int b, SynthSource& source,
                                     const std::vector<TeacherNet>& teachers,
                                     const std::vector<TaskFilter>& task_filters,
                                     const LossConfig& loss_cfg, const Schedule& schedule, int window,
                                     Rng& rng, TrainingLog* log) {
    const int bcount = static_cast<int>(target.blocks.size());
    require(b >= 1 && b <= bcount, "train_dual_block: block " + std::to_string(b) + " outside [1," +
                                       std::to_string(bcount) + "]");
    require(target.trained_blocks == b - 1,
            "train_dual_block: block " + std::to_string(b) + " requested but only " +
                std::to_string(target.trained_blocks) + " blocks are trained");
    require(task_filters.size() == teachers.size(), "train_dual_block: one task filter per teacher");
    loss_cfg.validate();
    require(loss_cfg.lambda_in1 != 0.0f || loss_cfg.lambda_in2 != 0.0f,
            "train_dual_block: both lambda_in weights are zero");
    require(loss_cfg.lambda_in2 == 0.0f || source.has_intermediate_features(),
            "train_dual_block: lambda_in2 > 0 but the synthesis source has no intermediate features");

    NamedParams trainable;
    target.blocks[static_cast<size_t>(b - 1)].collect("block" + std::to_string(b), trainable);
    for (size_t m = 0; m < target.filters[static_cast<size_t>(b - 1)].size(); ++m)
        target.filters[static_cast<size_t>(b - 1)][m].collect("filter.m" + std::to_string(m + 1),
                                                              trainable);
    set_trainable(trainable, true);
    SgdOptimizer opt(param_tensors(trainable), schedule);

    const float lam_sum = loss_cfg.lambda_in1 + loss_cfg.lambda_in2;
    std::vector<std::deque<double>> trail(teachers.size());

    for (int iter = 0; iter < schedule.iterations; ++iter) {
        opt.zero_grad();
        std::vector<Tensor> synth = source.sample(schedule.batch, rng);
        const Tensor& image = synth.back();

        Tensor f_in1, f_in2;
        {
            NoGradGuard ng;
            f_in1 = target.features(image, b - 1).detach();
        }
        if (loss_cfg.lambda_in2 != 0.0f) {
            f_in2 = synth[static_cast<size_t>(bcount + 1 - b - 1)];  // F_gan^{B+1-b}
            require(f_in2.defined(), "train_dual_block: missing generated feature for stream 2");
        }

        std::vector<Tensor> teacher_preds;  // soft targets, per teacher
        {
            NoGradGuard ng;
            for (const auto& t : teachers) teacher_preds.push_back(t.forward(image).detach());
        }

        auto stream_losses = [&](const Tensor& f_in) {
            Tensor f_u = target.blocks[static_cast<size_t>(b - 1)].forward(f_in);
            std::vector<Tensor> losses;
            for (size_t m = 0; m < teachers.size(); ++m) {
                Tensor filtered = target.filters[static_cast<size_t>(b - 1)][m].apply(f_u);
                auto disc = assemble_dual_discriminator(teachers[m], b);
                Tensor preds = disc.run(filtered).predictions;
                losses.push_back(dual_branch_loss(preds, teacher_preds[m], task_filters[m]));
            }
            return losses;
        };

        std::vector<Tensor> s1, s2;
        if (loss_cfg.lambda_in1 != 0.0f) s1 = stream_losses(f_in1);
        if (loss_cfg.lambda_in2 != 0.0f) s2 = stream_losses(f_in2);
        Tensor loss = dual_block_loss(s1, s2, loss_cfg);
        check_finite_loss(loss, "train_dual_block b=" + std::to_string(b), iter);
        backward(loss);
        opt.step();

        LogRow row;
        row.step = "dual";
        row.block = b;
        row.iteration = iter;
        row.total = loss.value();
        for (size_t m = 0; m < teachers.size(); ++m) {
            double v = 0.0;
            if (!s1.empty()) v += loss_cfg.lambda_in1 * s1[m].value();
            if (!s2.empty()) v += loss_cfg.lambda_in2 * s2[m].value();
            v /= lam_sum;
            if (m < row.components.size()) row.components[m] = v;
            trail[m].push_back(v);
            if (static_cast<int>(trail[m].size()) > window) trail[m].pop_front();
        }
        row.lr = opt.current_lr();
        if (log) log->add(row);
    }

    std::vector<double> eta;
    for (const auto& q : trail) {
        require(!q.empty(), "train_dual_block: schedule ran zero iterations, no convergence value");
        eta.push_back(std::accumulate(q.begin(), q.end(), 0.0) / static_cast<double>(q.size()));
    }
    target.trained_blocks = b;
    return eta;
}

std::vector<TaskFilter> make_task_filters(const std::vector<TeacherNet>& teachers,
                                          const std::vector<int>& y_cst) {
    std::set<int> wanted(y_cst.begin(), y_cst.end());
    std::vector<TaskFilter> filters;
    std::set<int> covered;
    for (const auto& t : teachers) {
        std::vector<int> local;
        for (size_t p = 0; p < t.label_indices.size(); ++p) {
            if (wanted.count(t.label_indices[p])) {
                local.push_back(static_cast<int>(p));
                covered.insert(t.label_indices[p]);
            }
        }
        filters.emplace_back(std::move(local));  // empty task set rejected here
    }
    for (int l : y_cst) {
        require(covered.count(l), "make_task_filters: customized label " + std::to_string(l) +
                                      " not served by any teacher");
    }
    return filters;
}

Tensor RegroupedTargetNet::branch_forward(int branch, const Tensor& image) const {
    const Branch& br = branches.at(static_cast<size_t>(branch));
    Tensor x = student.features(image, br.branch_block);
    x = br.filter.apply(x);
    for (const auto& blk : br.teacher_blocks) x = blk.forward(x);
    Tensor preds = br.head.forward(x);
    return br.task.apply(preds);
}

Tensor RegroupedTargetNet::predict(const Tensor& image) const {
    std::vector<Tensor> outs;
    outs.reserve(branches.size());
    for (size_t i = 0; i < branches.size(); ++i)
        outs.push_back(branch_forward(static_cast<int>(i), image));
    const int n = image.dim(0);
    Tensor scores({n, static_cast<int>(y_cst.size())});
    for (size_t c = 0; c < y_cst.size(); ++c) {
        const auto& sources = label_sources[c];
        for (int r = 0; r < n; ++r) {
            double acc = 0.0;
            for (const auto& [bi, col] : sources)
                acc += outs[static_cast<size_t>(bi)]
                           .data()[static_cast<size_t>(r) * outs[static_cast<size_t>(bi)].dim(1) + col];
            scores.data()[static_cast<size_t>(r) * y_cst.size() + c] =
                static_cast<float>(acc / sources.size());
        }
    }
    return scores;
}

NamedParams RegroupedTargetNet::named_params() const {
    NamedParams out;
    for (const auto& blk : student.blocks) blk.collect("student.block" + std::to_string(blk.index), out);
    for (size_t i = 0; i < branches.size(); ++i) {
        const std::string prefix = "branch" + std::to_string(i + 1);
        branches[i].filter.collect(prefix + ".filter", out);
        for (const auto& blk : branches[i].teacher_blocks)
            blk.collect(prefix + ".teacher.block" + std::to_string(blk.index), out);
        branches[i].head.collect(prefix + ".head", out);
    }
    return out;
}

RegroupedTargetNet regroup(TargetNet target, const std::vector<TeacherNet>& teachers,
                           const std::vector<TaskFilter>& task_filters, const BranchPlan& plan,
                           const std::vector<int>& y_cst) {
    const int bcount = static_cast<int>(target.blocks.size());
    require(target.trained_blocks == bcount,
            "regroup: only " + std::to_string(target.trained_blocks) + " of " + std::to_string(bcount) +
                " blocks trained");
    require(plan.s.size() == teachers.size(), "regroup: plan covers " + std::to_string(plan.s.size()) +
                                                  " teachers, expected " +
                                                  std::to_string(teachers.size()));
    require(task_filters.size() == teachers.size(), "regroup: one task filter per teacher");

    RegroupedTargetNet net;
    net.plan = plan;
    net.y_cst = y_cst;
    for (size_t m = 0; m < teachers.size(); ++m) {
        const int s = plan.s[m];
        require(s >= 1 && s <= bcount, "regroup: branch point " + std::to_string(s) + " outside [1," +
                                           std::to_string(bcount) + "]");
        require(m < target.filters[static_cast<size_t>(s - 1)].size(),
                "regroup: missing teacher filter for teacher " + std::to_string(m + 1) + " at block " +
                    std::to_string(s));
        Branch br;
        br.teacher_index = static_cast<int>(m);
        br.branch_block = s;
        br.filter = target.filters[static_cast<size_t>(s - 1)][m];  // aliased, not copied
        for (int tb = s + 1; tb <= bcount; ++tb) {
            Block copy = teachers[m].blocks[static_cast<size_t>(tb - 1)].deep_copy();
            br.teacher_blocks.push_back(std::move(copy));
        }
        br.head = teachers[m].head.deep_copy();
        br.task = task_filters[m];
        net.branches.push_back(std::move(br));
    }
    net.student = std::move(target);

    // Grafted copies train during fine-tuning; reference teachers do not.
    for (auto& br : net.branches) {
        NamedParams copies;
        for (const auto& blk : br.teacher_blocks) blk.collect("g", copies);
        br.head.collect("h", copies);
        set_trainable(copies, true);
    }

    // Map every customized label to its contributing branch columns.
    net.label_sources.resize(y_cst.size());
    for (size_t c = 0; c < y_cst.size(); ++c) {
        for (size_t i = 0; i < net.branches.size(); ++i) {
            const auto& t = teachers[static_cast<size_t>(net.branches[i].teacher_index)];
            const auto& local = net.branches[i].task.indices;
            for (size_t col = 0; col < local.size(); ++col) {
                if (t.label_indices[static_cast<size_t>(local[col])] == y_cst[c])
                    net.label_sources[c].emplace_back(static_cast<int>(i), static_cast<int>(col));
            }
        }
        require(!net.label_sources[c].empty(),
                "regroup: customized label " + std::to_string(y_cst[c]) + " has no serving branch");
    }
    return net;
}

void fine_tune(RegroupedTargetNet& net, SynthSource& source, const std::vector<TeacherNet>& teachers,
               const LossConfig& loss_cfg, const Schedule& schedule, bool resynthesize, Rng& rng,
               TrainingLog* log) {
    if (schedule.iterations == 0) return;
    NamedParams trainable = net.named_params();
    set_trainable(trainable, true);
    SgdOptimizer opt(param_tensors(trainable), schedule);

    std::vector<Tensor> pool;
    for (int iter = 0; iter < schedule.iterations; ++iter) {
        opt.zero_grad();
        if (resynthesize || pool.empty()) pool = source.sample(schedule.batch, rng);
        const Tensor& image = pool.back();

        Tensor loss = Tensor::scalar(0.0f);
        LogRow row;
        for (size_t i = 0; i < net.branches.size(); ++i) {
            const auto& t = teachers[static_cast<size_t>(net.branches[i].teacher_index)];
            std::vector<float> target_vals;
            {
                NoGradGuard ng;
                Tensor soft = net.branches[i].task.apply(t.forward(image).detach());
                target_vals.assign(soft.data().begin(), soft.data().end());
            }
            Tensor preds = net.branch_forward(static_cast<int>(i), image);
            Tensor branch_loss = bce_with_const_target(preds, target_vals);
            if (i < row.components.size()) row.components[i] = branch_loss.value();
            loss = add(loss, scale_shift(branch_loss, loss_cfg.teacher_weight(i), 0.0f));
        }
        check_finite_loss(loss, "fine_tune", iter);
        backward(loss);
        opt.step();

        if (log) {
            row.step = "finetune";
            row.iteration = iter;
            row.total = loss.value();
            row.lr = opt.current_lr();
            log->add(row);
        }
    }
}

TeacherNet pretrain_teacher(const SyntheticMultiLabelDataset& train, std::vector<int> label_indices,
                            std::vector<std::string> label_names, const Schedule& schedule, Rng& rng,
                            TrainingLog* log) {
    require(!label_indices.empty(), "pretrain_teacher: empty label set");
    ArchSpec arch;
    arch.image_size = train.images.dim(2);
    TeacherNet teacher = make_teacher(arch, label_indices, std::move(label_names), rng);

    SgdOptimizer opt(param_tensors(teacher.named_params()), schedule);
    const int n = train.size();
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    int cursor = n;  // forces an initial shuffle
    for (int iter = 0; iter < schedule.iterations; ++iter) {
        if (cursor + schedule.batch > n) {
            for (int i = n - 1; i > 0; --i) std::swap(order[static_cast<size_t>(i)],
                                                      order[static_cast<size_t>(rng.uniform_int(0, i))]);
            cursor = 0;
        }
        Tensor images({schedule.batch, 3, arch.image_size, arch.image_size});
        std::vector<float> targets(static_cast<size_t>(schedule.batch) * label_indices.size());
        const std::int64_t stride = static_cast<std::int64_t>(3) * arch.image_size * arch.image_size;
        for (int i = 0; i < schedule.batch; ++i) {
            const int row = order[static_cast<size_t>(cursor + i)];
            std::copy_n(train.images.data().data() + row * stride, stride,
                        images.data().data() + i * stride);
            for (size_t c = 0; c < label_indices.size(); ++c)
                targets[static_cast<size_t>(i) * label_indices.size() + c] =
                    train.labels.data()[static_cast<std::int64_t>(row) * train.num_labels() +
                                        label_indices[c]];
        }
        cursor += schedule.batch;

        opt.zero_grad();
        Tensor preds = teacher.forward(images);
        Tensor loss = bce_with_const_target(preds, targets);
        check_finite_loss(loss, "pretrain_teacher", iter);
        backward(loss);
        opt.step();
        if (log && iter % 10 == 0) {
            LogRow r;
            r.step = "pretrain";
            r.iteration = iter;
            r.total = loss.value();
            r.lr = opt.current_lr();
            log->add(r);
        }
    }
    // Teachers are frozen reference models from here on.
    set_trainable(teacher.named_params(), false);
    return teacher;
}

namespace {

template <typename Fwd>
MetricsReport evaluate_scores(Fwd&& forward, const SyntheticMultiLabelDataset& eval,
                              const std::vector<int>& label_cols, int top_k, int batch) {
    NoGradGuard ng;
    const int n = eval.size();
    const int c = static_cast<int>(label_cols.size());
    Tensor scores({n, c});
    Tensor labels({n, c});
    for (int begin = 0; begin < n; begin += batch) {
        const int count = std::min(batch, n - begin);
        Tensor preds = forward(eval.image_batch(begin, count));
        for (int i = 0; i < count; ++i) {
            for (int j = 0; j < c; ++j) {
                scores.data()[static_cast<std::int64_t>(begin + i) * c + j] =
                    preds.data()[static_cast<std::int64_t>(i) * c + j];
                labels.data()[static_cast<std::int64_t>(begin + i) * c + j] =
                    eval.labels.data()[static_cast<std::int64_t>(begin + i) * eval.num_labels() +
                                       label_cols[static_cast<size_t>(j)]];
            }
        }
    }
    return coco_style_metrics(scores, labels, std::min(top_k, c));
}

}  // namespace

MetricsReport evaluate_teacher(const TeacherNet& teacher, const SyntheticMultiLabelDataset& eval,
                               int top_k, int batch) {
    return evaluate_scores([&](const Tensor& img) { return teacher.forward(img); }, eval,
                           teacher.label_indices, top_k, batch);
}

MetricsReport evaluate_model(const RegroupedTargetNet& net, const SyntheticMultiLabelDataset& eval,
                             int top_k, int batch) {
    return evaluate_scores([&](const Tensor& img) { return net.predict(img); }, eval, net.y_cst, top_k,
                           batch);
}

}  // namespace dfka
