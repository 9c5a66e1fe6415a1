#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dfka/config.hpp"
#include "dfka/experiment.hpp"

namespace {

void print_report(const std::string& name, const dfka::MetricsReport& r) {
    std::cout << name << ": mAP=" << r.map << " O-P=" << r.overall_precision
              << " O-R=" << r.overall_recall << " O-F1=" << r.overall_f1
              << " C-P=" << r.class_precision << " C-R=" << r.class_recall
              << " C-F1=" << r.class_f1 << " (top-" << r.top_k << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Data-free multi-teacher knowledge amalgamation for multi-label classification"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir = "run";
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool bit_exact = false;
    app.add_option("--config", config_path, "configuration file (key=value with [section] headers)");
    app.add_option("--out", out_dir, "output directory for artifacts")->capture_default_str();
    app.add_option("--seed", seed, "master seed overriding the configured one")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_flag("--bit-exact", bit_exact,
                 "deterministic single-threaded mode (always on in this build)");

    auto* gen_data = app.add_subcommand("gen-data", "render the synthetic train/eval datasets");
    auto* pretrain = app.add_subcommand("pretrain", "pre-train the teacher networks on real data");
    auto* train_gen = app.add_subcommand("train-generator",
                                         "adversarial training of the group-stack generator");
    auto* train_dual = app.add_subcommand("train-dual",
                                          "block-wise dual-stream training of the student");
    auto* branch = app.add_subcommand("branch-out", "derive the branch plan from convergence data");
    auto* finetune = app.add_subcommand("finetune", "regroup, fine-tune and evaluate the final model");
    auto* evaluate = app.add_subcommand("evaluate", "evaluate the saved final model");
    auto* baseline = app.add_subcommand("baseline", "train and evaluate a reference baseline");
    std::string baseline_kind;
    baseline->add_option("kind", baseline_kind, "random_noise | similar_data | dafl_style")
        ->required();
    auto* full = app.add_subcommand("full-pipeline", "run every stage in sequence");
    auto* ablate = app.add_subcommand("ablate",
                                      "stream-weight grid and discrete-loss entropy harness");
    auto* write_cfg = app.add_subcommand("write-config", "write the default configuration file");
    std::string cfg_out = "dfka.cfg";
    write_cfg->add_option("path", cfg_out, "destination")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (write_cfg->parsed()) {
            dfka::write_default_config(cfg_out);
            std::cout << "wrote " << cfg_out << "\n";
            return 0;
        }

        dfka::PipelineConfig cfg;
        if (!config_path.empty()) cfg = dfka::load_config(config_path);
        if (seed_set) cfg.seed = seed;
        cfg.bit_exact = cfg.bit_exact || bit_exact;

        dfka::Workspace ws(cfg, out_dir);

        if (gen_data->parsed()) {
            ws.gen_data();
            std::cout << "datasets written to " << out_dir << "\n";
        } else if (pretrain->parsed()) {
            auto maps = ws.pretrain();
            for (size_t m = 0; m < maps.size(); ++m)
                std::cout << "teacher " << m << " eval mAP=" << maps[m] << "\n";
        } else if (train_gen->parsed()) {
            ws.train_generator_stage();
            ws.flush_log();
            std::cout << "generator checkpoint written to " << out_dir << "/generator\n";
        } else if (train_dual->parsed()) {
            auto plan = ws.train_dual_stage();
            ws.flush_log();
            for (size_t m = 0; m < plan.s.size(); ++m)
                std::cout << "S[" << (m + 1) << "]=" << plan.s[m] << "\n";
        } else if (branch->parsed()) {
            auto record = dfka::load_convergence_record(out_dir + "/target/convergence.txt");
            auto plan = dfka::branch_out(record);
            dfka::write_branch_plan(plan, out_dir + "/branch_plan.txt");
            for (size_t m = 0; m < plan.s.size(); ++m)
                std::cout << "S[" << (m + 1) << "]=" << plan.s[m] << "\n";
        } else if (finetune->parsed()) {
            print_report("final", ws.finetune_stage());
        } else if (evaluate->parsed()) {
            print_report("final", ws.evaluate_stage());
        } else if (baseline->parsed()) {
            print_report(baseline_kind, ws.run_baseline(baseline_kind));
        } else if (full->parsed()) {
            print_report("final", ws.full_pipeline());
        } else if (ablate->parsed()) {
            auto grid = ws.run_ablation();
            for (const auto& [name, rep] : grid) print_report(name, rep);
            std::cout << "report written to " << out_dir << "/ablation_report.csv\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
