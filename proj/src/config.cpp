#include "dfka/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dfka {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<int> parse_int_list(const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        const auto dash = tok.find("..");
        if (dash != std::string::npos) {
            int lo = std::stoi(tok.substr(0, dash));
            int hi = std::stoi(tok.substr(dash + 2));
            for (int i = lo; i <= hi; ++i) out.push_back(i);
        } else {
            out.push_back(std::stoi(tok));
        }
    }
    return out;
}

std::vector<float> parse_float_list(const std::string& v) {
    std::vector<float> out;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(std::stof(tok));
    }
    return out;
}

}  // namespace

void PipelineConfig::finalize() {
    if (teacher_labels.empty()) {
        // Default split: two teachers with a two-label overlap.
        if (num_teachers == 2 && c_total >= 12) {
            teacher_labels = {parse_int_list("0..6"), parse_int_list("5..11")};
        } else {
            // Even split with one overlapping label between neighbours.
            teacher_labels.resize(static_cast<size_t>(num_teachers));
            const int per = (c_total + num_teachers - 1) / num_teachers;
            for (int m = 0; m < num_teachers; ++m) {
                int lo = std::max(0, m * per - (m > 0 ? 1 : 0));
                int hi = std::min(c_total - 1, (m + 1) * per - 1);
                for (int i = lo; i <= hi; ++i)
                    teacher_labels[static_cast<size_t>(m)].push_back(i);
            }
        }
    }
    if (y_cst.empty()) {
        if (num_teachers == 2 && c_total >= 12) {
            y_cst = parse_int_list("2..9");
        } else {
            std::set<int> all;
            for (const auto& tl : teacher_labels) all.insert(tl.begin(), tl.end());
            y_cst.assign(all.begin(), all.end());
        }
    }

    // The customized set must be covered by the union of teacher sets.
    std::set<int> uni;
    for (const auto& tl : teacher_labels) uni.insert(tl.begin(), tl.end());
    for (int l : y_cst) {
        if (!uni.count(l)) {
            throw std::invalid_argument("config: customized label " + std::to_string(l) +
                                        " is not covered by any teacher label set");
        }
    }
    for (const auto& tl : teacher_labels) {
        for (int l : tl) {
            if (l < 0 || l >= c_total)
                throw std::invalid_argument("config: teacher label " + std::to_string(l) +
                                            " outside [0," + std::to_string(c_total) + ")");
        }
    }
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    PipelineConfig cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: malformed line " + std::to_string(lineno) + ": " + line);
        const std::string key = section + "." + trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));

        if (key == "dataset.n_train") cfg.n_train = std::stoi(val);
        else if (key == "dataset.n_eval") cfg.n_eval = std::stoi(val);
        else if (key == "dataset.c_total") cfg.c_total = std::stoi(val);
        else if (key == "dataset.image_size") cfg.image_size = std::stoi(val);
        else if (key == "teachers.num_teachers") cfg.num_teachers = std::stoi(val);
        else if (key == "teachers.epochs") cfg.teacher_epochs = std::stoi(val);
        else if (key == "teachers.batch") cfg.batch = std::stoi(val);
        else if (key == "teachers.lr") cfg.teacher_lr = std::stof(val);
        else if (key == "teachers.weight_decay") cfg.teacher_weight_decay = std::stof(val);
        else if (key.rfind("teachers.labels", 0) == 0) cfg.teacher_labels.push_back(parse_int_list(val));
        else if (key == "teachers.y_cst") cfg.y_cst = parse_int_list(val);
        else if (key == "generator.noise_dim") cfg.noise_dim = std::stoi(val);
        else if (key == "generator.iters") cfg.gen_iters = std::stoi(val);
        else if (key == "generator.lr") cfg.gen_lr = std::stof(val);
        else if (key == "generator.alpha") cfg.alpha = std::stof(val);
        else if (key == "generator.beta") cfg.beta = std::stof(val);
        else if (key == "generator.gamma") cfg.gamma = std::stof(val);
        else if (key == "generator.epsilon") cfg.epsilon = std::stof(val);
        else if (key == "dual.iters_per_block") cfg.dual_iters_per_block = std::stoi(val);
        else if (key == "dual.lambda_in1") cfg.lambda_in1 = std::stof(val);
        else if (key == "dual.lambda_in2") cfg.lambda_in2 = std::stof(val);
        else if (key == "dual.lambda_m") cfg.lambda_m = parse_float_list(val);
        else if (key == "dual.window") cfg.window = std::stoi(val);
        else if (key == "branch.finetune_iters") cfg.finetune_iters = std::stoi(val);
        else if (key == "branch.resynthesize") cfg.resynthesize = (val == "1" || val == "true");
        else if (key == "optimizer.base_lr") cfg.base_lr = std::stof(val);
        else if (key == "optimizer.momentum") cfg.momentum = std::stof(val);
        else if (key == "optimizer.weight_decay") cfg.weight_decay = std::stof(val);
        else if (key == "optimizer.power") cfg.power = std::stof(val);
        else if (key == "eval.top_k") cfg.top_k = std::stoi(val);
        else if (key == "misc.seed") cfg.seed = std::stoull(val);
        else if (key == "misc.bit_exact") cfg.bit_exact = (val == "1" || val == "true");
        else if (key == "misc.filter_reduction") cfg.filter_reduction = std::stoi(val);
        else if (key == "misc.ablate_gen_iters") cfg.ablate_gen_iters = std::stoi(val);
        else if (key == "misc.ablate_dual_iters") cfg.ablate_dual_iters = std::stoi(val);
        else if (key == "misc.ablate_finetune_iters") cfg.ablate_finetune_iters = std::stoi(val);
        else throw std::runtime_error("config: unknown key '" + key + "' at line " + std::to_string(lineno));
    }
    cfg.finalize();
    return cfg;
}

void write_default_config(const std::string& path) {
    PipelineConfig c;
    c.finalize();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("config: cannot write " + path);
    out << "[dataset]\n"
        << "n_train=" << c.n_train << "\nn_eval=" << c.n_eval << "\nc_total=" << c.c_total
        << "\nimage_size=" << c.image_size << "\n\n[teachers]\nnum_teachers=" << c.num_teachers
        << "\nepochs=" << c.teacher_epochs << "\nbatch=" << c.batch << "\nlr=" << c.teacher_lr
        << "\nweight_decay=" << c.teacher_weight_decay << "\nlabels1=0..6\nlabels2=5..11\n"
        << "y_cst=2..9\n\n[generator]\nnoise_dim=" << c.noise_dim << "\niters=" << c.gen_iters << "\nlr=" << c.gen_lr
        << "\nalpha=" << c.alpha << "\nbeta=" << c.beta << "\ngamma=" << c.gamma
        << "\nepsilon=" << c.epsilon << "\n\n[dual]\niters_per_block=" << c.dual_iters_per_block
        << "\nlambda_in1=" << c.lambda_in1 << "\nlambda_in2=" << c.lambda_in2 << "\nwindow=" << c.window
        << "\n\n[branch]\nfinetune_iters=" << c.finetune_iters
        << "\nresynthesize=" << (c.resynthesize ? 1 : 0) << "\n\n[optimizer]\nbase_lr=" << c.base_lr
        << "\nmomentum=" << c.momentum << "\nweight_decay=" << c.weight_decay << "\npower=" << c.power
        << "\n\n[eval]\ntop_k=" << c.top_k << "\n\n[misc]\nseed=" << c.seed
        << "\nbit_exact=" << (c.bit_exact ? 1 : 0) << "\nfilter_reduction=" << c.filter_reduction
        << "\nablate_gen_iters=" << c.ablate_gen_iters << "\nablate_dual_iters=" << c.ablate_dual_iters
        << "\nablate_finetune_iters=" << c.ablate_finetune_iters << "\n";
}

}  // namespace dfka
