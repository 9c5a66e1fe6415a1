#include "dfka/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

#include "dfka/rng.hpp"

namespace dfka {

namespace {

constexpr int kMaxShapes = 4;   // circle, square, triangle, diamond
constexpr int kNumColors = 3;   // red, green, blue

const char* kShapeNames[kMaxShapes] = {"circle", "square", "triangle", "diamond"};
const char* kColorNames[kNumColors] = {"red", "green", "blue"};

struct Rgb {
    float r, g, b;
};

Rgb base_color(int color, bool rotate) {
    static const Rgb palette[kNumColors] = {{0.9f, 0.15f, 0.15f}, {0.15f, 0.85f, 0.2f}, {0.2f, 0.25f, 0.9f}};
    Rgb c = palette[rotate ? (color + 1) % kNumColors : color];
    return c;
}

bool inside(int shape, double dx, double dy, double s) {
    switch (shape) {
        case 0: return dx * dx + dy * dy <= s * s;
        case 1: return std::fabs(dx) <= s && std::fabs(dy) <= s;
        case 2: return dy >= -s && dy <= s && std::fabs(dx) <= (dy + s) * 0.9;
        default: return std::fabs(dx) + std::fabs(dy) <= s;
    }
}

}  // namespace

Tensor SyntheticMultiLabelDataset::image_batch(int begin, int count) const {
    const int c = images.dim(1), h = images.dim(2), w = images.dim(3);
    const std::int64_t stride = static_cast<std::int64_t>(c) * h * w;
    Tensor out({count, c, h, w});
    std::copy_n(images.data().data() + begin * stride, count * stride, out.data().data());
    return out;
}

Tensor SyntheticMultiLabelDataset::label_batch(int begin, int count) const {
    const int c = labels.dim(1);
    Tensor out({count, c});
    std::copy_n(labels.data().data() + static_cast<std::int64_t>(begin) * c,
                static_cast<std::int64_t>(count) * c, out.data().data());
    return out;
}

DatasetStyle similar_data_style() {
    DatasetStyle s;
    s.min_shapes = 2;
    s.max_shapes = 4;
    s.min_half_size = 3.0;
    s.max_half_size = 6.0;
    s.color_jitter = 0.15;
    s.background_level = 0.35;
    s.rotate_palette = true;
    return s;
}

SyntheticMultiLabelDataset generate_dataset(std::uint64_t seed, int n, int c_total,
                                            const DatasetStyle& style, int image_size,
                                            const std::string& split) {
    if (n < 200) throw std::invalid_argument("generate_dataset: need at least 200 samples, got " +
                                             std::to_string(n));
    if (c_total < 4) throw std::invalid_argument("generate_dataset: need at least 4 labels, got " +
                                                 std::to_string(c_total));
    if (c_total > kMaxShapes * kNumColors)
        throw std::invalid_argument("generate_dataset: at most " +
                                    std::to_string(kMaxShapes * kNumColors) +
                                    " shape/color combinations available, requested " +
                                    std::to_string(c_total));

    Rng rng(seed, split == "eval" ? "dataset-eval" : "dataset-train");
    SyntheticMultiLabelDataset ds;
    ds.seed = seed;
    ds.split = split;
    ds.images = Tensor({n, 3, image_size, image_size});
    ds.labels = Tensor({n, c_total});
    for (int c = 0; c < c_total; ++c) {
        ds.label_names.push_back(std::string(kColorNames[c % kNumColors]) + "_" +
                                 kShapeNames[c / kNumColors]);
    }

    auto img = ds.images.data();
    auto lab = ds.labels.data();
    const std::int64_t plane = static_cast<std::int64_t>(image_size) * image_size;
    for (int i = 0; i < n; ++i) {
        float* px = img.data() + static_cast<std::int64_t>(i) * 3 * plane;
        const float bg = static_cast<float>(style.background_level * (0.6 + 0.8 * rng.uniform()));
        for (std::int64_t p = 0; p < 3 * plane; ++p)
            px[p] = std::clamp(bg + static_cast<float>(rng.uniform(-0.05, 0.05)), 0.0f, 1.0f);

        const int count = rng.uniform_int(style.min_shapes, style.max_shapes);
        std::vector<int> combos;
        for (int s = 0; s < count; ++s) {
            int combo = rng.uniform_int(0, c_total - 1);
            if (std::find(combos.begin(), combos.end(), combo) == combos.end()) combos.push_back(combo);
        }
        std::vector<std::array<double, 3>> placed;  // cx, cy, s
        for (int combo : combos) {
            const int shape = combo / kNumColors;
            const int color = combo % kNumColors;
            const double s = rng.uniform(style.min_half_size, style.max_half_size);
            double cx = 0.0, cy = 0.0;
            // Keep shapes from occluding each other so labels stay clean.
            for (int attempt = 0; attempt < 50; ++attempt) {
                cx = rng.uniform(s + 1.0, image_size - s - 1.0);
                cy = rng.uniform(s + 1.0, image_size - s - 1.0);
                bool clear = true;
                for (const auto& p : placed) {
                    const double dx = cx - p[0], dy = cy - p[1];
                    if (std::sqrt(dx * dx + dy * dy) < 0.8 * (s + p[2])) { clear = false; break; }
                }
                if (clear) break;
            }
            placed.push_back({cx, cy, s});
            Rgb col = base_color(color, style.rotate_palette);
            col.r = std::clamp(col.r + static_cast<float>(rng.uniform(-style.color_jitter, style.color_jitter)), 0.0f, 1.0f);
            col.g = std::clamp(col.g + static_cast<float>(rng.uniform(-style.color_jitter, style.color_jitter)), 0.0f, 1.0f);
            col.b = std::clamp(col.b + static_cast<float>(rng.uniform(-style.color_jitter, style.color_jitter)), 0.0f, 1.0f);
            for (int y = 0; y < image_size; ++y) {
                for (int x = 0; x < image_size; ++x) {
                    if (!inside(shape, x - cx, y - cy, s)) continue;
                    px[0 * plane + y * image_size + x] = col.r;
                    px[1 * plane + y * image_size + x] = col.g;
                    px[2 * plane + y * image_size + x] = col.b;
                }
            }
            lab[static_cast<std::int64_t>(i) * c_total + combo] = 1.0f;
        }
    }

    // Marginal sanity: each label present in 10..60% of samples.
    for (int c = 0; c < c_total; ++c) {
        double m = 0.0;
        for (int i = 0; i < n; ++i) m += lab[static_cast<std::int64_t>(i) * c_total + c];
        m /= n;
        if (m < 0.1 || m > 0.6) {
            throw std::invalid_argument("generate_dataset: label " + ds.label_names[static_cast<size_t>(c)] +
                                        " marginal " + std::to_string(m) + " outside [0.1,0.6]");
        }
    }
    return ds;
}

void TaskSplit::validate(int c_total) const {
    if (teacher_labels.empty()) throw std::invalid_argument("TaskSplit: no teachers");
    std::set<int> uni;
    for (const auto& tl : teacher_labels) {
        if (tl.empty()) throw std::invalid_argument("TaskSplit: a teacher has an empty label set");
        for (int l : tl) {
            if (l < 0 || l >= c_total)
                throw std::invalid_argument("TaskSplit: label " + std::to_string(l) + " outside [0," +
                                            std::to_string(c_total) + ")");
            uni.insert(l);
        }
    }
    if (y_cst.empty()) throw std::invalid_argument("TaskSplit: empty customized label set");
    for (int l : y_cst) {
        if (!uni.count(l))
            throw std::invalid_argument("TaskSplit: customized label " + std::to_string(l) +
                                        " is not covered by any teacher");
    }
}

void save_dataset(const SyntheticMultiLabelDataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_dataset: cannot write " + path);
    out << "dfka-dataset v1\n";
    out << ds.size() << " " << ds.num_labels() << " " << ds.images.dim(2) << " " << ds.split << " "
        << ds.seed << "\n";
    for (const auto& name : ds.label_names) out << name << " ";
    out << "\n";
    const auto img = ds.images.data();
    const auto lab = ds.labels.data();
    out.write(reinterpret_cast<const char*>(img.data()),
              static_cast<std::streamsize>(img.size() * sizeof(float)));
    out.write(reinterpret_cast<const char*>(lab.data()),
              static_cast<std::streamsize>(lab.size() * sizeof(float)));
}

SyntheticMultiLabelDataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
    std::string header;
    std::getline(in, header);
    if (header != "dfka-dataset v1") throw std::runtime_error("load_dataset: bad header in " + path);
    int n = 0, c = 0, s = 0;
    SyntheticMultiLabelDataset ds;
    in >> n >> c >> s >> ds.split >> ds.seed;
    ds.label_names.resize(static_cast<size_t>(c));
    for (auto& name : ds.label_names) in >> name;
    in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
    ds.images = Tensor({n, 3, s, s});
    ds.labels = Tensor({n, c});
    auto img = ds.images.data();
    auto lab = ds.labels.data();
    in.read(reinterpret_cast<char*>(img.data()), static_cast<std::streamsize>(img.size() * sizeof(float)));
    in.read(reinterpret_cast<char*>(lab.data()), static_cast<std::streamsize>(lab.size() * sizeof(float)));
    if (!in) throw std::runtime_error("load_dataset: truncated file " + path);
    return ds;
}

}  // namespace dfka
