#include <doctest.h>

#include <set>
#include <vector>

#include "dfka/nets.hpp"
#include "dfka/ops.hpp"
#include "dfka/rng.hpp"

using namespace dfka;

namespace {

ArchSpec tiny_arch(int num_blocks) {
    ArchSpec a;
    a.image_size = 8;
    a.channels.assign(static_cast<size_t>(num_blocks), 4);
    a.strides.assign(static_cast<size_t>(num_blocks), 1);
    return a;
}

TeacherNet tiny_teacher(int num_blocks, Rng& rng) {
    return make_teacher(tiny_arch(num_blocks), {0, 1}, {"a", "b"}, rng);
}

}  // namespace

TEST_CASE("discriminator assembly matches brute-force enumeration for all depths") {
    Rng rng(1, "asm");
    for (int B = 1; B <= 6; ++B) {
        TeacherNet t = tiny_teacher(B, rng);

        for (int j = 1; j <= B; ++j) {
            // The group-stack discriminator for generator group j is the
            // union of the trailing j teacher blocks.
            std::vector<int> expected;
            for (int i = B - j + 1; i <= B; ++i) expected.push_back(i);
            CHECK(assemble_discriminator(t, j).block_indices() == expected);
        }
        for (int b = 1; b <= B; ++b) {
            // The dual discriminator for student block b is everything
            // after block b; b = B leaves only the head.
            std::vector<int> expected;
            for (int i = b + 1; i <= B; ++i) expected.push_back(i);
            CHECK(assemble_dual_discriminator(t, b).block_indices() == expected);
        }
        // Duality: the two constructions coincide at mirrored indices.
        for (int j = 1; j < B; ++j) {
            CHECK(assemble_discriminator(t, j).block_indices() ==
                  assemble_dual_discriminator(t, B - j).block_indices());
        }
    }
}

TEST_CASE("discriminator assembly rejects out-of-range indices") {
    Rng rng(1, "asm-err");
    TeacherNet t = tiny_teacher(3, rng);
    CHECK_THROWS(assemble_discriminator(t, 0));
    CHECK_THROWS(assemble_discriminator(t, 4));
    CHECK_THROWS(assemble_dual_discriminator(t, 0));
    CHECK_THROWS(assemble_dual_discriminator(t, 4));
}

TEST_CASE("head-only dual discriminator still ends in label space") {
    Rng rng(1, "headonly");
    TeacherNet t = tiny_teacher(2, rng);
    Tensor f = t.features(Tensor::zeros({2, 3, 8, 8}), 2);
    auto out = assemble_dual_discriminator(t, 2).run(f);
    CHECK(out.predictions.shape() == Shape{2, 2});
    for (float v : out.predictions.data()) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }
}

TEST_CASE("teacher forward and features are consistent") {
    Rng rng(1, "tf");
    TeacherNet t = tiny_teacher(3, rng);
    Tensor img(Shape{2, 3, 8, 8});
    Rng data(2, "img");
    for (auto& v : img.data()) v = static_cast<float>(data.uniform());

    Tensor full = t.forward(img);
    // Running the remaining blocks plus head from level 1 must agree.
    Tensor f1 = t.features(img, 1);
    auto disc = assemble_dual_discriminator(t, 1);
    auto out = disc.run(f1);
    for (std::int64_t i = 0; i < full.numel(); ++i)
        CHECK(out.predictions.data()[i] == full.data()[i]);
}

TEST_CASE("zero-parameter teacher filter gates every channel by one half") {
    TeacherFilter f;
    f.channels = 3;
    f.reduction = 1;
    f.w1 = Tensor::zeros({3, 3});
    f.b1 = Tensor::zeros({3});
    f.w2 = Tensor::zeros({3, 3});
    f.b2 = Tensor::zeros({3});
    Tensor x = Tensor::from({1, 3, 1, 2}, {2, 2, 4, 4, 6, 6});
    Tensor y = f.apply(x);
    for (std::int64_t i = 0; i < x.numel(); ++i)
        CHECK(y.data()[i] == doctest::Approx(0.5f * x.data()[i]));
}

TEST_CASE("teacher filter keeps shape and stays positive") {
    Rng rng(1, "filter");
    TeacherFilter f = make_teacher_filter(8, 4, rng);
    Tensor x(Shape{2, 8, 4, 4});
    for (auto& v : x.data()) v = static_cast<float>(rng.uniform(-1, 1));
    Tensor y = f.apply(x);
    CHECK(y.shape() == x.shape());
}

TEST_CASE("teacher filter reduction floor is one unit") {
    Rng rng(1, "filter-min");
    TeacherFilter f = make_teacher_filter(2, 16, rng);  // 2/16 rounds up to 1
    CHECK(f.w1.shape() == Shape{2, 1});
}

TEST_CASE("task filter selects and validates") {
    TaskFilter f({1, 3});
    Tensor y = Tensor::from({2, 4}, {0, 1, 2, 3, 4, 5, 6, 7});
    Tensor s = f.apply(y);
    CHECK(s.shape() == Shape{2, 2});
    CHECK(s.data()[0] == 1);
    CHECK(s.data()[1] == 3);
    CHECK(s.data()[2] == 5);
    CHECK(s.data()[3] == 7);

    CHECK_THROWS(TaskFilter(std::vector<int>{}));
    CHECK_THROWS(TaskFilter({2, 1}));   // unsorted
    CHECK_THROWS(TaskFilter({1, 1}));   // duplicate
    CHECK_THROWS(TaskFilter({-1}));
}

TEST_CASE("generator groups mirror the teacher geometry") {
    ArchSpec arch;  // 32px, channels 16/32/64/128
    Rng rng(1, "gen");
    GeneratorStack gen = make_generator(arch, 64, rng);
    REQUIRE(gen.num_groups() == 4);

    Tensor z(Shape{2, 64});
    for (auto& v : z.data()) v = static_cast<float>(rng.normal());
    auto feats = gen.forward(z);
    REQUIRE(feats.size() == 4);
    const int B = arch.num_blocks();
    for (int j = 1; j <= B; ++j) {
        // Group j emits the input of teacher block B-j+1, i.e. the output
        // shape of block B-j.
        CHECK(feats[static_cast<size_t>(j - 1)].shape() ==
              Shape{2, arch.out_channels(B - j), arch.out_res(B - j), arch.out_res(B - j)});
    }
    // The image level is tanh mapped into [0,1].
    for (float v : feats.back().data()) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }
}

TEST_CASE("generator construction rejects unreachable resolutions") {
    ArchSpec arch;
    arch.image_size = 10;
    arch.channels = {4, 4};
    arch.strides = {3, 1};  // 10 -> 3 truncates; 10 is not a multiple of 3
    Rng rng(1, "drift");
    CHECK_THROWS_WITH_AS(make_generator(arch, 16, rng), doctest::Contains("shape drift"),
                         std::invalid_argument);
}

TEST_CASE("generator filter bank covers exactly the intermediate groups") {
    ArchSpec arch;
    Rng rng(1, "gf");
    auto filters = make_generator_filters(arch, 2, 4, rng);
    REQUIRE(filters.size() == 3);  // groups 1..B-1
    const int B = arch.num_blocks();
    for (int j = 1; j < B; ++j) {
        REQUIRE(filters[static_cast<size_t>(j - 1)].size() == 2);
        CHECK(filters[static_cast<size_t>(j - 1)][0].channels == arch.out_channels(B - j));
    }
}

TEST_CASE("targetnet filters align with block outputs") {
    ArchSpec arch;
    Rng rng(1, "tn");
    TargetNet tn = make_targetnet(arch, 2, 4, rng);
    REQUIRE(tn.blocks.size() == 4);
    REQUIRE(tn.filters.size() == 4);
    for (int b = 1; b <= 4; ++b) {
        CHECK(tn.filters[static_cast<size_t>(b - 1)][0].channels == arch.out_channels(b));
        CHECK(tn.filters[static_cast<size_t>(b - 1)].size() == 2);
    }
    CHECK(tn.trained_blocks == 0);
}

TEST_CASE("param_hash is sensitive to values and names") {
    Rng rng(1, "hash");
    TeacherNet t = tiny_teacher(2, rng);
    const auto h0 = param_hash(t.named_params());
    t.head.b.data()[0] += 1.0f;
    CHECK(param_hash(t.named_params()) != h0);
}

TEST_CASE("deep_copy produces independent parameters") {
    Rng rng(1, "dc");
    TeacherNet t = tiny_teacher(2, rng);
    Block copy = t.blocks[0].deep_copy();
    NamedParams a, b;
    t.blocks[0].collect("x", a);
    copy.collect("x", b);
    REQUIRE(a.size() == b.size());
    b[0].second.data()[0] += 5.0f;
    CHECK(a[0].second.data()[0] != b[0].second.data()[0]);
}

TEST_CASE("teacher parameter names are unique and stable") {
    Rng rng(1, "names");
    TeacherNet t = tiny_teacher(3, rng);
    auto params = t.named_params();
    std::set<std::string> names;
    for (const auto& [name, tensor] : params) names.insert(name);
    CHECK(names.size() == params.size());
}
