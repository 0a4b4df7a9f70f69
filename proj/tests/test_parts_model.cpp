#include <cmath>
#include <limits>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "dpm4d/distance_transform.hpp"
#include "dpm4d/model_io.hpp"
#include "dpm4d/parts_model.hpp"
#include "support.hpp"

using namespace dpm4d;
using namespace dpm4d::testing;

namespace {

constexpr double ninf = -std::numeric_limits<double>::infinity();

PartsModel small_model(int parts, int types, std::mt19937_64& rng, FilterShape shape = {3, 3}) {
    PartsModel m(random_tree(parts, rng), std::vector<int>(parts, types), std::vector<FilterShape>(parts, shape), 8, 2);
    randomize(m, rng);
    return m;
}

}  // namespace

TEST(Deformation, FeatureIsChildMinusParent) {
    const auto f = deformation_feature({5, 2}, {2, 6});
    EXPECT_EQ(f[0], 3);
    EXPECT_EQ(f[1], 9);
    EXPECT_EQ(f[2], -4);
    EXPECT_EQ(f[3], 16);
}

TEST(DistanceTransform, EnvelopeMatchesExhaustive) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 3.0);
    std::uniform_real_distribution<double> q(0.01, 2.0);
    std::bernoulli_distribution hole(0.2);
    for (int trial = 0; trial < 300; ++trial) {
        const int len = 1 + trial % 23;
        std::vector<double> in(len);
        for (auto& v : in)
            v = hole(rng) ? ninf : n(rng);
        const double lin = n(rng), quad = -q(rng);
        std::vector<double> a(len), b(len);
        std::vector<int> ia(len), ib(len);
        max_envelope_1d(in, lin, quad, a, ia);
        max_exhaustive_1d(in, lin, quad, b, ib);
        for (int p = 0; p < len; ++p) {
            if (std::isinf(b[p])) {
                EXPECT_TRUE(std::isinf(a[p]));
                EXPECT_EQ(ia[p], -1);
                continue;
            }
            EXPECT_NEAR(a[p], b[p], 1e-9);
            // the argmax may differ on ties, its value may not
            EXPECT_NEAR(in[ia[p]] + lin * (ia[p] - p) + quad * (ia[p] - p) * (ia[p] - p), b[p], 1e-9);
        }
    }
}

TEST(DistanceTransform, EnvelopeRejectsNonConcave) {
    std::vector<double> in(4, 0.0), out(4);
    std::vector<int> arg(4);
    EXPECT_THROW(max_envelope_1d(in, 0.0, 0.0, out, arg), ArgumentError);
    EXPECT_THROW(max_envelope_1d(in, 0.0, 0.5, out, arg), ArgumentError);
    EXPECT_NO_THROW(max_exhaustive_1d(in, 0.0, 0.5, out, arg));
    std::vector<double> shorter(3);
    EXPECT_THROW(max_envelope_1d(in, 0.0, -1.0, shorter, arg), DimensionError);
}

TEST(DistanceTransform, AllInfinite) {
    std::vector<double> in(5, ninf), out(5);
    std::vector<int> arg(5);
    max_envelope_1d(in, 1.0, -1.0, out, arg);
    for (int p = 0; p < 5; ++p) {
        EXPECT_TRUE(std::isinf(out[p]));
        EXPECT_EQ(arg[p], -1);
    }
}

TEST(Inference, DynamicProgramMatchesBruteForce) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const int parts = 1 + trial % 3;
        const int types = 1 + trial % 2;
        PartsModel m = small_model(parts, types, rng);
        const auto fm = random_grid(3, 4, 2, rng), fd = random_grid(3, 4, 2, rng);
        const auto want = brute_force(m, fm, fd);
        for (auto method : {MessageMethod::automatic, MessageMethod::exhaustive, MessageMethod::distance_transform}) {
            InferenceParams ip;
            ip.method = method;
            const auto dets = infer_poses(m, fm, fd, ip);
            ASSERT_FALSE(dets.empty());
            EXPECT_NEAR(dets[0].score, want.score, 1e-9);
            EXPECT_NEAR(score_configuration(m, fm, fd, dets[0].config), want.score, 1e-9);
        }
    }
}

TEST(Inference, ConvexWeightsFallBackToExhaustive) {
    std::mt19937_64 rng(8);
    PartsModel m = small_model(3, 1, rng);
    for (std::size_t i : m.quadratic_indices())
        m.weights()[i] = 0.3;
    const auto fm = random_grid(4, 4, 2, rng), fd = random_grid(4, 4, 2, rng);
    InferenceParams dt;
    dt.method = MessageMethod::distance_transform;
    EXPECT_THROW(infer_poses(m, fm, fd, dt), ArgumentError);
    const auto got = infer_poses(m, fm, fd);
    EXPECT_NEAR(got[0].score, tree_exhaustive(m, fm, fd).score, 1e-9);
}

TEST(Inference, ScoreIsWeightsDotFeature) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        PartsModel m = small_model(4, 2, rng, {1 + trial % 3, 2});
        const auto fm = random_grid(5, 6, 2, rng), fd = random_grid(5, 6, 2, rng);
        Configuration cfg(4);
        std::uniform_int_distribution<int> t(0, 1), r(0, 4), c(0, 5);
        for (auto& s : cfg)
            s = {t(rng), r(rng), c(rng)};
        const double direct = score_configuration(m, fm, fd, cfg);
        EXPECT_NEAR(direct, dot(m.weights(), joint_feature(m, fm, fd, cfg)), 1e-9);
        double oracle = 0.0;
        for (int p = 0; p < 4; ++p)
            oracle += appearance(m, p, cfg[p].type, fm, fd, cfg[p].row, cfg[p].col);
        for (int p = 1; p < 4; ++p) {
            const int q = m.skeleton().parent(p);
            oracle += pairwise(m, p, cfg[p].type, cfg[q].type, cfg[p].row, cfg[p].col, cfg[q].row, cfg[q].col);
        }
        EXPECT_NEAR(direct, oracle, 1e-9);
    }
}

TEST(Inference, BadConfigurationRejected) {
    std::mt19937_64 rng(2);
    PartsModel m = small_model(2, 1, rng);
    const auto fm = random_grid(3, 3, 2, rng), fd = random_grid(3, 3, 2, rng);
    EXPECT_THROW(score_configuration(m, fm, fd, {{0, 0, 0}}), ArgumentError);
    EXPECT_THROW(score_configuration(m, fm, fd, {{0, 0, 0}, {0, 3, 0}}), ArgumentError);
    EXPECT_THROW(score_configuration(m, fm, fd, {{0, 0, 0}, {1, 0, 0}}), ArgumentError);
    const auto other = random_grid(3, 4, 2, rng);
    EXPECT_THROW(compute_score_maps(m, fm, other), DimensionError);
}

TEST(Inference, LocalScoreNeedsEveryChildMessage) {
    SkeletonDef sk({"a", "b"}, {{0, 1}});
    PartsModel m(sk, {1, 1}, {{1, 1}, {1, 1}}, 8, 2);
    std::mt19937_64 rng(1);
    const auto fm = random_grid(3, 3, 2, rng), fd = random_grid(3, 3, 2, rng);
    EXPECT_THROW(local_score(m, 0, 0, fm, fd, {}), ContractError);
    EXPECT_NO_THROW(local_score(m, 1, 0, fm, fd, {}));
}

TEST(Inference, NmsKeepsOrderAndCount) {
    std::mt19937_64 rng(5);
    PartsModel m = small_model(2, 1, rng, {1, 1});
    const auto fm = random_grid(10, 12, 2, rng), fd = random_grid(10, 12, 2, rng);
    InferenceParams ip;
    ip.max_detections = 4;
    ip.nms_overlap = 0.0;
    const auto dets = infer_poses(m, fm, fd, ip);
    ASSERT_LE(dets.size(), 4u);
    ASSERT_GE(dets.size(), 1u);
    for (std::size_t i = 1; i < dets.size(); ++i)
        EXPECT_GE(dets[i - 1].score, dets[i].score);
    // with zero allowed overlap no two kept detections share a cell box
    for (std::size_t i = 0; i < dets.size(); ++i)
        for (std::size_t j = i + 1; j < dets.size(); ++j)
            for (const auto& a : dets[i].config)
                for (const auto& b : dets[j].config)
                    EXPECT_FALSE(a.row == b.row && a.col == b.col);

    ip.nms_overlap = 1.0;
    ip.max_detections = 3;
    EXPECT_EQ(infer_poses(m, fm, fd, ip).size(), 3u);
    ip.max_detections = 0;
    EXPECT_THROW(infer_poses(m, fm, fd, ip), ConfigError);
}

TEST(Inference, ThresholdDropsWeakDetections) {
    std::mt19937_64 rng(6);
    PartsModel m = small_model(2, 1, rng, {1, 1});
    const auto fm = random_grid(6, 6, 2, rng), fd = random_grid(6, 6, 2, rng);
    InferenceParams ip;
    ip.threshold = 1e9;
    EXPECT_TRUE(infer_poses(m, fm, fd, ip).empty());
}

TEST(Inference, PosesAreCellCentres) {
    std::mt19937_64 rng(9);
    PartsModel m = small_model(3, 1, rng);
    const auto fm = random_grid(5, 5, 2, rng), fd = random_grid(5, 5, 2, rng);
    const auto d = infer_poses(m, fm, fd).front();
    for (int p = 0; p < 3; ++p) {
        EXPECT_EQ(d.pose.joints[p].x, (d.config[p].col + 0.5) * 8);
        EXPECT_EQ(d.pose.joints[p].y, (d.config[p].row + 0.5) * 8);
    }
}

TEST(Cells, RoundTripAndClamp) {
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 7; ++c) {
            const auto p = cell_center(r, c, 8);
            const auto s = pixel_to_cell(p.x, p.y, 8, 6, 7);
            EXPECT_EQ(s.row, r);
            EXPECT_EQ(s.col, c);
        }
    const auto s = pixel_to_cell(-5, 1000, 8, 6, 7);
    EXPECT_EQ(s.row, 5);
    EXPECT_EQ(s.col, 0);
    const auto half = cell_center(1, 1, 8, 0.5);
    EXPECT_EQ(half.x, 24.0);
}

TEST(Inference, PyramidIncludesFullResolution) {
    std::mt19937_64 rng(12);
    PartsModel m(reduced10_skeleton(), std::vector<int>(10, 1), std::vector<FilterShape>(10, {3, 3}));
    randomize(m, rng);
    RgbdFrame f(RgbImage(96, 64, 3), DepthImage(96, 64), 0);
    std::uniform_int_distribution<int> px(0, 255);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 96; ++x) {
            f.depth.at(x, y) = static_cast<std::uint16_t>(2000 + 10 * px(rng));
            for (int k = 0; k < 3; ++k)
                f.rgb.at(x, y, k) = static_cast<std::uint8_t>(px(rng));
        }
    InferenceParams flat;
    flat.max_detections = 1;
    InferenceParams pyr = flat;
    pyr.pyramid = true;
    const auto a = infer_poses(m, f, flat);
    const auto b = infer_poses(m, f, pyr);
    ASSERT_FALSE(a.empty());
    ASSERT_FALSE(b.empty());
    EXPECT_GE(b[0].score, a[0].score);
    EXPECT_LE(b[0].scale, 1.0);
}

TEST(ModelIo, RoundTripAtFloatPrecision) {
    std::mt19937_64 rng(13);
    PartsModel m = small_model(4, 2, rng);
    const PartsModel back = deserialize_model(serialize_model(m));
    EXPECT_EQ(back.skeleton().names(), m.skeleton().names());
    EXPECT_EQ(back.type_counts(), m.type_counts());
    EXPECT_EQ(back.filter_shapes(), m.filter_shapes());
    ASSERT_EQ(back.weights().size(), m.weights().size());
    for (std::size_t i = 0; i < m.weights().size(); ++i)
        EXPECT_EQ(back.weights()[i], static_cast<double>(static_cast<float>(m.weights()[i])));
    // a second round trip is exact
    EXPECT_EQ(deserialize_model(serialize_model(back)), back);
}

TEST(ModelIo, CorruptFilesRejected) {
    std::mt19937_64 rng(14);
    const std::string good = serialize_model(small_model(3, 1, rng));
    std::string bad = good;
    bad[0] = 'X';
    EXPECT_THROW(deserialize_model(bad), FormatError);
    bad = good;
    bad[5] = 9;
    EXPECT_THROW(deserialize_model(bad), FormatError);
    EXPECT_THROW(deserialize_model(good.substr(0, good.size() - 3)), FormatError);
    EXPECT_THROW(deserialize_model(good.substr(0, 7)), FormatError);
    EXPECT_THROW(deserialize_model(good + "xxxx"), FormatError);
    EXPECT_THROW(load_model("/nonexistent/model.4ddpm"), IoError);
}
