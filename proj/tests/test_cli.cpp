#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "dpm4d/io.hpp"
#include "dpm4d/pipeline.hpp"

using namespace dpm4d;
namespace fs = std::filesystem;

namespace {

const fs::path work = fs::temp_directory_path() / "dpm4d_cli_test";

int run(const std::string& args, const std::string& out_file = "") {
    std::string cmd = std::string(DPM4D_CLI_PATH) + " " + args;
    cmd += out_file.empty() ? " > /dev/null 2>&1" : " > " + (work / out_file).string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& name) { return read_text_file(work / name); }

class Cli : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        fs::remove_all(work);
        fs::create_directories(work);
    }
    static std::string at(const std::string& name) { return (work / name).string(); }
};

}  // namespace

TEST_F(Cli, HelpAndUnknownCommands) {
    EXPECT_EQ(run("--help"), 0);
    EXPECT_EQ(run("dance"), 1);
    EXPECT_EQ(run(""), 1);
    EXPECT_EQ(run("infer --bogus"), 1);
}

TEST_F(Cli, ConfigInitWritesDefaults) {
    EXPECT_EQ(run("config init -o " + at("cfg.json")), 0);
    EXPECT_EQ(config_to_json(load_config(at("cfg.json"))), config_to_json(default_config()));
    EXPECT_EQ(run("config init", "stdout.json"), 0);
    EXPECT_EQ(slurp("stdout.json"), slurp("cfg.json"));
}

TEST_F(Cli, SynthWritesSequence) {
    EXPECT_EQ(run("synth -o " + at("seq") + " --frames 3 --seed 4"), 0);
    EXPECT_EQ(load_sequence(at("seq"), "manifest.txt").size(), 3u);
    EXPECT_EQ(load_annotations(at("seq") + "/annotations.json").entries.size(), 3u);
    EXPECT_EQ(run("synth -o " + at("bad") + " --frames 0"), 2);
    EXPECT_EQ(run("synth -o " + at("bad") + " --script moonwalk"), 1);
}

TEST_F(Cli, EvalOfGroundTruthIsPerfect) {
    ASSERT_EQ(run("synth -o " + at("gt") + " --frames 4 --seed 9"), 0);
    const auto gt = load_annotations(at("gt") + "/annotations.json");
    std::vector<PoseRecord> recs;
    for (const auto& e : gt.entries)
        recs.push_back({e.frame, e.pose, {}, {}});
    write_pose_json(at("gt_poses.json"), recs);
    ASSERT_EQ(run("eval --predictions " + at("gt_poses.json") + " --annotations " + at("gt/annotations.json") +
                      " --json " + at("report.json"),
                  "eval.txt"),
              0);
    const std::string table = slurp("eval.txt");
    EXPECT_NE(table.find("100.00"), std::string::npos) << table;
    const std::string json = slurp("report.json");
    EXPECT_NE(json.find("\"pck\""), std::string::npos) << json;
}

TEST_F(Cli, EvalRejectsUnknownParts) {
    write_text_file(at("weird.json"),
                    R"([{"frame": 0, "skeleton": "reduced10", "joints": [{"part": "tail", "x": 1, "y": 2}]}])");
    ASSERT_EQ(run("synth -o " + at("gt2") + " --frames 1"), 0);
    EXPECT_EQ(run("eval --predictions " + at("weird.json") + " --annotations " + at("gt2/annotations.json")), 2);
    EXPECT_EQ(run("eval --predictions " + at("missing.json") + " --annotations " + at("gt2/annotations.json")), 2);
}

TEST_F(Cli, TrainAndInferFailures) {
    write_text_file(at("c0.json"), R"({"training": {"C": 0}})");
    EXPECT_EQ(run("train --config " + at("c0.json")), 1);
    EXPECT_EQ(run("train --config " + at("nonexistent.json")), 1);
    ASSERT_EQ(run("synth -o " + at("seq3") + " --frames 2"), 0);
    write_text_file(at("nomodel.json"), R"({"paths": {"dataset": ")" + at("seq3") + R"(", "model": ")" +
                                            at("none.4ddpm") + R"("}})");
    EXPECT_EQ(run("infer --config " + at("nomodel.json")), 2);
}

TEST_F(Cli, RenderEmptyListWritesNothing) {
    write_text_file(at("empty.json"), "[]");
    EXPECT_EQ(run("render --dataset " + at("nowhere") + " --poses " + at("empty.json") + " -o " + at("ov")), 0);
    EXPECT_FALSE(fs::exists(at("ov")) && !fs::is_empty(at("ov")));
}

TEST_F(Cli, RenderDrawsEveryPose) {
    ASSERT_EQ(run("synth -o " + at("seq4") + " --frames 2"), 0);
    const auto gt = load_annotations(at("seq4") + "/annotations.json");
    std::vector<PoseRecord> recs;
    for (const auto& e : gt.entries)
        recs.push_back({e.frame, e.pose, {}, {}});
    write_pose_json(at("p4.json"), recs);
    EXPECT_EQ(run("render --dataset " + at("seq4") + " --poses " + at("p4.json") + " -o " + at("ov4")), 0);
    EXPECT_TRUE(fs::exists(at("ov4") + "/overlay_00000.png"));
    EXPECT_TRUE(fs::exists(at("ov4") + "/overlay_00001.png"));
    recs[0].frame = 7;
    write_pose_json(at("p5.json"), recs);
    EXPECT_EQ(run("render --dataset " + at("seq4") + " --poses " + at("p5.json") + " -o " + at("ov5")), 2);
}
