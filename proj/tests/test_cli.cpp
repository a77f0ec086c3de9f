#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nvi/cli/app.hpp"
#include "nvi/cli/config.hpp"
#include "nvi/error.hpp"

using namespace nvi;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result nvi_run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// A small synthetic dataset plus config in a fresh directory.
struct Workspace {
    fs::path root;
    explicit Workspace(const std::string& name) : root(fs::temp_directory_path() / name) {
        fs::remove_all(root);
        fs::create_directories(root);
        json cfg;
        cfg["manifest"] = "data/manifest.jsonl";
        cfg["out_dir"] = "runs";
        cfg["seed"] = 5;
        cfg["workers"] = 2;
        cfg["synth"] = {{"train_teachers", 3},         {"validation_teachers", 2}, {"external_teachers", 3},
                        {"segments_per_video", 2},     {"segment_duration", 8},   {"labelled_frames_per_segment", 4},
                        {"width", 96},                 {"height", 96}};
        cfg["gesture"] = {{"epochs", 2}};
        cfg["distance"] = {{"epochs", 2}};
        cfg["nvi"] = {{"epochs", 5}};
        cfg["teacher_measures"] = "data/measures_teacher.csv";
        cfg["video_measures"] = "data/measures_video.csv";
        std::ofstream(config()) << cfg.dump(2);
    }
    ~Workspace() { fs::remove_all(root); }
    fs::path config() const { return root / "config.json"; }
    std::vector<std::string> with(std::vector<std::string> args, const std::string& run_id = "r1") const {
        args.insert(args.end(), {"--config", config().string(), "--run-id", run_id});
        return args;
    }
    fs::path run(const std::string& id = "r1") const { return root / "runs" / id; }
    Result synth() const { return nvi_run({"synth", "--config", config().string(), "--out", (root / "data").string()}); }
};

void full_pipeline(const Workspace& w, const std::string& id) {
    REQUIRE(nvi_run(w.with({"extract"}, id)).code == 0);
    for (const char* kind : {"gesture", "distance", "nvi"}) {
        const auto r = nvi_run(w.with({"train", kind}, id));
        INFO(r.err);
        REQUIRE(r.code == 0);
    }
    REQUIRE(nvi_run(w.with({"evaluate"}, id)).code == 0);
    REQUIRE(nvi_run(w.with({"validate-external"}, id)).code == 0);
    REQUIRE(nvi_run(w.with({"report"}, id)).code == 0);
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(nvi_run({}).code == 2);
    CHECK(nvi_run({"frobnicate"}).code == 2);
    CHECK(nvi_run({"extract", "--workers", "0"}).code == 2);
    const auto help = nvi_run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("validate-external") != std::string::npos);

    const auto missing = nvi_run({"extract", "--out-dir", (fs::temp_directory_path() / "nvi_cli_none").string()});
    CHECK(missing.code == 2);
    CHECK(missing.err.find("manifest") != std::string::npos);
    CHECK(missing.err.find("Usage") != std::string::npos);
    CHECK(nvi_run({"extract", "--manifest", "/nonexistent/manifest.jsonl", "--out-dir",
                   (fs::temp_directory_path() / "nvi_cli_none").string()})
              .code == 2);
    fs::remove_all(fs::temp_directory_path() / "nvi_cli_none");
}

TEST_CASE("config validation") {
    Workspace w("nvi_cli_config");
    std::ofstream(w.root / "bad.json") << R"({"manifest": "m.jsonl", "colour": "blue"})";
    const auto r = nvi_run({"report", "--config", (w.root / "bad.json").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("colour") != std::string::npos);

    std::ofstream(w.root / "lr.json") << R"({"gesture": {"learning_rate": -1}})";
    CHECK(nvi_run({"report", "--config", (w.root / "lr.json").string()}).code == 2);

    const auto c = cli::load_config(w.config());
    CHECK(c.manifest == w.root / "data/manifest.jsonl");
    CHECK(c.synth.train_teachers == 3);
    CHECK_THROWS_AS(cli::load_config(w.root / "absent.json"), ConfigError);
}

TEST_CASE("the config environment variable supplies the default config") {
    Workspace w("nvi_cli_env");
    REQUIRE(w.synth().code == 0);
    ::setenv(cli::kConfigEnv, w.config().string().c_str(), 1);
    const auto r = nvi_run({"extract", "--run-id", "env"});
    ::unsetenv(cli::kConfigEnv);
    CHECK(r.code == 0);
    CHECK(fs::exists(w.run("env") / "observations" / "seg_0001.nviobs"));
    // Flags override the file.
    const auto cfg = json::parse(slurp(w.run("env") / "run_config.json"));
    CHECK(cfg["run_id"] == "env");
    CHECK(cfg["seed"] == 5);
    CHECK(cfg["gesture"]["seed"] == 5);
}

TEST_CASE("synthetic pipeline end to end") {
    Workspace w("nvi_cli_pipeline");
    REQUIRE(w.synth().code == 0);
    const std::size_t segments = 16;

    const auto first = nvi_run(w.with({"extract"}));
    CHECK(first.code == 0);
    CHECK(first.out.find("extracted 16, skipped 0, failed 0") != std::string::npos);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(w.run() / "observations")) files += e.path().extension() == ".nviobs";
    CHECK(files == segments);
    const auto again = nvi_run(w.with({"extract"}));
    CHECK(again.code == 0);
    CHECK(again.out.find("skipped 16") != std::string::npos);
    CHECK(nvi_run(w.with({"extract", "--force"})).out.find("extracted 16") != std::string::npos);

    CHECK(nvi_run(w.with({"evaluate"})).code == 1);  // nothing trained yet

    full_pipeline(w, "r1");
    for (const char* f : {"models/gesture.ckpt", "models/gesture.metrics.json", "models/distance.ckpt",
                          "models/nvi.ckpt", "features/features.jsonl", "scores/nvi_scores.csv",
                          "eval/evaluation.json", "eval/external_validation.json", "report/summary.json",
                          "report/hist_nvi.svg", "report/hist_gesture_intensity.svg",
                          "report/hist_perceived_distance.svg"})
        CHECK_MESSAGE(fs::exists(w.run() / f), f);

    const auto summary = json::parse(slurp(w.run() / "report/summary.json"));
    for (const char* key : {"gesture_r", "distance_r", "nvi_r", "icc_table", "external_validation"})
        CHECK(summary.contains(key));
    CHECK(summary["icc_table"].size() == 5);
    CHECK(summary["external_validation"]["full"]["results"].size() == 4);
    for (const auto& r : summary["external_validation"]["full"]["results"]) CHECK(r["p_adjusted"].is_number());
    CHECK(summary["configs"]["gesture"]["epochs"] == 2);

    const auto metrics = json::parse(slurp(w.run() / "models/gesture.metrics.json"));
    CHECK(metrics["epochs"].size() == 2);
    CHECK(metrics["epochs"][1]["train_loss"].get<double>() < metrics["epochs"][0]["train_loss"].get<double>());

    SUBCASE("same seed, same outputs") {
        full_pipeline(w, "r2");
        for (const char* f : {"models/gesture.metrics.json", "models/distance.metrics.json", "models/nvi.metrics.json",
                              "models/gesture.ckpt", "models/nvi.ckpt", "features/features.jsonl",
                              "scores/nvi_scores.csv", "eval/evaluation.json", "eval/external_validation.json",
                              "report/summary.json", "report/hist_nvi.svg"})
            CHECK_MESSAGE(slurp(w.run("r1") / f) == slurp(w.run("r2") / f), f);
    }
}

TEST_CASE("training failures") {
    Workspace w("nvi_cli_train");
    REQUIRE(w.synth().code == 0);
    REQUIRE(nvi_run(w.with({"extract"})).code == 0);

    CHECK(nvi_run(w.with({"train", "posture"})).code == 2);
    const auto resnet = nvi_run(w.with({"train", "gesture", "--backbone", "resnet18"}));
    CHECK(resnet.code == 2);
    CHECK(resnet.err.find("pretrained") != std::string::npos);

    std::ofstream(w.root / "strict.json") << json{{"manifest", "data/manifest.jsonl"},
                                                  {"out_dir", "runs"},
                                                  {"gesture", {{"sigma_max", 1e-9}, {"epochs", 1}}}}
                                                 .dump();
    const auto empty = nvi_run({"train", "gesture", "--config", (w.root / "strict.json").string(), "--run-id", "r1"});
    CHECK(empty.code == 1);
    CHECK(empty.err.find("sigma_max") != std::string::npos);

    const auto no_regressors = nvi_run(w.with({"train", "nvi"}));
    CHECK(no_regressors.code == 1);
    CHECK(no_regressors.err.find("gesture.ckpt") != std::string::npos);
    CHECK(no_regressors.err.find("distance.ckpt") != std::string::npos);
}

TEST_CASE("extraction failures are tagged and do not stop other segments") {
    Workspace w("nvi_cli_extract_fail");
    REQUIRE(w.synth().code == 0);
    std::ofstream(w.root / "data/scenes/seg_0003.scene.json") << "{ not json";
    fs::remove(w.root / "data/scenes/seg_0005.scene.json");
    const auto r = nvi_run(w.with({"extract"}));
    CHECK(r.code == 1);
    CHECK(r.out.find("extracted 14, skipped 0, failed 2") != std::string::npos);
    CHECK(r.err.find("seg_0003: [decode]") != std::string::npos);
    CHECK(r.err.find("seg_0005: [decode]") != std::string::npos);
    CHECK(fs::exists(w.run() / "observations/seg_0004.nviobs"));
}

TEST_CASE("external validation with three overlapping teachers") {
    Workspace w("nvi_cli_external");
    REQUIRE(w.synth().code == 0);
    full_pipeline(w, "r1");
    std::ofstream(w.root / "few.csv") << "teacher_id,interest_math,cognitive_activation,perceived_enthusiasm\n"
                                      << "T01,2.1,2.2,2.3\nT02,3.0,2.9,3.2\nT04,1.5,1.9,2.0\n";
    const auto r = nvi_run(w.with({"validate-external", "--teacher-measures", (w.root / "few.csv").string()}));
    CHECK(r.code == 0);
    CHECK(r.err.find("small sample (n=3)") != std::string::npos);
    const auto j = json::parse(slurp(w.run() / "eval/external_validation.json"));
    CHECK(j["full"]["results"][0]["n"] == 3);
    CHECK(j["full"]["unmatched_scores"]["teacher"].size() == 5);
    // The three teachers are all outside the external split.
    CHECK(j["additional-only"].contains("error"));

    std::ofstream(w.root / "bad.csv") << "teacher_id,interest_math\nT01,lots\n";
    const auto bad = nvi_run(w.with({"validate-external", "--teacher-measures", (w.root / "bad.csv").string()}));
    CHECK(bad.code == 1);
    CHECK(bad.err.find("bad.csv:2") != std::string::npos);

    CHECK(nvi_run({"validate-external", "--out-dir", (w.root / "runs").string()}).code == 2);
}
