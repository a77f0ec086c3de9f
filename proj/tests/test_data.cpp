#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "nvi/data/manifest.hpp"
#include "nvi/error.hpp"

using namespace nvi;
using namespace nvi::data;
namespace fs = std::filesystem;

namespace {

const fs::path kDataDir = NVI_TEST_DATA_DIR;

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

DatasetManifest parse_text(const std::string& text) {
    std::istringstream in(text);
    return parse_manifest(in, "inline", kDataDir);
}

const std::string kHeader =
    R"({"record":"header","format":"nvi-manifest","version":1,"scale_max":10000,"fps":25})"
    "\n";

std::string segment_line(const std::string& id, const std::string& teacher, const std::string& split) {
    return R"({"record":"segment","segment_id":")" + id + R"(","teacher_id":")" + teacher +
           R"(","video_id":"V","start":0,"source":"x","split":")" + split + "\"}\n";
}

RatingTriple random_triple(std::mt19937_64& rng, const std::string& id, Construct c) {
    std::uniform_int_distribution<int> u(0, 10000);
    RatingTriple t;
    t.item_id = id;
    t.construct = c;
    t.values = {double(u(rng)), u(rng) / 3.0, double(u(rng))};
    t.rater_ids = {"R0", "R1", "R2"};
    return t;
}

}  // namespace

TEST_CASE("golden manifest loads with includes resolved") {
    const auto m = load_manifest(kDataDir / "golden_manifest.jsonl");
    CHECK(m.scale_max == 10000);
    CHECK(m.fps == 25);
    REQUIRE(m.segments.size() == 4);
    CHECK(m.segments[0].teacher_box == BoundingBox{40, 10, 30, 80});
    CHECK(m.segments[1].duration == 30.0);
    CHECK(m.segments[3].split == Split::external);
    REQUIRE(m.frame_labels.size() == 2);
    CHECK(m.frame_labels[0].gesture->values[1] == 5000);
    CHECK(m.frame_labels[0].distance->item_id == "S01_f0012");
    CHECK_FALSE(m.frame_labels[1].distance.has_value());
    REQUIRE(m.segment_labels.size() == 2);
    CHECK(m.segment_labels[1].low_quality);
    CHECK(m.frame_count(m.segments[0]) == 750);

    const auto train = teachers_in(m.segments, Split::train);
    const auto val = teachers_in(m.segments, Split::validation);
    CHECK(train == std::set<std::string>{"T1"});
    CHECK(val == std::set<std::string>{"T2"});
    CHECK(frame_labels_in(m, Construct::gesture_intensity, Split::validation).size() == 1);
    CHECK(frame_labels_in(m, Construct::perceived_distance, Split::validation).empty());
    CHECK(resolve_source(kDataDir / "golden_manifest.jsonl", m.segments[0]) == kDataDir / "videos/v1_120");
}

TEST_CASE("serialisation is frozen by the canonical golden file") {
    const auto m = load_manifest(kDataDir / "golden_manifest.jsonl");
    CHECK(serialize_manifest(m) == read_file(kDataDir / "golden_canonical.jsonl"));
    CHECK(load_manifest(kDataDir / "golden_canonical.jsonl") == m);
}

TEST_CASE("leakage and dangling references are rejected") {
    const std::string leak = kHeader + segment_line("A", "T1", "train") + segment_line("B", "T1", "validation");
    try {
        parse_text(leak);
        FAIL("expected leakage error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("'T1'") != std::string::npos);
        CHECK(std::string(e.what()).find("leakage") != std::string::npos);
    }

    const std::string dangling =
        kHeader + segment_line("A", "T1", "train") +
        R"({"record":"frame_label","frame_id":"F1","segment_id":"ZZZ","frame_index":0,"gesture_intensity":{"values":[1,2,3],"raters":["a","b","c"]}})"
        "\n";
    try {
        parse_text(dangling);
        FAIL("expected dangling reference error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("'ZZZ'") != std::string::npos);
        CHECK(std::string(e.what()).find("F1") != std::string::npos);
    }
}

TEST_CASE("invariant violations") {
    const std::string base = kHeader + segment_line("A", "T1", "train");
    auto label = [](const std::string& body) {
        return std::string(R"({"record":"frame_label","frame_id":"F1","segment_id":"A",)") + body + "}\n";
    };
    CHECK_THROWS_AS(parse_text(base + segment_line("A", "T2", "train")), ValidationError);
    CHECK_THROWS_AS(
        parse_text(base + label(R"("frame_index":750,"gesture_intensity":{"values":[1,2,3],"raters":["a","b","c"]})")),
        ValidationError);
    CHECK_THROWS_AS(
        parse_text(base + label(R"("frame_index":1,"gesture_intensity":{"values":[1,2,10001],"raters":["a","b","c"]})")),
        ValidationError);
    CHECK_THROWS_AS(
        parse_text(base + label(R"("frame_index":1,"gesture_intensity":{"values":[1,2,3],"raters":["a","a","c"]})")),
        ValidationError);
    CHECK_THROWS_AS(parse_text(kHeader + R"({"record":"segment","segment_id":"A","teacher_id":"T","video_id":"V",)"
                                         R"("start":0,"duration":20,"source":"x","split":"train"})"
                                         "\n"),
                    ValidationError);
}

TEST_CASE("parse errors carry line numbers") {
    try {
        parse_text(kHeader + segment_line("A", "T1", "train") + "{not json\n");
        FAIL("expected parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse_text(segment_line("A", "T1", "train")), ParseError);
    CHECK_THROWS_AS(parse_text(kHeader + segment_line("A", "T1", "holdout")), ParseError);
    CHECK_THROWS_AS(parse_text(kHeader + R"({"record":"frame_label","frame_id":"F","segment_id":"A","frame_index":0,)"
                                         R"("gesture_intensity":{"values":[1,2],"raters":["a","b","c"]}})"
                                         "\n"),
                    ParseError);
    CHECK_THROWS_AS(load_manifest(kDataDir / "does_not_exist.jsonl"), ParseError);
}

TEST_CASE("split_by_teacher") {
    std::vector<SegmentRecord> segments;
    for (int t = 0; t < 46; ++t)
        for (int s = 0; s < 3; ++s) {
            SegmentRecord r;
            r.teacher_id = "T" + std::to_string(t);
            r.segment_id = r.teacher_id + "_" + std::to_string(s);
            segments.push_back(r);
        }
    std::set<std::string> validation;
    for (int t = 0; t < 9; ++t) validation.insert("T" + std::to_string(t * 5));

    const auto split = split_by_teacher(segments, validation);
    CHECK(split.validation.size() == 27);
    CHECK(split.train.size() == 111);
    CHECK(teachers_in(split.validation, Split::validation).size() == 9);
    CHECK(teachers_in(split.train, Split::train).size() == 37);
    for (const auto& s : split.validation) CHECK(validation.contains(s.teacher_id));
    for (const auto& s : split.train) CHECK_FALSE(validation.contains(s.teacher_id));

    const auto all_train = split_by_teacher(segments, {});
    CHECK(all_train.train.size() == segments.size());
    CHECK(all_train.validation.empty());

    const auto one = split_by_teacher(segments, {"T7"});
    CHECK(one.validation.size() == 3);
    for (const auto& s : one.train) CHECK(s.teacher_id != "T7");

    CHECK_THROWS_AS(split_by_teacher(segments, {"T99"}), ValidationError);
}

TEST_CASE("random manifests round-trip through the text format") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        DatasetManifest m;
        m.fps = 1 + trial % 30;
        m.scale_max = 10000;
        const int teachers = 2 + trial % 5;
        for (int t = 0; t < teachers; ++t)
            for (int s = 0; s < 2; ++s) {
                SegmentRecord r;
                r.teacher_id = "T" + std::to_string(t);
                r.video_id = "V" + std::to_string(t);
                r.segment_id = r.teacher_id + "S" + std::to_string(s);
                r.start = 30.0 * s + 0.125 * trial;
                r.source_path = "scenes/" + r.segment_id + ".scene.json";
                r.split = s == 1 && t % 2 == 0 ? Split::external : (t == 0 ? Split::validation : Split::train);
                if (s == 0) r.teacher_box = BoundingBox{t, s, 10, 20};
                m.segments.push_back(r);
                FrameLabelRecord f;
                f.segment_id = r.segment_id;
                f.frame_id = r.segment_id + "_f";
                f.frame_index = trial % m.frame_count(r);
                f.gesture = random_triple(rng, f.frame_id, Construct::gesture_intensity);
                if (s == 0) f.distance = random_triple(rng, f.frame_id, Construct::perceived_distance);
                m.frame_labels.push_back(f);
                m.segment_labels.push_back({r.segment_id, random_triple(rng, r.segment_id, Construct::nvi), s == 1});
            }
        const auto reparsed = parse_text(serialize_manifest(m));
        CHECK(reparsed == m);
        CHECK(serialize_manifest(reparsed) == serialize_manifest(m));
        CHECK(teachers_in(reparsed.segments, Split::train).size() + 1 == static_cast<std::size_t>(teachers));
    }
}
