#include "nvi/data/manifest.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "nvi/error.hpp"

namespace nvi::data {
namespace {

using json = nlohmann::ordered_json;

struct LineContext {
    const std::string& file;
    std::size_t line;

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(file, line, what); }
};

template <typename T>
T field(const json& record, const char* name, const LineContext& ctx) {
    const auto it = record.find(name);
    if (it == record.end()) ctx.fail(std::string("missing field '") + name + "'");
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        ctx.fail(std::string("field '") + name + "': " + e.what());
    }
}

RatingTriple parse_triple(const json& node, std::string item_id, Construct construct, const LineContext& ctx) {
    RatingTriple t;
    t.item_id = std::move(item_id);
    t.construct = construct;
    const auto values = field<std::vector<double>>(node, "values", ctx);
    const auto raters = field<std::vector<std::string>>(node, "raters", ctx);
    if (values.size() != 3) ctx.fail("rating needs exactly 3 values, got " + std::to_string(values.size()));
    if (raters.size() != 3) ctx.fail("rating needs exactly 3 rater ids, got " + std::to_string(raters.size()));
    for (int i = 0; i < 3; ++i) {
        t.values[i] = values[i];
        t.rater_ids[i] = raters[i];
    }
    return t;
}

json triple_json(const RatingTriple& t) {
    json node;
    node["values"] = t.values;
    node["raters"] = t.rater_ids;
    return node;
}

Split parse_split_field(const json& record, const LineContext& ctx) {
    const auto text = field<std::string>(record, "split", ctx);
    const auto split = parse_split(text);
    if (!split) ctx.fail("unknown split '" + text + "'");
    return *split;
}

struct Parser {
    DatasetManifest manifest;
    bool have_header = false;

    void parse_stream(std::istream& in, const std::string& source, const std::filesystem::path& base_dir,
                      bool labels_only, int depth) {
        std::string text;
        std::size_t line_no = 0;
        while (std::getline(in, text)) {
            ++line_no;
            if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
            const LineContext ctx{source, line_no};
            json record;
            try {
                record = json::parse(text);
            } catch (const json::parse_error& e) {
                ctx.fail(std::string("invalid JSON: ") + e.what());
            }
            if (!record.is_object()) ctx.fail("record must be a JSON object");
            const auto kind = field<std::string>(record, "record", ctx);

            if (!have_header && !labels_only && kind != "header") ctx.fail("first record must be the header");
            if (kind == "header") {
                if (labels_only || have_header) ctx.fail("unexpected header record");
                parse_header(record, ctx);
            } else if (kind == "segment") {
                if (labels_only) ctx.fail("segment records are not allowed in label files");
                parse_segment(record, ctx);
            } else if (kind == "frame_label") {
                parse_frame_label(record, ctx);
            } else if (kind == "segment_label") {
                parse_segment_label(record, ctx);
            } else if (kind == "include") {
                if (depth > 0) ctx.fail("nested include records are not supported");
                const auto rel = field<std::string>(record, "path", ctx);
                const auto path = base_dir / rel;
                std::ifstream included(path);
                if (!included) ctx.fail("cannot open included label file '" + path.string() + "'");
                parse_stream(included, path.string(), path.parent_path(), true, depth + 1);
            } else {
                ctx.fail("unknown record type '" + kind + "'");
            }
        }
        if (!labels_only && !have_header) throw ParseError(source, 0, "manifest has no header record");
    }

    void parse_header(const json& record, const LineContext& ctx) {
        const auto format = field<std::string>(record, "format", ctx);
        if (format != "nvi-manifest") ctx.fail("unsupported format '" + format + "'");
        const auto version = field<int>(record, "version", ctx);
        if (version != kManifestVersion) ctx.fail("unsupported manifest version " + std::to_string(version));
        manifest.scale_max = field<double>(record, "scale_max", ctx);
        manifest.fps = field<double>(record, "fps", ctx);
        if (record.contains("segment_duration"))
            manifest.segment_duration = field<double>(record, "segment_duration", ctx);
        have_header = true;
    }

    void parse_segment(const json& record, const LineContext& ctx) {
        SegmentRecord s;
        s.segment_id = field<std::string>(record, "segment_id", ctx);
        s.teacher_id = field<std::string>(record, "teacher_id", ctx);
        s.video_id = field<std::string>(record, "video_id", ctx);
        s.start = field<double>(record, "start", ctx);
        s.duration = record.contains("duration") ? field<double>(record, "duration", ctx) : manifest.segment_duration;
        s.source_path = field<std::string>(record, "source", ctx);
        s.split = parse_split_field(record, ctx);
        if (record.contains("teacher_box")) {
            const auto box = field<std::vector<int>>(record, "teacher_box", ctx);
            if (box.size() != 4) ctx.fail("teacher_box must be [x, y, width, height]");
            s.teacher_box = BoundingBox{box[0], box[1], box[2], box[3]};
        }
        manifest.segments.push_back(std::move(s));
    }

    void parse_frame_label(const json& record, const LineContext& ctx) {
        FrameLabelRecord f;
        f.frame_id = field<std::string>(record, "frame_id", ctx);
        f.segment_id = field<std::string>(record, "segment_id", ctx);
        f.frame_index = field<int>(record, "frame_index", ctx);
        if (record.contains("gesture_intensity"))
            f.gesture = parse_triple(record["gesture_intensity"], f.frame_id, Construct::gesture_intensity, ctx);
        if (record.contains("perceived_distance"))
            f.distance = parse_triple(record["perceived_distance"], f.frame_id, Construct::perceived_distance, ctx);
        if (!f.gesture && !f.distance) ctx.fail("frame label '" + f.frame_id + "' carries no rating");
        manifest.frame_labels.push_back(std::move(f));
    }

    void parse_segment_label(const json& record, const LineContext& ctx) {
        SegmentLabelRecord l;
        l.segment_id = field<std::string>(record, "segment_id", ctx);
        const auto construct_text = field<std::string>(record, "construct", ctx);
        const auto construct = parse_construct(construct_text);
        if (construct != Construct::nvi) ctx.fail("segment labels must use construct 'nvi', got '" + construct_text + "'");
        l.rating = parse_triple(record, l.segment_id, Construct::nvi, ctx);
        if (record.contains("low_quality")) l.low_quality = field<bool>(record, "low_quality", ctx);
        manifest.segment_labels.push_back(std::move(l));
    }
};

}  // namespace

void validate_rating(const RatingTriple& triple, double scale_max) {
    for (double v : triple.values)
        if (!(v >= 0.0 && v <= scale_max))
            throw ValidationError("label '" + triple.item_id + "' (" + std::string(to_string(triple.construct)) +
                                  "): rating " + std::to_string(v) + " outside [0, " + std::to_string(scale_max) +
                                  "]");
    const auto& r = triple.rater_ids;
    if (r[0] == r[1] || r[0] == r[2] || r[1] == r[2])
        throw ValidationError("label '" + triple.item_id + "': rater ids must be distinct");
}

void validate_manifest(const DatasetManifest& manifest) {
    if (!(manifest.scale_max > 0.0)) throw ValidationError("scale_max must be positive");
    if (!(manifest.fps > 0.0)) throw ValidationError("fps must be positive");
    if (!(manifest.segment_duration > 0.0)) throw ValidationError("segment_duration must be positive");

    std::map<std::string, const SegmentRecord*> by_id;
    std::map<std::string, std::set<Split>> teacher_splits;
    for (const auto& s : manifest.segments) {
        if (s.segment_id.empty()) throw ValidationError("segment with empty segment_id");
        if (!by_id.emplace(s.segment_id, &s).second)
            throw ValidationError("duplicate segment_id '" + s.segment_id + "'");
        if (!(s.start >= 0.0)) throw ValidationError("segment '" + s.segment_id + "': negative start");
        if (std::fabs(s.duration - manifest.segment_duration) > 1e-9)
            throw ValidationError("segment '" + s.segment_id + "': duration " + std::to_string(s.duration) +
                                  " differs from the dataset segment duration " +
                                  std::to_string(manifest.segment_duration));
        if (s.teacher_box && s.teacher_box->area() <= 0)
            throw ValidationError("segment '" + s.segment_id + "': teacher_box has no area");
        teacher_splits[s.teacher_id].insert(s.split);
    }
    for (const auto& [teacher, splits] : teacher_splits)
        if (splits.contains(Split::train) && splits.contains(Split::validation))
            throw ValidationError("teacher leakage: teacher '" + teacher +
                                  "' has segments in both train and validation");

    std::set<std::string> frame_ids;
    for (const auto& f : manifest.frame_labels) {
        const auto it = by_id.find(f.segment_id);
        if (it == by_id.end())
            throw ValidationError("dangling reference: frame label '" + f.frame_id + "' references unknown segment '" +
                                  f.segment_id + "'");
        if (!frame_ids.insert(f.frame_id).second)
            throw ValidationError("duplicate frame label '" + f.frame_id + "'");
        const int frames = manifest.frame_count(*it->second);
        if (f.frame_index < 0 || f.frame_index >= frames)
            throw ValidationError("frame label '" + f.frame_id + "': frame_index " + std::to_string(f.frame_index) +
                                  " outside segment '" + f.segment_id + "' (" + std::to_string(frames) + " frames)");
        if (f.gesture) validate_rating(*f.gesture, manifest.scale_max);
        if (f.distance) validate_rating(*f.distance, manifest.scale_max);
    }

    std::set<std::string> labelled_segments;
    for (const auto& l : manifest.segment_labels) {
        if (!by_id.contains(l.segment_id))
            throw ValidationError("dangling reference: segment label references unknown segment '" + l.segment_id +
                                  "'");
        if (!labelled_segments.insert(l.segment_id).second)
            throw ValidationError("duplicate segment label for '" + l.segment_id + "'");
        validate_rating(l.rating, manifest.scale_max);
    }
}

DatasetManifest parse_manifest(std::istream& in, const std::string& source_name,
                               const std::filesystem::path& base_dir) {
    Parser parser;
    parser.parse_stream(in, source_name, base_dir, false, 0);
    validate_manifest(parser.manifest);
    return std::move(parser.manifest);
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), 0, "cannot open manifest");
    return parse_manifest(in, path.string(), path.parent_path());
}

std::string serialize_manifest(const DatasetManifest& manifest) {
    std::ostringstream out;
    json header;
    header["record"] = "header";
    header["format"] = "nvi-manifest";
    header["version"] = kManifestVersion;
    header["scale_max"] = manifest.scale_max;
    header["fps"] = manifest.fps;
    header["segment_duration"] = manifest.segment_duration;
    out << header.dump() << '\n';

    for (const auto& s : manifest.segments) {
        json r;
        r["record"] = "segment";
        r["segment_id"] = s.segment_id;
        r["teacher_id"] = s.teacher_id;
        r["video_id"] = s.video_id;
        r["start"] = s.start;
        r["duration"] = s.duration;
        r["source"] = s.source_path;
        r["split"] = to_string(s.split);
        if (s.teacher_box)
            r["teacher_box"] = {s.teacher_box->x, s.teacher_box->y, s.teacher_box->width, s.teacher_box->height};
        out << r.dump() << '\n';
    }
    for (const auto& f : manifest.frame_labels) {
        json r;
        r["record"] = "frame_label";
        r["frame_id"] = f.frame_id;
        r["segment_id"] = f.segment_id;
        r["frame_index"] = f.frame_index;
        if (f.gesture) r["gesture_intensity"] = triple_json(*f.gesture);
        if (f.distance) r["perceived_distance"] = triple_json(*f.distance);
        out << r.dump() << '\n';
    }
    for (const auto& l : manifest.segment_labels) {
        json r;
        r["record"] = "segment_label";
        r["segment_id"] = l.segment_id;
        r["construct"] = "nvi";
        r["values"] = l.rating.values;
        r["raters"] = l.rating.rater_ids;
        if (l.low_quality) r["low_quality"] = true;
        out << r.dump() << '\n';
    }
    return out.str();
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write manifest '" + path.string() + "'");
    out << serialize_manifest(manifest);
}

std::filesystem::path resolve_source(const std::filesystem::path& manifest_path, const SegmentRecord& segment) {
    const std::filesystem::path source(segment.source_path);
    if (source.is_absolute()) return source;
    return manifest_path.parent_path() / source;
}

TeacherSplit split_by_teacher(std::span<const SegmentRecord> segments,
                              const std::set<std::string>& validation_teachers) {
    std::set<std::string> present;
    for (const auto& s : segments) present.insert(s.teacher_id);
    for (const auto& t : validation_teachers)
        if (!present.contains(t)) throw ValidationError("unknown validation teacher '" + t + "'");

    TeacherSplit out;
    for (auto s : segments) {
        if (validation_teachers.contains(s.teacher_id)) {
            s.split = Split::validation;
            out.validation.push_back(std::move(s));
        } else {
            s.split = Split::train;
            out.train.push_back(std::move(s));
        }
    }
    return out;
}

std::set<std::string> teachers_in(std::span<const SegmentRecord> segments, Split split) {
    std::set<std::string> out;
    for (const auto& s : segments)
        if (s.split == split) out.insert(s.teacher_id);
    return out;
}

std::vector<FrameLabelRecord> frame_labels_in(const DatasetManifest& manifest, Construct construct, Split split) {
    std::vector<FrameLabelRecord> out;
    for (const auto& f : manifest.frame_labels) {
        if (!f.rating(construct)) continue;
        const auto* seg = manifest.find_segment(f.segment_id);
        if (seg && seg->split == split) out.push_back(f);
    }
    return out;
}

}  // namespace nvi::data
