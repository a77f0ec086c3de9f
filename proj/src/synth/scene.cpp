#include "nvi/synth/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "nvi/error.hpp"
#include "nvi/perception/synthetic.hpp"

namespace nvi::synth {
namespace {

using json = nlohmann::ordered_json;
namespace code = perception::synthetic;

// Body proportions, in frame heights.
constexpr double kTeacherBody = 0.30;
constexpr double kTeacherWidth = 0.09;
constexpr double kTeacherHead = 0.07;
constexpr double kArmThickness = 0.035;
constexpr double kShoulderDrop = 0.04;
constexpr double kArmMin = 0.02;
constexpr double kArmReach = 0.17;
constexpr double kStudentBody = 0.14;
constexpr double kStudentWidth = 0.10;
constexpr double kStudentHead = 0.06;

enum Label : std::uint8_t { kBackground = 0, kTeacher = 1, kStudent = 2, kDesk = 3 };

struct Shape {
    Rect rect;
    double depth;
    code::Rgb albedo;
    Label label;
};

void fill(const Shape& s, int h, int w, Image& rgb, DepthMap& depth, Mask& labels) {
    const double scale = h;
    const int x0 = std::max(0, static_cast<int>(std::ceil(s.rect.x * scale - 0.5)));
    const int x1 = std::min(w, static_cast<int>(std::ceil((s.rect.x + s.rect.width) * scale - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(s.rect.y * scale - 0.5)));
    const int y1 = std::min(h, static_cast<int>(std::ceil((s.rect.y + s.rect.height) * scale - 0.5)));
    const auto c = code::shade(s.albedo, static_cast<float>(s.depth));
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            for (int ch = 0; ch < 3; ++ch) rgb(ch, y, x) = c[ch];
            depth(y, x) = static_cast<float>(s.depth);
            labels(y, x) = s.label;
        }
}

Point teacher_centre(const SceneParams& p, int t) {
    return {p.teacher_path[t].x, p.teacher_path[t].y - kTeacherBody / 2};
}

Point student_centre(const Point& feet) { return {feet.x, feet.y - (kStudentBody + kStudentHead) / 2}; }

bool inside(const Rect& r, const Point& p) {
    return p.x >= r.x && p.x <= r.x + r.width && p.y >= r.y && p.y <= r.y + r.height;
}

std::vector<Shape> shapes(const SceneParams& p, int t) {
    std::vector<Shape> out;
    const Point feet = p.teacher_path[t];
    const double teacher_depth = p.depth.at(feet.y);
    const double body_top = feet.y - kTeacherBody;
    const double arm = kArmMin + kArmReach * p.arm_spread[t];
    out.push_back({{feet.x - kTeacherWidth / 2, body_top, kTeacherWidth, kTeacherBody}, teacher_depth,
                   code::kPersonAlbedo, kTeacher});
    out.push_back({{feet.x - kTeacherWidth / 2 - arm, body_top + kShoulderDrop, kTeacherWidth + 2 * arm, kArmThickness},
                   teacher_depth, code::kPersonAlbedo, kTeacher});
    const auto& tag = p.emotion_tag[t];
    out.push_back({{feet.x - kTeacherHead / 2, body_top - kTeacherHead, kTeacherHead, kTeacherHead}, teacher_depth,
                   tag ? code::face_albedo(*tag) : code::kPersonAlbedo, kTeacher});

    for (const auto& d : p.desks) out.push_back({d, p.depth.at(d.y + d.height), code::kDeskAlbedo, kDesk});
    for (const auto& s : p.students) {
        const double depth = p.depth.at(s.y);
        out.push_back({{s.x - kStudentWidth / 2, s.y - kStudentBody, kStudentWidth, kStudentBody}, depth,
                       code::kPersonAlbedo, kStudent});
        out.push_back({{s.x - kStudentHead / 2, s.y - kStudentBody - kStudentHead, kStudentHead, kStudentHead}, depth,
                       code::kPersonAlbedo, kStudent});
    }
    std::stable_sort(out.begin(), out.end(), [](const Shape& a, const Shape& b) { return a.depth > b.depth; });
    return out;
}

double reflect(double v, double lo, double hi) {
    if (v < lo) return std::min(hi, 2 * lo - v);
    if (v > hi) return std::max(lo, 2 * hi - v);
    return v;
}

json point_json(const Point& p) { return json::array({p.x, p.y}); }
Point point_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

void SceneParams::validate() const {
    auto fail = [](const std::string& what) { throw ValidationError("scene: " + what); };
    if (n_frames < 1) fail("n_frames must be >= 1");
    if (width < 16 || height < 16) fail("frame size must be at least 16x16");
    if (!(fps > 0.0)) fail("fps must be positive");
    const auto n = static_cast<std::size_t>(n_frames);
    if (teacher_path.size() != n || arm_spread.size() != n || emotion_tag.size() != n)
        fail("teacher_path, arm_spread and emotion_tag must each have n_frames entries");
    for (double a : arm_spread)
        if (!(a >= 0.0 && a <= 1.0)) fail("arm_spread outside [0, 1]");
    for (const auto& p : teacher_path)
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) fail("non-finite teacher position");
    for (const auto& s : students)
        if (!std::isfinite(s.x) || !std::isfinite(s.y)) fail("non-finite student position");
    for (const auto& d : desks)
        if (!(d.width > 0.0 && d.height > 0.0)) fail("desk with no area");
    if (!(depth.top >= 0.0 && depth.top < 1.0 && depth.bottom >= 0.0 && depth.bottom < 1.0))
        fail("depth law must stay inside [0, 1)");
}

double gesture_label(double arm_spread) { return 0.1 + 0.8 * std::clamp(arm_spread, 0.0, 1.0); }

double distance_label(double gap, bool desk_between) {
    return 0.05 + 0.8 * std::clamp((gap - 0.25) / 0.6, 0.0, 1.0) + (desk_between ? 0.15 : 0.0);
}

FrameTruth frame_truth(const SceneParams& p, int t) {
    FrameTruth truth;
    truth.gesture = gesture_label(p.arm_spread[t]);
    truth.emotion = p.emotion_tag[t];

    const Point c = teacher_centre(p, t);
    double gap = 1e300;
    Point nearest{};
    for (const auto& s : p.students) {
        const Point sc = student_centre(s);
        const double d = std::hypot(sc.x - c.x, sc.y - c.y);
        if (d < gap) gap = d, nearest = sc;
    }
    bool desk_between = false;
    if (p.students.empty()) {
        gap = 1.0;
    } else {
        for (int i = 1; i < 64 && !desk_between; ++i) {
            const double f = i / 64.0;
            const Point q{c.x + f * (nearest.x - c.x), c.y + f * (nearest.y - c.y)};
            desk_between = std::any_of(p.desks.begin(), p.desks.end(), [&](const Rect& d) { return inside(d, q); });
        }
    }
    truth.distance = distance_label(gap, desk_between);
    return truth;
}

RenderedFrame render_frame(const SceneParams& p, int t) {
    if (t < 0 || t >= p.n_frames) throw ValidationError("scene frame " + std::to_string(t) + " out of range");
    const int h = p.height, w = p.width;
    RenderedFrame out;
    out.rgb = Image(3, h, w);
    out.depth = DepthMap(h, w);
    Mask labels = Mask::Zero(h, w);
    for (int y = 0; y < h; ++y) {
        const double d = p.depth.at((y + 0.5) / h);
        const auto c = code::shade(code::kBackgroundAlbedo, static_cast<float>(d));
        for (int x = 0; x < w; ++x) {
            for (int ch = 0; ch < 3; ++ch) out.rgb(ch, y, x) = c[ch];
            out.depth(y, x) = static_cast<float>(d);
        }
    }
    for (const auto& s : shapes(p, t)) fill(s, h, w, out.rgb, out.depth, labels);
    out.masks.teacher = (labels == kTeacher).cast<std::uint8_t>();
    out.masks.student = (labels == kStudent).cast<std::uint8_t>();
    out.truth = frame_truth(p, t);
    return out;
}

Scene generate_scene(const SceneParams& params) {
    params.validate();
    Scene scene;
    for (int t = 0; t < params.n_frames; ++t) {
        auto f = render_frame(params, t);
        scene.frames.push_back(std::move(f.rgb));
        scene.masks.push_back(std::move(f.masks));
        scene.depth.push_back(std::move(f.depth));
        scene.truth.push_back(f.truth);
    }
    return scene;
}

BoundingBox initial_teacher_box(const SceneParams& params) {
    params.validate();
    const auto box = bounding_box(render_frame(params, 0).masks.teacher);
    if (!box) throw ValidationError("scene: teacher is not visible in the first frame");
    return *box;
}

SceneParams random_scene(std::uint64_t seed, const RandomSceneOptions& o) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };

    SceneParams p;
    p.seed = seed;
    p.n_frames = o.n_frames;
    p.width = o.width;
    p.height = o.height;
    p.fps = o.fps;
    const double aspect = static_cast<double>(o.width) / o.height;

    double x = uniform(0.15, aspect - 0.15);
    double base = uniform(0.38, 0.46);
    double spread = u(rng);
    const auto dominant = static_cast<Emotion>(std::uniform_int_distribution<int>(0, perception::kEmotionCount - 1)(rng));
    for (int t = 0; t < o.n_frames; ++t) {
        if (t > 0) {
            x = reflect(x + 0.03 * g(rng), 0.12, aspect - 0.12);
            base = reflect(base + 0.005 * g(rng), 0.38, 0.46);
            spread = u(rng) < 0.3 ? u(rng) : std::clamp(spread + 0.08 * g(rng), 0.0, 1.0);
        }
        p.teacher_path.push_back({x, base});
        p.arm_spread.push_back(spread);
        std::optional<Emotion> tag = dominant;
        if (u(rng) < o.face_hidden_probability)
            tag.reset();
        else if (u(rng) < 0.2)
            tag = static_cast<Emotion>(std::uniform_int_distribution<int>(0, perception::kEmotionCount - 1)(rng));
        p.emotion_tag.push_back(tag);
    }

    if (u(rng) >= o.empty_class_probability) {
        const int n = std::uniform_int_distribution<int>(1, 6)(rng);
        for (int i = 0; i < n; ++i) p.students.push_back({uniform(0.08, aspect - 0.08), uniform(0.72, 0.98)});
    }
    if (u(rng) < o.desk_probability) {
        const int n = std::uniform_int_distribution<int>(2, 4)(rng);
        for (int i = 0; i < n; ++i) {
            const double w = uniform(0.12, 0.25);
            p.desks.push_back({uniform(0.0, aspect - w), 0.50, w, 0.06});
        }
    }
    p.validate();
    return p;
}

json to_json(const SceneParams& p) {
    json j;
    j["format"] = "nvi-scene";
    j["version"] = 1;
    j["seed"] = p.seed;
    j["n_frames"] = p.n_frames;
    j["width"] = p.width;
    j["height"] = p.height;
    j["fps"] = p.fps;
    j["depth"] = {{"top", p.depth.top}, {"bottom", p.depth.bottom}};
    json path = json::array(), tags = json::array();
    for (const auto& q : p.teacher_path) path.push_back(point_json(q));
    for (const auto& e : p.emotion_tag) tags.push_back(e ? json(std::string(perception::to_string(*e))) : json(nullptr));
    j["teacher_path"] = std::move(path);
    j["arm_spread"] = p.arm_spread;
    j["emotion_tag"] = std::move(tags);
    json students = json::array(), desks = json::array();
    for (const auto& s : p.students) students.push_back(point_json(s));
    for (const auto& d : p.desks) desks.push_back(json::array({d.x, d.y, d.width, d.height}));
    j["students"] = std::move(students);
    j["desks"] = std::move(desks);
    return j;
}

SceneParams scene_from_json(const json& j) {
    SceneParams p;
    try {
        if (j.at("format") != "nvi-scene" || j.at("version") != 1) throw ValidationError("not a version 1 scene file");
        p.seed = j.at("seed").get<std::uint64_t>();
        p.n_frames = j.at("n_frames").get<int>();
        p.width = j.at("width").get<int>();
        p.height = j.at("height").get<int>();
        p.fps = j.at("fps").get<double>();
        p.depth = {j.at("depth").at("top").get<double>(), j.at("depth").at("bottom").get<double>()};
        for (const auto& q : j.at("teacher_path")) p.teacher_path.push_back(point_from(q));
        p.arm_spread = j.at("arm_spread").get<std::vector<double>>();
        for (const auto& e : j.at("emotion_tag")) {
            if (e.is_null()) {
                p.emotion_tag.emplace_back();
                continue;
            }
            const auto parsed = perception::parse_emotion(e.get<std::string>());
            if (!parsed) throw ValidationError("unknown emotion '" + e.get<std::string>() + "'");
            p.emotion_tag.push_back(parsed);
        }
        for (const auto& s : j.at("students")) p.students.push_back(point_from(s));
        for (const auto& d : j.at("desks"))
            p.desks.push_back({d.at(0).get<double>(), d.at(1).get<double>(), d.at(2).get<double>(), d.at(3).get<double>()});
    } catch (const json::exception& e) {
        throw ValidationError(std::string("scene: ") + e.what());
    }
    p.validate();
    return p;
}

void save_scene(const SceneParams& params, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << to_json(params).dump(1) << '\n';
}

SceneParams load_scene(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), 0, "cannot open scene file");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string(), 0, e.what());
    }
    try {
        return scene_from_json(j);
    } catch (const ValidationError& e) {
        throw ParseError(path.string(), 0, e.what());
    }
}

std::optional<Image> SceneVideoSource::next() {
    if (pos_ >= params_.n_frames) return std::nullopt;
    return render_frame(params_, pos_++).rgb;
}

void register_scene_decoder() {
    perception::register_video_decoder(
        "scene", [](const std::filesystem::path& path, double) -> std::unique_ptr<perception::VideoSource> {
            const std::string name = path.filename().string();
            constexpr std::string_view suffix = ".scene.json";
            if (name.size() < suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0)
                return nullptr;
            return std::make_unique<SceneVideoSource>(load_scene(path));
        });
}

}  // namespace nvi::synth
