#include "nvi/cli/app.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "nvi/cli/config.hpp"
#include "nvi/data/manifest.hpp"
#include "nvi/error.hpp"
#include "nvi/eval/external.hpp"
#include "nvi/eval/rater_analysis.hpp"
#include "nvi/eval/report.hpp"
#include "nvi/fusion/fusion.hpp"
#include "nvi/fusion/score_table.hpp"
#include "nvi/nn/checkpoint.hpp"
#include "nvi/perception/observation_file.hpp"
#include "nvi/perception/pipeline.hpp"
#include "nvi/perception/video.hpp"
#include "nvi/regress/inputs.hpp"
#include "nvi/regress/regressor.hpp"
#include "nvi/synth/dataset.hpp"
#include "nvi/synth/scene.hpp"

namespace nvi::cli {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

/// Missing or contradictory command-line input (exit 2).
class UsageError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

struct Flags {
    std::string config, manifest, out_dir, run_id, backbone, emotion_weighting, icc_items;
    std::string teacher_measures, video_measures, scores, out, kind;
    std::uint64_t seed = 0;
    int workers = 0, frame_stride = 0, epochs = 0;
    double threshold = 0.0;
    bool force = false;
    CLI::App* active = nullptr;

    bool given(const std::string& name) const {
        const auto* opt = active ? active->get_option_no_throw(name) : nullptr;
        return opt && opt->count() > 0;
    }
};

// Layout of a run directory.
fs::path obs_dir(const RunConfig& c) { return c.run_dir() / "observations"; }
fs::path obs_path(const RunConfig& c, const std::string& segment) { return obs_dir(c) / (segment + ".nviobs"); }
fs::path model_path(const RunConfig& c, std::string_view kind) {
    return c.run_dir() / "models" / (std::string(kind) + ".ckpt");
}
fs::path metrics_path(const RunConfig& c, std::string_view kind) {
    return c.run_dir() / "models" / (std::string(kind) + ".metrics.json");
}
fs::path features_path(const RunConfig& c) { return c.run_dir() / "features" / "features.jsonl"; }
fs::path default_scores_path(const RunConfig& c) { return c.run_dir() / "scores" / "nvi_scores.csv"; }
fs::path evaluation_path(const RunConfig& c) { return c.run_dir() / "eval" / "evaluation.json"; }
fs::path external_path(const RunConfig& c) { return c.run_dir() / "eval" / "external_validation.json"; }

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error("cannot write '" + path.string() + "'");
        out << text;
        if (!out) throw Error("write failed for '" + path.string() + "'");
    }
    fs::rename(tmp, path);
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string num(double v, const char* spec = "%.4f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

void require_files(const std::vector<fs::path>& paths) {
    std::string missing;
    for (const auto& p : paths)
        if (!fs::is_regular_file(p)) missing += "\n  " + p.string();
    if (!missing.empty()) throw ValidationError("missing input file(s):" + missing);
}

RunConfig resolve_config(const Flags& f) {
    RunConfig c;
    std::string path = f.config;
    if (path.empty())
        if (const char* env = std::getenv(kConfigEnv); env && *env) path = env;
    if (!path.empty()) c = load_config(path);

    if (f.given("--manifest")) c.manifest = f.manifest;
    if (f.given("--out-dir")) c.out_dir = f.out_dir;
    if (f.given("--run-id")) c.run_id = f.run_id;
    if (f.given("--seed")) c.seed = f.seed;
    if (f.given("--workers")) c.workers = f.workers;
    if (f.given("--frame-stride")) c.frame_stride = f.frame_stride;
    if (f.given("--backbone")) c.backbone = f.backbone;
    if (f.given("--threshold")) c.threshold = f.threshold;
    if (f.given("--teacher-measures")) c.teacher_measures = f.teacher_measures;
    if (f.given("--video-measures")) c.video_measures = f.video_measures;
    if (f.given("--emotion-weighting")) {
        const auto w = fusion::parse_emotion_weighting(f.emotion_weighting);
        if (!w) throw UsageError("--emotion-weighting must be total_frames or visible_frames");
        c.emotion_weighting = *w;
    }
    if (f.given("--icc-items")) {
        const auto s = eval::parse_item_set(f.icc_items);
        if (!s) throw UsageError("--icc-items must be validation, train, external or all");
        c.icc_items = *s;
    }
    if (f.given("--epochs")) c.gesture.epochs = c.distance.epochs = c.nvi.epochs = f.epochs;
    c.apply_seed();
    c.validate();
    return c;
}

data::DatasetManifest require_manifest(const RunConfig& c) {
    if (c.manifest.empty()) throw UsageError("no dataset manifest given (use --manifest or the config key 'manifest')");
    if (!fs::is_regular_file(c.manifest)) throw UsageError("manifest '" + c.manifest.string() + "' does not exist");
    return data::load_manifest(c.manifest);
}

// ---------------------------------------------------------------- synth

int cmd_synth(const RunConfig& c, const Flags& f, std::ostream& out) {
    const fs::path dir = f.given("--out") ? fs::path(f.out) : c.run_dir() / "dataset";
    const auto ds = synth::make_synthetic_dataset(c.synth);
    synth::write_synthetic_dataset(ds, dir);
    out << "synthetic dataset: " << ds.manifest.segments.size() << " segments, " << ds.manifest.frame_labels.size()
        << " frame labels, " << ds.manifest.segment_labels.size() << " segment labels\n"
        << "written to " << dir.string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- extract

std::string extract_segment(const RunConfig& c, const data::DatasetManifest& m, const data::SegmentRecord& seg) {
    if (!seg.teacher_box)
        throw PipelineError("init", 0, "segment has no teacher_box in the manifest");
    std::unique_ptr<perception::VideoSource> video;
    try {
        video = perception::open_video(data::resolve_source(c.manifest, seg), m.fps);
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& e) {
        throw PipelineError("decode", std::nullopt, e.what());
    }
    auto backends = perception::make_backends(c.backends);
    perception::ExtractionOptions opt;
    opt.frame_stride = c.frame_stride;
    auto frames = perception::extract_observations(*video, {0, *seg.teacher_box}, backends, opt);
    if (frames.empty()) throw PipelineError("decode", std::nullopt, "video has no frames");
    perception::ObservationStream stream{seg.segment_id, video->fps(), frames.front().rgb.height,
                                         frames.front().rgb.width, std::move(frames)};
    const auto n = stream.frames.size();
    perception::write_observations(stream, obs_path(c, seg.segment_id));
    return std::to_string(n) + " frames";
}

int cmd_extract(const RunConfig& c, const Flags& f, std::ostream& out, std::ostream& err) {
    const auto m = require_manifest(c);
    perception::make_backends(c.backends);  // unknown backend names fail before any work
    fs::create_directories(obs_dir(c));

    enum class Status { extracted, skipped, failed };
    std::vector<Status> status(m.segments.size());
    std::vector<std::string> detail(m.segments.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < m.segments.size();) {
            const auto& seg = m.segments[i];
            if (!f.force && fs::exists(obs_path(c, seg.segment_id))) {
                status[i] = Status::skipped;
                continue;
            }
            try {
                detail[i] = extract_segment(c, m, seg);
                status[i] = Status::extracted;
            } catch (const PipelineError& e) {
                status[i] = Status::failed;
                detail[i] = e.what();
            } catch (const std::exception& e) {
                status[i] = Status::failed;
                detail[i] = std::string("[io]: ") + e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    const int n_workers = std::min<int>(c.workers, static_cast<int>(std::max<std::size_t>(1, m.segments.size())));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::size_t counts[3] = {0, 0, 0};
    for (std::size_t i = 0; i < status.size(); ++i) {
        ++counts[static_cast<int>(status[i])];
        if (status[i] == Status::failed) err << "failed " << m.segments[i].segment_id << ": " << detail[i] << "\n";
    }
    out << "extracted " << counts[0] << ", skipped " << counts[1] << ", failed " << counts[2] << " of "
        << m.segments.size() << " segments into " << obs_dir(c).string() << "\n";
    return counts[2] ? kExitFailure : kExitOk;
}

// ---------------------------------------------------------------- train

/// Samples for the given targets, in target order, loading one segment at a time.
std::vector<regress::RegressorSample> load_samples(const RunConfig& c, const std::vector<regress::TargetPair>& pairs,
                                                   regress::RegressorKind kind, const regress::ImageRegressor& model) {
    std::map<std::string, std::vector<std::size_t>> by_segment;
    for (std::size_t i = 0; i < pairs.size(); ++i) by_segment[pairs[i].segment_id].push_back(i);
    std::vector<fs::path> needed;
    for (const auto& [seg, idx] : by_segment) needed.push_back(obs_path(c, seg));
    require_files(needed);

    std::vector<regress::RegressorSample> samples(pairs.size());
    for (const auto& [seg, idx] : by_segment) {
        const auto stream = perception::read_observations(obs_path(c, seg));
        std::map<int, const perception::FrameObservation*> frame_at;
        for (const auto& fr : stream.frames) frame_at[fr.frame_index] = &fr;
        for (auto i : idx) {
            const auto it = frame_at.find(pairs[i].frame_index);
            if (it == frame_at.end())
                throw ValidationError("labelled frame " + std::to_string(pairs[i].frame_index) + " of segment " + seg +
                                      " was not extracted (check frame_stride)");
            samples[i] = model.prepare(regress::make_regressor_input(kind, *it->second),
                                       static_cast<float>(pairs[i].target));
        }
    }
    return samples;
}

void print_metrics(std::ostream& out, const nn::Checkpoint& ck) {
    for (const auto& m : ck.metrics) {
        out << "  epoch " << m.epoch << "  train_mse " << num(m.train_loss, "%.6f");
        if (m.validation_loss) out << "  val_mse " << num(*m.validation_loss, "%.6f");
        if (m.validation_r) out << "  val_r " << num(*m.validation_r);
        out << "\n";
    }
}

int train_regressor_cmd(const RunConfig& c, regress::RegressorKind kind, std::ostream& out) {
    const auto m = require_manifest(c);
    const auto& cfg = kind == regress::RegressorKind::gesture ? c.gesture : c.distance;
    auto model = regress::build_regressor(kind, c.backbone, cfg.seed);
    const auto targets = regress::prepare_targets(m, kind, cfg);
    out << regress::to_string(kind) << ": " << targets.train_labels << " training labels, " << targets.excluded
        << " excluded by rater disagreement (sigma_max " << num(cfg.sigma_max, "%g") << "), " << targets.train.size()
        << " kept; " << targets.validation.size() << " validation labels\n";
    const auto train = load_samples(c, targets.train, kind, *model);
    const auto val = load_samples(c, targets.validation, kind, *model);
    const auto ck = regress::train_regressor(*model, train, val, cfg);
    print_metrics(out, ck);
    fs::create_directories(model_path(c, "").parent_path());
    nn::save_checkpoint(ck, model_path(c, regress::to_string(kind)));
    nn::write_metrics_file(ck, metrics_path(c, regress::to_string(kind)));
    out << "checkpoint " << model_path(c, regress::to_string(kind)).string() << "\n";
    return kExitOk;
}

struct SegmentFeatures {
    const data::SegmentRecord* segment;
    fusion::SegmentFeatureVector features;
};

std::vector<SegmentFeatures> compute_features(const RunConfig& c, const data::DatasetManifest& m) {
    require_files({model_path(c, "gesture"), model_path(c, "distance")});
    std::vector<fs::path> needed;
    for (const auto& seg : m.segments) needed.push_back(obs_path(c, seg.segment_id));
    require_files(needed);
    const auto gesture = regress::load_regressor(nn::load_checkpoint(model_path(c, "gesture")));
    const auto distance = regress::load_regressor(nn::load_checkpoint(model_path(c, "distance")));

    std::vector<SegmentFeatures> out;
    for (const auto& seg : m.segments) {
        const auto stream = perception::read_observations(obs_path(c, seg.segment_id));
        std::vector<fusion::FrameFeatures> frames;
        for (const auto& fr : stream.frames) {
            fusion::FrameFeatures ff;
            ff.gesture = gesture->predict_image(regress::make_regressor_input(regress::RegressorKind::gesture, fr));
            ff.distance = distance->predict_image(regress::make_regressor_input(regress::RegressorKind::distance, fr));
            if (fr.emotions) ff.emotions = fr.emotions->cast<double>();
            frames.push_back(ff);
        }
        out.push_back({&seg, fusion::aggregate_segment(frames, c.emotion_weighting)});
    }
    return out;
}

int train_nvi_cmd(const RunConfig& c, std::ostream& out) {
    const auto m = require_manifest(c);
    const auto features = compute_features(c, m);
    std::string lines;
    std::map<std::string, fusion::SegmentFeatureVector> by_id;
    for (const auto& sf : features) {
        json j;
        j["segment_id"] = sf.segment->segment_id;
        j["teacher_id"] = sf.segment->teacher_id;
        j["video_id"] = sf.segment->video_id;
        j["split"] = data::to_string(sf.segment->split);
        j["features"] = fusion::to_json(sf.features);
        lines += j.dump() + "\n";
        by_id[sf.segment->segment_id] = sf.features;
    }
    write_text(features_path(c), lines);
    out << "features for " << features.size() << " segments in " << features_path(c).string() << "\n";

    const auto ds = fusion::build_nvi_dataset(m, by_id, c.nvi);
    out << "nvi: " << ds.train.size() << " training segments (" << ds.low_quality_excluded
        << " low-quality excluded), " << ds.validation.size() << " validation segments\n";
    fusion::NviModel model(c.nvi.seed);
    const auto ck = fusion::train_nvi(model, ds.train, ds.validation, c.nvi, c.emotion_weighting);
    print_metrics(out, ck);
    fs::create_directories(model_path(c, "").parent_path());
    nn::save_checkpoint(ck, model_path(c, "nvi"));
    nn::write_metrics_file(ck, metrics_path(c, "nvi"));

    const fusion::NviPredictor predictor(ck);
    std::vector<fusion::ScoreRow> rows;
    for (const auto& sf : features)
        rows.push_back({sf.segment->segment_id, sf.segment->teacher_id, sf.segment->video_id, sf.segment->split,
                        predictor.predict(sf.features)});
    fs::create_directories(default_scores_path(c).parent_path());
    fusion::write_score_table(rows, default_scores_path(c));
    out << "checkpoint " << model_path(c, "nvi").string() << "\nscores " << default_scores_path(c).string() << "\n";
    return kExitOk;
}

int cmd_train(const RunConfig& c, const Flags& f, std::ostream& out) {
    if (f.kind == "nvi") return train_nvi_cmd(c, out);
    const auto kind = regress::parse_regressor_kind(f.kind);
    if (!kind) throw UsageError("unknown model kind '" + f.kind + "' (expected gesture, distance or nvi)");
    return train_regressor_cmd(c, *kind, out);
}

// ---------------------------------------------------------------- evaluate

fs::path scores_path(const RunConfig& c, const Flags& f) {
    return f.scores.empty() ? default_scores_path(c) : fs::path(f.scores);
}

std::optional<regress::RegressorEvaluation> evaluate_frames(const RunConfig& c, const data::DatasetManifest& m,
                                                           regress::RegressorKind kind, std::optional<double> threshold,
                                                           std::size_t& n, std::ostream& out) {
    const auto ck = nn::load_checkpoint(model_path(c, regress::to_string(kind)));
    const auto model = regress::load_regressor(ck);
    const auto targets = regress::prepare_targets(m, kind, ck.config);
    const auto samples = load_samples(c, targets.validation, kind, *model);
    n = samples.size();
    if (samples.empty()) {
        out << regress::to_string(kind) << ": no validation frames\n";
        return std::nullopt;
    }
    return regress::evaluate_regressor(*model, samples, threshold);
}

void print_eval(std::ostream& out, const char* name, const std::optional<regress::RegressorEvaluation>& e,
                std::size_t n) {
    if (!e) return;
    out << name << ": n=" << n;
    if (e->pearson)
        out << "  r=" << num(e->pearson->r) << "  p=" << num(e->pearson->p_raw, "%.3g");
    else
        out << "  r undefined (" << e->pearson_note << ")";
    if (e->accuracy) out << "  accuracy=" << num(*e->accuracy);
    out << "\n";
}

int cmd_evaluate(const RunConfig& c, const Flags& f, std::ostream& out) {
    const auto m = require_manifest(c);
    require_files({model_path(c, "gesture"), model_path(c, "distance"), scores_path(c, f)});

    eval::EvaluationResults r;
    r.threshold = c.threshold.value_or(m.scale_max / 2);
    r.gesture = evaluate_frames(c, m, regress::RegressorKind::gesture, *r.threshold / m.scale_max, r.gesture_n, out);
    r.distance = evaluate_frames(c, m, regress::RegressorKind::distance, std::nullopt, r.distance_n, out);

    const auto scores = fusion::read_score_table(scores_path(c, f));
    std::map<std::string, double> score_of;
    for (const auto& s : scores) score_of[s.segment_id] = s.score;
    std::vector<double> preds, truth;
    for (const auto& label : m.segment_labels) {
        const auto* seg = m.find_segment(label.segment_id);
        const auto it = score_of.find(label.segment_id);
        if (!seg || seg->split != data::Split::validation || it == score_of.end()) continue;
        preds.push_back(it->second / m.scale_max);
        truth.push_back(stats::median_rating(label.rating) / m.scale_max);
    }
    r.nvi_n = preds.size();
    if (!preds.empty()) r.nvi = regress::evaluate_predictions(preds, truth, std::nullopt);

    r.icc_items = c.icc_items;
    const auto matrix = eval::build_rater_matrix(m, scores, c.icc_items);
    try {
        r.icc_table = eval::rater_replacement_table(matrix);
        r.median_fusion = eval::median_fusion_correlations(matrix);
    } catch (const ValidationError& e) {
        r.icc_note = std::string(e.what()) + " (" + std::to_string(matrix.items()) + " " +
                     std::string(eval::to_string(c.icc_items)) + " item(s))";
    }

    print_eval(out, "gesture", r.gesture, r.gesture_n);
    print_eval(out, "distance", r.distance, r.distance_n);
    print_eval(out, "nvi", r.nvi, r.nvi_n);
    if (!r.icc_note.empty()) out << "icc: " << r.icc_note << "\n";
    for (const auto& row : r.icc_table) {
        std::string cols;
        for (const auto& col : row.columns) cols += (cols.empty() ? "" : ", ") + col;
        out << "icc [" << cols << "] " << (row.icc ? num(*row.icc, "%.3f") : "undefined") << "\n";
    }
    write_json(evaluation_path(c), eval::to_json(r));
    out << "wrote " << evaluation_path(c).string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- validate-external

int cmd_validate_external(const RunConfig& c, const Flags& f, std::ostream& out, std::ostream& err) {
    if (c.teacher_measures.empty() || c.video_measures.empty())
        throw UsageError("teacher and video measures are required (--teacher-measures, --video-measures)");
    require_files({scores_path(c, f), c.teacher_measures, c.video_measures});
    const auto scores = fusion::read_score_table(scores_path(c, f));
    const std::vector<eval::ExternalMeasures> measures{eval::read_measures_csv(c.teacher_measures),
                                                       eval::read_measures_csv(c.video_measures)};
    json j;
    int failed = 0;
    for (auto variant : {eval::DatasetVariant::full, eval::DatasetVariant::additional_only}) {
        const std::string name(eval::to_string(variant));
        try {
            const auto rep = eval::external_validation(scores, measures, variant);
            j[name] = eval::to_json(rep);
            for (const auto& res : rep.results) {
                out << name << " " << res.hypothesis.id << " " << res.hypothesis.measure << " ("
                    << eval::to_string(res.hypothesis.level) << ") n=" << res.n;
                if (res.r)
                    out << " r=" << num(*res.r, "%.3f") << " p=" << num(*res.p_raw, "%.3g")
                        << " p_adj=" << num(*res.p_adjusted, "%.3g");
                else
                    out << " r undefined (" << res.note << ")";
                out << "\n";
            }
            for (const auto& w : rep.warnings) err << "warning: " << name << ": " << w << "\n";
            for (const auto& [level, keys] : rep.unmatched_scores)
                if (!keys.empty())
                    err << "warning: " << name << ": " << keys.size() << " scored " << level
                        << "(s) without measures\n";
        } catch (const ValidationError& e) {
            ++failed;
            j[name] = {{"error", e.what()}};
            err << "error: " << name << ": " << e.what() << "\n";
        }
    }
    write_json(external_path(c), j);
    out << "wrote " << external_path(c).string() << "\n";
    return failed == 2 ? kExitFailure : kExitOk;
}

// ---------------------------------------------------------------- report

int cmd_report(const RunConfig& c, std::ostream& out) {
    if (c.manifest.empty()) throw UsageError("no dataset manifest given (use --manifest or the config key 'manifest')");
    eval::ReportInputs in;
    in.manifest = c.manifest;
    in.evaluation = evaluation_path(c);
    if (fs::exists(external_path(c))) in.external_validation = external_path(c);
    for (const char* kind : {"gesture", "distance", "nvi"}) in.metrics.push_back(metrics_path(c, kind));
    json config = to_json(c);
    config.erase("out_dir");
    config.erase("run_id");
    in.config = config;
    const auto bundle = eval::render_report(in);
    const fs::path dir = c.run_dir() / "report";
    eval::write_report(bundle, dir);
    out << "report written to " << dir.string() << " (summary.json, " << bundle.files.size() << " histograms)\n";
    return kExitOk;
}

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("-c,--config", f.config,
                                         std::string("JSON config file (default: $") + kConfigEnv + ")");
    cmd->add_option("-m,--manifest", f.manifest, "Dataset manifest");
    cmd->add_option("-o,--out-dir", f.out_dir, "Directory holding run directories");
    cmd->add_option("-r,--run-id", f.run_id, "Run directory name");
    cmd->add_option("-s,--seed", f.seed, "Seed for every model and generator");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    static std::once_flag decoders;
    std::call_once(decoders, [] { synth::register_scene_decoder(); });

    CLI::App app{"Nonverbal immediacy estimation from classroom video.", "nvi"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");
    Flags f;

    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset with ground truth");
    add_common(synth_cmd, f);
    synth_cmd->add_option("--out", f.out, "Dataset directory (default: <run dir>/dataset)");

    auto* extract = app.add_subcommand("extract", "Run perception over every segment");
    add_common(extract, f);
    extract->add_option("-j,--workers", f.workers, "Parallel segments")->check(CLI::PositiveNumber);
    extract->add_option("--frame-stride", f.frame_stride, "Keep every n-th frame")
                                   ->check(CLI::PositiveNumber);
    extract->add_flag("-f,--force", f.force, "Re-extract segments that already have observations");

    auto* train = app.add_subcommand("train", "Train the gesture, distance or nvi model");
    add_common(train, f);
    train->add_option("kind", f.kind, "gesture, distance or nvi")->required();
    train->add_option("--epochs", f.epochs, "Override the epoch count")->check(CLI::PositiveNumber);
    train->add_option("--backbone", f.backbone, "Regressor backbone (small-cnn, resnet18)");
    train->add_option("--emotion-weighting", f.emotion_weighting, "total_frames or visible_frames");

    auto* evaluate = app.add_subcommand("evaluate", "Correlations, threshold accuracy and ICC tables");
    add_common(evaluate, f);
    evaluate->add_option("--scores", f.scores, "NVI score table");
    evaluate->add_option("--threshold", f.threshold, "Gesture threshold in rating units");
    evaluate->add_option("--icc-items", f.icc_items, "validation, train, external or all");

    auto* external = app.add_subcommand("validate-external", "Correlate NVI scores with external measures");
    add_common(external, f);
    external->add_option("--scores", f.scores, "NVI score table");
    external->add_option("--teacher-measures", f.teacher_measures, "CSV keyed by teacher_id");
    external->add_option("--video-measures", f.video_measures, "CSV keyed by video_id");

    auto* report = app.add_subcommand("report", "Summary and rating histograms");
    add_common(report, f);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }
    CLI::App* cmd = app.get_subcommands().front();
    f.active = cmd;
    try {
        const RunConfig c = resolve_config(f);
        write_json(c.run_dir() / "run_config.json", to_json(c));
        if (cmd == synth_cmd) return cmd_synth(c, f, out);
        if (cmd == extract) return cmd_extract(c, f, out, err);
        if (cmd == train) return cmd_train(c, f, out);
        if (cmd == evaluate) return cmd_evaluate(c, f, out);
        if (cmd == external) return cmd_validate_external(c, f, out, err);
        return cmd_report(c, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n" << cmd->help();
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"nvi"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace nvi::cli
