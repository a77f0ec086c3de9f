#include "nvi/eval/report.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "nvi/data/manifest.hpp"
#include "nvi/error.hpp"
#include "nvi/stats/stats.hpp"

namespace nvi::eval {
namespace {

using json = nlohmann::ordered_json;

std::string fmt(double v, const char* spec = "%.2f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), 0, "cannot open");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path.string(), 0, e.what());
    }
}

json correlation_or_null(const json& evaluation, const char* model) {
    if (!evaluation.contains(model) || evaluation[model].is_null()) return nullptr;
    const auto& m = evaluation[model];
    return m.contains("pearson") ? m["pearson"] : json(nullptr);
}

}  // namespace

Histogram make_histogram(std::span<const double> values, double lo, double hi, int bins, std::string title) {
    if (values.empty()) throw ValidationError("histogram '" + title + "': no data");
    if (bins < 1 || !(hi > lo)) throw ValidationError("histogram '" + title + "': bad range or bin count");
    Histogram h{std::move(title), lo, hi, std::vector<std::size_t>(static_cast<std::size_t>(bins), 0)};
    for (double v : values) {
        if (!(v >= lo && v <= hi))
            throw ValidationError("histogram '" + h.title + "': value " + fmt(v, "%g") + " outside [" + fmt(lo, "%g") +
                                  ", " + fmt(hi, "%g") + "]");
        auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * bins);
        ++h.counts[std::min(b, h.counts.size() - 1)];
    }
    return h;
}

std::string render_histogram_svg(const Histogram& h) {
    constexpr double W = 640, H = 400, left = 60, right = 20, top = 40, bottom = 50;
    const double plot_w = W - left - right, plot_h = H - top - bottom;
    std::size_t peak = 1;
    for (auto c : h.counts) peak = std::max(peak, c);
    const double bar_w = plot_w / static_cast<double>(h.counts.size());

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
      << h.title << "</text>\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        const double bh = plot_h * static_cast<double>(h.counts[i]) / static_cast<double>(peak);
        s << "<rect x=\"" << fmt(left + bar_w * static_cast<double>(i)) << "\" y=\"" << fmt(top + plot_h - bh)
          << "\" width=\"" << fmt(bar_w - 1) << "\" height=\"" << fmt(bh) << "\" fill=\"#4c72b0\"><title>"
          << h.counts[i] << "</title></rect>\n";
    }
    s << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
      << top + plot_h << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
      << "\" stroke=\"black\"/>\n";
    const char* text = "font-family=\"sans-serif\" font-size=\"12\"";
    for (int t = 0; t <= 4; ++t) {
        const double x = left + plot_w * t / 4.0;
        s << "<text x=\"" << fmt(x) << "\" y=\"" << top + plot_h + 18 << "\" text-anchor=\"middle\" " << text << ">"
          << fmt(h.lo + (h.hi - h.lo) * t / 4.0, "%g") << "</text>\n";
    }
    s << "<text x=\"" << left - 8 << "\" y=\"" << top + 4 << "\" text-anchor=\"end\" " << text << ">" << peak
      << "</text>\n";
    s << "<text x=\"" << left - 8 << "\" y=\"" << top + plot_h << "\" text-anchor=\"end\" " << text << ">0</text>\n";
    s << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" " << text
      << ">median rating</text>\n";
    s << "</svg>\n";
    return s.str();
}

json to_json(const regress::RegressorEvaluation& e, std::size_t n) {
    json j;
    j["n"] = n;
    j["pearson"] = e.pearson ? to_json(*e.pearson) : json(nullptr);
    if (!e.pearson_note.empty()) j["pearson_note"] = e.pearson_note;
    j["accuracy"] = e.accuracy ? json(*e.accuracy) : json(nullptr);
    return j;
}

json to_json(const EvaluationResults& r) {
    json j;
    j["format"] = "nvi-evaluation";
    j["version"] = 1;
    j["threshold"] = r.threshold ? json(*r.threshold) : json(nullptr);
    j["gesture"] = r.gesture ? to_json(*r.gesture, r.gesture_n) : json(nullptr);
    j["distance"] = r.distance ? to_json(*r.distance, r.distance_n) : json(nullptr);
    j["nvi"] = r.nvi ? to_json(*r.nvi, r.nvi_n) : json(nullptr);
    j["icc_items"] = to_string(r.icc_items);
    j["icc_model"] = stats::IccResult::model;
    j["icc_table"] = to_json(r.icc_table);
    j["median_fusion"] = to_json(r.median_fusion);
    if (!r.icc_note.empty()) j["icc_note"] = r.icc_note;
    return j;
}

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read '" + path.string() + "'");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

ReportBundle render_report(const ReportInputs& inputs) {
    std::vector<std::filesystem::path> all{inputs.manifest, inputs.evaluation};
    if (inputs.external_validation) all.push_back(*inputs.external_validation);
    all.insert(all.end(), inputs.metrics.begin(), inputs.metrics.end());
    std::string missing;
    for (const auto& p : all)
        if (!std::filesystem::is_regular_file(p)) missing += (missing.empty() ? "" : ", ") + p.string();
    if (!missing.empty()) throw ValidationError("missing report input(s): " + missing);

    const auto manifest = data::load_manifest(inputs.manifest);
    const json evaluation = read_json(inputs.evaluation);

    json summary;
    summary["format"] = "nvi-report";
    summary["version"] = 1;
    summary["gesture_r"] = correlation_or_null(evaluation, "gesture");
    summary["distance_r"] = correlation_or_null(evaluation, "distance");
    summary["nvi_r"] = correlation_or_null(evaluation, "nvi");
    summary["gesture_accuracy"] =
        evaluation.contains("gesture") && !evaluation["gesture"].is_null() ? evaluation["gesture"]["accuracy"] : json(nullptr);
    summary["icc_items"] = evaluation.value("icc_items", json(nullptr));
    summary["icc_table"] = evaluation.value("icc_table", json::array());
    summary["median_fusion"] = evaluation.value("median_fusion", json::array());
    summary["external_validation"] = inputs.external_validation ? read_json(*inputs.external_validation) : json(nullptr);

    json training = json::object(), configs = json::object();
    for (const auto& p : inputs.metrics) {
        const json m = read_json(p);
        const std::string kind = m.value("kind", p.stem().string());
        configs[kind] = m.value("config", json(nullptr));
        training[kind] = m.contains("epochs") && !m["epochs"].empty() ? m["epochs"].back() : json(nullptr);
    }
    configs["run"] = inputs.config;
    summary["training"] = std::move(training);
    summary["configs"] = std::move(configs);

    // Counts
    json counts;
    std::map<std::string, std::set<std::string>> teachers;
    std::map<std::string, std::size_t> segments;
    for (const auto& s : manifest.segments) {
        const std::string split(data::to_string(s.split));
        ++segments[split];
        teachers[split].insert(s.teacher_id);
    }
    for (auto split : {data::Split::train, data::Split::validation, data::Split::external}) {
        const std::string name(data::to_string(split));
        counts["segments"][name] = segments[name];
        counts["teachers"][name] = teachers[name].size();
    }
    std::vector<double> gesture, distance, nvi;
    for (const auto& f : manifest.frame_labels) {
        if (f.gesture) gesture.push_back(stats::median_rating(*f.gesture));
        if (f.distance) distance.push_back(stats::median_rating(*f.distance));
    }
    std::size_t low_quality = 0;
    for (const auto& s : manifest.segment_labels) {
        nvi.push_back(stats::median_rating(s.rating));
        low_quality += s.low_quality;
    }
    counts["gesture_labels"] = gesture.size();
    counts["distance_labels"] = distance.size();
    counts["nvi_labels"] = nvi.size();
    counts["low_quality_segments"] = low_quality;
    summary["counts"] = std::move(counts);

    ReportBundle bundle;
    const std::vector<std::tuple<std::string, std::string, std::vector<double>*>> hists{
        {"hist_perceived_distance.svg", "Perceived distance", &distance},
        {"hist_gesture_intensity.svg", "Gesture intensity", &gesture},
        {"hist_nvi.svg", "Nonverbal immediacy", &nvi}};
    json files = json::array();
    for (const auto& [file, title, values] : hists) {
        const auto h = make_histogram(*values, 0.0, manifest.scale_max, 20, title);
        bundle.files.emplace_back(file, render_histogram_svg(h));
        files.push_back({{"file", file}, {"counts", h.counts}});
    }
    summary["histograms"] = std::move(files);

    json hashes = json::array();
    for (const auto& p : all) hashes.push_back({{"file", p.filename().string()}, {"fnv1a64", file_digest(p)}});
    summary["inputs"] = std::move(hashes);
    bundle.summary = std::move(summary);
    return bundle;
}

void write_report(const ReportBundle& bundle, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& content) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw Error("cannot write '" + (dir / name).string() + "'");
        out << content;
    };
    write("summary.json", bundle.summary.dump(2) + "\n");
    for (const auto& [name, content] : bundle.files) write(name, content);
}

}  // namespace nvi::eval
