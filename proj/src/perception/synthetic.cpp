#include "nvi/perception/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "nvi/error.hpp"

namespace nvi::perception::synthetic {

Rgb face_albedo(Emotion emotion) {
    const float ratio = 0.05f + 0.1f * static_cast<float>(static_cast<int>(emotion));
    return {kFaceRed, kFaceRed, kFaceRed * ratio};
}

Rgb shade(const Rgb& albedo, float depth) {
    const float s = 1.0f - kShadeSlope * depth;
    return {albedo[0] * s, albedo[1] * s, albedo[2] * s};
}

DecodedPixel decode_pixel(float r, float g, float b) {
    const float hi = std::max({r, g, b});
    const float lo = std::min({r, g, b});
    auto depth_from = [&](float albedo_max) { return (1.0f - hi / albedo_max) / kShadeSlope; };

    DecodedPixel out;
    if (hi <= 0.0f || hi - lo <= 0.02f * hi) {
        out.surface = Surface::background;
        out.depth = depth_from(kBackgroundAlbedo[0]);
        return out;
    }
    if (r == hi && g / r < 0.4f && b / r < 0.4f) {
        out.surface = Surface::person;
        out.depth = depth_from(kPersonAlbedo[0]);
    } else if (b == hi && r / b < 0.4f && g / b < 0.4f) {
        out.surface = Surface::desk;
        out.depth = depth_from(kDeskAlbedo[2]);
    } else if (r == hi && g / r > 0.9f && b / r < 0.85f) {
        out.surface = Surface::face;
        out.depth = depth_from(kFaceRed);
        const int idx = static_cast<int>(std::lround((b / r - 0.05f) / 0.1f));
        out.emotion = static_cast<Emotion>(std::clamp(idx, 0, kEmotionCount - 1));
    } else {
        out.surface = Surface::background;
        out.depth = depth_from(kBackgroundAlbedo[0]);
    }
    return out;
}

EmotionVector emotion_confidences(Emotion emotion) {
    EmotionVector v = EmotionVector::Constant((1.0f - kTagConfidence) / static_cast<float>(kEmotionCount - 1));
    v(static_cast<int>(emotion)) = kTagConfidence;
    return v;
}

Mask human_mask(const Image& frame) {
    Mask mask = Mask::Zero(frame.height, frame.width);
    for (int y = 0; y < frame.height; ++y)
        for (int x = 0; x < frame.width; ++x) {
            const auto s = decode_pixel(frame(0, y, x), frame(1, y, x), frame(2, y, x)).surface;
            mask(y, x) = (s == Surface::person || s == Surface::face) ? 1 : 0;
        }
    return mask;
}

Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> label_components(const Mask& mask, int* count) {
    const int h = static_cast<int>(mask.rows()), w = static_cast<int>(mask.cols());
    Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> labels =
        Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(h, w);
    int next = 0;
    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask(y, x) || labels(y, x)) continue;
            ++next;
            labels(y, x) = next;
            stack.emplace_back(y, x);
            while (!stack.empty()) {
                const auto [cy, cx] = stack.back();
                stack.pop_back();
                constexpr std::array<std::pair<int, int>, 4> kSteps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
                for (const auto& [dy, dx] : kSteps) {
                    const int ny = cy + dy, nx = cx + dx;
                    if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                    if (!mask(ny, nx) || labels(ny, nx)) continue;
                    labels(ny, nx) = next;
                    stack.emplace_back(ny, nx);
                }
            }
        }
    if (count) *count = next;
    return labels;
}

void SegmentationTracker::start(const Image& first_frame, const BoundingBox& region) {
    int count = 0;
    const auto labels = label_components(human_mask(first_frame), &count);
    std::vector<bool> chosen(count + 1, false);
    for (int y = std::max(0, region.y); y < std::min(first_frame.height, region.y + region.height); ++y)
        for (int x = std::max(0, region.x); x < std::min(first_frame.width, region.x + region.width); ++x)
            if (labels(y, x)) chosen[labels(y, x)] = true;
    if (std::none_of(chosen.begin(), chosen.end(), [](bool b) { return b; }))
        throw Error("no person inside the initial teacher region");

    previous_teacher_ = Mask::Zero(first_frame.height, first_frame.width);
    for (int y = 0; y < first_frame.height; ++y)
        for (int x = 0; x < first_frame.width; ++x) previous_teacher_(y, x) = chosen[labels(y, x)] ? 1 : 0;
    started_ = true;
}

MaskPair SegmentationTracker::track(const Image& frame) {
    if (!started_) throw Error("tracker used before start()");
    if (previous_teacher_.rows() != frame.height || previous_teacher_.cols() != frame.width)
        throw Error("frame size changed during tracking");

    int count = 0;
    const auto labels = label_components(human_mask(frame), &count);
    std::vector<long> overlap(count + 1, 0);
    std::vector<double> cy(count + 1, 0.0), cx(count + 1, 0.0), area(count + 1, 0.0);
    double py = 0.0, px = 0.0, parea = 0.0;
    for (int y = 0; y < frame.height; ++y)
        for (int x = 0; x < frame.width; ++x) {
            const int l = labels(y, x);
            if (previous_teacher_(y, x)) {
                py += y;
                px += x;
                parea += 1.0;
            }
            if (!l) continue;
            cy[l] += y;
            cx[l] += x;
            area[l] += 1.0;
            if (previous_teacher_(y, x)) ++overlap[l];
        }

    std::vector<bool> teacher(count + 1, false);
    bool any = false;
    for (int l = 1; l <= count; ++l)
        if (overlap[l] > 0) teacher[l] = any = true;
    if (!any && count > 0 && parea > 0) {
        // Lost overlap (fast motion): fall back to the nearest component.
        py /= parea;
        px /= parea;
        int best = 1;
        double best_d = 1e300;
        for (int l = 1; l <= count; ++l) {
            const double d = std::hypot(cy[l] / area[l] - py, cx[l] / area[l] - px);
            if (d < best_d) best_d = d, best = l;
        }
        teacher[best] = true;
    }

    MaskPair out{Mask::Zero(frame.height, frame.width), Mask::Zero(frame.height, frame.width)};
    for (int y = 0; y < frame.height; ++y)
        for (int x = 0; x < frame.width; ++x) {
            const int l = labels(y, x);
            if (!l) continue;
            (teacher[l] ? out.teacher : out.student)(y, x) = 1;
        }
    if ((out.teacher != 0).any()) previous_teacher_ = out.teacher;
    return out;
}

DepthMap DepthDecoder::estimate(const Image& frame) {
    DepthMap depth(frame.height, frame.width);
    for (int y = 0; y < frame.height; ++y)
        for (int x = 0; x < frame.width; ++x) depth(y, x) = decode_pixel(frame(0, y, x), frame(1, y, x), frame(2, y, x)).depth;
    return depth;
}

std::optional<EmotionVector> EmotionDecoder::detect(const Image& frame, const BoundingBox& region) {
    std::array<int, kEmotionCount> votes{};
    bool found = false;
    for (int y = std::max(0, region.y); y < std::min(frame.height, region.y + region.height); ++y)
        for (int x = std::max(0, region.x); x < std::min(frame.width, region.x + region.width); ++x) {
            const auto p = decode_pixel(frame(0, y, x), frame(1, y, x), frame(2, y, x));
            if (p.surface != Surface::face) continue;
            ++votes[static_cast<int>(*p.emotion)];
            found = true;
        }
    if (!found) return std::nullopt;
    const auto best = std::max_element(votes.begin(), votes.end()) - votes.begin();
    return emotion_confidences(static_cast<Emotion>(best));
}

}  // namespace nvi::perception::synthetic
