#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nvi/perception/types.hpp"

namespace nvi::perception {

inline constexpr std::uint32_t kObservationFileVersion = 1;

/// Extracted observations of one segment, as persisted between the extract
/// and train/evaluate stages. Layout is documented in docs/file-formats.md.
struct ObservationStream {
    std::string segment_id;
    double fps = 0.0;
    int height = 0;
    int width = 0;
    std::vector<FrameObservation> frames;
};

void write_observations(const ObservationStream& stream, const std::filesystem::path& path);
ObservationStream read_observations(const std::filesystem::path& path);

/// RGB is stored as 8-bit; this is the value a channel reads back as.
inline float quantize_channel(float v) {
    const float clamped = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
    return static_cast<float>(static_cast<int>(clamped * 255.0f + 0.5f)) / 255.0f;
}

}  // namespace nvi::perception
