#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nvi/image.hpp"

namespace nvi::perception {

/// Sequential frame iterator with frame-rate metadata.
class VideoSource {
public:
    virtual ~VideoSource() = default;
    virtual double fps() const = 0;
    /// Total frames if known up front, otherwise -1.
    virtual int frame_count() const = 0;
    /// Next RGB frame in [0, 1], or nullopt at end of stream.
    virtual std::optional<Image> next() = 0;
};

/// Frames held in memory.
class MemoryVideoSource final : public VideoSource {
public:
    MemoryVideoSource(std::vector<Image> frames, double fps) : frames_(std::move(frames)), fps_(fps) {}
    double fps() const override { return fps_; }
    int frame_count() const override { return static_cast<int>(frames_.size()); }
    std::optional<Image> next() override {
        if (pos_ >= frames_.size()) return std::nullopt;
        return frames_[pos_++];
    }

private:
    std::vector<Image> frames_;
    double fps_;
    std::size_t pos_ = 0;
};

/// A directory of binary PPM (P6, maxval 255) frames, read in lexicographic
/// filename order. This is the decoder for footage pre-split into frames.
class PpmDirectorySource final : public VideoSource {
public:
    PpmDirectorySource(const std::filesystem::path& directory, double fps);
    double fps() const override { return fps_; }
    int frame_count() const override { return static_cast<int>(files_.size()); }
    std::optional<Image> next() override;

private:
    std::vector<std::filesystem::path> files_;
    double fps_;
    std::size_t pos_ = 0;
};

Image read_ppm(const std::filesystem::path& path);
void write_ppm(const Image& image, const std::filesystem::path& path);

/// Decoder slot: returns a source when it recognises `path`, else nullptr.
using VideoDecoder = std::function<std::unique_ptr<VideoSource>(const std::filesystem::path& path, double fps)>;

void register_video_decoder(const std::string& name, VideoDecoder decoder);

/// Tries registered decoders in registration order, then the PPM directory
/// decoder. Throws PipelineError (stage "decode") when nothing matches.
std::unique_ptr<VideoSource> open_video(const std::filesystem::path& path, double fps);

}  // namespace nvi::perception
