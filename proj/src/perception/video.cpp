#include "nvi/perception/video.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <utility>

#include "nvi/error.hpp"

namespace nvi::perception {
namespace {

struct DecoderRegistry {
    std::mutex mutex;
    std::vector<std::pair<std::string, VideoDecoder>> decoders;
};

DecoderRegistry& decoders() {
    static DecoderRegistry r;
    return r;
}

int read_header_int(std::istream& in, const std::string& file) {
    int value = 0;
    in >> std::ws;
    while (in.peek() == '#') {
        std::string comment;
        std::getline(in, comment);
        in >> std::ws;
    }
    if (!(in >> value)) throw ParseError(file, 0, "bad PPM header");
    return value;
}

}  // namespace

Image read_ppm(const std::filesystem::path& path) {
    const std::string file = path.string();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(file, 0, "cannot open PPM frame");
    std::string magic;
    in >> magic;
    if (magic != "P6") throw ParseError(file, 0, "only binary P6 PPM is supported");
    const int width = read_header_int(in, file);
    const int height = read_header_int(in, file);
    const int maxval = read_header_int(in, file);
    if (width <= 0 || height <= 0 || maxval != 255) throw ParseError(file, 0, "unsupported PPM geometry or maxval");
    in.get();
    std::vector<unsigned char> bytes(static_cast<std::size_t>(width) * height * 3);
    if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size())))
        throw ParseError(file, 0, "truncated PPM pixel data");
    Image img(3, height, width);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            for (int c = 0; c < 3; ++c)
                img(c, y, x) = static_cast<float>(bytes[(static_cast<std::size_t>(y) * width + x) * 3 + c]) / 255.0f;
    return img;
}

void write_ppm(const Image& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x)
            for (int c = 0; c < 3; ++c) {
                const float v = std::clamp(image(c, y, x), 0.0f, 1.0f);
                out.put(static_cast<char>(static_cast<unsigned char>(v * 255.0f + 0.5f)));
            }
}

PpmDirectorySource::PpmDirectorySource(const std::filesystem::path& directory, double fps) : fps_(fps) {
    for (const auto& entry : std::filesystem::directory_iterator(directory))
        if (entry.is_regular_file() && entry.path().extension() == ".ppm") files_.push_back(entry.path());
    std::sort(files_.begin(), files_.end());
}

std::optional<Image> PpmDirectorySource::next() {
    if (pos_ >= files_.size()) return std::nullopt;
    return read_ppm(files_[pos_++]);
}

void register_video_decoder(const std::string& name, VideoDecoder decoder) {
    auto& r = decoders();
    std::lock_guard lock(r.mutex);
    for (auto& [n, d] : r.decoders)
        if (n == name) {
            d = std::move(decoder);
            return;
        }
    r.decoders.emplace_back(name, std::move(decoder));
}

std::unique_ptr<VideoSource> open_video(const std::filesystem::path& path, double fps) {
    std::vector<VideoDecoder> candidates;
    {
        auto& r = decoders();
        std::lock_guard lock(r.mutex);
        for (const auto& [_, d] : r.decoders) candidates.push_back(d);
    }
    for (const auto& d : candidates)
        if (auto source = d(path, fps)) return source;
    if (std::filesystem::is_directory(path)) return std::make_unique<PpmDirectorySource>(path, fps);
    throw PipelineError("decode", std::nullopt, "no decoder for '" + path.string() + "'");
}

}  // namespace nvi::perception
