#include "nvi/perception/observation_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "nvi/error.hpp"

static_assert(std::endian::native == std::endian::little, "observation files are little-endian");

namespace nvi::perception {
namespace {

constexpr char kMagic[8] = {'N', 'V', 'I', 'O', 'B', 'S', '0', '1'};

template <typename T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

class Reader {
public:
    Reader(std::istream& in, std::string file) : in_(in), file_(std::move(file)) {}

    template <typename T>
    T get() {
        T value{};
        bytes(&value, sizeof(T));
        return value;
    }

    void bytes(void* dst, std::size_t n) {
        if (!in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n))) fail("truncated file");
    }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(file_, 0, what); }

private:
    std::istream& in_;
    std::string file_;
};

void put_mask(std::ostream& out, const Mask& mask) {
    std::vector<unsigned char> packed((mask.size() + 7) / 8, 0);
    for (Eigen::Index i = 0; i < mask.size(); ++i)
        if (mask.data()[i]) packed[i / 8] |= static_cast<unsigned char>(1u << (i % 8));
    out.write(reinterpret_cast<const char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
}

Mask get_mask(Reader& r, int h, int w) {
    Mask mask(h, w);
    std::vector<unsigned char> packed((mask.size() + 7) / 8);
    r.bytes(packed.data(), packed.size());
    for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = (packed[i / 8] >> (i % 8)) & 1u;
    return mask;
}

}  // namespace

void write_observations(const ObservationStream& stream, const std::filesystem::path& path) {
    for (const auto& f : stream.frames) {
        validate_observation(f);
        if (f.rgb.height != stream.height || f.rgb.width != stream.width)
            throw ValidationError("frame " + std::to_string(f.frame_index) + " does not match the stream size");
    }
    const auto tmp = std::filesystem::path(path).concat(".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out.write(kMagic, sizeof kMagic);
        put<std::uint32_t>(out, kObservationFileVersion);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(stream.height));
        put<std::uint32_t>(out, static_cast<std::uint32_t>(stream.width));
        put<std::uint32_t>(out, static_cast<std::uint32_t>(stream.frames.size()));
        put<double>(out, stream.fps);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(stream.segment_id.size()));
        out.write(stream.segment_id.data(), static_cast<std::streamsize>(stream.segment_id.size()));

        const Eigen::Index pixels = Eigen::Index(stream.height) * stream.width;
        std::vector<unsigned char> rgb(static_cast<std::size_t>(pixels) * 3);
        for (const auto& f : stream.frames) {
            put<std::uint32_t>(out, static_cast<std::uint32_t>(f.frame_index));
            for (Eigen::Index p = 0; p < pixels; ++p)
                for (int c = 0; c < 3; ++c)
                    rgb[p * 3 + c] = static_cast<unsigned char>(std::lround(quantize_channel(f.rgb.data(c, p)) * 255.0f));
            out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
            put_mask(out, f.teacher_mask);
            put_mask(out, f.student_mask);
            out.write(reinterpret_cast<const char*>(f.depth.data()), static_cast<std::streamsize>(pixels * sizeof(float)));
            put<std::uint8_t>(out, f.emotions ? 1 : 0);
            if (f.emotions) out.write(reinterpret_cast<const char*>(f.emotions->data()), sizeof(float) * kEmotionCount);
        }
        if (!out) throw Error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

ObservationStream read_observations(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string(), 0, "cannot open observation file");
    Reader r(in, path.string());

    char magic[8];
    r.bytes(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof magic) != 0) r.fail("not an observation file");
    const auto version = r.get<std::uint32_t>();
    if (version != kObservationFileVersion) r.fail("unsupported observation file version " + std::to_string(version));

    ObservationStream s;
    s.height = static_cast<int>(r.get<std::uint32_t>());
    s.width = static_cast<int>(r.get<std::uint32_t>());
    const auto count = r.get<std::uint32_t>();
    s.fps = r.get<double>();
    const auto id_len = r.get<std::uint32_t>();
    if (id_len > 4096) r.fail("segment id too long");
    s.segment_id.resize(id_len);
    r.bytes(s.segment_id.data(), id_len);
    if (s.height <= 0 || s.width <= 0 || s.height > 16384 || s.width > 16384) r.fail("bad frame geometry");

    const Eigen::Index pixels = Eigen::Index(s.height) * s.width;
    std::vector<unsigned char> rgb(static_cast<std::size_t>(pixels) * 3);
    s.frames.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        FrameObservation f;
        f.frame_index = static_cast<int>(r.get<std::uint32_t>());
        r.bytes(rgb.data(), rgb.size());
        f.rgb = Image(3, s.height, s.width);
        for (Eigen::Index p = 0; p < pixels; ++p)
            for (int c = 0; c < 3; ++c) f.rgb.data(c, p) = static_cast<float>(rgb[p * 3 + c]) / 255.0f;
        f.teacher_mask = get_mask(r, s.height, s.width);
        f.student_mask = get_mask(r, s.height, s.width);
        f.depth.resize(s.height, s.width);
        r.bytes(f.depth.data(), static_cast<std::size_t>(pixels) * sizeof(float));
        const auto has_emotions = r.get<std::uint8_t>();
        if (has_emotions > 1) r.fail("bad emotion flag in frame " + std::to_string(f.frame_index));
        if (has_emotions) {
            EmotionVector e;
            r.bytes(e.data(), sizeof(float) * kEmotionCount);
            f.emotions = e;
        }
        s.frames.push_back(std::move(f));
    }
    if (in.peek() != std::char_traits<char>::eof()) r.fail("trailing bytes after last frame");
    return s;
}

}  // namespace nvi::perception
