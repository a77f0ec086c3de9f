#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>

#include <Eigen/Core>

#include "nvi/data/types.hpp"

namespace nvi {

using data::BoundingBox;

/// Multi-channel image stored channel-major: one row per channel, pixels in
/// row-major order (index = y * width + x).
template <typename Scalar>
struct Planes {
    using Storage = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using PlaneMap = Eigen::Map<Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    using ConstPlaneMap =
        Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

    int height = 0;
    int width = 0;
    Storage data;

    Planes() = default;
    Planes(int channels, int h, int w) : height(h), width(w), data(Storage::Zero(channels, Eigen::Index(h) * w)) {}

    int channels() const { return static_cast<int>(data.rows()); }
    Eigen::Index pixels() const { return Eigen::Index(height) * width; }

    Scalar& operator()(int c, int y, int x) { return data(c, Eigen::Index(y) * width + x); }
    Scalar operator()(int c, int y, int x) const { return data(c, Eigen::Index(y) * width + x); }

    PlaneMap plane(int c) { return PlaneMap(data.row(c).data(), height, width); }
    ConstPlaneMap plane(int c) const { return ConstPlaneMap(data.row(c).data(), height, width); }

    friend bool operator==(const Planes& a, const Planes& b) {
        return a.height == b.height && a.width == b.width && a.data.rows() == b.data.rows() &&
               a.data == b.data;
    }
};

using Image = Planes<float>;
using Mask = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using DepthMap = Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace detail {

struct BilinearTap {
    int i0, i1;
    float w1;
};

// Half-pixel-centre sampling, edge clamped.
inline BilinearTap bilinear_tap(int dst, int dst_size, int src_size) {
    const float scale = static_cast<float>(src_size) / static_cast<float>(dst_size);
    float src = (static_cast<float>(dst) + 0.5f) * scale - 0.5f;
    src = std::clamp(src, 0.0f, static_cast<float>(src_size - 1));
    const int i0 = static_cast<int>(std::floor(src));
    const int i1 = std::min(i0 + 1, src_size - 1);
    return {i0, i1, src - static_cast<float>(i0)};
}

inline int nearest_index(int dst, int dst_size, int src_size) {
    const int idx = static_cast<int>(std::floor((dst + 0.5) * src_size / static_cast<double>(dst_size)));
    return std::clamp(idx, 0, src_size - 1);
}

}  // namespace detail

/// Bilinear resampling of one 2-D array.
template <typename Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> resize_bilinear(
    const Eigen::ArrayBase<Derived>& src, int out_height, int out_width) {
    using Scalar = typename Derived::Scalar;
    Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(out_height, out_width);
    const int in_h = static_cast<int>(src.rows());
    const int in_w = static_cast<int>(src.cols());
    for (int y = 0; y < out_height; ++y) {
        const auto ty = detail::bilinear_tap(y, out_height, in_h);
        for (int x = 0; x < out_width; ++x) {
            const auto tx = detail::bilinear_tap(x, out_width, in_w);
            const Scalar top = src(ty.i0, tx.i0) * (1 - tx.w1) + src(ty.i0, tx.i1) * tx.w1;
            const Scalar bottom = src(ty.i1, tx.i0) * (1 - tx.w1) + src(ty.i1, tx.i1) * tx.w1;
            out(y, x) = top * (1 - ty.w1) + bottom * ty.w1;
        }
    }
    return out;
}

template <typename Scalar>
Planes<Scalar> resize_bilinear(const Planes<Scalar>& src, int out_height, int out_width) {
    Planes<Scalar> out(src.channels(), out_height, out_width);
    for (int c = 0; c < src.channels(); ++c) out.plane(c) = resize_bilinear(src.plane(c), out_height, out_width);
    return out;
}

/// Nearest-neighbour resampling (used for binary masks).
inline Mask resize_nearest(const Mask& src, int out_height, int out_width) {
    Mask out(out_height, out_width);
    const int in_h = static_cast<int>(src.rows());
    const int in_w = static_cast<int>(src.cols());
    for (int y = 0; y < out_height; ++y) {
        const int sy = detail::nearest_index(y, out_height, in_h);
        for (int x = 0; x < out_width; ++x) out(y, x) = src(sy, detail::nearest_index(x, out_width, in_w));
    }
    return out;
}

/// Tight bounding box of the non-zero pixels, or nullopt for an empty mask.
inline std::optional<BoundingBox> bounding_box(const Mask& mask) {
    int x0 = static_cast<int>(mask.cols()), y0 = static_cast<int>(mask.rows()), x1 = -1, y1 = -1;
    for (int y = 0; y < mask.rows(); ++y)
        for (int x = 0; x < mask.cols(); ++x)
            if (mask(y, x)) {
                x0 = std::min(x0, x);
                x1 = std::max(x1, x);
                y0 = std::min(y0, y);
                y1 = std::max(y1, y);
            }
    if (x1 < 0) return std::nullopt;
    return BoundingBox{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

/// Intersection over union of two binary masks; 1 when both are empty.
inline double iou(const Mask& a, const Mask& b) {
    const auto inter = ((a != 0) && (b != 0)).count();
    const auto uni = ((a != 0) || (b != 0)).count();
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace nvi
