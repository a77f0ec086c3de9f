#pragma once
// Minimal dense/convolutional building blocks over a flat parameter buffer.
//
// Every layer only records where its weights live inside the owning model's
// parameter vector; forward/backward take that vector (and the matching
// gradient vector) explicitly, so a model is trivially serialisable and the
// optimiser works on one contiguous Eigen vector.

#include <cmath>
#include <random>

#include <Eigen/Core>

#include "nvi/image.hpp"

namespace nvi::nn {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

struct ParamSlot {
    Eigen::Index offset = 0;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;

    Eigen::Index size() const { return rows * cols; }
};

class ParameterLayout {
public:
    ParamSlot add(Eigen::Index rows, Eigen::Index cols) {
        ParamSlot slot{total_, rows, cols};
        total_ += rows * cols;
        return slot;
    }
    Eigen::Index size() const { return total_; }

private:
    Eigen::Index total_ = 0;
};

template <typename Scalar>
Eigen::Map<Matrix<Scalar>> view(Vector<Scalar>& buffer, const ParamSlot& s) {
    return Eigen::Map<Matrix<Scalar>>(buffer.data() + s.offset, s.rows, s.cols);
}

template <typename Scalar>
Eigen::Map<const Matrix<Scalar>> view(const Vector<Scalar>& buffer, const ParamSlot& s) {
    return Eigen::Map<const Matrix<Scalar>>(buffer.data() + s.offset, s.rows, s.cols);
}

/// He-uniform initialisation; biases start at zero.
template <typename Scalar>
void init_he_uniform(Vector<Scalar>& params, const ParamSlot& weights, const ParamSlot& bias,
                     Eigen::Index fan_in, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-limit, limit);
    auto w = view(params, weights);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
        for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = static_cast<Scalar>(u(rng));
    view(params, bias).setZero();
}

/// Fully connected layer: y = W x + b, operating on column batches.
template <typename Scalar>
class Dense {
public:
    Dense() = default;
    Dense(ParameterLayout& layout, Eigen::Index in, Eigen::Index out)
        : in_(in), out_(out), weights_(layout.add(out, in)), bias_(layout.add(out, 1)) {}

    Eigen::Index inputs() const { return in_; }
    Eigen::Index outputs() const { return out_; }

    void init(Vector<Scalar>& params, std::mt19937_64& rng) const {
        init_he_uniform(params, weights_, bias_, in_, rng);
    }

    Matrix<Scalar> forward(const Vector<Scalar>& params, const Matrix<Scalar>& x) const {
        return (view(params, weights_) * x).colwise() + view(params, bias_).col(0);
    }

    /// Accumulates dL/dW, dL/db into `grads` and returns dL/dx.
    Matrix<Scalar> backward(const Vector<Scalar>& params, Vector<Scalar>& grads, const Matrix<Scalar>& x,
                            const Matrix<Scalar>& grad_out, bool accumulate_params = true) const {
        if (accumulate_params) {
            view(grads, weights_).noalias() += grad_out * x.transpose();
            view(grads, bias_).col(0) += grad_out.rowwise().sum();
        }
        return view(params, weights_).transpose() * grad_out;
    }

private:
    Eigen::Index in_ = 0;
    Eigen::Index out_ = 0;
    ParamSlot weights_;
    ParamSlot bias_;
};

/// 3x3 convolution, stride 1, zero padding 1, via im2col.
template <typename Scalar>
class Conv3x3 {
public:
    Conv3x3() = default;
    Conv3x3(ParameterLayout& layout, int in_channels, int out_channels)
        : in_(in_channels), out_(out_channels),
          weights_(layout.add(out_channels, Eigen::Index(in_channels) * 9)),
          bias_(layout.add(out_channels, 1)) {}

    int in_channels() const { return in_; }
    int out_channels() const { return out_; }

    void init(Vector<Scalar>& params, std::mt19937_64& rng) const {
        init_he_uniform(params, weights_, bias_, Eigen::Index(in_) * 9, rng);
    }

    /// Patch matrix: row (c * 9 + ky * 3 + kx), column = output pixel.
    static Matrix<Scalar> im2col(const Planes<Scalar>& in) {
        const int h = in.height, w = in.width;
        Matrix<Scalar> cols = Matrix<Scalar>::Zero(Eigen::Index(in.channels()) * 9, in.pixels());
        for (int c = 0; c < in.channels(); ++c)
            for (int ky = 0; ky < 3; ++ky)
                for (int kx = 0; kx < 3; ++kx) {
                    const Eigen::Index row = Eigen::Index(c) * 9 + ky * 3 + kx;
                    for (int y = 0; y < h; ++y) {
                        const int sy = y + ky - 1;
                        if (sy < 0 || sy >= h) continue;
                        for (int x = 0; x < w; ++x) {
                            const int sx = x + kx - 1;
                            if (sx < 0 || sx >= w) continue;
                            cols(row, Eigen::Index(y) * w + x) = in(c, sy, sx);
                        }
                    }
                }
        return cols;
    }

    static Planes<Scalar> col2im(const Matrix<Scalar>& cols, int channels, int h, int w) {
        Planes<Scalar> out(channels, h, w);
        for (int c = 0; c < channels; ++c)
            for (int ky = 0; ky < 3; ++ky)
                for (int kx = 0; kx < 3; ++kx) {
                    const Eigen::Index row = Eigen::Index(c) * 9 + ky * 3 + kx;
                    for (int y = 0; y < h; ++y) {
                        const int sy = y + ky - 1;
                        if (sy < 0 || sy >= h) continue;
                        for (int x = 0; x < w; ++x) {
                            const int sx = x + kx - 1;
                            if (sx < 0 || sx >= w) continue;
                            out(c, sy, sx) += cols(row, Eigen::Index(y) * w + x);
                        }
                    }
                }
        return out;
    }

    Planes<Scalar> forward(const Vector<Scalar>& params, const Matrix<Scalar>& cols, int h, int w) const {
        Planes<Scalar> out;
        out.height = h;
        out.width = w;
        out.data = (view(params, weights_) * cols).colwise() + view(params, bias_).col(0);
        return out;
    }

    /// Accumulates parameter gradients; returns dL/d(input) when requested.
    Planes<Scalar> backward(const Vector<Scalar>& params, Vector<Scalar>& grads, const Matrix<Scalar>& cols,
                            const Planes<Scalar>& grad_out, bool need_input_grad,
                            bool accumulate_params = true) const {
        if (accumulate_params) {
            view(grads, weights_).noalias() += grad_out.data * cols.transpose();
            view(grads, bias_).col(0) += grad_out.data.rowwise().sum();
        }
        if (!need_input_grad) return {};
        const Matrix<Scalar> grad_cols = view(params, weights_).transpose() * grad_out.data;
        return col2im(grad_cols, in_, grad_out.height, grad_out.width);
    }

private:
    int in_ = 0;
    int out_ = 0;
    ParamSlot weights_;
    ParamSlot bias_;
};

/// Non-overlapping k x k average pooling; trailing rows/cols that do not fill
/// a window are dropped.
template <typename Scalar>
Planes<Scalar> avg_pool(const Planes<Scalar>& in, int k) {
    const int oh = in.height / k, ow = in.width / k;
    Planes<Scalar> out(in.channels(), oh, ow);
    const Scalar inv = Scalar(1) / static_cast<Scalar>(k * k);
    for (int c = 0; c < in.channels(); ++c) {
        const auto src = in.plane(c);
        auto dst = out.plane(c);
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) dst(y, x) = src.block(y * k, x * k, k, k).sum() * inv;
    }
    return out;
}

template <typename Scalar>
Planes<Scalar> avg_pool_backward(const Planes<Scalar>& grad_out, int k, int in_height, int in_width) {
    Planes<Scalar> grad_in(grad_out.channels(), in_height, in_width);
    const Scalar inv = Scalar(1) / static_cast<Scalar>(k * k);
    for (int c = 0; c < grad_out.channels(); ++c) {
        const auto g = grad_out.plane(c);
        auto dst = grad_in.plane(c);
        for (int y = 0; y < grad_out.height; ++y)
            for (int x = 0; x < grad_out.width; ++x) dst.block(y * k, x * k, k, k).setConstant(g(y, x) * inv);
    }
    return grad_in;
}

template <typename Derived>
auto relu(const Eigen::MatrixBase<Derived>& x) {
    return x.cwiseMax(typename Derived::Scalar(0));
}

/// Gradient through a ReLU given its *output* activations.
template <typename DerivedG, typename DerivedA>
auto relu_backward(const Eigen::MatrixBase<DerivedG>& grad, const Eigen::MatrixBase<DerivedA>& activated) {
    using Scalar = typename DerivedG::Scalar;
    return (activated.array() > Scalar(0)).select(grad, Scalar(0));
}

}  // namespace nvi::nn
