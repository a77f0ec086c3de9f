#pragma once
// The test backbone: two conv/ReLU/pool stages on an 8x-downsampled input,
// followed by the 256-unit regression head.

#include <random>

#include "nvi/nn/layers.hpp"

namespace nvi::regress {

template <typename Scalar>
class SmallCnnCore {
public:
    static constexpr int kPool = 3;
    static constexpr int kChannels1 = 8;
    static constexpr int kChannels2 = 16;
    static constexpr int kHidden = 256;

    /// `size` is the side of the (already downsampled) input; must be a
    /// multiple of 9.
    SmallCnnCore(int in_channels, int size)
        : size_(size),
          conv1_(layout_, in_channels, kChannels1),
          conv2_(layout_, kChannels1, kChannels2),
          fc1_(layout_, Eigen::Index(kChannels2) * (size / 9) * (size / 9), kHidden),
          fc2_(layout_, kHidden, 1) {}

    Eigen::Index parameter_count() const { return layout_.size(); }
    int input_size() const { return size_; }

    void init(nn::Vector<Scalar>& params, std::mt19937_64& rng) const {
        conv1_.init(params, rng);
        conv2_.init(params, rng);
        fc1_.init(params, rng);
        fc2_.init(params, rng);
    }

    struct Trace {
        nn::Matrix<Scalar> cols1, cols2, flat, hidden;
        Planes<Scalar> act1, act2;
        Scalar output{};
    };

    Scalar forward(const nn::Vector<Scalar>& p, const Planes<Scalar>& x, Trace& t) const {
        const int s1 = size_, s2 = size_ / kPool;
        t.cols1 = nn::Conv3x3<Scalar>::im2col(x);
        t.act1 = conv1_.forward(p, t.cols1, s1, s1);
        t.act1.data = nn::relu(t.act1.data);
        t.cols2 = nn::Conv3x3<Scalar>::im2col(nn::avg_pool(t.act1, kPool));
        t.act2 = conv2_.forward(p, t.cols2, s2, s2);
        t.act2.data = nn::relu(t.act2.data);
        const Planes<Scalar> pooled = nn::avg_pool(t.act2, kPool);
        t.flat = Eigen::Map<const nn::Matrix<Scalar>>(pooled.data.data(), pooled.data.size(), 1);
        t.hidden = nn::relu(fc1_.forward(p, t.flat));
        t.output = fc2_.forward(p, t.hidden)(0, 0);
        return t.output;
    }

    Scalar forward(const nn::Vector<Scalar>& p, const Planes<Scalar>& x) const {
        Trace t;
        return forward(p, x, t);
    }

    /// Adds d(loss)/d(params) given d(loss)/d(output). With `backbone` false
    /// only the two dense layers receive gradient.
    void backward(const nn::Vector<Scalar>& p, nn::Vector<Scalar>& g, const Trace& t, Scalar grad_output,
                  bool backbone) const {
        const int s1 = size_, s2 = size_ / kPool, s3 = s2 / kPool;
        const nn::Matrix<Scalar> g_hidden =
            nn::relu_backward(fc2_.backward(p, g, t.hidden, nn::Matrix<Scalar>::Constant(1, 1, grad_output)), t.hidden);
        const nn::Matrix<Scalar> g_flat = fc1_.backward(p, g, t.flat, g_hidden);
        if (!backbone) return;

        Planes<Scalar> g_pooled(kChannels2, s3, s3);
        g_pooled.data = Eigen::Map<const typename Planes<Scalar>::Storage>(g_flat.data(), kChannels2, Eigen::Index(s3) * s3);
        Planes<Scalar> g_act2 = nn::avg_pool_backward(g_pooled, kPool, s2, s2);
        g_act2.data = nn::relu_backward(g_act2.data, t.act2.data);
        const Planes<Scalar> g_pool1 = conv2_.backward(p, g, t.cols2, g_act2, true);
        Planes<Scalar> g_act1 = nn::avg_pool_backward(g_pool1, kPool, s1, s1);
        g_act1.data = nn::relu_backward(g_act1.data, t.act1.data);
        conv1_.backward(p, g, t.cols1, g_act1, false);
    }

private:
    int size_;
    nn::ParameterLayout layout_;
    nn::Conv3x3<Scalar> conv1_;
    nn::Conv3x3<Scalar> conv2_;
    nn::Dense<Scalar> fc1_;
    nn::Dense<Scalar> fc2_;
};

}  // namespace nvi::regress
