#include "ftrl/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ftrl {

void init_fan_in_uniform(Tensor& t, std::size_t fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : t.flat()) v = dist(rng);
}

void Layer::fail(const std::string& msg) const {
    throw std::runtime_error(std::string(kind()) + " '" + name_ + "': " + msg);
}

void Layer::require_tape() const {
    if (!taped_) fail("backward without a recorded tape (forward in Train mode first)");
}

// ---------------------------------------------------------------------------
// FullyConnected

FullyConnected::FullyConnected(std::string name, std::size_t in_dim, std::size_t out_dim, Rng& rng)
    : Layer(std::move(name)),
      weight_(name_ + ".weight", Tensor({in_dim, out_dim})),
      bias_(name_ + ".bias", Tensor({out_dim})),
      in_dim_(in_dim),
      out_dim_(out_dim) {
    init_fan_in_uniform(weight_.value, in_dim, rng);
    init_fan_in_uniform(bias_.value, in_dim, rng);
}

Tensor FullyConnected::forward(const Tensor& x, Mode mode) {
    if (x.rank() != 2 || x.dim(1) != in_dim_)
        fail("expected input B x " + std::to_string(in_dim_) + ", got " + x.shape_str());
    const std::size_t b = x.dim(0);
    Tensor out({b, out_dim_});
    gemm(false, false, b, out_dim_, in_dim_, 1.0, x.data(), weight_.value.data(), 0.0, out.data());
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < out_dim_; ++j) out[i * out_dim_ + j] += bias_.value[j];
    if (mode == Mode::Train) {
        cached_input_ = x;
        taped_ = true;
    }
    return out;
}

Tensor FullyConnected::backward(const Tensor& grad_out) {
    require_tape();
    const std::size_t b = cached_input_.dim(0);
    if (grad_out.rank() != 2 || grad_out.dim(0) != b || grad_out.dim(1) != out_dim_)
        fail("gradient shape mismatch " + grad_out.shape_str());
    gemm(true, false, in_dim_, out_dim_, b, 1.0, cached_input_.data(), grad_out.data(), 1.0,
         weight_.grad.data());
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < out_dim_; ++j) bias_.grad[j] += grad_out[i * out_dim_ + j];
    Tensor grad_in({b, in_dim_});
    gemm(false, true, b, in_dim_, out_dim_, 1.0, grad_out.data(), weight_.value.data(), 0.0,
         grad_in.data());
    taped_ = false;
    return grad_in;
}

// ---------------------------------------------------------------------------
// ReLU

Tensor ReLU::forward(const Tensor& x, Mode mode) {
    Tensor out = x;
    for (double& v : out.flat()) v = v > 0.0 ? v : 0.0;
    if (mode == Mode::Train) {
        cached_input_ = x;
        taped_ = true;
    }
    return out;
}

Tensor ReLU::backward(const Tensor& grad_out) {
    require_tape();
    if (!grad_out.same_shape(cached_input_)) fail("gradient shape mismatch");
    Tensor grad_in = grad_out;
    for (std::size_t i = 0; i < grad_in.numel(); ++i)
        if (cached_input_[i] <= 0.0) grad_in[i] = 0.0;
    taped_ = false;
    return grad_in;
}

// ---------------------------------------------------------------------------
// Flatten

Tensor Flatten::forward(const Tensor& x, Mode mode) {
    if (x.rank() < 2) fail("expected a batched input, got " + x.shape_str());
    if (mode == Mode::Train) {
        cached_shape_ = x.shape();
        taped_ = true;
    }
    return reshape(x, {x.dim(0), x.numel() / x.dim(0)});
}

Tensor Flatten::backward(const Tensor& grad_out) {
    require_tape();
    taped_ = false;
    return reshape(grad_out, cached_shape_);
}

// ---------------------------------------------------------------------------
// AvgPool

Tensor AvgPool::forward(const Tensor& x, Mode mode) {
    if (x.rank() != 4) fail("expected B x C x H x W, got " + x.shape_str());
    const std::size_t b = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
    Tensor out({b, c});
    for (std::size_t i = 0; i < b * c; ++i) {
        double sum = 0.0;
        const double* src = x.data() + i * hw;
        for (std::size_t s = 0; s < hw; ++s) sum += src[s];
        out[i] = sum / static_cast<double>(hw);
    }
    if (mode == Mode::Train) {
        cached_shape_ = x.shape();
        taped_ = true;
    }
    return out;
}

Tensor AvgPool::backward(const Tensor& grad_out) {
    require_tape();
    const std::size_t b = cached_shape_[0], c = cached_shape_[1];
    const std::size_t hw = cached_shape_[2] * cached_shape_[3];
    if (grad_out.rank() != 2 || grad_out.dim(0) != b || grad_out.dim(1) != c)
        fail("gradient shape mismatch");
    Tensor grad_in(cached_shape_);
    for (std::size_t i = 0; i < b * c; ++i) {
        const double g = grad_out[i] / static_cast<double>(hw);
        double* dst = grad_in.data() + i * hw;
        for (std::size_t s = 0; s < hw; ++s) dst[s] = g;
    }
    taped_ = false;
    return grad_in;
}

// ---------------------------------------------------------------------------
// Conv2D

Conv2D::Conv2D(std::string name, std::size_t in_channels, std::size_t out_channels,
               std::size_t kernel, std::size_t stride, std::size_t pad, Rng& rng)
    : Layer(std::move(name)),
      weight_(name_ + ".weight", Tensor({out_channels, in_channels * kernel * kernel})),
      bias_(name_ + ".bias", Tensor({out_channels})),
      in_c_(in_channels),
      out_c_(out_channels),
      k_(kernel),
      stride_(stride),
      pad_(pad) {
    if (stride == 0) fail("stride must be >= 1");
    const std::size_t fan_in = in_channels * kernel * kernel;
    init_fan_in_uniform(weight_.value, fan_in, rng);
    init_fan_in_uniform(bias_.value, fan_in, rng);
}

std::size_t Conv2D::out_spatial(std::size_t in) const {
    const std::size_t padded = in + 2 * pad_;
    if (padded < k_ || (padded - k_) % stride_ != 0)
        fail("output spatial size (" + std::to_string(in) + " + 2*" + std::to_string(pad_) + " - " +
             std::to_string(k_) + ") / " + std::to_string(stride_) + " + 1 is not a positive integer");
    return (padded - k_) / stride_ + 1;
}

namespace {

// One sample: C x H x W -> (C*k*k) x (OH*OW) patch matrix.
void im2col(const double* img, std::size_t c, std::size_t h, std::size_t w, std::size_t k,
            std::size_t stride, std::size_t pad, std::size_t oh, std::size_t ow, double* cols) {
    std::size_t row = 0;
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx, ++row) {
                double* dst = cols + row * oh * ow;
                for (std::size_t oy = 0; oy < oh; ++oy) {
                    const std::ptrdiff_t iy =
                        static_cast<std::ptrdiff_t>(oy * stride + ky) - static_cast<std::ptrdiff_t>(pad);
                    for (std::size_t ox = 0; ox < ow; ++ox) {
                        const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                                  static_cast<std::ptrdiff_t>(pad);
                        double v = 0.0;
                        if (iy >= 0 && iy < static_cast<std::ptrdiff_t>(h) && ix >= 0 &&
                            ix < static_cast<std::ptrdiff_t>(w))
                            v = img[(ch * h + static_cast<std::size_t>(iy)) * w +
                                    static_cast<std::size_t>(ix)];
                        dst[oy * ow + ox] = v;
                    }
                }
            }
        }
    }
}

// Scatter-add of a patch matrix back into one sample's gradient image.
void col2im(const double* cols, std::size_t c, std::size_t h, std::size_t w, std::size_t k,
            std::size_t stride, std::size_t pad, std::size_t oh, std::size_t ow, double* img) {
    std::size_t row = 0;
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx, ++row) {
                const double* src = cols + row * oh * ow;
                for (std::size_t oy = 0; oy < oh; ++oy) {
                    const std::ptrdiff_t iy =
                        static_cast<std::ptrdiff_t>(oy * stride + ky) - static_cast<std::ptrdiff_t>(pad);
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                    for (std::size_t ox = 0; ox < ow; ++ox) {
                        const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                                  static_cast<std::ptrdiff_t>(pad);
                        if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                        img[(ch * h + static_cast<std::size_t>(iy)) * w +
                            static_cast<std::size_t>(ix)] += src[oy * ow + ox];
                    }
                }
            }
        }
    }
}

}  // namespace

Tensor Conv2D::forward(const Tensor& x, Mode mode) {
    if (x.rank() != 4 || x.dim(1) != in_c_)
        fail("expected B x " + std::to_string(in_c_) + " x H x W, got " + x.shape_str());
    const std::size_t b = x.dim(0), h = x.dim(2), w = x.dim(3);
    const std::size_t oh = out_spatial(h), ow = out_spatial(w);
    const std::size_t patch = in_c_ * k_ * k_;
    Tensor out({b, out_c_, oh, ow});
    std::vector<double> cols(patch * oh * ow);
    for (std::size_t i = 0; i < b; ++i) {
        im2col(x.data() + i * in_c_ * h * w, in_c_, h, w, k_, stride_, pad_, oh, ow, cols.data());
        double* dst = out.data() + i * out_c_ * oh * ow;
        gemm(false, false, out_c_, oh * ow, patch, 1.0, weight_.value.data(), cols.data(), 0.0, dst);
        for (std::size_t oc = 0; oc < out_c_; ++oc) {
            const double bv = bias_.value[oc];
            for (std::size_t s = 0; s < oh * ow; ++s) dst[oc * oh * ow + s] += bv;
        }
    }
    if (mode == Mode::Train) {
        cached_input_ = x;
        taped_ = true;
    }
    return out;
}

Tensor Conv2D::backward(const Tensor& grad_out) {
    require_tape();
    const Tensor& x = cached_input_;
    const std::size_t b = x.dim(0), h = x.dim(2), w = x.dim(3);
    const std::size_t oh = out_spatial(h), ow = out_spatial(w);
    const std::size_t patch = in_c_ * k_ * k_;
    if (grad_out.shape() != std::vector<std::size_t>{b, out_c_, oh, ow})
        fail("gradient shape mismatch " + grad_out.shape_str());
    Tensor grad_in(x.shape());
    std::vector<double> cols(patch * oh * ow);
    std::vector<double> gcols(patch * oh * ow);
    for (std::size_t i = 0; i < b; ++i) {
        const double* gy = grad_out.data() + i * out_c_ * oh * ow;
        im2col(x.data() + i * in_c_ * h * w, in_c_, h, w, k_, stride_, pad_, oh, ow, cols.data());
        // dW += gy * cols^T
        gemm(false, true, out_c_, patch, oh * ow, 1.0, gy, cols.data(), 1.0, weight_.grad.data());
        for (std::size_t oc = 0; oc < out_c_; ++oc) {
            double sum = 0.0;
            for (std::size_t s = 0; s < oh * ow; ++s) sum += gy[oc * oh * ow + s];
            bias_.grad[oc] += sum;
        }
        // dcols = W^T * gy, then scatter back
        gemm(true, false, patch, oh * ow, out_c_, 1.0, weight_.value.data(), gy, 0.0, gcols.data());
        col2im(gcols.data(), in_c_, h, w, k_, stride_, pad_, oh, ow,
               grad_in.data() + i * in_c_ * h * w);
    }
    taped_ = false;
    return grad_in;
}

// ---------------------------------------------------------------------------
// BatchNorm

BatchNorm::BatchNorm(std::string name, std::size_t channels, double epsilon, double momentum)
    : Layer(std::move(name)),
      gamma_(name_ + ".gamma", Tensor::full({channels}, 1.0)),
      beta_(name_ + ".beta", Tensor({channels})),
      running_mean_({channels}),
      running_var_(Tensor::full({channels}, 1.0)),
      channels_(channels),
      eps_(epsilon),
      momentum_(momentum) {
    if (epsilon <= 0.0) fail("epsilon must be > 0");
}

std::vector<std::pair<std::string, Tensor*>> BatchNorm::buffers() {
    return {{name_ + ".running_mean", &running_mean_}, {name_ + ".running_var", &running_var_}};
}

namespace {

// Channel-major traversal descriptor: flat = ((n * C + c) * S + s).
struct BnLayout {
    std::size_t n, c, s;
};

BnLayout bn_layout(const std::vector<std::size_t>& shape, std::size_t channels) {
    if (shape.size() == 2 && shape[1] == channels) return {shape[0], channels, 1};
    if (shape.size() == 4 && shape[1] == channels) return {shape[0], channels, shape[2] * shape[3]};
    return {0, 0, 0};
}

}  // namespace

Tensor BatchNorm::forward(const Tensor& x, Mode mode) {
    const BnLayout L = bn_layout(x.shape(), channels_);
    if (L.c == 0) fail("expected B x " + std::to_string(channels_) + " (x H x W), got " + x.shape_str());
    Tensor out(x.shape());
    if (mode == Mode::Eval) {
        for (std::size_t n = 0; n < L.n; ++n)
            for (std::size_t c = 0; c < channels_; ++c) {
                const double inv = 1.0 / std::sqrt(running_var_[c] + eps_);
                const double g = gamma_.value[c], bta = beta_.value[c], mu = running_mean_[c];
                const double* src = x.data() + (n * channels_ + c) * L.s;
                double* dst = out.data() + (n * channels_ + c) * L.s;
                for (std::size_t s = 0; s < L.s; ++s) dst[s] = g * (src[s] - mu) * inv + bta;
            }
        return out;
    }
    const double count = static_cast<double>(L.n * L.s);
    if (L.n * L.s < 2) fail("training batch statistics need at least 2 values per channel");
    cached_xhat_ = Tensor(x.shape());
    cached_inv_std_.assign(channels_, 0.0);
    cached_shape_ = x.shape();
    for (std::size_t c = 0; c < channels_; ++c) {
        double mean = 0.0;
        for (std::size_t n = 0; n < L.n; ++n) {
            const double* src = x.data() + (n * channels_ + c) * L.s;
            for (std::size_t s = 0; s < L.s; ++s) mean += src[s];
        }
        mean /= count;
        double var = 0.0;
        for (std::size_t n = 0; n < L.n; ++n) {
            const double* src = x.data() + (n * channels_ + c) * L.s;
            for (std::size_t s = 0; s < L.s; ++s) {
                const double d = src[s] - mean;
                var += d * d;
            }
        }
        var /= count;
        const double inv = 1.0 / std::sqrt(var + eps_);
        cached_inv_std_[c] = inv;
        const double g = gamma_.value[c], bta = beta_.value[c];
        for (std::size_t n = 0; n < L.n; ++n) {
            const double* src = x.data() + (n * channels_ + c) * L.s;
            double* xh = cached_xhat_.data() + (n * channels_ + c) * L.s;
            double* dst = out.data() + (n * channels_ + c) * L.s;
            for (std::size_t s = 0; s < L.s; ++s) {
                xh[s] = (src[s] - mean) * inv;
                dst[s] = g * xh[s] + bta;
            }
        }
        running_mean_[c] = (1.0 - momentum_) * running_mean_[c] + momentum_ * mean;
        running_var_[c] = (1.0 - momentum_) * running_var_[c] + momentum_ * var;
    }
    taped_ = true;
    return out;
}

Tensor BatchNorm::backward(const Tensor& grad_out) {
    require_tape();
    if (grad_out.shape() != cached_shape_) fail("gradient shape mismatch");
    const BnLayout L = bn_layout(cached_shape_, channels_);
    const double count = static_cast<double>(L.n * L.s);
    Tensor grad_in(cached_shape_);
    for (std::size_t c = 0; c < channels_; ++c) {
        double sum_gy = 0.0, sum_gy_xhat = 0.0;
        for (std::size_t n = 0; n < L.n; ++n) {
            const double* gy = grad_out.data() + (n * channels_ + c) * L.s;
            const double* xh = cached_xhat_.data() + (n * channels_ + c) * L.s;
            for (std::size_t s = 0; s < L.s; ++s) {
                sum_gy += gy[s];
                sum_gy_xhat += gy[s] * xh[s];
            }
        }
        gamma_.grad[c] += sum_gy_xhat;
        beta_.grad[c] += sum_gy;
        const double g_inv = gamma_.value[c] * cached_inv_std_[c];
        const double mean_gy = sum_gy / count, mean_gy_xhat = sum_gy_xhat / count;
        for (std::size_t n = 0; n < L.n; ++n) {
            const double* gy = grad_out.data() + (n * channels_ + c) * L.s;
            const double* xh = cached_xhat_.data() + (n * channels_ + c) * L.s;
            double* gx = grad_in.data() + (n * channels_ + c) * L.s;
            for (std::size_t s = 0; s < L.s; ++s)
                gx[s] = g_inv * (gy[s] - mean_gy - xh[s] * mean_gy_xhat);
        }
    }
    taped_ = false;
    return grad_in;
}

// ---------------------------------------------------------------------------
// ResidualBlock

ResidualBlock::ResidualBlock(std::string name, std::size_t in_channels, std::size_t out_channels,
                             std::size_t stride, Rng& rng)
    : Layer(std::move(name)), has_proj_(stride != 1 || in_channels != out_channels) {
    // Output sizes must divide exactly, so a stride-2 block widens its first
    // kernel to 4 (pad 1) and projects the skip with a 2x2 stride-2 kernel;
    // both halve an even spatial size exactly.
    const std::size_t k1 = stride == 1 ? 3 : 4;
    conv1_ = std::make_unique<Conv2D>(name_ + ".conv1", in_channels, out_channels, k1, stride, 1, rng);
    bn1_ = std::make_unique<BatchNorm>(name_ + ".bn1", out_channels);
    relu1_ = std::make_unique<ReLU>(name_ + ".relu1");
    conv2_ = std::make_unique<Conv2D>(name_ + ".conv2", out_channels, out_channels, 3, 1, 1, rng);
    bn2_ = std::make_unique<BatchNorm>(name_ + ".bn2", out_channels);
    if (has_proj_) {
        const std::size_t kp = stride == 1 ? 1 : 2;
        proj_ = std::make_unique<Conv2D>(name_ + ".proj", in_channels, out_channels, kp, stride, 0, rng);
        proj_bn_ = std::make_unique<BatchNorm>(name_ + ".proj_bn", out_channels);
    }
}

Tensor ResidualBlock::forward(const Tensor& x, Mode mode) {
    Tensor main = bn2_->forward(
        conv2_->forward(relu1_->forward(bn1_->forward(conv1_->forward(x, mode), mode), mode), mode),
        mode);
    Tensor skip = has_proj_ ? proj_bn_->forward(proj_->forward(x, mode), mode) : x;
    Tensor pre = add(main, skip);
    Tensor out = pre;
    for (double& v : out.flat()) v = v > 0.0 ? v : 0.0;
    if (mode == Mode::Train) {
        cached_pre_relu_ = std::move(pre);
        taped_ = true;
    }
    return out;
}

Tensor ResidualBlock::backward(const Tensor& grad_out) {
    require_tape();
    Tensor g = grad_out;
    for (std::size_t i = 0; i < g.numel(); ++i)
        if (cached_pre_relu_[i] <= 0.0) g[i] = 0.0;
    Tensor g_main = conv1_->backward(bn1_->backward(relu1_->backward(conv2_->backward(bn2_->backward(g)))));
    Tensor g_skip = has_proj_ ? proj_->backward(proj_bn_->backward(g)) : g;
    taped_ = false;
    return add(g_main, g_skip);
}

std::vector<Parameter*> ResidualBlock::parameters() {
    std::vector<Parameter*> out;
    for (Layer* l : std::initializer_list<Layer*>{conv1_.get(), bn1_.get(), conv2_.get(), bn2_.get(),
                                                  proj_.get(), proj_bn_.get()}) {
        if (!l) continue;
        for (Parameter* p : l->parameters()) out.push_back(p);
    }
    return out;
}

std::vector<std::pair<std::string, Tensor*>> ResidualBlock::buffers() {
    std::vector<std::pair<std::string, Tensor*>> out;
    for (Layer* l : std::initializer_list<Layer*>{bn1_.get(), bn2_.get(), proj_bn_.get()}) {
        if (!l) continue;
        for (auto& b : l->buffers()) out.push_back(b);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Graph

Tensor Graph::forward(const Tensor& x, Mode mode) {
    Tensor cur = x;
    for (auto& layer : layers_) cur = layer->forward(cur, mode);
    taped_ = (mode == Mode::Train);
    return cur;
}

Tensor Graph::backward(const Tensor& grad_out) {
    if (!taped_) throw std::runtime_error("graph backward without a recorded tape");
    Tensor g = grad_out;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    taped_ = false;
    return g;
}

std::vector<Parameter*> Graph::parameters() {
    std::vector<Parameter*> out;
    for (auto& layer : layers_)
        for (Parameter* p : layer->parameters()) out.push_back(p);
    return out;
}

std::vector<std::pair<std::string, Tensor*>> Graph::buffers() {
    std::vector<std::pair<std::string, Tensor*>> out;
    for (auto& layer : layers_)
        for (auto& b : layer->buffers()) out.push_back(b);
    return out;
}

void Graph::zero_grad() {
    for (Parameter* p : parameters()) p->zero_grad();
}

std::size_t Graph::parameter_count() {
    std::size_t n = 0;
    for (Parameter* p : parameters()) n += p->value.numel();
    return n;
}

// ---------------------------------------------------------------------------
// Losses

double mse_loss(const Tensor& output, const Tensor& target) {
    if (!output.same_shape(target))
        throw std::invalid_argument("mse_loss shape mismatch: " + output.shape_str() + " vs " +
                                    target.shape_str());
    double sum = 0.0;
    for (std::size_t i = 0; i < output.numel(); ++i) {
        const double d = output[i] - target[i];
        sum += d * d;
    }
    return sum / static_cast<double>(output.numel());
}

Tensor mse_grad(const Tensor& output, const Tensor& target) {
    if (!output.same_shape(target)) throw std::invalid_argument("mse_grad shape mismatch");
    Tensor g(output.shape());
    const double scale = 2.0 / static_cast<double>(output.numel());
    for (std::size_t i = 0; i < output.numel(); ++i) g[i] = scale * (output[i] - target[i]);
    return g;
}

std::pair<double, Tensor> softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
    if (logits.rank() != 2 || logits.dim(0) != labels.size())
        throw std::invalid_argument("softmax_cross_entropy expects B x K logits with B labels");
    const std::size_t b = logits.dim(0), k = logits.dim(1);
    Tensor grad(logits.shape());
    double loss = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= k)
            throw std::invalid_argument("label out of range: " + std::to_string(y));
        const double* row = logits.data() + i * k;
        double mx = row[0];
        for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, row[j]);
        double denom = 0.0;
        for (std::size_t j = 0; j < k; ++j) denom += std::exp(row[j] - mx);
        loss += std::log(denom) - (row[static_cast<std::size_t>(y)] - mx);
        double* g = grad.data() + i * k;
        for (std::size_t j = 0; j < k; ++j)
            g[j] = (std::exp(row[j] - mx) / denom - (static_cast<std::size_t>(y) == j ? 1.0 : 0.0)) /
                   static_cast<double>(b);
    }
    return {loss / static_cast<double>(b), std::move(grad)};
}

// ---------------------------------------------------------------------------
// Optimizer

void Optimizer::step(const std::vector<Parameter*>& params) {
    ++t_;
    for (Parameter* p : params) {
        Slot& slot = slots_.try_emplace(p->name).first->second;
        if (slot.m.numel() == 0) {
            slot.m = Tensor(p->value.shape());
            if (cfg_.kind == OptimizerKind::Adam) slot.v = Tensor(p->value.shape());
        }
        if (!slot.m.same_shape(p->value))
            throw std::runtime_error("optimizer state shape mismatch for parameter " + p->name);
        const std::size_t n = p->value.numel();
        if (cfg_.kind == OptimizerKind::SGDMomentum) {
            for (std::size_t i = 0; i < n; ++i) {
                slot.m[i] = cfg_.momentum * slot.m[i] + p->grad[i];
                p->value[i] -= cfg_.lr * slot.m[i];
            }
        } else {
            const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
            const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
            for (std::size_t i = 0; i < n; ++i) {
                slot.m[i] = cfg_.beta1 * slot.m[i] + (1.0 - cfg_.beta1) * p->grad[i];
                slot.v[i] = cfg_.beta2 * slot.v[i] + (1.0 - cfg_.beta2) * p->grad[i] * p->grad[i];
                const double mhat = slot.m[i] / bc1;
                const double vhat = slot.v[i] / bc2;
                p->value[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
            }
        }
        p->zero_grad();
    }
}

}  // namespace ftrl
