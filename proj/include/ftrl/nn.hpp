#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ftrl/tensor.hpp"

namespace ftrl {

enum class Mode { Train, Eval };

struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter() = default;
    Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}
    void zero_grad() { std::fill(grad.flat().begin(), grad.flat().end(), 0.0); }
};

using Rng = std::mt19937_64;

// Fan-in scaled uniform init, U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
void init_fan_in_uniform(Tensor& t, std::size_t fan_in, Rng& rng);

class Layer {
public:
    explicit Layer(std::string name) : name_(std::move(name)) {}
    virtual ~Layer() = default;

    // Train mode records the tape for backward; Eval mutates nothing.
    virtual Tensor forward(const Tensor& x, Mode mode) = 0;
    // Consumes the recorded tape, accumulates parameter gradients, returns
    // the gradient with respect to the layer input.
    virtual Tensor backward(const Tensor& grad_out) = 0;

    virtual std::vector<Parameter*> parameters() { return {}; }
    // Non-learned state (running statistics) included in checkpoints.
    virtual std::vector<std::pair<std::string, Tensor*>> buffers() { return {}; }
    virtual const char* kind() const = 0;

    const std::string& name() const { return name_; }

protected:
    [[noreturn]] void fail(const std::string& msg) const;
    void require_tape() const;
    std::string name_;
    bool taped_ = false;
};

class FullyConnected : public Layer {
public:
    FullyConnected(std::string name, std::size_t in_dim, std::size_t out_dim, Rng& rng);
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }
    const char* kind() const override { return "FullyConnected"; }

    Parameter weight_;  // in_dim x out_dim
    Parameter bias_;    // out_dim

private:
    std::size_t in_dim_, out_dim_;
    Tensor cached_input_;
};

class ReLU : public Layer {
public:
    explicit ReLU(std::string name) : Layer(std::move(name)) {}
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& grad_out) override;
    const char* kind() const override { return "ReLU"; }

private:
    Tensor cached_input_;
};

class Flatten : public Layer {
public:
    explicit Flatten(std::string name) : Layer(std::move(name)) {}
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& grad_out) override;
    const char* kind() const override { return "Flatten"; }

private:
    std::vector<std::size_t> cached_shape_;
};

// Global average pool over the spatial axes: B x C x H x W -> B x C.
class AvgPool : public Layer {
public:
    explicit AvgPool(std::string name) : Layer(std::move(name)) {}
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& grad_out) override;
    const char* kind() const override { return "AvgPool"; }

private:
    std::vector<std::size_t> cached_shape_;
};

class Conv2D : public Layer {
public:
    Conv2D(std::string name, std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
           std::size_t stride, std::size_t pad, Rng& rng);
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }
    const char* kind() const override { return "Conv2D"; }

    Parameter weight_;  // out_channels x (in_channels * k * k)
    Parameter bias_;    // out_channels

private:
    std::size_t in_c_, out_c_, k_, stride_, pad_;
    Tensor cached_input_;
    std::size_t out_spatial(std::size_t in) const;
};

// Per-channel batch normalization. Accepts B x D (channel = feature) or
// B x C x H x W (channel = C, statistics over B, H, W).
class BatchNorm : public Layer {
public:
    BatchNorm(std::string name, std::size_t channels, double epsilon = 1e-5, double momentum = 0.1);
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<Parameter*> parameters() override { return {&gamma_, &beta_}; }
    std::vector<std::pair<std::string, Tensor*>> buffers() override;
    const char* kind() const override { return "BatchNorm"; }

    Parameter gamma_;
    Parameter beta_;
    Tensor running_mean_;
    Tensor running_var_;

private:
    std::size_t channels_;
    double eps_, momentum_;
    Tensor cached_xhat_;
    std::vector<double> cached_inv_std_;
    std::vector<std::size_t> cached_shape_;
};

// Two 3x3 conv + BN with identity or 1x1-projected skip, ReLU at the end.
class ResidualBlock : public Layer {
public:
    ResidualBlock(std::string name, std::size_t in_channels, std::size_t out_channels,
                  std::size_t stride, Rng& rng);
    Tensor forward(const Tensor& x, Mode mode) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<Parameter*> parameters() override;
    std::vector<std::pair<std::string, Tensor*>> buffers() override;
    const char* kind() const override { return "ResidualBlock"; }

private:
    std::unique_ptr<Conv2D> conv1_, conv2_, proj_;
    std::unique_ptr<BatchNorm> bn1_, bn2_, proj_bn_;
    std::unique_ptr<ReLU> relu1_;
    Tensor cached_pre_relu_;
    bool has_proj_;
};

// Ordered layer stack with a single recorded tape per Train forward.
class Graph {
public:
    Graph() = default;
    Graph(Graph&&) = default;
    Graph& operator=(Graph&&) = default;

    void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }
    Tensor forward(const Tensor& x, Mode mode);
    Tensor backward(const Tensor& grad_out);
    std::vector<Parameter*> parameters();
    std::vector<std::pair<std::string, Tensor*>> buffers();
    void zero_grad();
    std::size_t parameter_count();
    const std::vector<std::unique_ptr<Layer>>& layers() const { return layers_; }

private:
    std::vector<std::unique_ptr<Layer>> layers_;
    bool taped_ = false;
};

double mse_loss(const Tensor& output, const Tensor& target);
Tensor mse_grad(const Tensor& output, const Tensor& target);

// Mean softmax cross-entropy over a B x K logit batch; returns loss and
// the gradient with respect to the logits.
std::pair<double, Tensor> softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels);

enum class OptimizerKind { SGDMomentum, Adam };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Adam;
    double lr = 1e-3;
    double momentum = 0.9;  // SGD
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;  // Adam
};

// Updates parameters from accumulated gradients, then clears the gradients.
class Optimizer {
public:
    explicit Optimizer(OptimizerConfig cfg) : cfg_(cfg) {}
    void step(const std::vector<Parameter*>& params);
    const OptimizerConfig& config() const { return cfg_; }

private:
    struct Slot {
        Tensor m, v;  // SGD velocity lives in m
    };
    OptimizerConfig cfg_;
    std::unordered_map<std::string, Slot> slots_;
    std::uint64_t t_ = 0;
};

}  // namespace ftrl
