#pragma once

#include <cstdint>
#include <vector>

#include "ftrl/dft.hpp"
#include "ftrl/nn.hpp"

namespace ftrl {

enum class EncoderKind { CompactConv, ResidualSmall };

struct EncoderConfig {
    EncoderKind kind = EncoderKind::ResidualSmall;
    std::vector<std::size_t> widths{32, 64, 128, 256};  // channel progression
    std::size_t embedding_dim = 256;
    std::size_t in_channels = 3;
    std::size_t in_height = 32;
    std::size_t in_width = 32;
    std::uint64_t seed = 0;
};

struct DecoderConfig {
    std::vector<std::size_t> hidden{512, 1024, 2048};  // exactly three FC+BN layers
    std::size_t input_dim = 256;
    std::size_t output_dim = 0;
    std::uint64_t seed = 0;
};

// Maps B x C x H x W batches to B x embedding_dim.
Graph build_encoder(const EncoderConfig& cfg);

// Three FC layers, each paired with batch normalization (and ReLU), then a
// final projection to output_dim.
Graph build_decoder(const DecoderConfig& cfg);

struct AutoencoderBaseline {
    Graph encoder;
    Graph decoder;
};

// Identical encoder/decoder topology to the DFT models; the target is the
// raw flattened image, so output_dim must equal C*H*W.
AutoencoderBaseline build_autoencoder_baseline(const EncoderConfig& enc, DecoderConfig dec);

// Representation generator for one sequential stage: expands through a hidden
// width and returns to the representation width, FC+BN+ReLU twice.
Graph build_generator(std::size_t repr_dim, std::size_t hidden_dim, std::uint64_t seed);

struct SequentialStage {
    Graph generator;  // representation -> representation
    Graph estimator;  // representation -> stage target
    TargetSpec target_spec;
};

struct SequentialChainConfig {
    TargetSpec final_spec;     // stages run 1D, 2D, ... up to final_spec.dft_dims
    std::size_t repr_dim = 256;
    std::size_t generator_hidden = 2048;  // bumped up until generator > estimator
    std::size_t img_c = 3, img_h = 32, img_w = 32;
    std::uint64_t seed = 0;
};

struct SequentialChain {
    std::vector<SequentialStage> stages;
    // tape for sequential_backward
    std::vector<Tensor> last_outputs;
    std::vector<Tensor> last_targets;
    bool taped = false;

    std::vector<Parameter*> parameters();
    std::vector<std::pair<std::string, Tensor*>> buffers();
    void zero_grad();
};

SequentialChain build_sequential_chain(const SequentialChainConfig& cfg);

// Total loss = unweighted sum of per-stage mse over estimator outputs. In
// Train mode the stage tapes are recorded for sequential_backward.
double sequential_forward_loss(SequentialChain& chain, const Tensor& embedding,
                               const std::vector<Tensor>& stage_targets, Mode mode);

// Backpropagates the summed stage losses; returns the embedding gradient for
// chaining into the shared encoder.
Tensor sequential_backward(SequentialChain& chain);

}  // namespace ftrl
