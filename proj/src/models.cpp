#include "ftrl/models.hpp"

#include <stdexcept>
#include <string>

namespace ftrl {

Graph build_encoder(const EncoderConfig& cfg) {
    if (cfg.widths.empty()) throw std::invalid_argument("encoder needs at least one width");
    if (cfg.embedding_dim == 0) throw std::invalid_argument("embedding_dim must be positive");
    Rng rng(cfg.seed);
    Graph g;
    std::size_t h = cfg.in_height, w = cfg.in_width;
    std::size_t c = cfg.widths.front();
    // stem keeps spatial size; each later stage halves it
    if (cfg.kind == EncoderKind::ResidualSmall) {
        g.add(std::make_unique<Conv2D>("enc.stem", cfg.in_channels, c, 3, 1, 1, rng));
        g.add(std::make_unique<BatchNorm>("enc.stem_bn", c));
        g.add(std::make_unique<ReLU>("enc.stem_relu"));
        g.add(std::make_unique<ResidualBlock>("enc.block0", c, c, 1, rng));
        for (std::size_t i = 1; i < cfg.widths.size(); ++i) {
            if (h % 2 != 0 || w % 2 != 0)
                throw std::invalid_argument("spatial dims not divisible by the pooling schedule");
            g.add(std::make_unique<ResidualBlock>("enc.block" + std::to_string(i), c, cfg.widths[i],
                                                  2, rng));
            c = cfg.widths[i];
            h /= 2;
            w /= 2;
        }
    } else {
        g.add(std::make_unique<Conv2D>("enc.conv0", cfg.in_channels, c, 3, 1, 1, rng));
        g.add(std::make_unique<BatchNorm>("enc.bn0", c));
        g.add(std::make_unique<ReLU>("enc.relu0"));
        for (std::size_t i = 1; i < cfg.widths.size(); ++i) {
            if (h % 2 != 0 || w % 2 != 0)
                throw std::invalid_argument("spatial dims not divisible by the pooling schedule");
            const std::string tag = std::to_string(i);
            // kernel 4, stride 2, pad 1 halves an even spatial size exactly
            g.add(std::make_unique<Conv2D>("enc.conv" + tag, c, cfg.widths[i], 4, 2, 1, rng));
            g.add(std::make_unique<BatchNorm>("enc.bn" + tag, cfg.widths[i]));
            g.add(std::make_unique<ReLU>("enc.relu" + tag));
            c = cfg.widths[i];
            h /= 2;
            w /= 2;
        }
    }
    g.add(std::make_unique<AvgPool>("enc.pool"));
    g.add(std::make_unique<FullyConnected>("enc.embed", c, cfg.embedding_dim, rng));
    return g;
}

Graph build_decoder(const DecoderConfig& cfg) {
    if (cfg.hidden.size() != 3)
        throw std::invalid_argument("decoder takes exactly three hidden widths");
    if (cfg.output_dim == 0) throw std::invalid_argument("decoder output_dim must be positive");
    Rng rng(cfg.seed);
    Graph g;
    std::size_t in = cfg.input_dim;
    for (std::size_t i = 0; i < 3; ++i) {
        const std::string tag = std::to_string(i);
        g.add(std::make_unique<FullyConnected>("dec.fc" + tag, in, cfg.hidden[i], rng));
        g.add(std::make_unique<BatchNorm>("dec.bn" + tag, cfg.hidden[i]));
        g.add(std::make_unique<ReLU>("dec.relu" + tag));
        in = cfg.hidden[i];
    }
    g.add(std::make_unique<FullyConnected>("dec.out", in, cfg.output_dim, rng));
    return g;
}

AutoencoderBaseline build_autoencoder_baseline(const EncoderConfig& enc, DecoderConfig dec) {
    const std::size_t pixels = enc.in_channels * enc.in_height * enc.in_width;
    if (dec.output_dim != pixels)
        throw std::invalid_argument("autoencoder decoder output_dim must equal C*H*W = " +
                                    std::to_string(pixels));
    dec.input_dim = enc.embedding_dim;
    return {build_encoder(enc), build_decoder(dec)};
}

Graph build_generator(std::size_t repr_dim, std::size_t hidden_dim, std::uint64_t seed) {
    Rng rng(seed);
    Graph g;
    g.add(std::make_unique<FullyConnected>("gen.fc0", repr_dim, hidden_dim, rng));
    g.add(std::make_unique<BatchNorm>("gen.bn0", hidden_dim));
    g.add(std::make_unique<ReLU>("gen.relu0"));
    g.add(std::make_unique<FullyConnected>("gen.fc1", hidden_dim, repr_dim, rng));
    g.add(std::make_unique<BatchNorm>("gen.bn1", repr_dim));
    g.add(std::make_unique<ReLU>("gen.relu1"));
    return g;
}

namespace {

// Single-layer estimator: representation -> stage target.
Graph build_estimator(std::size_t repr_dim, std::size_t out_dim, std::uint64_t seed) {
    Rng rng(seed);
    Graph g;
    g.add(std::make_unique<FullyConnected>("est.out", repr_dim, out_dim, rng));
    return g;
}

}  // namespace

SequentialChain build_sequential_chain(const SequentialChainConfig& cfg) {
    if (cfg.final_spec.dft_dims < 1 || cfg.final_spec.dft_dims > 3)
        throw std::invalid_argument("sequential chain needs final dft_dims in {1,2,3}");
    SequentialChain chain;
    for (int d = 1; d <= cfg.final_spec.dft_dims; ++d) {
        TargetSpec spec = cfg.final_spec;
        spec.dft_dims = d;
        if (d > 1) spec.spectrum_fraction = 1.0;  // the width mask applies only to the 1D stage
        const std::size_t out_dim = target_length(spec, cfg.img_c, cfg.img_h, cfg.img_w);
        SequentialStage stage;
        stage.target_spec = spec;
        const std::uint64_t stage_seed = cfg.seed * 1000003ULL + static_cast<std::uint64_t>(d);
        Graph est = build_estimator(cfg.repr_dim, out_dim, stage_seed + 500);
        // estimator must stay strictly smaller than its stage's generator
        std::size_t hidden = cfg.generator_hidden;
        Graph gen = build_generator(cfg.repr_dim, hidden, stage_seed);
        const std::size_t est_params = est.parameter_count();
        while (gen.parameter_count() <= est_params) {
            hidden *= 2;
            gen = build_generator(cfg.repr_dim, hidden, stage_seed);
        }
        stage.generator = std::move(gen);
        stage.estimator = std::move(est);
        chain.stages.push_back(std::move(stage));
    }
    return chain;
}

std::vector<Parameter*> SequentialChain::parameters() {
    std::vector<Parameter*> out;
    for (SequentialStage& s : stages) {
        for (Parameter* p : s.generator.parameters()) out.push_back(p);
        for (Parameter* p : s.estimator.parameters()) out.push_back(p);
    }
    return out;
}

std::vector<std::pair<std::string, Tensor*>> SequentialChain::buffers() {
    std::vector<std::pair<std::string, Tensor*>> out;
    for (SequentialStage& s : stages) {
        for (auto& b : s.generator.buffers()) out.push_back(b);
        for (auto& b : s.estimator.buffers()) out.push_back(b);
    }
    return out;
}

void SequentialChain::zero_grad() {
    for (Parameter* p : parameters()) p->zero_grad();
}

double sequential_forward_loss(SequentialChain& chain, const Tensor& embedding,
                               const std::vector<Tensor>& stage_targets, Mode mode) {
    if (stage_targets.size() != chain.stages.size())
        throw std::invalid_argument("stage/target count mismatch: " +
                                    std::to_string(stage_targets.size()) + " targets for " +
                                    std::to_string(chain.stages.size()) + " stages");
    double total = 0.0;
    Tensor repr = embedding;
    chain.last_outputs.clear();
    chain.last_targets.clear();
    for (std::size_t d = 0; d < chain.stages.size(); ++d) {
        repr = chain.stages[d].generator.forward(repr, mode);
        Tensor out = chain.stages[d].estimator.forward(repr, mode);
        total += mse_loss(out, stage_targets[d]);
        if (mode == Mode::Train) {
            chain.last_outputs.push_back(std::move(out));
            chain.last_targets.push_back(stage_targets[d]);
        }
    }
    chain.taped = (mode == Mode::Train);
    return total;
}

Tensor sequential_backward(SequentialChain& chain) {
    if (!chain.taped) throw std::runtime_error("sequential backward without a recorded tape");
    Tensor carry;
    for (std::size_t d = chain.stages.size(); d-- > 0;) {
        Tensor g_repr = chain.stages[d].estimator.backward(
            mse_grad(chain.last_outputs[d], chain.last_targets[d]));
        if (carry.numel() != 0) g_repr = add(g_repr, carry);
        carry = chain.stages[d].generator.backward(g_repr);
    }
    chain.taped = false;
    return carry;
}

}  // namespace ftrl
