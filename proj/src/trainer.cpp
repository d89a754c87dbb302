#include "ftrl/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace ftrl {

namespace {

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) {
    // splitmix64 of (seed, epoch) so shuffles differ per epoch but stay seeded
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (epoch + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stacks per-image targets for one batch into B x L.
Tensor batch_targets(const Dataset& data, const std::vector<std::size_t>& idx,
                     const TargetSpec& spec, bool raw_pixels) {
    const std::size_t L =
        raw_pixels ? Dataset::kImageBytes
                   : target_length(spec, Dataset::kChannels, Dataset::kHeight, Dataset::kWidth);
    Tensor out({idx.size(), L});
    for (std::size_t i = 0; i < idx.size(); ++i) {
        Tensor img = data.image(idx[i]);
        Tensor t = raw_pixels ? reshape(img, {img.numel()}) : make_target(img, spec);
        std::copy(t.flat().begin(), t.flat().end(), out.data() + i * L);
    }
    return out;
}

}  // namespace

const char* RunMetrics::csv_header() {
    return "epoch,phase,loss,acc1_val,acc5_val,acc1_train,acc5_train,seconds";
}

void RunMetrics::write_csv(std::ostream& os) const {
    os << csv_header() << "\n";
    os.precision(17);
    for (const MetricsRow& r : rows)
        os << r.epoch << "," << r.phase << "," << r.loss << "," << r.acc1_val << "," << r.acc5_val
           << "," << r.acc1_train << "," << r.acc5_train << "," << r.seconds << "\n";
}

void RunMetrics::write_csv_file(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write metrics file: " + path);
    write_csv(out);
}

void RunMetrics::append(const RunMetrics& other) {
    rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

PretrainResult pretrain(const TrainConfig& cfg, const Dataset& train) {
    if (cfg.target.spectrum_fraction < 1.0 && cfg.target.dft_dims != 1)
        throw std::invalid_argument("spectrum fraction < 1 requires dft_dims == 1");
    PretrainResult res;
    res.config = cfg;

    EncoderConfig ecfg = cfg.encoder;
    ecfg.seed = cfg.seed;
    res.encoder = build_encoder(ecfg);

    const std::size_t target_len = cfg.autoencoder_baseline
                                       ? Dataset::kImageBytes
                                       : target_length(cfg.target, Dataset::kChannels,
                                                       Dataset::kHeight, Dataset::kWidth);
    if (cfg.sequential && !cfg.autoencoder_baseline) {
        SequentialChainConfig ccfg;
        ccfg.final_spec = cfg.target;
        ccfg.repr_dim = ecfg.embedding_dim;
        ccfg.generator_hidden = cfg.generator_hidden;
        ccfg.img_c = Dataset::kChannels;
        ccfg.img_h = Dataset::kHeight;
        ccfg.img_w = Dataset::kWidth;
        ccfg.seed = cfg.seed + 1;
        res.chain = build_sequential_chain(ccfg);
    } else {
        DecoderConfig dcfg = cfg.decoder;
        dcfg.input_dim = ecfg.embedding_dim;
        dcfg.output_dim = target_len;
        dcfg.seed = cfg.seed + 1;
        res.decoder = build_decoder(dcfg);
    }

    std::vector<Parameter*> params = res.encoder.parameters();
    if (cfg.sequential && !cfg.autoencoder_baseline) {
        for (Parameter* p : res.chain.parameters()) params.push_back(p);
    } else {
        for (Parameter* p : res.decoder.parameters()) params.push_back(p);
    }
    Optimizer opt(cfg.optimizer);

    std::size_t n = train.size();
    if (cfg.subset > 0 && cfg.subset < n) n = cfg.subset;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double t0 = now_seconds();
        const auto batches = make_batches(n, cfg.batch_size, epoch_seed(cfg.seed, epoch), true);
        double loss_sum = 0.0;
        std::size_t batch_no = 0;
        for (const auto& idx : batches) {
            const Tensor images = train.gather(idx);
            const Tensor embedding = res.encoder.forward(images, Mode::Train);
            double loss;
            Tensor emb_grad;
            if (cfg.sequential && !cfg.autoencoder_baseline) {
                std::vector<Tensor> stage_targets;
                for (const SequentialStage& s : res.chain.stages)
                    stage_targets.push_back(batch_targets(train, idx, s.target_spec, false));
                loss = sequential_forward_loss(res.chain, embedding, stage_targets, Mode::Train);
                emb_grad = sequential_backward(res.chain);
            } else {
                const Tensor targets =
                    batch_targets(train, idx, cfg.target, cfg.autoencoder_baseline);
                const Tensor output = res.decoder.forward(embedding, Mode::Train);
                loss = mse_loss(output, targets);
                emb_grad = res.decoder.backward(mse_grad(output, targets));
            }
            if (!std::isfinite(loss))
                throw std::runtime_error("non-finite loss at epoch " + std::to_string(epoch) +
                                         " batch " + std::to_string(batch_no) + ": " +
                                         std::to_string(loss));
            res.encoder.backward(emb_grad);
            opt.step(params);
            loss_sum += loss * static_cast<double>(idx.size());
            ++batch_no;
        }
        MetricsRow row;
        row.epoch = epoch;
        row.phase = "Pretrain";
        row.loss = loss_sum / static_cast<double>(n);
        row.seconds = now_seconds() - t0;
        res.metrics.rows.push_back(row);
    }
    return res;
}

double topk_accuracy(const Tensor& logits, const std::vector<int>& labels, std::size_t k) {
    if (logits.rank() != 2 || logits.dim(0) != labels.size())
        throw std::invalid_argument("topk_accuracy expects B x K logits with B labels");
    if (k == 0) throw std::invalid_argument("k must be >= 1");
    const std::size_t classes = logits.dim(1);
    if (k > classes) throw std::invalid_argument("k exceeds the class count");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double* row = logits.data() + i * classes;
        const std::size_t y = static_cast<std::size_t>(labels[i]);
        std::size_t rank = 0;  // classes ranked ahead of y, ties favour lower index
        for (std::size_t j = 0; j < classes; ++j) {
            if (j == y) continue;
            if (row[j] > row[y] || (row[j] == row[y] && j < y)) ++rank;
        }
        if (rank < k) ++correct;
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(labels.size());
}

Tensor encode_dataset(Graph& encoder, const Dataset& data, std::size_t batch_size) {
    Tensor out;
    std::size_t written = 0;
    for (const auto& idx : make_batches(data.size(), batch_size, 0, false)) {
        const Tensor emb = encoder.forward(data.gather(idx), Mode::Eval);
        if (out.numel() == 0) out = Tensor({data.size(), emb.dim(1)});
        std::copy(emb.flat().begin(), emb.flat().end(), out.data() + written * emb.dim(1));
        written += idx.size();
    }
    return out;
}

Tensor aggregate_magnitude(const Dataset& data) {
    if (data.size() == 0) throw std::invalid_argument("aggregate_magnitude: empty dataset");
    Tensor acc({Dataset::kWidth});
    constexpr std::size_t chunk = 256;
    for (std::size_t start = 0; start < data.size(); start += chunk) {
        std::vector<Tensor> images;
        for (std::size_t i = start; i < std::min(data.size(), start + chunk); ++i)
            images.push_back(data.image(i));
        const Tensor part = ftrl::aggregate_magnitude(images);
        const double w = static_cast<double>(images.size()) / static_cast<double>(data.size());
        for (std::size_t k = 0; k < acc.numel(); ++k) acc[k] += part[k] * w;
    }
    return acc;
}

namespace {

Tensor gather_rows(const Tensor& m, const std::vector<std::size_t>& idx) {
    Tensor out({idx.size(), m.dim(1)});
    for (std::size_t i = 0; i < idx.size(); ++i)
        std::copy_n(m.data() + idx[i] * m.dim(1), m.dim(1), out.data() + i * m.dim(1));
    return out;
}

}  // namespace

RunMetrics linear_probe(Graph& encoder, std::size_t embedding_dim, const Dataset& train,
                        const Dataset& val, const ProbeConfig& cfg) {
    for (int l : train.labels())
        if (l < 0 || l > 9) throw std::invalid_argument("probe label out of range");

    const Tensor train_emb = encode_dataset(encoder, train);
    const Tensor val_emb = encode_dataset(encoder, val);
    if (train_emb.dim(1) != embedding_dim)
        throw std::invalid_argument("encoder embedding width does not match embedding_dim");

    Rng rng(cfg.seed);
    Graph probe;
    probe.add(std::make_unique<FullyConnected>("probe.fc", embedding_dim, 10, rng));
    OptimizerConfig ocfg;
    ocfg.kind = OptimizerKind::Adam;
    ocfg.lr = cfg.lr;
    Optimizer opt(ocfg);
    std::vector<Parameter*> params = probe.parameters();

    RunMetrics metrics;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double t0 = now_seconds();
        double loss_sum = 0.0;
        const auto batches =
            make_batches(train.size(), cfg.batch_size, epoch_seed(cfg.seed, epoch), true);
        for (const auto& idx : batches) {
            const Tensor x = gather_rows(train_emb, idx);
            const Tensor logits = probe.forward(x, Mode::Train);
            auto [loss, grad] = softmax_cross_entropy(logits, train.gather_labels(idx));
            probe.backward(grad);
            opt.step(params);
            loss_sum += loss * static_cast<double>(idx.size());
        }
        MetricsRow row;
        row.epoch = epoch;
        row.phase = "Probe";
        row.loss = loss_sum / static_cast<double>(train.size());
        const Tensor val_logits = probe.forward(val_emb, Mode::Eval);
        const Tensor train_logits = probe.forward(train_emb, Mode::Eval);
        row.acc1_val = topk_accuracy(val_logits, val.labels(), 1);
        row.acc5_val = topk_accuracy(val_logits, val.labels(), 5);
        row.acc1_train = topk_accuracy(train_logits, train.labels(), 1);
        row.acc5_train = topk_accuracy(train_logits, train.labels(), 5);
        row.seconds = now_seconds() - t0;
        metrics.rows.push_back(row);
    }
    return metrics;
}

}  // namespace ftrl
