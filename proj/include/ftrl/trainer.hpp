#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ftrl/data.hpp"
#include "ftrl/models.hpp"

namespace ftrl {

struct TrainConfig {
    bool autoencoder_baseline = false;  // regress raw pixels instead of DFT targets
    TargetSpec target;
    bool sequential = false;
    std::size_t epochs = 10;
    std::size_t batch_size = 128;
    OptimizerConfig optimizer;
    std::uint64_t seed = 0;
    std::size_t probe_epochs = 3;
    std::size_t subset = 0;  // 0 = use the whole train split
    EncoderConfig encoder;
    DecoderConfig decoder;  // hidden widths; output_dim derived from the target
    std::size_t generator_hidden = 2048;
};

struct MetricsRow {
    std::size_t epoch = 0;
    std::string phase;  // Pretrain or Probe
    double loss = 0.0;
    double acc1_val = 0.0, acc5_val = 0.0;
    double acc1_train = 0.0, acc5_train = 0.0;
    double seconds = 0.0;
};

struct RunMetrics {
    std::vector<MetricsRow> rows;

    static const char* csv_header();  // epoch,phase,loss,...
    void write_csv(std::ostream& os) const;
    void write_csv_file(const std::string& path) const;
    void append(const RunMetrics& other);
};

struct PretrainResult {
    Graph encoder;
    Graph decoder;          // non-sequential path
    SequentialChain chain;  // sequential path
    RunMetrics metrics;
    TrainConfig config;
};

PretrainResult pretrain(const TrainConfig& cfg, const Dataset& train);

// Percentage of samples whose true label is among the k largest logits;
// ties broken in favour of the lower class index.
double topk_accuracy(const Tensor& logits, const std::vector<int>& labels, std::size_t k);

struct ProbeConfig {
    std::size_t epochs = 3;
    std::size_t batch_size = 256;
    // the probe budget is only a few epochs, so the linear head trains hot
    double lr = 5e-2;
    std::uint64_t seed = 0;
};

// Frozen-encoder linear evaluation: one FC layer embedding_dim -> 10 trained
// with softmax cross-entropy; encoder parameters are never touched.
RunMetrics linear_probe(Graph& encoder, std::size_t embedding_dim, const Dataset& train,
                        const Dataset& val, const ProbeConfig& cfg = {});

// Eval-mode embeddings for a whole dataset, batched: N x embedding_dim.
Tensor encode_dataset(Graph& encoder, const Dataset& data, std::size_t batch_size = 256);

// Dataset-level 1D-width magnitude aggregation, processed in chunks so the
// whole image set never needs to live as double tensors at once.
Tensor aggregate_magnitude(const Dataset& data);

}  // namespace ftrl
