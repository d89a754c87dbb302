#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ftrl/tensor.hpp"

namespace ftrl {

enum class Split { Train, Val, Test };

// CIFAR-10 style image set. Pixels are held as raw bytes and exposed as
// [0,1]-scaled tensors; labels are retained for the probe phase only.
class Dataset {
public:
    static constexpr std::size_t kChannels = 3, kHeight = 32, kWidth = 32;
    static constexpr std::size_t kImageBytes = kChannels * kHeight * kWidth;

    Dataset() = default;
    Dataset(std::vector<std::uint8_t> pixels, std::vector<int> labels, Split split);

    std::size_t size() const { return labels_.size(); }
    Split split() const { return split_; }
    const std::vector<int>& labels() const { return labels_; }
    int label(std::size_t i) const { return labels_[i]; }

    // One image as a C x H x W tensor in [0,1].
    Tensor image(std::size_t i) const;
    // A batch as B x C x H x W, rows in the given index order.
    Tensor gather(const std::vector<std::size_t>& indices) const;
    std::vector<int> gather_labels(const std::vector<std::size_t>& indices) const;

    Dataset subset(const std::vector<std::size_t>& indices, Split split) const;
    const std::vector<std::uint8_t>& raw() const { return pixels_; }

private:
    std::vector<std::uint8_t> pixels_;
    std::vector<int> labels_;
    Split split_ = Split::Train;
};

// Reads the five standard train batch files (data_batch_1.bin .. _5.bin).
Dataset load_cifar10_train(const std::string& dir);
// Reads test_batch.bin.
Dataset load_cifar10_test(const std::string& dir);
// Parses one file of 3073-byte records (1 label + R,G,B planes).
void load_cifar10_file(const std::string& path, std::vector<std::uint8_t>& pixels,
                       std::vector<int>& labels);

// Deterministic seeded permutation split into (train, val).
std::pair<Dataset, Dataset> split_train_val(const Dataset& pool, double val_fraction,
                                            std::uint64_t seed);

// Index plan for one epoch: every sample exactly once, final short batch kept.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size,
                                                   std::uint64_t seed, bool shuffle);

}  // namespace ftrl
