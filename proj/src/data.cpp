#include "ftrl/data.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ftrl {

Dataset::Dataset(std::vector<std::uint8_t> pixels, std::vector<int> labels, Split split)
    : pixels_(std::move(pixels)), labels_(std::move(labels)), split_(split) {
    if (pixels_.size() != labels_.size() * kImageBytes)
        throw std::invalid_argument("dataset pixel/label count mismatch");
    for (int l : labels_)
        if (l < 0 || l > 9) throw std::invalid_argument("label out of range [0,9]");
}

Tensor Dataset::image(std::size_t i) const {
    if (i >= size()) throw std::invalid_argument("image index out of range");
    Tensor t({kChannels, kHeight, kWidth});
    const std::uint8_t* src = pixels_.data() + i * kImageBytes;
    for (std::size_t j = 0; j < kImageBytes; ++j) t[j] = static_cast<double>(src[j]) / 255.0;
    return t;
}

Tensor Dataset::gather(const std::vector<std::size_t>& indices) const {
    Tensor t({indices.size(), kChannels, kHeight, kWidth});
    double* dst = t.data();
    for (std::size_t i : indices) {
        if (i >= size()) throw std::invalid_argument("batch index out of range");
        const std::uint8_t* src = pixels_.data() + i * kImageBytes;
        for (std::size_t j = 0; j < kImageBytes; ++j) dst[j] = static_cast<double>(src[j]) / 255.0;
        dst += kImageBytes;
    }
    return t;
}

std::vector<int> Dataset::gather_labels(const std::vector<std::size_t>& indices) const {
    std::vector<int> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(labels_.at(i));
    return out;
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices, Split split) const {
    std::vector<std::uint8_t> px(indices.size() * kImageBytes);
    std::vector<int> lb(indices.size());
    for (std::size_t j = 0; j < indices.size(); ++j) {
        const std::size_t i = indices[j];
        if (i >= size()) throw std::invalid_argument("subset index out of range");
        std::copy_n(pixels_.data() + i * kImageBytes, kImageBytes, px.data() + j * kImageBytes);
        lb[j] = labels_[i];
    }
    return Dataset(std::move(px), std::move(lb), split);
}

void load_cifar10_file(const std::string& path, std::vector<std::uint8_t>& pixels,
                       std::vector<int>& labels) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    constexpr std::size_t record = 1 + Dataset::kImageBytes;
    std::vector<char> buf(record);
    std::size_t offset = 0;
    while (true) {
        in.read(buf.data(), static_cast<std::streamsize>(record));
        const std::size_t got = static_cast<std::size_t>(in.gcount());
        if (got == 0) break;
        if (got != record)
            throw std::runtime_error("truncated dataset file: " + path + " at byte offset " +
                                     std::to_string(offset + got));
        const int label = static_cast<std::uint8_t>(buf[0]);
        if (label > 9)
            throw std::runtime_error("invalid label in " + path + " at byte offset " +
                                     std::to_string(offset));
        labels.push_back(label);
        pixels.insert(pixels.end(), buf.begin() + 1, buf.end());
        offset += record;
    }
    if (labels.empty()) throw std::runtime_error("empty dataset file: " + path);
}

Dataset load_cifar10_train(const std::string& dir) {
    std::vector<std::uint8_t> pixels;
    std::vector<int> labels;
    for (int i = 1; i <= 5; ++i)
        load_cifar10_file(dir + "/data_batch_" + std::to_string(i) + ".bin", pixels, labels);
    return Dataset(std::move(pixels), std::move(labels), Split::Train);
}

Dataset load_cifar10_test(const std::string& dir) {
    std::vector<std::uint8_t> pixels;
    std::vector<int> labels;
    load_cifar10_file(dir + "/test_batch.bin", pixels, labels);
    return Dataset(std::move(pixels), std::move(labels), Split::Test);
}

std::pair<Dataset, Dataset> split_train_val(const Dataset& pool, double val_fraction,
                                            std::uint64_t seed) {
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw std::invalid_argument("val_fraction must be in (0,1)");
    std::vector<std::size_t> perm(pool.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    const std::size_t n_val = static_cast<std::size_t>(
        static_cast<double>(pool.size()) * val_fraction);
    if (n_val == 0 || n_val == pool.size())
        throw std::invalid_argument("degenerate validation fraction for this pool size");
    // last 10% (or given fraction) of the seeded permutation is validation
    const std::vector<std::size_t> train_idx(perm.begin(), perm.end() - static_cast<long>(n_val));
    const std::vector<std::size_t> val_idx(perm.end() - static_cast<long>(n_val), perm.end());
    return {pool.subset(train_idx, Split::Train), pool.subset(val_idx, Split::Val)};
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size,
                                                   std::uint64_t seed, bool shuffle) {
    if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (shuffle) {
        std::mt19937_64 rng(seed);
        std::shuffle(order.begin(), order.end(), rng);
    }
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t stop = std::min(n, start + batch_size);
        batches.emplace_back(order.begin() + static_cast<long>(start),
                             order.begin() + static_cast<long>(stop));
    }
    return batches;
}

}  // namespace ftrl
