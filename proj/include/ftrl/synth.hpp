#pragma once

#include <cstdint>
#include <string>

namespace ftrl {

// Synthetic natural-image stand-in written in the CIFAR-10 binary layout
// (data_batch_1.bin .. data_batch_5.bin and test_batch.bin). Images combine
// a 1/f background spectrum with two class-specific low-frequency gratings
// whose phases are randomized per sample, so class identity lives in the
// magnitude spectrum rather than in pixel positions.
struct SynthConfig {
    std::size_t train_images = 10000;
    std::size_t test_images = 2000;
    std::uint64_t seed = 1;
};

void write_synthetic_cifar(const std::string& dir, const SynthConfig& cfg);

}  // namespace ftrl
