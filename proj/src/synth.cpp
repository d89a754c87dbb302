#include "ftrl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace ftrl {

namespace {

constexpr std::size_t kC = 3, kH = 32, kW = 32;

struct Grating {
    double fx, fy, amp, phase;
};

// Two class-specific gratings, both confined to width frequencies {0, 1} so
// the class signal survives even the eighth-spectrum mask. The fx=0 grating
// modulates each row's mean, so its vertical frequency (cls mod 5) stays
// visible in the magnitude of the k=0 column; the fx=1 grating carries the
// remaining bit (cls div 5) purely in its amplitude level. Its vertical
// frequency stays at zero on purpose: a class-dependent fy would show up as a
// per-row phase slope in the k=1 column, handing the class bit to phase
// targets, which are meant to be uninformative here.
void class_signature(int cls, Grating& a, Grating& b) {
    a.fx = 0.0;
    a.fy = static_cast<double>(1 + cls % 5);
    a.amp = 0.18;
    b.fx = 1.0;
    b.fy = 0.0;
    b.amp = 0.10 + 0.03 * static_cast<double>(cls / 5);
}

void render_image(int cls, std::mt19937_64& rng, std::uint8_t* out) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double two_pi = 2.0 * std::numbers::pi;

    Grating sig[2];
    class_signature(cls, sig[0], sig[1]);
    for (Grating& g : sig) g.phase = two_pi * unit(rng);

    // per-class channel mix so the 3D transform sees structure too
    double chw[2][kC];
    for (int s = 0; s < 2; ++s)
        for (std::size_t ch = 0; ch < kC; ++ch)
            chw[s][ch] = 0.6 + 0.4 * static_cast<double>((cls + s + static_cast<int>(ch)) % 3) / 2.0;

    // 1/f background shared across channels with per-channel gain
    constexpr int kBg = 8;
    Grating bg[kBg];
    for (Grating& g : bg) {
        // stay off the class columns (fx 0 and 1): a background phasor added on
        // top of a class grating would make the summed phase depend on the
        // class amplitude, and off fx=16, which piles up at the Nyquist bin
        g.fx = 2.0 + std::floor(unit(rng) * 14.0);   // 2..15
        g.fy = std::floor(unit(rng) * 33.0) - 16.0;  // -16..16
        const double f = std::max(1.0, std::hypot(g.fx, g.fy));
        g.amp = (0.1 + 0.4 * unit(rng)) / f;
        g.phase = two_pi * unit(rng);
    }
    double bg_gain[kC];
    for (double& g : bg_gain) g = 0.7 + 0.3 * unit(rng);

    std::uniform_real_distribution<double> noise(-0.03, 0.03);
    for (std::size_t ch = 0; ch < kC; ++ch) {
        for (std::size_t y = 0; y < kH; ++y) {
            for (std::size_t x = 0; x < kW; ++x) {
                double v = 0.5;
                for (int s = 0; s < 2; ++s)
                    v += chw[s][ch] * sig[s].amp *
                         std::cos(two_pi * (sig[s].fx * static_cast<double>(x) +
                                            sig[s].fy * static_cast<double>(y)) /
                                      static_cast<double>(kW) +
                                  sig[s].phase);
                for (const Grating& g : bg)
                    v += bg_gain[ch] * g.amp *
                         std::cos(two_pi * (g.fx * static_cast<double>(x) +
                                            g.fy * static_cast<double>(y)) /
                                      static_cast<double>(kW) +
                                  g.phase);
                v += noise(rng);
                v = std::clamp(v, 0.0, 1.0);
                out[(ch * kH + y) * kW + x] = static_cast<std::uint8_t>(std::lround(v * 255.0));
            }
        }
    }
}

void write_batch_file(const std::string& path, std::size_t count, std::size_t start_index,
                      std::uint64_t seed) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    std::vector<std::uint8_t> record(1 + kC * kH * kW);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t global = start_index + i;
        const int cls = static_cast<int>(global % 10);
        std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (global + 1)));
        record[0] = static_cast<std::uint8_t>(cls);
        render_image(cls, rng, record.data() + 1);
        out.write(reinterpret_cast<const char*>(record.data()),
                  static_cast<std::streamsize>(record.size()));
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

void write_synthetic_cifar(const std::string& dir, const SynthConfig& cfg) {
    if (cfg.train_images < 5 || cfg.test_images == 0)
        throw std::invalid_argument("synthetic dataset needs >= 5 train images and >= 1 test image");
    const std::size_t per_file = (cfg.train_images + 4) / 5;
    std::size_t written = 0;
    for (int b = 1; b <= 5; ++b) {
        const std::size_t count = std::min(per_file, cfg.train_images - written);
        write_batch_file(dir + "/data_batch_" + std::to_string(b) + ".bin", count, written,
                         cfg.seed);
        written += count;
    }
    write_batch_file(dir + "/test_batch.bin", cfg.test_images, 1000000 + cfg.train_images,
                     cfg.seed);
}

}  // namespace ftrl
