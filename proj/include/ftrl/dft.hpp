#pragma once

#include <cstddef>
#include <vector>

#include "ftrl/tensor.hpp"

namespace ftrl {

// Real-valued formulation of the complex spectrum used as a regression target.
enum class Formulation { Real, Imag, RealImag, Magnitude, Phase, MagPhase };

enum class Normalization { Unnormalized, Orthonormal };

// Low-frequency band placement for a masked spectrum. Low frequencies sit at
// both ends of the index axis for real inputs; SymmetricEnds keeps both bands.
// LowOnly keeps the one-sided band {0 .. N*f - 1} and exists for comparison.
enum class MaskStyle { SymmetricEnds, LowOnly };

struct TargetSpec {
    int dft_dims = 1;  // 1 = width, 2 = height+width, 3 = channel+height+width
    Formulation formulation = Formulation::Magnitude;
    double spectrum_fraction = 1.0;  // 1, 1/4 or 1/8; <1 only with dft_dims == 1
    Normalization normalization = Normalization::Orthonormal;
    MaskStyle mask_style = MaskStyle::SymmetricEnds;
};

bool formulation_concatenates(Formulation f);
// Target vector length for an image of shape C x H x W.
std::size_t target_length(const TargetSpec& spec, std::size_t c, std::size_t h, std::size_t w);

struct FrequencyMask {
    std::size_t length = 0;                // transform size N
    std::vector<std::size_t> kept_indices; // sorted, no duplicates
};

// Transform over the last `dims` axes, unnormalized forward sums.
ComplexTensor dft_forward(const Tensor& x, int dims);
ComplexTensor dft_forward(const ComplexTensor& x, int dims);
// Inverse with full 1/prod(N_d) scaling.
ComplexTensor dft_inverse(const ComplexTensor& x, int dims);

Tensor extract_components(const ComplexTensor& x, Formulation f);

FrequencyMask build_mask(std::size_t n, double fraction,
                         MaskStyle style = MaskStyle::SymmetricEnds);
// Restricts the last axis to the kept indices, order preserved.
Tensor apply_mask(const Tensor& t, const FrequencyMask& mask);

// Dataset-level mean 1D-width-DFT magnitude per frequency index, length W.
Tensor aggregate_magnitude(const std::vector<Tensor>& dataset);

// Full target pipeline: forward DFT, optional width mask, component
// extraction, optional orthonormal scaling, flattened to a vector.
Tensor make_target(const Tensor& image, const TargetSpec& spec);

namespace detail {
// 1D transform of one line; sign = -1 forward, +1 inverse (no scaling here).
// Exposed so the verification suite can inject a corrupted kernel.
void dft1d(std::vector<double>& re, std::vector<double>& im, double sign);
}  // namespace detail

}  // namespace ftrl
