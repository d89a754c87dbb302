#include "ftrl/dft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ftrl {

namespace detail {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 decimation-in-time, in place. N must be a power of two.
void fft_radix2(std::vector<double>& re, std::vector<double>& im, double sign) {
    const std::size_t n = re.size();
    // bit reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) {
            std::swap(re[i], re[j]);
            std::swap(im[i], im[j]);
        }
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        const double wr = std::cos(ang), wi = std::sin(ang);
        for (std::size_t i = 0; i < n; i += len) {
            double cr = 1.0, ci = 0.0;
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::size_t a = i + j, b = i + j + len / 2;
                const double tr = re[b] * cr - im[b] * ci;
                const double ti = re[b] * ci + im[b] * cr;
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
                const double ncr = cr * wr - ci * wi;
                ci = cr * wi + ci * wr;
                cr = ncr;
            }
        }
    }
}

void dft_naive(std::vector<double>& re, std::vector<double>& im, double sign) {
    const std::size_t n = re.size();
    std::vector<double> or_(n, 0.0), oi(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
            const double ang =
                sign * 2.0 * std::numbers::pi * static_cast<double>(k * j) / static_cast<double>(n);
            const double cr = std::cos(ang), ci = std::sin(ang);
            or_[k] += re[j] * cr - im[j] * ci;
            oi[k] += re[j] * ci + im[j] * cr;
        }
    }
    re = std::move(or_);
    im = std::move(oi);
}

}  // namespace

void dft1d(std::vector<double>& re, std::vector<double>& im, double sign) {
    if (re.size() != im.size()) throw std::invalid_argument("dft1d re/im length mismatch");
    if (re.size() <= 1) return;
    if (is_pow2(re.size()))
        fft_radix2(re, im, sign);
    else
        dft_naive(re, im, sign);
}

namespace {

// Applies dft1d along one axis of a row-major array.
void transform_axis(Tensor& re, Tensor& im, std::size_t axis, double sign) {
    const std::size_t n = re.dim(axis);
    std::size_t inner = 1;
    for (std::size_t a = axis + 1; a < re.rank(); ++a) inner *= re.dim(a);
    const std::size_t outer = re.numel() / (n * inner);
    std::vector<double> lr(n), li(n);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < inner; ++i) {
            const std::size_t base = o * n * inner + i;
            for (std::size_t j = 0; j < n; ++j) {
                lr[j] = re[base + j * inner];
                li[j] = im[base + j * inner];
            }
            dft1d(lr, li, sign);
            for (std::size_t j = 0; j < n; ++j) {
                re[base + j * inner] = lr[j];
                im[base + j * inner] = li[j];
            }
        }
    }
}

// Width innermost, then height, then channel.
void transform_trailing(ComplexTensor& x, int dims, double sign) {
    if (dims < 1 || dims > 3) throw std::invalid_argument("dft dims must be 1, 2 or 3");
    if (static_cast<std::size_t>(dims) > x.re.rank())
        throw std::invalid_argument("dft dims exceed tensor rank");
    for (int d = 0; d < dims; ++d) transform_axis(x.re, x.im, x.re.rank() - 1 - d, sign);
}

}  // namespace

}  // namespace detail

ComplexTensor dft_forward(const Tensor& x, int dims) {
    return dft_forward(ComplexTensor(x, Tensor::zeros(x.shape())), dims);
}

ComplexTensor dft_forward(const ComplexTensor& x, int dims) {
    ComplexTensor out = x;
    detail::transform_trailing(out, dims, -1.0);
    return out;
}

ComplexTensor dft_inverse(const ComplexTensor& x, int dims) {
    ComplexTensor out = x;
    detail::transform_trailing(out, dims, +1.0);
    double norm = 1.0;
    for (int d = 0; d < dims; ++d) norm *= static_cast<double>(out.re.dim(out.re.rank() - 1 - d));
    out.re = scale(out.re, 1.0 / norm);
    out.im = scale(out.im, 1.0 / norm);
    return out;
}

bool formulation_concatenates(Formulation f) {
    return f == Formulation::RealImag || f == Formulation::MagPhase;
}

Tensor extract_components(const ComplexTensor& x, Formulation f) {
    const std::size_t n = x.numel();
    switch (f) {
        case Formulation::Real:
            return x.re;
        case Formulation::Imag:
            return x.im;
        case Formulation::Magnitude: {
            Tensor out(x.shape());
            for (std::size_t i = 0; i < n; ++i) out[i] = std::hypot(x.re[i], x.im[i]);
            return out;
        }
        case Formulation::Phase: {
            Tensor out(x.shape());
            for (std::size_t i = 0; i < n; ++i) {
                // phase of the zero complex value is pinned to 0; range is (-pi, pi]
                double p = (x.re[i] == 0.0 && x.im[i] == 0.0) ? 0.0 : std::atan2(x.im[i], x.re[i]);
                if (p == -std::numbers::pi) p = std::numbers::pi;
                out[i] = p;
            }
            return out;
        }
        case Formulation::RealImag:
        case Formulation::MagPhase: {
            const Tensor a = extract_components(x, f == Formulation::RealImag ? Formulation::Real
                                                                              : Formulation::Magnitude);
            const Tensor b = extract_components(x, f == Formulation::RealImag ? Formulation::Imag
                                                                              : Formulation::Phase);
            std::vector<std::size_t> shape{2};
            for (std::size_t d : x.shape()) shape.push_back(d);
            Tensor out(shape);
            for (std::size_t i = 0; i < n; ++i) out[i] = a[i];
            for (std::size_t i = 0; i < n; ++i) out[n + i] = b[i];
            return out;
        }
    }
    throw std::invalid_argument("unknown formulation");
}

FrequencyMask build_mask(std::size_t n, double fraction, MaskStyle style) {
    FrequencyMask mask;
    mask.length = n;
    if (fraction == 1.0) {
        mask.kept_indices.resize(n);
        for (std::size_t k = 0; k < n; ++k) mask.kept_indices[k] = k;
        return mask;
    }
    if (fraction != 0.25 && fraction != 0.125)
        throw std::invalid_argument("spectrum fraction must be 1, 1/4 or 1/8");
    if (n % 8 != 0)
        throw std::invalid_argument("transform size must be divisible by 8 for fractional masks");
    const std::size_t keep = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction));
    if (style == MaskStyle::LowOnly) {
        for (std::size_t k = 0; k < keep; ++k) mask.kept_indices.push_back(k);
    } else {
        const std::size_t half = keep / 2;
        for (std::size_t k = 0; k < half; ++k) mask.kept_indices.push_back(k);
        for (std::size_t k = n - half; k < n; ++k) mask.kept_indices.push_back(k);
    }
    return mask;
}

Tensor apply_mask(const Tensor& t, const FrequencyMask& mask) {
    if (t.rank() == 0 || t.dim(t.rank() - 1) != mask.length)
        throw std::invalid_argument("mask length does not match last axis");
    std::vector<std::size_t> shape = t.shape();
    shape.back() = mask.kept_indices.size();
    Tensor out(shape);
    const std::size_t lines = t.numel() / mask.length;
    for (std::size_t l = 0; l < lines; ++l) {
        const double* src = t.data() + l * mask.length;
        double* dst = out.data() + l * mask.kept_indices.size();
        for (std::size_t j = 0; j < mask.kept_indices.size(); ++j) dst[j] = src[mask.kept_indices[j]];
    }
    return out;
}

Tensor aggregate_magnitude(const std::vector<Tensor>& dataset) {
    if (dataset.empty()) throw std::invalid_argument("aggregate_magnitude: empty dataset");
    const std::vector<std::size_t>& shape = dataset.front().shape();
    if (shape.size() != 3) throw std::invalid_argument("aggregate_magnitude expects C x H x W images");
    const std::size_t w = shape[2];
    Tensor acc({w});
    for (const Tensor& img : dataset) {
        if (img.shape() != shape) throw std::invalid_argument("aggregate_magnitude: shape mismatch");
        const ComplexTensor spec = dft_forward(img, 1);
        const std::size_t lines = img.numel() / w;
        for (std::size_t l = 0; l < lines; ++l)
            for (std::size_t k = 0; k < w; ++k)
                acc[k] += std::hypot(spec.re[l * w + k], spec.im[l * w + k]);
    }
    const double denom = static_cast<double>(dataset.size()) * static_cast<double>(shape[0]) *
                         static_cast<double>(shape[1]);
    return scale(acc, 1.0 / denom);
}

std::size_t target_length(const TargetSpec& spec, std::size_t c, std::size_t h, std::size_t w) {
    std::size_t kept_w = w;
    if (spec.spectrum_fraction < 1.0)
        kept_w = static_cast<std::size_t>(std::llround(static_cast<double>(w) * spec.spectrum_fraction));
    const std::size_t base = c * h * kept_w;
    return formulation_concatenates(spec.formulation) ? 2 * base : base;
}

Tensor make_target(const Tensor& image, const TargetSpec& spec) {
    if (image.rank() != 3) throw std::invalid_argument("make_target expects a C x H x W image");
    if (spec.spectrum_fraction < 1.0 && spec.dft_dims != 1)
        throw std::invalid_argument("spectrum fraction < 1 requires dft_dims == 1");
    ComplexTensor x = dft_forward(image, spec.dft_dims);
    if (spec.spectrum_fraction < 1.0) {
        const FrequencyMask mask = build_mask(image.dim(2), spec.spectrum_fraction, spec.mask_style);
        x = ComplexTensor(apply_mask(x.re, mask), apply_mask(x.im, mask));
    }
    Tensor out = extract_components(x, spec.formulation);
    if (spec.normalization == Normalization::Orthonormal) {
        double norm = 1.0;
        for (int d = 0; d < spec.dft_dims; ++d)
            norm *= static_cast<double>(image.dim(image.rank() - 1 - d));
        out = scale(out, 1.0 / std::sqrt(norm));
    }
    return reshape(out, {out.numel()});
}

}  // namespace ftrl
