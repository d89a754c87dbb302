#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ftrl/nn.hpp"
#include "ftrl/tensor.hpp"

namespace ftrl {

struct VerifyOptions {
    std::uint64_t seed = 12345;
    std::size_t dft_trials = 100;
    // Replaces the fast forward transform with a conjugated kernel; the dft
    // suite must then fail. Exists for mutation-testing the suite itself.
    bool inject_twiddle_sign_error = false;
};

struct VerifyCheck {
    std::string name;
    bool pass = false;
    double max_error = 0.0;
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_pass() const;
};

// Direct nested-sum evaluation of the transform definition over the last
// `dims` axes. O(numel^2); the independent oracle for every fast path.
ComplexTensor naive_dft_forward(const Tensor& x, int dims);

// Oracle equivalence, Parseval, round trip, conjugate symmetry, linearity,
// phase range.
VerifyReport verify_dft(const VerifyOptions& opts = {});

// Central finite differences (h = 1e-5) against analytic gradients for every
// layer kind plus the full DFT-target loss through encoder and decoder.
VerifyReport verify_grad(const VerifyOptions& opts = {});

// Max relative gradient error of a graph under mse loss against the target,
// by central differences over every parameter element.
double gradient_check(Graph& graph, const Tensor& input, const Tensor& target, double h = 1e-5);

}  // namespace ftrl
