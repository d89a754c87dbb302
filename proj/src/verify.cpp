#include "ftrl/verify.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "ftrl/dft.hpp"
#include "ftrl/models.hpp"

namespace ftrl {

bool VerifyReport::all_pass() const {
    for (const VerifyCheck& c : checks)
        if (!c.pass) return false;
    return true;
}

ComplexTensor naive_dft_forward(const Tensor& x, int dims) {
    if (dims < 1 || dims > 3 || static_cast<std::size_t>(dims) > x.rank())
        throw std::invalid_argument("naive_dft_forward: bad dims");
    const std::size_t r = x.rank();
    std::vector<std::size_t> tsize(static_cast<std::size_t>(dims));
    std::size_t block = 1;
    for (int d = 0; d < dims; ++d) {
        tsize[static_cast<std::size_t>(d)] = x.dim(r - static_cast<std::size_t>(dims) + static_cast<std::size_t>(d));
        block *= tsize[static_cast<std::size_t>(d)];
    }
    const std::size_t leading = x.numel() / block;
    ComplexTensor out(Tensor(x.shape()), Tensor(x.shape()));
    std::vector<std::size_t> k(static_cast<std::size_t>(dims), 0), n(static_cast<std::size_t>(dims), 0);
    for (std::size_t lead = 0; lead < leading; ++lead) {
        const double* src = x.data() + lead * block;
        double* ore = out.re.data() + lead * block;
        double* oim = out.im.data() + lead * block;
        std::fill(k.begin(), k.end(), 0);
        for (std::size_t ki = 0; ki < block; ++ki) {
            double sre = 0.0, sim = 0.0;
            std::fill(n.begin(), n.end(), 0);
            for (std::size_t ni = 0; ni < block; ++ni) {
                double ang = 0.0;
                for (std::size_t d = 0; d < static_cast<std::size_t>(dims); ++d)
                    ang += static_cast<double>(k[d]) * static_cast<double>(n[d]) /
                           static_cast<double>(tsize[d]);
                ang *= -2.0 * std::numbers::pi;
                sre += src[ni] * std::cos(ang);
                sim += src[ni] * std::sin(ang);
                for (std::size_t d = static_cast<std::size_t>(dims); d-- > 0;) {
                    if (++n[d] < tsize[d]) break;
                    n[d] = 0;
                }
            }
            ore[ki] = sre;
            oim[ki] = sim;
            for (std::size_t d = static_cast<std::size_t>(dims); d-- > 0;) {
                if (++k[d] < tsize[d]) break;
                k[d] = 0;
            }
        }
    }
    return out;
}

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng) {
    Tensor t(std::move(shape));
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (double& v : t.flat()) v = dist(rng);
    return t;
}

void apply_axis(Tensor& re, Tensor& im, std::size_t axis, double sign) {
    const std::size_t n = re.dim(axis);
    std::size_t inner = 1;
    for (std::size_t a = axis + 1; a < re.rank(); ++a) inner *= re.dim(a);
    const std::size_t outer = re.numel() / (n * inner);
    std::vector<double> lr(n), li(n);
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t i = 0; i < inner; ++i) {
            const std::size_t base = o * n * inner + i;
            for (std::size_t j = 0; j < n; ++j) {
                lr[j] = re[base + j * inner];
                li[j] = im[base + j * inner];
            }
            detail::dft1d(lr, li, sign);
            for (std::size_t j = 0; j < n; ++j) {
                re[base + j * inner] = lr[j];
                im[base + j * inner] = li[j];
            }
        }
}

// Forward transform with a conjugated kernel; the deliberate mutation.
ComplexTensor corrupted_forward(const Tensor& x, int dims) {
    ComplexTensor out(x, Tensor::zeros(x.shape()));
    for (int d = 0; d < dims; ++d) apply_axis(out.re, out.im, out.re.rank() - 1 - static_cast<std::size_t>(d), +1.0);
    return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

VerifyReport verify_dft(const VerifyOptions& opts) {
    VerifyReport report;
    std::mt19937_64 rng(opts.seed);
    const auto forward = [&](const Tensor& x, int dims) {
        return opts.inject_twiddle_sign_error ? corrupted_forward(x, dims) : dft_forward(x, dims);
    };

    const std::vector<std::size_t> sizes{4, 5, 8, 12, 16, 32};
    std::uniform_int_distribution<std::size_t> pick(0, sizes.size() - 1);

    // oracle equivalence per dims
    for (int dims = 1; dims <= 3; ++dims) {
        double worst = 0.0;
        for (std::size_t t = 0; t < opts.dft_trials; ++t) {
            std::vector<std::size_t> shape;
            if (t % 10 == 9)
                shape = {3, 32, 32};
            else
                shape = {dims == 3 ? 2 + t % 2 : 3, sizes[pick(rng)] / (dims == 3 ? 2 : 1) + 2,
                         sizes[pick(rng)]};
            const Tensor x = random_tensor(shape, rng);
            const ComplexTensor fast = forward(x, dims);
            const ComplexTensor oracle = naive_dft_forward(x, dims);
            worst = std::max(worst, max_abs_diff(fast.re, oracle.re));
            worst = std::max(worst, max_abs_diff(fast.im, oracle.im));
        }
        report.checks.push_back({"dft_oracle_equivalence_dims" + std::to_string(dims),
                                 worst < 1e-9, worst, "fast vs naive nested sum, max-abs"});
    }

    // Parseval and round trip on 3x32x32
    {
        double worst_parseval = 0.0, worst_round = 0.0;
        for (std::size_t t = 0; t < opts.dft_trials; ++t) {
            const Tensor x = random_tensor({3, 32, 32}, rng);
            const int dims = 1 + static_cast<int>(t % 3);
            const ComplexTensor X = forward(x, dims);
            double norm = 1.0;
            for (int d = 0; d < dims; ++d) norm *= static_cast<double>(x.dim(x.rank() - 1 - static_cast<std::size_t>(d)));
            double ex = 0.0, eX = 0.0;
            for (std::size_t i = 0; i < x.numel(); ++i) ex += x[i] * x[i];
            for (std::size_t i = 0; i < x.numel(); ++i) eX += X.re[i] * X.re[i] + X.im[i] * X.im[i];
            worst_parseval = std::max(worst_parseval, std::abs(ex - eX / norm) / ex);
            const ComplexTensor back = dft_inverse(X, dims);
            worst_round = std::max(worst_round, max_abs_diff(back.re, x));
            for (std::size_t i = 0; i < back.im.numel(); ++i)
                worst_round = std::max(worst_round, std::abs(back.im[i]));
        }
        report.checks.push_back({"dft_parseval", worst_parseval < 1e-9, worst_parseval,
                                 "sum|x|^2 vs sum|X|^2 / prod(N), relative"});
        report.checks.push_back(
            {"dft_round_trip", worst_round < 1e-9, worst_round, "inverse(forward(x)) vs x, max-abs"});
    }

    // conjugate symmetry and linearity, 1D
    {
        double worst_sym = 0.0, worst_lin = 0.0, worst_phase = 0.0;
        for (std::size_t t = 0; t < opts.dft_trials; ++t) {
            const Tensor x = random_tensor({3, 8, 32}, rng);
            const Tensor y = random_tensor({3, 8, 32}, rng);
            const ComplexTensor X = forward(x, 1);
            const std::size_t w = 32, lines = x.numel() / w;
            for (std::size_t l = 0; l < lines; ++l)
                for (std::size_t k = 1; k < w; ++k) {
                    const double mk = std::hypot(X.re[l * w + k], X.im[l * w + k]);
                    const double mnk = std::hypot(X.re[l * w + w - k], X.im[l * w + w - k]);
                    worst_sym = std::max(worst_sym, std::abs(mk - mnk));
                }
            const double a = 0.37, b = -1.2;
            const ComplexTensor Y = forward(y, 1);
            const ComplexTensor Z = forward(add(scale(x, a), scale(y, b)), 1);
            for (std::size_t i = 0; i < Z.numel(); ++i) {
                worst_lin = std::max(worst_lin, std::abs(Z.re[i] - (a * X.re[i] + b * Y.re[i])));
                worst_lin = std::max(worst_lin, std::abs(Z.im[i] - (a * X.im[i] + b * Y.im[i])));
            }
            const Tensor ph = extract_components(X, Formulation::Phase);
            for (std::size_t i = 0; i < ph.numel(); ++i) {
                if (!(ph[i] > -std::numbers::pi - 1e-15 && ph[i] <= std::numbers::pi))
                    worst_phase = std::max(worst_phase, std::abs(ph[i]) - std::numbers::pi);
            }
        }
        report.checks.push_back({"dft_conjugate_symmetry", worst_sym < 1e-9, worst_sym,
                                 "|X[k]| vs |X[N-k]| for real input, 1D"});
        report.checks.push_back(
            {"dft_linearity", worst_lin < 1e-9, worst_lin, "forward(ax+by) vs a forward(x)+b forward(y)"});
        report.checks.push_back(
            {"dft_phase_range", worst_phase == 0.0, worst_phase, "phase in (-pi, pi]"});
    }
    return report;
}

namespace {

double check_gradients(const std::vector<Parameter*>& params,
                       const std::function<double()>& loss_forward,
                       const std::function<void()>& analytic_backward, double h) {
    for (Parameter* p : params) p->zero_grad();
    loss_forward();
    analytic_backward();
    std::vector<std::vector<double>> analytic;
    for (Parameter* p : params) analytic.push_back(p->grad.flat());
    double worst = 0.0;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Parameter* p = params[pi];
        for (std::size_t e = 0; e < p->value.numel(); ++e) {
            const double saved = p->value[e];
            p->value[e] = saved + h;
            const double lp = loss_forward();
            p->value[e] = saved - h;
            const double lm = loss_forward();
            p->value[e] = saved;
            const double numeric = (lp - lm) / (2.0 * h);
            const double a = analytic[pi][e];
            const double diff = std::abs(a - numeric);
            if (diff <= 1e-7) continue;  // absolute floor for near-zero entries
            worst = std::max(worst, diff / std::max(std::abs(a), std::abs(numeric)));
        }
    }
    for (Parameter* p : params) p->zero_grad();
    return worst;
}

}  // namespace

double gradient_check(Graph& graph, const Tensor& input, const Tensor& target, double h) {
    Tensor last_out;
    const auto fwd = [&]() {
        last_out = graph.forward(input, Mode::Train);
        return mse_loss(last_out, target);
    };
    const auto bwd = [&]() { graph.backward(mse_grad(last_out, target)); };
    return check_gradients(graph.parameters(), fwd, bwd, h);
}

VerifyReport verify_grad(const VerifyOptions& opts) {
    VerifyReport report;
    std::mt19937_64 rng(opts.seed);
    Rng init_rng(opts.seed + 1);
    const double h = 1e-5, tol = 1e-4;

    const auto add_check = [&](const std::string& name, Graph& g, const Tensor& x,
                               const Tensor& target) {
        const double err = gradient_check(g, x, target, h);
        report.checks.push_back({"grad_" + name, err < tol, err, "central differences, h=1e-5"});
    };

    {
        Graph g;
        g.add(std::make_unique<FullyConnected>("fc", 5, 4, init_rng));
        add_check("FullyConnected", g, random_tensor({3, 5}, rng), random_tensor({3, 4}, rng));
    }
    {
        Graph g;
        g.add(std::make_unique<FullyConnected>("fc", 4, 4, init_rng));
        g.add(std::make_unique<ReLU>("relu"));
        add_check("ReLU", g, random_tensor({3, 4}, rng), random_tensor({3, 4}, rng));
    }
    {
        Graph g;
        g.add(std::make_unique<Conv2D>("conv", 2, 3, 3, 1, 1, init_rng));
        add_check("Conv2D", g, random_tensor({2, 2, 6, 6}, rng), random_tensor({2, 3, 6, 6}, rng));
    }
    {
        Graph g;
        g.add(std::make_unique<Conv2D>("conv", 2, 3, 4, 2, 1, init_rng));
        add_check("Conv2D_strided", g, random_tensor({2, 2, 6, 6}, rng),
                  random_tensor({2, 3, 3, 3}, rng));
    }
    {
        Graph g;
        g.add(std::make_unique<FullyConnected>("fc", 5, 4, init_rng));
        g.add(std::make_unique<BatchNorm>("bn", 4));
        add_check("BatchNorm", g, random_tensor({6, 5}, rng), random_tensor({6, 4}, rng));
    }
    {
        Graph g;
        g.add(std::make_unique<Conv2D>("conv", 2, 3, 1, 1, 0, init_rng));
        g.add(std::make_unique<BatchNorm>("bn", 3));
        add_check("BatchNorm_spatial", g, random_tensor({2, 2, 4, 4}, rng),
                  random_tensor({2, 3, 4, 4}, rng));
    }
    {
        Graph g;
        g.add(std::make_unique<Conv2D>("conv", 2, 2, 1, 1, 0, init_rng));
        g.add(std::make_unique<AvgPool>("pool"));
        add_check("AvgPool", g, random_tensor({2, 2, 4, 4}, rng), random_tensor({2, 2}, rng));
    }
    {
        Graph g;
        g.add(std::make_unique<Conv2D>("conv", 2, 2, 1, 1, 0, init_rng));
        g.add(std::make_unique<Flatten>("flat"));
        g.add(std::make_unique<FullyConnected>("fc", 32, 3, init_rng));
        add_check("Flatten", g, random_tensor({2, 2, 4, 4}, rng), random_tensor({2, 3}, rng));
    }
    {
        Graph g;
        g.add(std::make_unique<ResidualBlock>("res", 2, 3, 2, init_rng));
        add_check("ResidualBlock", g, random_tensor({2, 2, 6, 6}, rng),
                  random_tensor({2, 3, 3, 3}, rng));
    }

    // full DFT-target loss through a small encoder/decoder pair
    {
        EncoderConfig ecfg;
        ecfg.kind = EncoderKind::CompactConv;
        ecfg.widths = {4, 8};
        ecfg.embedding_dim = 12;
        ecfg.in_height = 8;
        ecfg.in_width = 8;
        ecfg.seed = opts.seed + 7;
        Graph enc = build_encoder(ecfg);

        TargetSpec spec;
        spec.dft_dims = 2;
        spec.formulation = Formulation::Magnitude;
        DecoderConfig dcfg;
        dcfg.hidden = {8, 8, 8};
        dcfg.input_dim = 12;
        dcfg.output_dim = target_length(spec, 3, 8, 8);
        dcfg.seed = opts.seed + 8;
        Graph dec = build_decoder(dcfg);

        const std::size_t batch = 2;
        const Tensor x = random_tensor({batch, 3, 8, 8}, rng);
        Tensor target({batch, dcfg.output_dim});
        for (std::size_t i = 0; i < batch; ++i) {
            const Tensor img = slice(x, {{i, i + 1}, {0, 3}, {0, 8}, {0, 8}});
            const Tensor t = make_target(reshape(img, {3, 8, 8}), spec);
            std::copy(t.flat().begin(), t.flat().end(), target.data() + i * dcfg.output_dim);
        }
        std::vector<Parameter*> params = enc.parameters();
        for (Parameter* p : dec.parameters()) params.push_back(p);
        Tensor out;
        const auto fwd = [&]() {
            out = dec.forward(enc.forward(x, Mode::Train), Mode::Train);
            return mse_loss(out, target);
        };
        const auto bwd = [&]() { enc.backward(dec.backward(mse_grad(out, target))); };
        const double err = check_gradients(params, fwd, bwd, h);
        report.checks.push_back(
            {"grad_dft_target_loss", err < tol, err, "encoder+decoder mse against 2D magnitude target"});
    }
    return report;
}

}  // namespace ftrl
