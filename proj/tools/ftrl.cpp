#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "ftrl/checkpoint.hpp"
#include "ftrl/data.hpp"
#include "ftrl/synth.hpp"
#include "ftrl/trainer.hpp"
#include "ftrl/verify.hpp"

namespace {

using namespace ftrl;

Formulation parse_formulation(const std::string& s) {
    if (s == "real") return Formulation::Real;
    if (s == "imag") return Formulation::Imag;
    if (s == "real_imag") return Formulation::RealImag;
    if (s == "magnitude") return Formulation::Magnitude;
    if (s == "phase") return Formulation::Phase;
    if (s == "mag_phase") return Formulation::MagPhase;
    throw CLI::ValidationError("--target", "unknown target formulation: " + s);
}

void write_config_echo(const std::string& dir, const std::map<std::string, std::string>& kv) {
    std::ofstream out(dir + "/config.txt", std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write config echo in " + dir);
    for (const auto& [k, v] : kv) out << k << "=" << v << "\n";
}

struct DataFlags {
    std::string data_dir;
    double val_fraction = 0.1;
    std::uint64_t split_seed = 42;
};

std::pair<Dataset, Dataset> load_train_val(const DataFlags& f) {
    const Dataset pool = load_cifar10_train(f.data_dir);
    return split_train_val(pool, f.val_fraction, f.split_seed);
}

int cmd_pretrain(CLI::App& app) {
    auto* cmd = app.add_subcommand("pretrain", "pretrain an encoder on DFT or pixel targets");
    auto flags = std::make_shared<DataFlags>();
    auto target = std::make_shared<std::string>("magnitude");
    auto dft_dims = std::make_shared<int>(1);
    auto sequential = std::make_shared<std::string>("off");
    auto fraction = std::make_shared<double>(1.0);
    auto epochs = std::make_shared<std::size_t>(10);
    auto batch = std::make_shared<std::size_t>(128);
    auto seed = std::make_shared<std::uint64_t>(0);
    auto out_dir = std::make_shared<std::string>();
    auto subset = std::make_shared<std::size_t>(0);
    auto encoder_kind = std::make_shared<std::string>("residual");
    auto embedding_dim = std::make_shared<std::size_t>(256);
    auto widths = std::make_shared<std::vector<std::size_t>>();
    auto hidden = std::make_shared<std::vector<std::size_t>>();
    auto mask_style = std::make_shared<std::string>("symmetric");
    auto optimizer = std::make_shared<std::string>("adam");
    auto lr = std::make_shared<double>(1e-3);
    auto probe_epochs = std::make_shared<std::size_t>(3);

    cmd->add_option("--data", flags->data_dir, "CIFAR-10 binary directory")->required();
    cmd->add_option("--target", *target,
                    "real|imag|real_imag|magnitude|phase|mag_phase|pixels");
    cmd->add_option("--dft-dims", *dft_dims, "1|2|3")->check(CLI::Range(1, 3));
    cmd->add_option("--sequential", *sequential, "on|off");
    cmd->add_option("--spectrum-fraction", *fraction, "1|0.25|0.125");
    cmd->add_option("--epochs", *epochs);
    cmd->add_option("--batch", *batch);
    cmd->add_option("--seed", *seed);
    cmd->add_option("--out", *out_dir, "output directory")->required();
    cmd->add_option("--subset", *subset, "train on the first N samples of the train split");
    cmd->add_option("--val-fraction", flags->val_fraction);
    cmd->add_option("--split-seed", flags->split_seed);
    cmd->add_option("--encoder", *encoder_kind, "compact|residual");
    cmd->add_option("--embedding-dim", *embedding_dim);
    cmd->add_option("--widths", *widths, "encoder channel progression")->delimiter(',');
    cmd->add_option("--decoder-hidden", *hidden, "three decoder hidden widths")->delimiter(',');
    cmd->add_option("--mask-style", *mask_style, "symmetric|low");
    cmd->add_option("--optimizer", *optimizer, "adam|sgd");
    cmd->add_option("--lr", *lr);
    cmd->add_option("--probe-epochs", *probe_epochs);

    cmd->callback([=]() {
        TrainConfig cfg;
        cfg.autoencoder_baseline = (*target == "pixels");
        if (!cfg.autoencoder_baseline) cfg.target.formulation = parse_formulation(*target);
        cfg.target.dft_dims = *dft_dims;
        cfg.target.spectrum_fraction = *fraction;
        cfg.target.mask_style = (*mask_style == "low") ? MaskStyle::LowOnly : MaskStyle::SymmetricEnds;
        if (*sequential != "on" && *sequential != "off")
            throw CLI::ValidationError("--sequential", "expected on or off");
        cfg.sequential = (*sequential == "on");
        cfg.epochs = *epochs;
        cfg.batch_size = *batch;
        cfg.seed = *seed;
        cfg.subset = *subset;
        cfg.encoder.kind =
            (*encoder_kind == "compact") ? EncoderKind::CompactConv : EncoderKind::ResidualSmall;
        cfg.encoder.embedding_dim = *embedding_dim;
        if (!widths->empty()) cfg.encoder.widths = *widths;
        if (!hidden->empty()) cfg.decoder.hidden = *hidden;
        cfg.optimizer.kind = (*optimizer == "sgd") ? OptimizerKind::SGDMomentum : OptimizerKind::Adam;
        cfg.optimizer.lr = *lr;
        if (cfg.target.spectrum_fraction < 1.0 && cfg.target.dft_dims != 1)
            throw std::invalid_argument(
                "invalid flag combination: --spectrum-fraction < 1 requires --dft-dims 1");

        std::filesystem::create_directories(*out_dir);
        write_config_echo(*out_dir, {{"data", flags->data_dir},
                                     {"target", *target},
                                     {"dft_dims", std::to_string(*dft_dims)},
                                     {"sequential", *sequential},
                                     {"spectrum_fraction", std::to_string(*fraction)},
                                     {"mask_style", *mask_style},
                                     {"epochs", std::to_string(*epochs)},
                                     {"batch", std::to_string(*batch)},
                                     {"seed", std::to_string(*seed)},
                                     {"subset", std::to_string(*subset)},
                                     {"val_fraction", std::to_string(flags->val_fraction)},
                                     {"split_seed", std::to_string(flags->split_seed)},
                                     {"encoder", *encoder_kind},
                                     {"embedding_dim", std::to_string(*embedding_dim)},
                                     {"optimizer", *optimizer},
                                     {"lr", std::to_string(*lr)},
                                     {"out", *out_dir}});

        auto [train, val] = load_train_val(*flags);
        PretrainResult res = pretrain(cfg, train);
        EncoderConfig ecfg = cfg.encoder;
        ecfg.seed = cfg.seed;
        save_encoder(*out_dir + "/checkpoint.ftrl", res.encoder, ecfg);

        Dataset probe_train = train;
        if (cfg.subset > 0 && cfg.subset < train.size()) {
            std::vector<std::size_t> idx(cfg.subset);
            for (std::size_t i = 0; i < cfg.subset; ++i) idx[i] = i;
            probe_train = train.subset(idx, Split::Train);
        }
        ProbeConfig pcfg;
        pcfg.seed = cfg.seed;
        pcfg.epochs = *probe_epochs;
        res.metrics.append(linear_probe(res.encoder, ecfg.embedding_dim, probe_train, val, pcfg));
        res.metrics.write_csv_file(*out_dir + "/metrics.csv");
        const MetricsRow& last = res.metrics.rows.back();
        std::cout << "pretrain done: final probe top1_val=" << last.acc1_val
                  << " top5_val=" << last.acc5_val << "\n";
    });
    return 0;
}

int cmd_probe(CLI::App& app) {
    auto* cmd = app.add_subcommand("probe", "frozen-encoder linear evaluation");
    auto checkpoint = std::make_shared<std::string>();
    auto flags = std::make_shared<DataFlags>();
    auto seed = std::make_shared<std::uint64_t>(0);
    auto out_dir = std::make_shared<std::string>();
    auto subset = std::make_shared<std::size_t>(0);
    auto probe_epochs = std::make_shared<std::size_t>(3);
    cmd->add_option("--checkpoint", *checkpoint, "encoder checkpoint file")->required();
    cmd->add_option("--data", flags->data_dir, "CIFAR-10 binary directory")->required();
    cmd->add_option("--seed", *seed);
    cmd->add_option("--out", *out_dir, "optional output directory for metrics.csv");
    cmd->add_option("--subset", *subset, "probe on the first N samples of the train split");
    cmd->add_option("--probe-epochs", *probe_epochs);
    cmd->add_option("--val-fraction", flags->val_fraction);
    cmd->add_option("--split-seed", flags->split_seed);
    cmd->callback([=]() {
        auto [encoder, ecfg] = load_encoder(*checkpoint);
        auto [train, val] = load_train_val(*flags);
        if (*subset > 0 && *subset < train.size()) {
            std::vector<std::size_t> idx(*subset);
            for (std::size_t i = 0; i < *subset; ++i) idx[i] = i;
            train = train.subset(idx, Split::Train);
        }
        ProbeConfig pcfg;
        pcfg.seed = *seed;
        pcfg.epochs = *probe_epochs;
        const RunMetrics metrics = linear_probe(encoder, ecfg.embedding_dim, train, val, pcfg);
        if (!out_dir->empty()) {
            std::filesystem::create_directories(*out_dir);
            metrics.write_csv_file(*out_dir + "/metrics.csv");
        }
        metrics.write_csv(std::cout);
        const MetricsRow& last = metrics.rows.back();
        std::cout << "probe final: top1_val=" << last.acc1_val << " top5_val=" << last.acc5_val
                  << " top1_train=" << last.acc1_train << " top5_train=" << last.acc5_train << "\n";
    });
    return 0;
}

int cmd_spectrum(CLI::App& app) {
    auto* cmd = app.add_subcommand("spectrum", "aggregated 1D magnitude spectrum of the train pool");
    auto data_dir = std::make_shared<std::string>();
    auto out_file = std::make_shared<std::string>();
    cmd->add_option("--data", *data_dir, "CIFAR-10 binary directory")->required();
    cmd->add_option("--out", *out_file, "output CSV file")->required();
    cmd->callback([=]() {
        const Dataset pool = load_cifar10_train(*data_dir);
        const Tensor agg = aggregate_magnitude(pool);
        std::ofstream out(*out_file, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + *out_file);
        out.precision(17);
        out << "index,value\n";
        for (std::size_t k = 0; k < agg.numel(); ++k) out << k << "," << agg[k] << "\n";
        std::cout << "spectrum written to " << *out_file << "\n";
    });
    return 0;
}

int cmd_verify(CLI::App& app) {
    auto* cmd = app.add_subcommand("verify", "run the dft/grad verification suites");
    auto suite = std::make_shared<std::string>("all");
    auto inject = std::make_shared<bool>(false);
    auto trials = std::make_shared<std::size_t>(100);
    cmd->add_option("--suite", *suite, "dft|grad|all");
    cmd->add_option("--trials", *trials, "random trials per transform check");
    cmd->add_flag("--inject-twiddle-sign-error", *inject,
                  "corrupt the fast transform kernel (suite self-test)");
    cmd->callback([=]() {
        VerifyOptions opts;
        opts.inject_twiddle_sign_error = *inject;
        opts.dft_trials = *trials;
        VerifyReport report;
        if (*suite == "dft" || *suite == "all") {
            const VerifyReport r = verify_dft(opts);
            report.checks.insert(report.checks.end(), r.checks.begin(), r.checks.end());
        }
        if (*suite == "grad" || *suite == "all") {
            const VerifyReport r = verify_grad(opts);
            report.checks.insert(report.checks.end(), r.checks.begin(), r.checks.end());
        }
        if (report.checks.empty()) throw CLI::ValidationError("--suite", "expected dft, grad or all");
        std::size_t failures = 0;
        for (const VerifyCheck& c : report.checks) {
            std::cout << (c.pass ? "PASS" : "FAIL") << " " << c.name << " max_error=" << c.max_error
                      << " (" << c.detail << ")\n";
            if (!c.pass) ++failures;
        }
        if (failures > 0)
            throw std::runtime_error("verification failed: " + std::to_string(failures) +
                                     " of " + std::to_string(report.checks.size()) + " checks");
    });
    return 0;
}

int cmd_synth(CLI::App& app) {
    auto* cmd = app.add_subcommand("synth", "write a synthetic dataset in CIFAR-10 binary layout");
    auto out_dir = std::make_shared<std::string>();
    auto cfg = std::make_shared<SynthConfig>();
    cmd->add_option("--out", *out_dir, "output directory")->required();
    cmd->add_option("--train", cfg->train_images);
    cmd->add_option("--test", cfg->test_images);
    cmd->add_option("--seed", cfg->seed);
    cmd->callback([=]() {
        std::filesystem::create_directories(*out_dir);
        write_synthetic_cifar(*out_dir, *cfg);
        std::cout << "synthetic dataset written to " << *out_dir << " (" << cfg->train_images
                  << " train, " << cfg->test_images << " test)\n";
    });
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fourier-target representation learning toolkit"};
    // config keys live in a section named after the subcommand, e.g. [pretrain]
    app.set_config("--config", "", "key-value config file; command-line flags override it");
    app.require_subcommand(1);
    cmd_pretrain(app);
    cmd_probe(app);
    cmd_spectrum(app);
    cmd_verify(app);
    cmd_synth(app);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() != 0) std::cerr << "error: " << e.what() << "\n";
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
