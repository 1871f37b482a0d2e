// Command-line front end: benchmark protocol, single fits, a synthetic demo
// and the reported-table arithmetic check.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "mmsmote/experiment.hpp"
#include "mmsmote/reported_results.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitMismatch = 3;

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw mmsmote::ConfigError("cannot write " + path);
    out << text;
}

int run_bench(const std::string& config_path, const std::string& output_override) {
    auto cfg = mmsmote::load_config(config_path);
    if (!output_override.empty()) cfg.output = output_override;
    const mmsmote::Dataset data = mmsmote::load_source(cfg);
    const auto counts = data.counts();
    std::cerr << "loaded " << data.size() << " rows (" << counts.minority << " minority, " << counts.majority
              << " majority)\n";
    const auto result = mmsmote::run_experiment(cfg, data);
    write_file(cfg.output, mmsmote::format_results(result, cfg));
    if (!cfg.diagnostics_output.empty()) write_file(cfg.diagnostics_output, mmsmote::format_diagnostics(result));

    std::size_t failed = 0;
    for (const auto& run : result.runs) failed += run.ok() ? 0 : 1;
    std::cerr << "wrote " << result.runs.size() << " runs to " << cfg.output;
    if (failed > 0) std::cerr << " (" << failed << " with non-ok status)";
    std::cerr << '\n';
    return kExitOk;
}

struct FitArgs {
    std::string config;
    std::string method = "mm_smote";
    double ratio = 0.0;
    std::size_t rep = 0;
    std::string model_out;
    std::string diagnostics_out;
    std::string kernel_dump;
};

int run_fit(const FitArgs& args) {
    const auto cfg = mmsmote::load_config(args.config);
    const auto method = mmsmote::parse_method(args.method);
    const double ratio = args.ratio > 0.0 ? args.ratio : cfg.ratios.front();
    const mmsmote::Dataset data = mmsmote::load_source(cfg);

    const auto seed = mmsmote::data_seed(cfg.seed, ratio, args.rep);
    const auto shaped = mmsmote::make_ratio_dataset(data, {ratio, cfg.n_clusters, seed});
    const auto split = mmsmote::stratified_split(shaped, cfg.test_fraction, mmsmote::derive_seed(seed, 1));
    const auto scaled = mmsmote::standardize(split.train, {split.test});

    mmsmote::MethodParams p;
    p.kernel = cfg.kernel.resolve(scaled.train.features);
    p.c = cfg.c;
    p.k = cfg.k;
    p.tol = cfg.tol;
    p.max_passes = cfg.max_passes;
    p.rus_ratio = cfg.rus_ratio;
    p.oversample = cfg.oversample;
    const auto fitted =
        mmsmote::fit_method(method, scaled.train, p, mmsmote::cell_seed(cfg.seed, ratio, method, args.rep));
    const auto m = mmsmote::scores(mmsmote::confusion(scaled.others.front().labels,
                                                      fitted.predict(scaled.others.front().features)));

    std::cout << "method " << mmsmote::method_name(method) << "\nratio " << mmsmote::format_double(ratio)
              << "\nkernel " << p.kernel.fingerprint() << "\nprecision " << mmsmote::format_fixed(m.precision, 6)
              << "\nrecall " << mmsmote::format_fixed(m.recall, 6) << "\nf1 " << mmsmote::format_fixed(m.f1, 6)
              << "\ngmean " << mmsmote::format_fixed(m.gmean, 6) << '\n';
    if (fitted.mm) std::cout << mmsmote::diagnostics_report(fitted.mm->diagnostics);

    if (!args.model_out.empty()) {
        std::ofstream out(args.model_out);
        if (!out) throw mmsmote::ConfigError("cannot write " + args.model_out);
        mmsmote::write_model(out, fitted.model());
    }
    if (!args.diagnostics_out.empty()) {
        if (!fitted.mm) throw mmsmote::ConfigError("--diagnostics-out is only available for mm_smote");
        write_file(args.diagnostics_out, mmsmote::diagnostics_report(fitted.mm->diagnostics));
    }
    if (!args.kernel_dump.empty()) {
        if (!fitted.mm) throw mmsmote::ConfigError("--kernel-dump is only available for mm_smote");
        mmsmote::dump_matrix(args.kernel_dump, fitted.mm->augmented.values);
    }
    return kExitOk;
}

struct DemoArgs {
    std::size_t n_majority = 1000;
    std::size_t n_minority = 50;
    double separation = 1.75;
    std::size_t dim = 2;
    std::uint64_t seed = 1;
    double c = 1.0;
};

int run_synth_demo(const DemoArgs& a) {
    const auto data = mmsmote::gen_gaussian_blobs(a.n_majority, a.n_minority, a.separation, a.dim, a.seed);
    const auto split = mmsmote::stratified_split(data, 0.3, mmsmote::derive_seed(a.seed, 1));
    const auto scaled = mmsmote::standardize(split.train, {split.test});
    mmsmote::MethodParams p;
    p.kernel = mmsmote::default_rbf(scaled.train.features);
    p.c = a.c;

    std::printf("%-20s %9s %9s %9s %9s\n", "method", "precision", "recall", "f1", "gmean");
    for (auto method : mmsmote::kAllMethods) {
        const auto fitted = mmsmote::fit_method(method, scaled.train, p, mmsmote::derive_seed(a.seed, 2));
        const auto m = mmsmote::scores(mmsmote::confusion(scaled.others.front().labels,
                                                          fitted.predict(scaled.others.front().features)));
        std::printf("%-20s %9.4f %9.4f %9.4f %9.4f\n", std::string(mmsmote::method_name(method)).c_str(), m.precision,
                    m.recall, m.f1, m.gmean);
    }
    return kExitOk;
}

int run_check_tables() {
    const auto checks = mmsmote::check_reported_rows();
    std::size_t consistent = 0;
    std::printf("%5s %-20s %7s %7s | %7s %7s | %7s %7s  %s\n", "ratio", "method", "P", "R", "F1", "F1*", "G", "G*",
                "status");
    for (const auto& c : checks) {
        consistent += c.ok() ? 1 : 0;
        std::printf("%5d %-20s %.4f %.4f | %.4f %.4f | %.4f %.4f  %s\n", c.row.ratio,
                    std::string(mmsmote::method_name(c.row.method)).c_str(), c.row.precision, c.row.recall, c.row.f1,
                    c.recomputed.f1, c.row.gmean, c.recomputed.gmean, c.ok() ? "ok" : "MISMATCH");
    }
    std::printf("%zu/%zu rows consistent (F1 = 2PR/(P+R), G-mean = sqrt(PR), tolerance 0.0005)\n", consistent,
                checks.size());
    return consistent == checks.size() ? kExitOk : kExitMismatch;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kernel-space minority oversampling around an SVM hyperplane, with baselines and a benchmark harness"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    std::string config;
    std::string output;
    auto* bench = app.add_subcommand("bench", "Run the full ratio x method x repetition protocol");
    bench->add_option("--config", config, "JSON experiment config")->required()->check(CLI::ExistingFile);
    bench->add_option("--output", output, "Override the config's output path");

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "Fit one method on one ratio dataset and dump model + diagnostics");
    fit->add_option("--config", fit_args.config, "JSON experiment config")->required()->check(CLI::ExistingFile);
    fit->add_option("--method", fit_args.method, "svm | class_weighted_svm | rus_svm | smote_svm | mm_smote");
    fit->add_option("--ratio", fit_args.ratio, "Majority:minority ratio (default: first ratio in config)");
    fit->add_option("--rep", fit_args.rep, "Repetition index used for seeding");
    fit->add_option("--model-out", fit_args.model_out, "Write the trained SVM model (text)");
    fit->add_option("--diagnostics-out", fit_args.diagnostics_out, "Write MM-SMOTE diagnostics (text)");
    fit->add_option("--kernel-dump", fit_args.kernel_dump, "Write the augmented kernel (binary float64)");

    DemoArgs demo;
    auto* synth = app.add_subcommand("synth-demo", "Quick comparison of all methods on Gaussian blobs");
    synth->add_option("--n-majority", demo.n_majority);
    synth->add_option("--n-minority", demo.n_minority);
    synth->add_option("--separation", demo.separation);
    synth->add_option("--dim", demo.dim);
    synth->add_option("--seed", demo.seed);
    synth->add_option("--C", demo.c);

    app.add_subcommand("check-tables", "Re-verify F1 / G-mean arithmetic of the reported result tables");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*bench) return run_bench(config, output);
        if (*fit) return run_fit(fit_args);
        if (*synth) return run_synth_demo(demo);
        return run_check_tables();
    } catch (const mmsmote::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
}
