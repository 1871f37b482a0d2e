#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mmsmote/baselines.hpp"
#include "mmsmote/data.hpp"
#include "mmsmote/format.hpp"
#include "mmsmote/metrics.hpp"

namespace mmsmote {

struct BlobSource {
    std::size_t n_majority = 2000;
    std::size_t n_minority = 100;
    double separation = 2.0;
    std::size_t dim = 2;
    std::uint64_t seed = 1;
};

struct CsvSource {
    std::string path;
    std::string label_column = "Class";
    std::string positive_value = "1";
};

/// Kernel choice; `auto_gamma` means rbf with gamma from the standardized training data.
struct KernelChoice {
    KernelSpec spec = KernelSpec::rbf(1.0);
    bool auto_gamma = true;

    KernelSpec resolve(const Matrix& train_features) const {
        return auto_gamma ? default_rbf(train_features) : spec;
    }
};

struct ExperimentConfig {
    std::optional<BlobSource> blobs;
    std::optional<CsvSource> csv;
    std::vector<double> ratios{2, 4, 6, 8, 10};
    std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
    std::size_t repetitions = 1;
    std::uint64_t seed = 0;
    KernelChoice kernel;
    double c = 1.0;
    std::size_t k = 5;
    double tol = 1e-3;
    std::size_t max_passes = 10'000;
    std::size_t n_clusters = 8;
    double test_fraction = 0.3;
    double rus_ratio = 1.0;
    std::optional<std::size_t> oversample;
    bool record_timing = false;
    std::size_t workers = 1;
    std::string output = "results.csv";
    std::string diagnostics_output;  // optional MM-SMOTE diagnostics, one block per run

    void validate() const {
        if (blobs.has_value() == csv.has_value()) throw ConfigError("exactly one data source (blobs or csv) is required");
        if (ratios.empty()) throw ConfigError("ratios must not be empty");
        for (double r : ratios) {
            if (!(r >= 1.0) || !std::isfinite(r)) throw ConfigError("every ratio must be a finite number >= 1");
        }
        if (methods.empty()) throw ConfigError("methods must not be empty");
        if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
        if (!(c > 0.0)) throw ConfigError("C must be positive");
        if (k < 1) throw ConfigError("k must be >= 1");
        if (!(tol > 0.0)) throw ConfigError("tol must be positive");
        if (n_clusters < 1) throw ConfigError("n_clusters must be >= 1");
        if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must lie in (0, 1)");
        if (!(rus_ratio > 0.0)) throw ConfigError("rus_ratio must be positive");
        if (workers < 1) throw ConfigError("workers must be >= 1");
    }
};

namespace detail {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

inline KernelChoice parse_kernel(const nlohmann::json& j) {
    KernelChoice choice;
    const auto family = get_or<std::string>(j, "family", "rbf");
    try {
        if (family == "linear") {
            choice = {KernelSpec::linear(), false};
        } else if (family == "polynomial") {
            choice = {KernelSpec::polynomial(get_or<int>(j, "degree", 2), get_or<double>(j, "coef0", 1.0)), false};
        } else if (family == "rbf") {
            if (!j.contains("gamma") || (j.at("gamma").is_string() && j.at("gamma") == "auto")) {
                choice.auto_gamma = true;
            } else {
                choice = {KernelSpec::rbf(get_or<double>(j, "gamma", 1.0)), false};
            }
        } else {
            throw ConfigError("unknown kernel family '" + family + "'");
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return choice;
}

}  // namespace detail

/**
 * Reads a JSON experiment document. Every key is optional except the data
 * source; see README for the schema and defaults. The worker count may be
 * overridden by the MMSMOTE_WORKERS environment variable.
 */
inline ExperimentConfig parse_config(const nlohmann::json& j) {
    using detail::get_or;
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const char* kKnown[] = {"data",  "ratios",     "methods",   "repetitions",   "seed",       "kernel",
                                   "C",     "k",          "tol",       "max_passes",    "n_clusters", "test_fraction",
                                   "rus_ratio", "oversample", "record_timing", "workers", "output", "diagnostics_output"};
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(std::begin(kKnown), std::end(kKnown), [&](const char* k) { return key == k; }) ==
            std::end(kKnown)) {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }

    ExperimentConfig cfg;
    if (!j.contains("data")) throw ConfigError("config needs a 'data' section");
    const auto& data = j.at("data");
    const auto source = get_or<std::string>(data, "source", "");
    if (source == "blobs") {
        BlobSource b;
        b.n_majority = get_or<std::size_t>(data, "n_majority", b.n_majority);
        b.n_minority = get_or<std::size_t>(data, "n_minority", b.n_minority);
        b.separation = get_or<double>(data, "separation", b.separation);
        b.dim = get_or<std::size_t>(data, "dim", b.dim);
        b.seed = get_or<std::uint64_t>(data, "seed", b.seed);
        cfg.blobs = b;
    } else if (source == "csv") {
        CsvSource c;
        c.path = get_or<std::string>(data, "path", "");
        if (c.path.empty()) throw ConfigError("csv data source needs a 'path'");
        c.label_column = get_or<std::string>(data, "label_column", c.label_column);
        c.positive_value = get_or<std::string>(data, "positive_value", c.positive_value);
        cfg.csv = c;
    } else {
        throw ConfigError("data.source must be 'blobs' or 'csv'");
    }

    cfg.ratios = get_or<std::vector<double>>(j, "ratios", cfg.ratios);
    if (j.contains("methods")) {
        cfg.methods.clear();
        for (const auto& name : get_or<std::vector<std::string>>(j, "methods", {})) {
            const Method m = parse_method(name);
            if (std::find(cfg.methods.begin(), cfg.methods.end(), m) == cfg.methods.end()) cfg.methods.push_back(m);
        }
    }
    cfg.repetitions = get_or<std::size_t>(j, "repetitions", cfg.repetitions);
    cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
    if (j.contains("kernel")) cfg.kernel = detail::parse_kernel(j.at("kernel"));
    cfg.c = get_or<double>(j, "C", cfg.c);
    cfg.k = get_or<std::size_t>(j, "k", cfg.k);
    cfg.tol = get_or<double>(j, "tol", cfg.tol);
    cfg.max_passes = get_or<std::size_t>(j, "max_passes", cfg.max_passes);
    cfg.n_clusters = get_or<std::size_t>(j, "n_clusters", cfg.n_clusters);
    cfg.test_fraction = get_or<double>(j, "test_fraction", cfg.test_fraction);
    cfg.rus_ratio = get_or<double>(j, "rus_ratio", cfg.rus_ratio);
    if (j.contains("oversample") && !j.at("oversample").is_null()) {
        cfg.oversample = get_or<std::size_t>(j, "oversample", 0);
    }
    cfg.record_timing = get_or<bool>(j, "record_timing", cfg.record_timing);
    cfg.workers = get_or<std::size_t>(j, "workers", cfg.workers);
    cfg.output = get_or<std::string>(j, "output", cfg.output);
    cfg.diagnostics_output = get_or<std::string>(j, "diagnostics_output", cfg.diagnostics_output);

    if (const char* env = std::getenv("MMSMOTE_WORKERS"); env != nullptr && *env != '\0') {
        try {
            cfg.workers = std::stoul(env);
        } catch (const std::exception&) {
            throw ConfigError(std::string("MMSMOTE_WORKERS is not a number: ") + env);
        }
    }
    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    try {
        return parse_config(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

/// Seed of one (ratio, method, repetition) cell; independent of which other methods run.
inline std::uint64_t cell_seed(std::uint64_t master, double ratio, Method method, std::size_t rep) {
    return derive_seed(master, bits_of(ratio), static_cast<std::uint64_t>(method) + 1, rep);
}

/// Seed shared by every method for one (ratio, repetition): data shaping and splitting.
inline std::uint64_t data_seed(std::uint64_t master, double ratio, std::size_t rep) {
    return derive_seed(master, bits_of(ratio), 0, rep);
}

struct RunResult {
    double ratio = 0.0;
    Method method = Method::PlainSvm;
    std::size_t rep = 0;
    std::uint64_t seed = 0;
    MetricsReport metrics;
    double train_ms = 0.0;
    std::string status = "ok";
    std::string diagnostics;  // MM-SMOTE only

    bool ok() const { return status == "ok"; }
};

struct ExperimentResult {
    std::vector<RunResult> runs;  // sorted by (ratio index, method index, rep)
};

namespace detail {

struct PreparedSplit {
    std::optional<Dataset> train;
    std::optional<Dataset> test;
    std::string error;
};

inline std::string sanitize_status(std::string s) {
    for (char& ch : s) {
        if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ';';
    }
    return "error: " + s;
}

inline PreparedSplit prepare(const Dataset& full, const ExperimentConfig& cfg, double ratio, std::size_t rep) {
    PreparedSplit out;
    try {
        const std::uint64_t seed = data_seed(cfg.seed, ratio, rep);
        const Dataset shaped = make_ratio_dataset(full, RatioSpec{ratio, cfg.n_clusters, seed});
        const Split split = stratified_split(shaped, cfg.test_fraction, derive_seed(seed, 1));
        Standardized scaled = standardize(split.train, {split.test});
        out.train = std::move(scaled.train);
        out.test = std::move(scaled.others.front());
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

inline void run_cell(RunResult& r, const PreparedSplit& data, const ExperimentConfig& cfg) {
    if (!data.error.empty()) {
        r.status = sanitize_status(data.error);
        return;
    }
    try {
        MethodParams p;
        p.kernel = cfg.kernel.resolve(data.train->features);
        p.c = cfg.c;
        p.k = cfg.k;
        p.tol = cfg.tol;
        p.max_passes = cfg.max_passes;
        p.rus_ratio = cfg.rus_ratio;
        p.oversample = cfg.oversample;
        const auto start = std::chrono::steady_clock::now();
        const FittedMethod fitted = fit_method(r.method, *data.train, p, r.seed);
        const auto stop = std::chrono::steady_clock::now();
        r.train_ms = std::chrono::duration<double, std::milli>(stop - start).count();
        r.metrics = scores(confusion(data.test->labels, fitted.predict(data.test->features)));
        if (fitted.mm) r.diagnostics = diagnostics_report(fitted.mm->diagnostics);
        if (!fitted.model().converged) r.status = "not_converged";
    } catch (const std::exception& e) {
        r.status = sanitize_status(e.what());
    }
}

}  // namespace detail

inline Dataset load_source(const ExperimentConfig& cfg) {
    if (cfg.blobs) {
        const auto& b = *cfg.blobs;
        return gen_gaussian_blobs(b.n_majority, b.n_minority, b.separation, b.dim, b.seed);
    }
    return load_csv(cfg.csv->path, cfg.csv->label_column, cfg.csv->positive_value);
}

/**
 * Runs every (ratio, method, repetition) cell on `full`. Cells run on up to
 * `cfg.workers` threads; results come back in sorted order regardless of
 * completion order. Cell failures are recorded in the status column.
 */
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const Dataset& full) {
    cfg.validate();
    const std::size_t n_ratio = cfg.ratios.size();
    const std::size_t n_method = cfg.methods.size();
    const std::size_t n_rep = cfg.repetitions;

    std::vector<detail::PreparedSplit> prepared(n_ratio * n_rep);
    ExperimentResult result;
    result.runs.resize(n_ratio * n_method * n_rep);
    for (std::size_t a = 0; a < n_ratio; ++a) {
        for (std::size_t m = 0; m < n_method; ++m) {
            for (std::size_t r = 0; r < n_rep; ++r) {
                auto& run = result.runs[(a * n_method + m) * n_rep + r];
                run.ratio = cfg.ratios[a];
                run.method = cfg.methods[m];
                run.rep = r;
                run.seed = cell_seed(cfg.seed, run.ratio, run.method, r);
            }
        }
    }

    auto parallel_for = [&](std::size_t count, auto&& body) {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next++; i < count; i = next++) body(i);
        };
        const std::size_t n_threads = std::min(cfg.workers, count);
        std::vector<std::thread> pool;
        for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();
    };

    parallel_for(prepared.size(), [&](std::size_t i) {
        prepared[i] = detail::prepare(full, cfg, cfg.ratios[i / n_rep], i % n_rep);
    });
    parallel_for(result.runs.size(), [&](std::size_t i) {
        const std::size_t a = i / (n_method * n_rep);
        detail::run_cell(result.runs[i], prepared[a * n_rep + i % n_rep], cfg);
    });
    return result;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) { return run_experiment(cfg, load_source(cfg)); }

inline constexpr const char* kResultHeader = "ratio,method,rep,seed,precision,recall,f1,gmean,train_ms,status";

/// Result CSV: one row per run, then one `mean` row after each (ratio, method) block.
inline std::string format_results(const ExperimentResult& result, const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << kResultHeader << '\n';
    auto metric = [](double v) { return format_fixed(v, 6); };
    auto timing = [&](double ms) { return cfg.record_timing ? format_fixed(ms, 3) : std::string("NA"); };

    const std::size_t n_rep = cfg.repetitions;
    for (std::size_t block = 0; block * n_rep < result.runs.size(); ++block) {
        MetricsReport sum;
        double ms = 0.0;
        std::size_t ok = 0;
        for (std::size_t r = 0; r < n_rep; ++r) {
            const auto& run = result.runs[block * n_rep + r];
            out << format_double(run.ratio) << ',' << method_name(run.method) << ',' << run.rep << ',' << run.seed
                << ',';
            if (run.ok() || run.status == "not_converged") {
                out << metric(run.metrics.precision) << ',' << metric(run.metrics.recall) << ','
                    << metric(run.metrics.f1) << ',' << metric(run.metrics.gmean) << ',' << timing(run.train_ms);
                sum.precision += run.metrics.precision;
                sum.recall += run.metrics.recall;
                sum.f1 += run.metrics.f1;
                sum.gmean += run.metrics.gmean;
                ms += run.train_ms;
                ++ok;
            } else {
                out << "NA,NA,NA,NA,NA";
            }
            out << ',' << run.status << '\n';
        }
        const auto& first = result.runs[block * n_rep];
        out << format_double(first.ratio) << ',' << method_name(first.method) << ",mean," << cfg.seed << ',';
        if (ok > 0) {
            const double d = static_cast<double>(ok);
            out << metric(sum.precision / d) << ',' << metric(sum.recall / d) << ',' << metric(sum.f1 / d) << ','
                << metric(sum.gmean / d) << ',' << timing(ms / d) << ','
                << (ok == n_rep ? std::string("ok") : "partial:" + std::to_string(ok) + "/" + std::to_string(n_rep));
        } else {
            out << "NA,NA,NA,NA,NA,failed";
        }
        out << '\n';
    }
    return out.str();
}

/// Mean metrics of the successful runs for one (ratio, method) block.
inline std::optional<MetricsReport> mean_metrics(const ExperimentResult& result, double ratio, Method method) {
    MetricsReport sum;
    std::size_t ok = 0;
    for (const auto& run : result.runs) {
        if (run.ratio != ratio || run.method != method || !(run.ok() || run.status == "not_converged")) continue;
        sum.precision += run.metrics.precision;
        sum.recall += run.metrics.recall;
        sum.f1 += run.metrics.f1;
        sum.gmean += run.metrics.gmean;
        ++ok;
    }
    if (ok == 0) return std::nullopt;
    const double d = static_cast<double>(ok);
    return MetricsReport{sum.precision / d, sum.recall / d, sum.f1 / d, sum.gmean / d};
}

inline std::string format_diagnostics(const ExperimentResult& result) {
    std::ostringstream out;
    for (const auto& run : result.runs) {
        if (run.diagnostics.empty()) continue;
        out << "[run ratio=" << format_double(run.ratio) << " method=" << method_name(run.method) << " rep=" << run.rep
            << "]\n"
            << run.diagnostics << '\n';
    }
    return out.str();
}

}  // namespace mmsmote
