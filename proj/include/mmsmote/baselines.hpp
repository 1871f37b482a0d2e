#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "mmsmote/dataset.hpp"
#include "mmsmote/kernel.hpp"
#include "mmsmote/mmsmote.hpp"
#include "mmsmote/rng.hpp"
#include "mmsmote/svm.hpp"

namespace mmsmote {

/// Inverse-frequency box constraints: minority rows get C * n_majority / n_minority.
inline Vector class_weight_vector(const Labels& y, double c) {
    std::size_t pos = 0;
    for (int v : y) pos += v == kMinority ? 1 : 0;
    const std::size_t neg = y.size() - pos;
    if (pos == 0 || neg == 0) throw DataError("class_weight_vector: both classes must be present");
    const double minority_c = c * static_cast<double>(neg) / static_cast<double>(pos);
    Vector out(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < y.size(); ++i) out(static_cast<Eigen::Index>(i)) = y[i] == kMinority ? minority_c : c;
    return out;
}

/**
 * Classic input-space SMOTE: `s` rows x_i + d (x_j - x_i), i uniform over the
 * minority, j uniform over i's k nearest minority neighbours (Euclidean,
 * ties to the lower row), d uniform on (0, 1). Synthetics are appended.
 */
inline Dataset smote(const Dataset& train, std::size_t k, std::size_t s, std::uint64_t seed) {
    if (k == 0) throw std::invalid_argument("smote: k must be >= 1");
    const auto minority = train.indices_of(kMinority);
    if (minority.size() < 2) throw DataError("smote: the minority class needs at least 2 samples");
    if (s == 0) return train;

    std::vector<std::vector<std::size_t>> neighbours(minority.size());
    std::vector<double> dist(train.size(), 0.0);
    for (std::size_t a = 0; a < minority.size(); ++a) {
        const auto xa = train.features.row(static_cast<Eigen::Index>(minority[a]));
        for (auto b : minority) dist[b] = (train.features.row(static_cast<Eigen::Index>(b)) - xa).squaredNorm();
        neighbours[a] = detail::nearest(dist, minority[a], minority, k);
    }

    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> pick_base(0, minority.size() - 1);
    Dataset synth;
    synth.features.resize(static_cast<Eigen::Index>(s), train.features.cols());
    synth.labels.assign(s, kMinority);
    synth.ids.assign(s, kSyntheticId);
    for (std::size_t r = 0; r < s; ++r) {
        const std::size_t a = pick_base(rng);
        std::uniform_int_distribution<std::size_t> pick_partner(0, neighbours[a].size() - 1);
        const std::size_t j = neighbours[a][pick_partner(rng)];
        const double delta = open_unit(rng);
        const auto xi = train.features.row(static_cast<Eigen::Index>(minority[a]));
        const auto xj = train.features.row(static_cast<Eigen::Index>(j));
        synth.features.row(static_cast<Eigen::Index>(r)) = xi + delta * (xj - xi);
    }
    return concat(train, synth);
}

/// Majority reduced to round(minority * target_ratio) by sampling without replacement.
inline Dataset random_undersample(const Dataset& train, double target_ratio, std::uint64_t seed) {
    if (!(target_ratio > 0.0)) throw std::invalid_argument("random_undersample: target ratio must be positive");
    const auto minority = train.indices_of(kMinority);
    auto majority = train.indices_of(kMajority);
    const auto target = static_cast<std::size_t>(std::llround(static_cast<double>(minority.size()) * target_ratio));
    if (target > majority.size()) {
        throw DataError("random_undersample: target " + std::to_string(target) + " exceeds the " +
                        std::to_string(majority.size()) + " available majority samples");
    }
    Rng rng(seed);
    std::shuffle(majority.begin(), majority.end(), rng);
    std::vector<std::size_t> keep(minority.begin(), minority.end());
    keep.insert(keep.end(), majority.begin(), majority.begin() + static_cast<std::ptrdiff_t>(target));
    std::sort(keep.begin(), keep.end());
    return train.subset(keep);
}

// ---------------------------------------------------------------------------
// Uniform front end over the compared methods
// ---------------------------------------------------------------------------

enum class Method { PlainSvm, ClassWeightedSvm, RusSvm, SmoteSvm, MmSmote };

inline constexpr Method kAllMethods[] = {Method::PlainSvm, Method::ClassWeightedSvm, Method::RusSvm, Method::SmoteSvm,
                                         Method::MmSmote};

inline std::string_view method_name(Method m) {
    switch (m) {
        case Method::PlainSvm: return "svm";
        case Method::ClassWeightedSvm: return "class_weighted_svm";
        case Method::RusSvm: return "rus_svm";
        case Method::SmoteSvm: return "smote_svm";
        case Method::MmSmote: return "mm_smote";
    }
    return "unknown";
}

inline Method parse_method(std::string_view name) {
    for (Method m : kAllMethods) {
        if (method_name(m) == name) return m;
    }
    throw ConfigError("unknown method '" + std::string(name) +
                      "' (expected svm, class_weighted_svm, rus_svm, smote_svm or mm_smote)");
}

struct MethodParams {
    KernelSpec kernel;
    double c = 1.0;
    std::size_t k = 5;
    double tol = 1e-3;
    std::size_t max_passes = 10'000;
    double rus_ratio = 1.0;
    std::optional<std::size_t> oversample;  // SMOTE / MM-SMOTE synthetic count; empty = full balance
};

/// A kernel SVM together with the rows it needs at prediction time.
struct KernelSvm {
    KernelSpec spec;
    Matrix train_features;
    TrainedModel model;
};

inline KernelSvm fit_kernel_svm(const Dataset& train, const KernelSpec& spec, const Vector& c, const SmoOptions& opt) {
    train.validate();
    train.require_both_classes();
    const GramMatrix g = gram(spec, train.features);
    return {spec, train.features, train_smo(g.values, train.labels, c, opt, g.fingerprint)};
}

inline Labels predict(const KernelSvm& svm, const Matrix& x) {
    return predict(svm.model, cross_gram(svm.spec, x, svm.train_features));
}

/// Fitted model of any compared method.
struct FittedMethod {
    Method method = Method::PlainSvm;
    std::optional<KernelSvm> svm;
    std::optional<MMModel> mm;

    Labels predict(const Matrix& x) const { return mm ? predict_mm(*mm, x) : mmsmote::predict(*svm, x); }
    const TrainedModel& model() const { return mm ? mm->final_model : svm->model; }
};

inline FittedMethod fit_method(Method method, const Dataset& train, const MethodParams& p, std::uint64_t seed) {
    FittedMethod out;
    out.method = method;
    const SmoOptions opt{p.tol, p.max_passes, derive_seed(seed, 11)};
    const auto n = static_cast<Eigen::Index>(train.size());
    switch (method) {
        case Method::PlainSvm: out.svm = fit_kernel_svm(train, p.kernel, Vector::Constant(n, p.c), opt); break;
        case Method::ClassWeightedSvm:
            out.svm = fit_kernel_svm(train, p.kernel, class_weight_vector(train.labels, p.c), opt);
            break;
        case Method::RusSvm: {
            const Dataset reduced = random_undersample(train, p.rus_ratio, derive_seed(seed, 12));
            out.svm = fit_kernel_svm(reduced, p.kernel, Vector::Constant(static_cast<Eigen::Index>(reduced.size()), p.c),
                                     opt);
            break;
        }
        case Method::SmoteSvm: {
            const auto c = train.counts();
            const std::size_t s = p.oversample.value_or(c.majority > c.minority ? c.majority - c.minority : 0);
            const Dataset grown = smote(train, p.k, s, derive_seed(seed, 13));
            out.svm =
                fit_kernel_svm(grown, p.kernel, Vector::Constant(static_cast<Eigen::Index>(grown.size()), p.c), opt);
            break;
        }
        case Method::MmSmote:
            out.mm = fit_mm_smote(train, p.kernel,
                                  MMParams{p.c, p.k, p.oversample, p.tol, p.max_passes, derive_seed(seed, 14)});
            break;
    }
    return out;
}

}  // namespace mmsmote
