#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mmsmote/dataset.hpp"
#include "mmsmote/kernel.hpp"
#include "mmsmote/rng.hpp"
#include "mmsmote/svm.hpp"

namespace mmsmote {

// ---------------------------------------------------------------------------
// Selection weights
// ---------------------------------------------------------------------------

/// Selection probabilities over eligible minority support vectors.
struct SvWeights {
    std::vector<std::size_t> rows;  // training rows, parallel to `probabilities` (may be empty)
    std::vector<double> probabilities;

    std::size_t size() const noexcept { return probabilities.size(); }
};

/// Softmax of -|L|: the closer a sample sits to the hyperplane, the larger its weight.
inline SvWeights sv_weights(std::span<const double> distances, std::span<const std::size_t> rows = {}) {
    if (distances.empty()) throw std::invalid_argument("sv_weights: no support vectors to weight");
    if (!rows.empty() && rows.size() != distances.size()) {
        throw std::invalid_argument("sv_weights: rows and distances differ in length");
    }
    double nearest = std::numeric_limits<double>::infinity();
    for (double d : distances) {
        if (!std::isfinite(d)) throw std::invalid_argument("sv_weights: non-finite distance");
        nearest = std::min(nearest, std::abs(d));
    }
    SvWeights w;
    w.rows.assign(rows.begin(), rows.end());
    w.probabilities.reserve(distances.size());
    double total = 0.0;
    for (double d : distances) {
        // shifted by the smallest distance; the ratio is unchanged
        w.probabilities.push_back(std::exp(-(std::abs(d) - nearest)));
        total += w.probabilities.back();
    }
    for (double& p : w.probabilities) p /= total;
    return w;
}

// ---------------------------------------------------------------------------
// Neighbourhoods in feature space
// ---------------------------------------------------------------------------

enum class NeighborKind { Noise, Conservative, Aggressive };

inline const char* to_string(NeighborKind k) {
    switch (k) {
        case NeighborKind::Noise: return "noise";
        case NeighborKind::Conservative: return "conservative";
        case NeighborKind::Aggressive: return "aggressive";
    }
    return "unknown";
}

struct NeighborCase {
    NeighborKind kind = NeighborKind::Noise;
    std::size_t majority_neighbors = 0;  // m
    std::size_t k = 0;
};

/// m == k is noise; m >= ceil(k/2) is conservative; anything lower is aggressive.
inline NeighborCase neighbor_case(std::size_t m, std::size_t k) {
    NeighborCase c{NeighborKind::Aggressive, m, k};
    if (m == k) c.kind = NeighborKind::Noise;
    else if (m >= (k + 1) / 2) c.kind = NeighborKind::Conservative;
    return c;
}

namespace detail {

/// Squared feature-space distances from `row` to every training row, read off a Gram matrix.
inline std::vector<double> gram_distances(const Matrix& g, std::size_t row) {
    const auto r = static_cast<Eigen::Index>(row);
    std::vector<double> d(static_cast<std::size_t>(g.rows()));
    for (Eigen::Index q = 0; q < g.rows(); ++q) {
        d[static_cast<std::size_t>(q)] = std::max(0.0, g(r, r) - 2.0 * g(r, q) + g(q, q));
    }
    return d;
}

/// The `k` nearest candidates to `self` (excluded); ties go to the smaller index.
inline std::vector<std::size_t> nearest(const std::vector<double>& dist, std::size_t self,
                                        std::span<const std::size_t> candidates, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(candidates.size());
    for (auto c : candidates) {
        if (c != self) ranked.emplace_back(dist[c], c);
    }
    k = std::min(k, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k), ranked.end());
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t p = 0; p < k; ++p) out.push_back(ranked[p].second);
    return out;
}

inline std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = i;
    return rows;
}

inline NeighborCase classify_with_gram(const Matrix& g, const Labels& labels, std::size_t idx, std::size_t k) {
    if (k == 0) throw std::invalid_argument("classify_neighborhood: k must be >= 1");
    if (k >= labels.size()) {
        throw std::invalid_argument("classify_neighborhood: k (" + std::to_string(k) + ") must be below the dataset size (" +
                                    std::to_string(labels.size()) + ")");
    }
    const auto dist = gram_distances(g, idx);
    const auto rows = all_rows(labels.size());
    std::size_t m = 0;
    for (auto q : nearest(dist, idx, rows, k)) m += labels[q] == kMajority ? 1 : 0;
    return neighbor_case(m, k);
}

}  // namespace detail

/// Neighbourhood case of training row `idx` from its k nearest neighbours under the kernel-induced distance.
inline NeighborCase classify_neighborhood(std::size_t idx, const Dataset& train, const KernelSpec& spec, std::size_t k) {
    if (idx >= train.size()) throw std::out_of_range("classify_neighborhood: row out of range");
    if (k == 0 || k >= train.size()) {
        throw std::invalid_argument("classify_neighborhood: need 1 <= k < dataset size");
    }
    const auto x = train.features.row(static_cast<Eigen::Index>(idx));
    std::vector<double> dist(train.size());
    for (std::size_t q = 0; q < train.size(); ++q) {
        dist[q] = kernel_distance2(spec, x, train.features.row(static_cast<Eigen::Index>(q)));
    }
    std::size_t m = 0;
    for (auto q : detail::nearest(dist, idx, detail::all_rows(train.size()), k)) {
        m += train.labels[q] == kMajority ? 1 : 0;
    }
    return neighbor_case(m, k);
}

// ---------------------------------------------------------------------------
// Synthesis plan
// ---------------------------------------------------------------------------

/// Plan plus the per-support-vector bookkeeping that produced it.
struct PlanBuild {
    SynthesisPlan plan;
    std::vector<std::size_t> sv_rows;
    std::vector<NeighborCase> sv_cases;  // parallel to sv_rows
    SvWeights weights;                   // over the non-noise support vectors

    std::size_t case_count(NeighborKind kind) const {
        return static_cast<std::size_t>(std::count_if(sv_cases.begin(), sv_cases.end(),
                                                      [kind](const NeighborCase& c) { return c.kind == kind; }));
    }
};

/**
 * Draws `s` virtual samples. Bases are drawn with replacement from the
 * non-noise minority support vectors using the distance weights; partners
 * uniformly from the base's k nearest minority neighbours. Conservative bases
 * interpolate (delta in (0,1)), aggressive ones extrapolate (delta in (-1,0)).
 */
inline PlanBuild build_plan_with_gram(const Matrix& g, const Labels& labels, const SvTaxonomy& taxonomy, std::size_t k,
                                      std::size_t s, std::uint64_t seed) {
    if (s == 0) throw std::invalid_argument("build_plan: s must be >= 1");
    const auto minority = [&] {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == kMinority) rows.push_back(i);
        }
        return rows;
    }();
    if (minority.size() < 2) throw DataError("build_plan: the minority class needs at least 2 samples");

    PlanBuild out;
    std::vector<std::size_t> eligible;
    std::vector<double> eligible_dist;
    std::vector<NeighborKind> eligible_kind;
    for (auto p : taxonomy.support_vectors()) {
        const std::size_t row = taxonomy.rows[p];
        const auto c = detail::classify_with_gram(g, labels, row, k);
        out.sv_rows.push_back(row);
        out.sv_cases.push_back(c);
        if (c.kind != NeighborKind::Noise) {
            eligible.push_back(row);
            eligible_dist.push_back(taxonomy.distances[p]);
            eligible_kind.push_back(c.kind);
        }
    }
    if (out.sv_rows.empty()) throw ModelError("build_plan: the base model has no minority support vectors");
    if (eligible.empty()) {
        throw ModelError("all minority support vectors classified as noise; try a larger k or a different kernel");
    }
    out.weights = sv_weights(eligible_dist, eligible);

    std::vector<std::vector<std::size_t>> partners(eligible.size());
    for (std::size_t e = 0; e < eligible.size(); ++e) {
        partners[e] = detail::nearest(detail::gram_distances(g, eligible[e]), eligible[e], minority, k);
    }

    Rng rng(seed);
    std::discrete_distribution<std::size_t> pick_base(out.weights.probabilities.begin(),
                                                      out.weights.probabilities.end());
    out.plan.entries.reserve(s);
    for (std::size_t draw = 0; draw < s; ++draw) {
        const std::size_t e = pick_base(rng);
        std::uniform_int_distribution<std::size_t> pick_partner(0, partners[e].size() - 1);
        PlanEntry entry;
        entry.base = eligible[e];
        entry.partner = partners[e][pick_partner(rng)];
        const double u = open_unit(rng);
        if (eligible_kind[e] == NeighborKind::Conservative) {
            entry.kind = SynthesisCase::Conservative;
            entry.delta = u;
        } else {
            entry.kind = SynthesisCase::Aggressive;
            entry.delta = -u;
        }
        out.plan.entries.push_back(entry);
    }
    out.plan.canonicalize();
    return out;
}

inline SynthesisPlan build_plan(const Dataset& train, const SvTaxonomy& taxonomy, const KernelSpec& spec, std::size_t k,
                                std::size_t s, std::uint64_t seed) {
    return build_plan_with_gram(gram(spec, train.features).values, train.labels, taxonomy, k, s, seed).plan;
}

// ---------------------------------------------------------------------------
// Full pipeline
// ---------------------------------------------------------------------------

struct MMParams {
    double c = 1.0;
    std::size_t k = 5;
    std::optional<std::size_t> s;  // empty: majority - minority
    double tol = 1e-3;
    std::size_t max_passes = 10'000;
    std::uint64_t seed = 0;
};

struct MMDiagnostics {
    std::size_t n_train = 0;
    std::size_t n_minority = 0;
    std::size_t n_majority = 0;
    std::size_t safe = 0;
    std::size_t on_margin = 0;
    std::size_t in_margin = 0;
    std::size_t misclassified = 0;
    std::size_t noise = 0;
    std::size_t conservative = 0;
    std::size_t aggressive = 0;
    std::size_t s = 0;
    std::size_t planned_conservative = 0;
    std::size_t planned_aggressive = 0;
    bool base_converged = false;
    bool final_converged = false;
    std::uint64_t seed = 0;
};

struct MMModel {
    TrainedModel base;
    SynthesisPlan plan;
    AugmentedKernel augmented;
    TrainedModel final_model;
    Matrix train_features;
    KernelSpec spec;
    MMDiagnostics diagnostics;
};

inline MMModel fit_mm_smote(const Dataset& train, const KernelSpec& spec, const MMParams& params) {
    train.validate();
    train.require_both_classes();
    spec.validate();
    const auto counts = train.counts();
    if (counts.minority < 2) throw DataError("MM-SMOTE needs at least 2 minority samples");

    MMModel model;
    model.spec = spec;
    model.train_features = train.features;
    auto& diag = model.diagnostics;
    diag.n_train = train.size();
    diag.n_minority = counts.minority;
    diag.n_majority = counts.majority;
    diag.seed = params.seed;

    const GramMatrix base_gram = gram(spec, train.features);
    const Vector c = Vector::Constant(static_cast<Eigen::Index>(train.size()), params.c);
    model.base = train_smo(base_gram.values, train.labels, c,
                           SmoOptions{params.tol, params.max_passes, derive_seed(params.seed, 1)}, base_gram.fingerprint);
    diag.base_converged = model.base.converged;

    const std::size_t s = params.s.value_or(counts.majority > counts.minority ? counts.majority - counts.minority : 0);
    diag.s = s;
    if (s == 0) {
        model.augmented = augment_gram(base_gram, train.labels, SynthesisPlan{});
        model.final_model = model.base;
        diag.final_converged = model.base.converged;
        return model;
    }

    const SvTaxonomy taxonomy = classify_minority_svs(model.base, base_gram.values, train.labels);
    diag.safe = taxonomy.count(SvClass::Safe);
    diag.on_margin = taxonomy.count(SvClass::OnMargin);
    diag.in_margin = taxonomy.count(SvClass::InMargin);
    diag.misclassified = taxonomy.count(SvClass::Misclassified);

    PlanBuild built = build_plan_with_gram(base_gram.values, train.labels, taxonomy, params.k, s, derive_seed(params.seed, 2));
    diag.noise = built.case_count(NeighborKind::Noise);
    diag.conservative = built.case_count(NeighborKind::Conservative);
    diag.aggressive = built.case_count(NeighborKind::Aggressive);
    diag.planned_conservative = built.plan.count(SynthesisCase::Conservative);
    diag.planned_aggressive = built.plan.count(SynthesisCase::Aggressive);
    model.plan = std::move(built.plan);

    model.augmented = augment_gram(base_gram, train.labels, model.plan);
    const Vector c_aug = Vector::Constant(static_cast<Eigen::Index>(model.augmented.size()), params.c);
    model.final_model = train_smo(model.augmented.values, model.augmented.labels, c_aug,
                                  SmoOptions{params.tol, params.max_passes, derive_seed(params.seed, 3)},
                                  base_gram.fingerprint + "+" + std::to_string(s));
    diag.final_converged = model.final_model.converged;
    return model;
}

inline Vector decision_mm(const MMModel& model, const Matrix& x) {
    return decision_values(model.final_model, augmented_rows(model.spec, x, model.train_features, model.plan));
}

inline Labels predict_mm(const MMModel& model, const Matrix& x) {
    const Vector f = decision_mm(model, x);
    Labels out(static_cast<std::size_t>(f.size()));
    for (Eigen::Index r = 0; r < f.size(); ++r) out[static_cast<std::size_t>(r)] = sign_label(f(r));
    return out;
}

/// Plain `key value` report of the pipeline's bookkeeping.
inline std::string diagnostics_report(const MMDiagnostics& d) {
    std::ostringstream out;
    out << "n_train " << d.n_train << '\n'
        << "n_minority " << d.n_minority << '\n'
        << "n_majority " << d.n_majority << '\n'
        << "taxonomy.safe " << d.safe << '\n'
        << "taxonomy.on_margin " << d.on_margin << '\n'
        << "taxonomy.in_margin " << d.in_margin << '\n'
        << "taxonomy.misclassified " << d.misclassified << '\n'
        << "cases.noise " << d.noise << '\n'
        << "cases.conservative " << d.conservative << '\n'
        << "cases.aggressive " << d.aggressive << '\n'
        << "s " << d.s << '\n'
        << "plan.conservative " << d.planned_conservative << '\n'
        << "plan.aggressive " << d.planned_aggressive << '\n'
        << "base_converged " << (d.base_converged ? 1 : 0) << '\n'
        << "final_converged " << (d.final_converged ? 1 : 0) << '\n'
        << "seed " << d.seed << '\n';
    return out.str();
}

}  // namespace mmsmote
