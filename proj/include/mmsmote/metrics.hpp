#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "mmsmote/dataset.hpp"

namespace mmsmote {

/// Binary confusion counts with +1 (minority) as the positive class.
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const noexcept { return tp + fp + tn + fn; }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct MetricsReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double gmean = 0.0;
};

inline ConfusionMatrix confusion(const Labels& y_true, const Labels& y_pred) {
    if (y_true.size() != y_pred.size()) throw std::invalid_argument("confusion: label vectors differ in length");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true[i];
        const int p = y_pred[i];
        if ((t != kMinority && t != kMajority) || (p != kMinority && p != kMajority)) {
            throw std::invalid_argument("confusion: labels must be +1 or -1");
        }
        if (t == kMinority) (p == kMinority ? cm.tp : cm.fn) += 1;
        else (p == kMinority ? cm.fp : cm.tn) += 1;
    }
    return cm;
}

namespace detail {
inline double ratio_or_zero(double num, double den) { return den > 0.0 ? num / den : 0.0; }
}  // namespace detail

/// F1 and G-mean from precision and recall. G-mean here is sqrt(P * R). 0/0 gives 0.
inline MetricsReport scores_from(double precision, double recall) {
    MetricsReport r;
    r.precision = precision;
    r.recall = recall;
    r.f1 = detail::ratio_or_zero(2.0 * precision * recall, precision + recall);
    r.gmean = std::sqrt(precision * recall);
    return r;
}

inline MetricsReport scores(const ConfusionMatrix& cm) {
    const auto tp = static_cast<double>(cm.tp);
    return scores_from(detail::ratio_or_zero(tp, tp + static_cast<double>(cm.fp)),
                       detail::ratio_or_zero(tp, tp + static_cast<double>(cm.fn)));
}

}  // namespace mmsmote
