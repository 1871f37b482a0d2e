#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mmsmote/error.hpp"

namespace mmsmote {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Labels = std::vector<int>;

inline constexpr int kMinority = +1;
inline constexpr int kMajority = -1;

/// Provenance id carried by rows that were generated rather than loaded.
inline constexpr std::size_t kSyntheticId = std::numeric_limits<std::size_t>::max();

struct ClassCounts {
    std::size_t minority = 0;
    std::size_t majority = 0;

    friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

/**
 * Labeled feature matrix. Labels are +1 (minority) or -1 (majority); `ids`
 * carries the original row index of every sample for provenance.
 */
struct Dataset {
    Matrix features;
    Labels labels;
    std::vector<std::size_t> ids;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(features.cols()); }

    ClassCounts counts() const noexcept {
        ClassCounts c;
        for (int y : labels) {
            (y == kMinority ? c.minority : c.majority) += 1;
        }
        return c;
    }

    std::vector<std::size_t> indices_of(int label) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == label) out.push_back(i);
        }
        return out;
    }

    /// Rows selected by `rows`, in the given order.
    Dataset subset(std::span<const std::size_t> rows) const {
        Dataset out;
        out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
        out.labels.reserve(rows.size());
        out.ids.reserve(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            out.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(rows[r]));
            out.labels.push_back(labels[rows[r]]);
            out.ids.push_back(ids[rows[r]]);
        }
        return out;
    }

    /// Checks shape consistency, label domain and finiteness. Throws DataError.
    void validate() const {
        if (static_cast<std::size_t>(features.rows()) != labels.size() || labels.size() != ids.size()) {
            throw DataError("dataset shape mismatch: features/labels/ids disagree in length");
        }
        for (int y : labels) {
            if (y != kMinority && y != kMajority) throw DataError("labels must be +1 or -1");
        }
        if (!features.allFinite()) throw DataError("features contain non-finite values");
    }

    void require_both_classes() const {
        const auto c = counts();
        if (c.minority == 0 || c.majority == 0) {
            throw DataError("dataset must contain both classes (minority=" + std::to_string(c.minority) +
                            ", majority=" + std::to_string(c.majority) + ")");
        }
    }
};

/// Builds a dataset with ids 0..n-1.
inline Dataset make_dataset(Matrix features, Labels labels) {
    Dataset ds{std::move(features), std::move(labels), {}};
    ds.ids.resize(ds.labels.size());
    for (std::size_t i = 0; i < ds.ids.size(); ++i) ds.ids[i] = i;
    ds.validate();
    return ds;
}

/// Concatenates rows of `a` then `b`.
inline Dataset concat(const Dataset& a, const Dataset& b) {
    if (a.size() > 0 && b.size() > 0 && a.dim() != b.dim()) {
        throw DataError("cannot concatenate datasets of different dimension");
    }
    Dataset out;
    const Eigen::Index cols = a.size() > 0 ? a.features.cols() : b.features.cols();
    out.features.resize(a.features.rows() + b.features.rows(), cols);
    if (a.size() > 0) out.features.topRows(a.features.rows()) = a.features;
    if (b.size() > 0) out.features.bottomRows(b.features.rows()) = b.features;
    out.labels = a.labels;
    out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
    out.ids = a.ids;
    out.ids.insert(out.ids.end(), b.ids.begin(), b.ids.end());
    return out;
}

}  // namespace mmsmote
