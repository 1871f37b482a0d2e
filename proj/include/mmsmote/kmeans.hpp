#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <random>
#include <vector>

#include "mmsmote/dataset.hpp"
#include "mmsmote/rng.hpp"

namespace mmsmote {

struct KMeansOptions {
    std::size_t n_clusters = 8;
    std::size_t max_iterations = 100;
    double shift_tolerance = 1e-6;
};

struct KMeansResult {
    Matrix centroids;                     // n_clusters x d
    std::vector<std::size_t> assignment;  // cluster of each row
    std::size_t iterations = 0;
    bool converged = false;

    std::vector<std::size_t> cluster_sizes() const {
        std::vector<std::size_t> sizes(static_cast<std::size_t>(centroids.rows()), 0);
        for (auto a : assignment) ++sizes[a];
        return sizes;
    }
};

namespace detail {

inline std::size_t nearest_centroid(const Matrix& centroids, const auto& point, double* best_out = nullptr) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
        const double d = (centroids.row(c) - point).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<std::size_t>(c);
        }
    }
    if (best_out) *best_out = best_d;
    return best;
}

// k-means++ seeding: first centre uniform, then D^2 weighting.
inline Matrix kmeanspp_seed(const Matrix& points, std::size_t k, Rng& rng) {
    const auto n = static_cast<std::size_t>(points.rows());
    Matrix centroids(static_cast<Eigen::Index>(k), points.cols());
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    centroids.row(0) = points.row(static_cast<Eigen::Index>(pick(rng)));

    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    for (std::size_t c = 1; c < k; ++c) {
        const auto prev = centroids.row(static_cast<Eigen::Index>(c - 1));
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], (points.row(static_cast<Eigen::Index>(i)) - prev).squaredNorm());
            total += d2[i];
        }
        std::size_t chosen = 0;
        if (total > 0.0) {
            std::discrete_distribution<std::size_t> weighted(d2.begin(), d2.end());
            chosen = weighted(rng);
        } else {
            chosen = pick(rng);  // all points coincide with existing centres
        }
        centroids.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(chosen));
    }
    return centroids;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding. Deterministic given `seed`.
inline KMeansResult kmeans(const Matrix& points, const KMeansOptions& options, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(points.rows());
    if (options.n_clusters == 0) throw DataError("k-means needs at least one cluster");
    if (options.n_clusters > n) {
        throw DataError("k-means: n_clusters (" + std::to_string(options.n_clusters) + ") exceeds point count (" +
                        std::to_string(n) + ")");
    }
    Rng rng(seed);
    KMeansResult result;
    result.centroids = detail::kmeanspp_seed(points, options.n_clusters, rng);
    result.assignment.assign(n, 0);

    const auto k = static_cast<Eigen::Index>(options.n_clusters);
    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            result.assignment[i] = detail::nearest_centroid(result.centroids, points.row(static_cast<Eigen::Index>(i)));
        }
        Matrix updated = Matrix::Zero(k, points.cols());
        std::vector<std::size_t> sizes(options.n_clusters, 0);
        for (std::size_t i = 0; i < n; ++i) {
            updated.row(static_cast<Eigen::Index>(result.assignment[i])) += points.row(static_cast<Eigen::Index>(i));
            ++sizes[result.assignment[i]];
        }
        double max_shift = 0.0;
        for (Eigen::Index c = 0; c < k; ++c) {
            if (sizes[static_cast<std::size_t>(c)] == 0) {
                updated.row(c) = result.centroids.row(c);  // empty cluster keeps its centre
                continue;
            }
            updated.row(c) /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);
            max_shift = std::max(max_shift, (updated.row(c) - result.centroids.row(c)).norm());
        }
        result.centroids = std::move(updated);
        result.iterations = iter + 1;
        if (max_shift < options.shift_tolerance) {
            result.converged = true;
            break;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        result.assignment[i] = detail::nearest_centroid(result.centroids, points.row(static_cast<Eigen::Index>(i)));
    }
    return result;
}

}  // namespace mmsmote
