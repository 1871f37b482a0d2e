#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "mmsmote/dataset.hpp"
#include "mmsmote/kmeans.hpp"
#include "mmsmote/rng.hpp"

namespace mmsmote {

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

namespace detail {

inline std::string_view trim_cell(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        s.remove_prefix(1);
        s.remove_suffix(1);
    }
    return s;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(trim_cell(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

inline bool parse_double(std::string_view s, double& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

inline bool label_matches(std::string_view cell, std::string_view positive) {
    if (cell == positive) return true;
    double a = 0.0;
    double b = 0.0;
    return parse_double(cell, a) && parse_double(positive, b) && a == b;
}

}  // namespace detail

/**
 * Reads a plain numeric CSV with a header row. Every column except
 * `label_column` becomes a feature (order preserved). Rows whose label equals
 * `positive_value` (string or numeric equality) are labeled +1, all others -1.
 * Throws DataError on a missing file or column, an unparseable cell, or a
 * file containing only one class.
 */
inline Dataset load_csv(const std::string& path, const std::string& label_column, const std::string& positive_value) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open CSV file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError("CSV file is empty: " + path);
    std::vector<std::string> header;
    for (auto cell : detail::split_csv_line(line)) header.emplace_back(cell);
    const auto label_it = std::find(header.begin(), header.end(), label_column);
    if (label_it == header.end()) throw DataError("label column '" + label_column + "' not found in " + path);
    const auto label_col = static_cast<std::size_t>(label_it - header.begin());
    const std::size_t n_cols = header.size();
    const std::size_t d = n_cols - 1;

    std::vector<double> values;
    Labels labels;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim_cell(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != n_cols) {
            throw DataError("row " + std::to_string(row) + ": expected " + std::to_string(n_cols) + " cells, found " +
                            std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < n_cols; ++c) {
            if (c == label_col) {
                labels.push_back(detail::label_matches(cells[c], positive_value) ? kMinority : kMajority);
                continue;
            }
            double v = 0.0;
            if (!detail::parse_double(cells[c], v)) {
                throw DataError("row " + std::to_string(row) + ", column '" + header[c] +
                                "': cannot parse '" + std::string(cells[c]) + "' as a finite number");
            }
            values.push_back(v);
        }
    }

    const auto n = static_cast<Eigen::Index>(labels.size());
    Matrix features(n, static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(d); ++j) {
            features(i, j) = values[static_cast<std::size_t>(i) * d + static_cast<std::size_t>(j)];
        }
    }
    Dataset ds = make_dataset(std::move(features), std::move(labels));
    const auto c = ds.counts();
    if (c.minority == 0 || c.majority == 0) {
        throw DataError("CSV file " + path + " contains a single class (positive=" + std::to_string(c.minority) +
                        ", negative=" + std::to_string(c.majority) + ")");
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Splitting and scaling
// ---------------------------------------------------------------------------

struct Split {
    Dataset train;
    Dataset test;
};

/// Per-class test counts are round(class_count * test_fraction); rows keep their relative order.
inline Split stratified_split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw DataError("test_fraction must lie in (0, 1)");
    Rng rng(seed);
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    for (int label : {kMinority, kMajority}) {
        auto rows = ds.indices_of(label);
        const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(rows.size()) * test_fraction));
        if (n_test == 0 || n_test >= rows.size()) {
            throw DataError("class " + std::to_string(label) + " with " + std::to_string(rows.size()) +
                            " samples cannot be split at test fraction " + std::to_string(test_fraction));
        }
        std::shuffle(rows.begin(), rows.end(), rng);
        test_rows.insert(test_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
        train_rows.insert(train_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
    return {ds.subset(train_rows), ds.subset(test_rows)};
}

/// Per-column standardization with population (1/n) standard deviation.
class StandardScaler {
public:
    StandardScaler() = default;

    static StandardScaler fit(const Matrix& x) {
        if (x.rows() == 0) throw DataError("cannot fit a scaler on an empty matrix");
        StandardScaler s;
        s.mean_ = x.colwise().mean().transpose();
        s.scale_.resize(x.cols());
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double var = (x.col(j).array() - s.mean_(j)).square().mean();
            s.scale_(j) = std::sqrt(var);
        }
        return s;
    }

    Matrix transform(const Matrix& x) const {
        check_width(x);
        Matrix out(x.rows(), x.cols());
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            if (scale_(j) > 0.0) {
                out.col(j) = (x.col(j).array() - mean_(j)) / scale_(j);
            } else {
                out.col(j).setZero();
            }
        }
        return out;
    }

    /// Zero-variance columns come back as the training mean.
    Matrix inverse_transform(const Matrix& z) const {
        check_width(z);
        Matrix out(z.rows(), z.cols());
        for (Eigen::Index j = 0; j < z.cols(); ++j) {
            out.col(j) = z.col(j).array() * scale_(j) + mean_(j);
        }
        return out;
    }

    const Vector& mean() const noexcept { return mean_; }
    const Vector& scale() const noexcept { return scale_; }

private:
    void check_width(const Matrix& x) const {
        if (x.cols() != mean_.size()) throw DataError("scaler column count mismatch");
    }

    Vector mean_;
    Vector scale_;
};

struct Standardized {
    Dataset train;
    std::vector<Dataset> others;
    StandardScaler scaler;
};

/// Fits on `train` only and applies the same transform to every dataset in `others`.
inline Standardized standardize(const Dataset& train, const std::vector<Dataset>& others) {
    if (train.size() == 0) throw DataError("cannot standardize an empty training set");
    Standardized out{train, others, StandardScaler::fit(train.features)};
    out.train.features = out.scaler.transform(train.features);
    for (auto& o : out.others) o.features = out.scaler.transform(o.features);
    return out;
}

// ---------------------------------------------------------------------------
// Imbalance-ratio construction
// ---------------------------------------------------------------------------

struct RatioSpec {
    double majority_per_minority = 1.0;
    std::size_t n_clusters = 8;
    std::uint64_t seed = 0;
};

/**
 * Splits `target` across groups proportionally to `sizes` using the
 * largest-remainder method. Ties on the remainder go to the lower index.
 * Zero-size groups receive zero.
 */
inline std::vector<std::size_t> largest_remainder_quotas(std::span<const std::size_t> sizes, std::size_t target) {
    const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    if (target > total) throw DataError("quota target exceeds total group size");
    std::vector<std::size_t> quotas(sizes.size(), 0);
    if (total == 0) return quotas;

    std::vector<std::pair<std::uint64_t, std::size_t>> remainders;  // (numerator remainder, index)
    std::size_t assigned = 0;
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        // Integer arithmetic keeps the allocation exact.
        const auto num = static_cast<unsigned __int128>(target) * sizes[g];
        quotas[g] = static_cast<std::size_t>(num / total);
        remainders.emplace_back(static_cast<std::uint64_t>(num % total), g);
        assigned += quotas[g];
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < target; ++r) {
        ++quotas[remainders[r].second];
        ++assigned;
    }
    return quotas;
}

/**
 * Keeps every minority row and reduces the majority to
 * round(minority * majority_per_minority) rows: k-means over majority
 * features, proportional per-cluster quotas, then uniform sampling without
 * replacement inside each cluster. Output rows keep their input order.
 */
inline Dataset make_ratio_dataset(const Dataset& ds, const RatioSpec& spec) {
    if (!(spec.majority_per_minority >= 1.0)) throw DataError("majority_per_minority must be >= 1");
    if (spec.n_clusters == 0) throw DataError("n_clusters must be >= 1");
    const auto minority = ds.indices_of(kMinority);
    const auto majority = ds.indices_of(kMajority);
    const auto target =
        static_cast<std::size_t>(std::llround(static_cast<double>(minority.size()) * spec.majority_per_minority));
    if (target > majority.size()) {
        throw DataError("ratio " + std::to_string(spec.majority_per_minority) + ":1 needs " + std::to_string(target) +
                        " majority samples but only " + std::to_string(majority.size()) + " are available");
    }
    if (spec.n_clusters > majority.size()) {
        throw DataError("n_clusters (" + std::to_string(spec.n_clusters) + ") exceeds majority count (" +
                        std::to_string(majority.size()) + ")");
    }

    const Matrix maj_features = ds.subset(majority).features;
    const auto clustering =
        kmeans(maj_features, KMeansOptions{.n_clusters = spec.n_clusters}, derive_seed(spec.seed, 1));
    const auto sizes = clustering.cluster_sizes();  // empty clusters get a zero quota
    const auto quotas = largest_remainder_quotas(sizes, target);

    std::vector<std::vector<std::size_t>> members(sizes.size());
    for (std::size_t r = 0; r < majority.size(); ++r) members[clustering.assignment[r]].push_back(majority[r]);

    Rng rng(derive_seed(spec.seed, 2));
    std::vector<std::size_t> keep(minority.begin(), minority.end());
    for (std::size_t c = 0; c < members.size(); ++c) {
        auto& m = members[c];
        std::shuffle(m.begin(), m.end(), rng);
        keep.insert(keep.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(quotas[c]));
    }
    std::sort(keep.begin(), keep.end());
    return ds.subset(keep);
}

// ---------------------------------------------------------------------------
// Synthetic fixture
// ---------------------------------------------------------------------------

/// Majority ~ N(0, I), minority ~ N(separation * 1, I); majority rows first.
inline Dataset gen_gaussian_blobs(std::size_t n_majority, std::size_t n_minority, double separation, std::size_t dim,
                                  std::uint64_t seed) {
    if (n_majority == 0 || n_minority == 0) throw DataError("blob counts must be positive");
    if (dim == 0) throw DataError("blob dimension must be >= 1");
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t n = n_majority + n_minority;
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    Labels y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool minority = i >= n_majority;
        y[i] = minority ? kMinority : kMajority;
        for (std::size_t j = 0; j < dim; ++j) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = normal(rng) + (minority ? separation : 0.0);
        }
    }
    return make_dataset(std::move(x), std::move(y));
}

}  // namespace mmsmote
