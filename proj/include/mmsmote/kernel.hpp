#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <fstream>
#include <string>
#include <vector>

#include "mmsmote/dataset.hpp"
#include "mmsmote/error.hpp"
#include "mmsmote/format.hpp"
#include "mmsmote/rng.hpp"

namespace mmsmote {

enum class KernelFamily { Linear, Polynomial, Rbf };

/**
 * A kernel family and its hyperparameters. This is the only place the
 * implicit feature map lives: everything downstream sees inner products.
 *
 *   linear      <x, y>
 *   polynomial  (<x, y> + coef0)^degree
 *   rbf         exp(-gamma * |x - y|^2)
 */
struct KernelSpec {
    KernelFamily family = KernelFamily::Rbf;
    double gamma = 1.0;
    int degree = 2;
    double coef0 = 1.0;

    static KernelSpec linear() { return {KernelFamily::Linear, 0.0, 1, 0.0}; }
    static KernelSpec polynomial(int degree, double coef0) {
        KernelSpec s{KernelFamily::Polynomial, 0.0, degree, coef0};
        s.validate();
        return s;
    }
    static KernelSpec rbf(double gamma) {
        KernelSpec s{KernelFamily::Rbf, gamma, 1, 0.0};
        s.validate();
        return s;
    }

    void validate() const {
        if (family == KernelFamily::Rbf && !(gamma > 0.0 && std::isfinite(gamma))) {
            throw std::invalid_argument("rbf gamma must be a positive finite number");
        }
        if (family == KernelFamily::Polynomial && degree < 1) {
            throw std::invalid_argument("polynomial degree must be >= 1");
        }
        if (family == KernelFamily::Polynomial && !std::isfinite(coef0)) {
            throw std::invalid_argument("polynomial coef0 must be finite");
        }
    }

    /// Stable textual identity; round-trips the hyperparameters exactly.
    std::string fingerprint() const {
        switch (family) {
            case KernelFamily::Linear: return "linear";
            case KernelFamily::Polynomial:
                return "polynomial(degree=" + std::to_string(degree) + ",coef0=" + format_double(coef0) + ")";
            case KernelFamily::Rbf: return "rbf(gamma=" + format_double(gamma) + ")";
        }
        return "unknown";
    }

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// gamma = 1 / (d * mean per-column variance); falls back to 1/d on constant data.
inline KernelSpec default_rbf(const Matrix& x) {
    const auto d = static_cast<double>(x.cols());
    double mean_var = 0.0;
    if (x.rows() > 0) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            mean_var += (x.col(j).array() - x.col(j).mean()).square().mean();
        }
        mean_var /= d;
    }
    return KernelSpec::rbf(mean_var > 0.0 ? 1.0 / (d * mean_var) : 1.0 / d);
}

template <typename A, typename B>
double eval_kernel(const KernelSpec& spec, const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("kernel dimension mismatch: " + std::to_string(x.size()) + " vs " +
                                    std::to_string(y.size()));
    }
    switch (spec.family) {
        case KernelFamily::Linear: return x.cwiseProduct(y.derived()).sum();
        case KernelFamily::Polynomial: {
            const double base = x.cwiseProduct(y.derived()).sum() + spec.coef0;
            double out = 1.0;
            for (int p = 0; p < spec.degree; ++p) out *= base;
            return out;
        }
        case KernelFamily::Rbf: return std::exp(-spec.gamma * (x - y.derived()).squaredNorm());
    }
    return 0.0;
}

/// Squared feature-space distance, clamped at zero.
template <typename A, typename B>
double kernel_distance2(const KernelSpec& spec, const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) {
    const double d2 = eval_kernel(spec, x, x) - 2.0 * eval_kernel(spec, x, y) + eval_kernel(spec, y, y);
    return std::max(0.0, d2);
}

struct GramMatrix {
    Matrix values;
    std::string fingerprint;

    Eigen::Index size() const noexcept { return values.rows(); }
};

inline std::string gram_fingerprint(const KernelSpec& spec, const Matrix& x) {
    return spec.fingerprint() + "/" + std::to_string(x.rows()) + "x" + std::to_string(x.cols());
}

/// Upper triangle computed, lower mirrored.
inline GramMatrix gram(const KernelSpec& spec, const Matrix& x) {
    if (x.rows() == 0) throw std::invalid_argument("gram: empty input");
    const Eigen::Index n = x.rows();
    GramMatrix g{Matrix(n, n), gram_fingerprint(spec, x)};
    for (Eigen::Index p = 0; p < n; ++p) {
        for (Eigen::Index q = p; q < n; ++q) {
            const double v = eval_kernel(spec, x.row(p), x.row(q));
            g.values(p, q) = v;
            g.values(q, p) = v;
        }
    }
    return g;
}

/// Rectangular kernel block: entry (a, b) = k(x_a, y_b).
inline Matrix cross_gram(const KernelSpec& spec, const Matrix& x, const Matrix& y) {
    if (x.cols() != y.cols()) throw std::invalid_argument("cross_gram: dimension mismatch");
    Matrix out(x.rows(), y.rows());
    for (Eigen::Index a = 0; a < x.rows(); ++a) {
        for (Eigen::Index b = 0; b < y.rows(); ++b) out(a, b) = eval_kernel(spec, x.row(a), y.row(b));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Virtual synthetic samples
// ---------------------------------------------------------------------------

enum class SynthesisCase { Conservative, Aggressive };

inline const char* to_string(SynthesisCase c) {
    return c == SynthesisCase::Conservative ? "conservative" : "aggressive";
}

/// Virtual sample phi(x_base) + delta * (phi(x_partner) - phi(x_base)).
struct PlanEntry {
    std::size_t base = 0;     // training row of the selected minority sample
    std::size_t partner = 0;  // training row of its minority neighbour
    double delta = 0.0;
    SynthesisCase kind = SynthesisCase::Conservative;

    friend bool operator==(const PlanEntry&, const PlanEntry&) = default;
};

inline bool delta_in_case_interval(const PlanEntry& e) {
    return e.kind == SynthesisCase::Conservative ? (e.delta > 0.0 && e.delta < 1.0) : (e.delta > -1.0 && e.delta < 0.0);
}

/// Ordered synthesis plan; all Conservative entries precede all Aggressive ones.
struct SynthesisPlan {
    std::vector<PlanEntry> entries;

    std::size_t size() const noexcept { return entries.size(); }
    bool empty() const noexcept { return entries.empty(); }

    std::size_t count(SynthesisCase c) const {
        return static_cast<std::size_t>(
            std::count_if(entries.begin(), entries.end(), [c](const PlanEntry& e) { return e.kind == c; }));
    }

    /// Stable partition into Conservative-then-Aggressive order.
    void canonicalize() {
        std::stable_partition(entries.begin(), entries.end(),
                              [](const PlanEntry& e) { return e.kind == SynthesisCase::Conservative; });
    }

    friend bool operator==(const SynthesisPlan&, const SynthesisPlan&) = default;
};

namespace detail {

inline void check_plan_indices(const SynthesisPlan& plan, Eigen::Index n) {
    for (const auto& e : plan.entries) {
        if (e.base >= static_cast<std::size_t>(n) || e.partner >= static_cast<std::size_t>(n)) {
            throw std::out_of_range("synthesis plan index out of range (" + std::to_string(e.base) + ", " +
                                    std::to_string(e.partner) + ") for " + std::to_string(n) + " training rows");
        }
    }
}

}  // namespace detail

/**
 * Gram matrix over the original rows followed by the virtual rows of a plan:
 *
 *     [ K1   K2 ]      K1 = original Gram (copied bit-for-bit)
 *     [ K2'  K3 ]      K2 = original x synthetic, K3 = synthetic x synthetic
 */
struct AugmentedKernel {
    Matrix values;
    Labels labels;  // original labels followed by +1 per synthetic
    SynthesisPlan plan;
    std::size_t n_original = 0;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t n_synthetic() const noexcept { return plan.size(); }
};

/**
 * Builds the augmented kernel without materializing synthetic coordinates.
 * Original-vs-synthetic entries expand to (1 - d) k(x_p, x_i) + d k(x_p, x_j);
 * synthetic-vs-synthetic entries use the four-term bilinear expansion, so the
 * K3 block is symmetric by construction.
 */
inline AugmentedKernel augment_gram(const GramMatrix& base, const Labels& labels, const SynthesisPlan& plan) {
    const Eigen::Index n = base.values.rows();
    if (base.values.cols() != n || static_cast<Eigen::Index>(labels.size()) != n) {
        throw std::invalid_argument("augment_gram: base Gram and labels disagree in size");
    }
    detail::check_plan_indices(plan, n);
    for (std::size_t q = 0; q < plan.size(); ++q) {
        const auto& e = plan.entries[q];
        if (!delta_in_case_interval(e)) {
            throw std::invalid_argument("plan entry " + std::to_string(q) + ": delta " + format_double(e.delta) +
                                        " outside the " + to_string(e.kind) + " interval");
        }
        if (e.base == e.partner) {
            throw std::invalid_argument("plan entry " + std::to_string(q) + " pairs a sample with itself");
        }
        if (labels[e.base] != kMinority || labels[e.partner] != kMinority) {
            throw std::invalid_argument("plan entry " + std::to_string(q) + " references a non-minority row");
        }
        if (q > 0 && plan.entries[q - 1].kind == SynthesisCase::Aggressive && e.kind == SynthesisCase::Conservative) {
            throw std::invalid_argument("synthesis plan must list conservative entries before aggressive ones");
        }
    }

    const auto s = static_cast<Eigen::Index>(plan.size());
    const Matrix& k1 = base.values;
    AugmentedKernel out;
    out.values.resize(n + s, n + s);
    out.values.topLeftCorner(n, n) = k1;
    out.labels = labels;
    out.labels.insert(out.labels.end(), plan.size(), kMinority);
    out.plan = plan;
    out.n_original = static_cast<std::size_t>(n);

    for (Eigen::Index q = 0; q < s; ++q) {
        const auto& e = plan.entries[static_cast<std::size_t>(q)];
        const auto i = static_cast<Eigen::Index>(e.base);
        const auto j = static_cast<Eigen::Index>(e.partner);
        const Vector column = (1.0 - e.delta) * k1.col(i) + e.delta * k1.col(j);
        out.values.block(0, n + q, n, 1) = column;
        out.values.block(n + q, 0, 1, n) = column.transpose();
    }
    for (Eigen::Index l = 0; l < s; ++l) {
        const auto& a = plan.entries[static_cast<std::size_t>(l)];
        const auto ia = static_cast<Eigen::Index>(a.base);
        const auto ja = static_cast<Eigen::Index>(a.partner);
        for (Eigen::Index q = l; q < s; ++q) {
            const auto& b = plan.entries[static_cast<std::size_t>(q)];
            const auto ib = static_cast<Eigen::Index>(b.base);
            const auto jb = static_cast<Eigen::Index>(b.partner);
            const double v = (1.0 - a.delta) * (1.0 - b.delta) * k1(ia, ib) + (1.0 - b.delta) * a.delta * k1(ja, ib) +
                             b.delta * (1.0 - a.delta) * k1(ia, jb) + a.delta * b.delta * k1(ja, jb);
            out.values(n + l, n + q) = v;
            out.values(n + q, n + l) = v;
        }
    }
    return out;
}

/// Convenience overload that recomputes nothing but checks the base Gram belongs to `spec` and `x_train`.
inline AugmentedKernel augment_gram(const GramMatrix& base, const KernelSpec& spec, const Matrix& x_train,
                                    const Labels& labels, const SynthesisPlan& plan) {
    if (base.fingerprint != gram_fingerprint(spec, x_train)) {
        throw std::invalid_argument("augment_gram: base Gram was not built from this kernel and training matrix");
    }
    return augment_gram(base, labels, plan);
}

/**
 * Kernel row of a query point against the augmented training set: the first
 * n entries are k(x, x_p), the remaining s entries expand each plan entry.
 * Only plan indices are checked here; any delta is accepted.
 */
template <typename A>
Vector augmented_row(const KernelSpec& spec, const Eigen::MatrixBase<A>& x, const Matrix& x_train,
                     const SynthesisPlan& plan) {
    if (x.size() != x_train.cols()) throw std::invalid_argument("augmented_row: dimension mismatch");
    detail::check_plan_indices(plan, x_train.rows());
    const Eigen::Index n = x_train.rows();
    Vector row(n + static_cast<Eigen::Index>(plan.size()));
    for (Eigen::Index p = 0; p < n; ++p) row(p) = eval_kernel(spec, x, x_train.row(p));
    for (std::size_t q = 0; q < plan.size(); ++q) {
        const auto& e = plan.entries[q];
        row(n + static_cast<Eigen::Index>(q)) = (1.0 - e.delta) * row(static_cast<Eigen::Index>(e.base)) +
                                                e.delta * row(static_cast<Eigen::Index>(e.partner));
    }
    return row;
}

/// Rows of augmented_row for every row of `queries`.
inline Matrix augmented_rows(const KernelSpec& spec, const Matrix& queries, const Matrix& x_train,
                             const SynthesisPlan& plan) {
    Matrix out(queries.rows(), x_train.rows() + static_cast<Eigen::Index>(plan.size()));
    for (Eigen::Index r = 0; r < queries.rows(); ++r) {
        out.row(r) = augmented_row(spec, queries.row(r), x_train, plan).transpose();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Debug dump: two little-endian uint64 dimensions, then row-major float64.
// ---------------------------------------------------------------------------

namespace detail {

inline void write_le_u64(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int b = 0; b < 8; ++b) buf[b] = static_cast<unsigned char>(v >> (8 * b));
    out.write(reinterpret_cast<const char*>(buf), 8);
}

inline std::uint64_t read_le_u64(std::istream& in) {
    unsigned char buf[8];
    if (!in.read(reinterpret_cast<char*>(buf), 8)) throw DataError("truncated matrix dump");
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
    return v;
}

}  // namespace detail

inline void dump_matrix(const std::string& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write matrix dump: " + path);
    detail::write_le_u64(out, static_cast<std::uint64_t>(m.rows()));
    detail::write_le_u64(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) detail::write_le_u64(out, bits_of(m(r, c)));
    }
}

inline Matrix load_matrix_dump(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read matrix dump: " + path);
    const auto rows = static_cast<Eigen::Index>(detail::read_le_u64(in));
    const auto cols = static_cast<Eigen::Index>(detail::read_le_u64(in));
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            const std::uint64_t bits = detail::read_le_u64(in);
            double v = 0.0;
            std::memcpy(&v, &bits, sizeof(v));
            m(r, c) = v;
        }
    }
    return m;
}

}  // namespace mmsmote
