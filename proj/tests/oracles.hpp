#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the solver or the kernel-augmentation code paths it checks.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "mmsmote/dataset.hpp"
#include "mmsmote/kernel.hpp"
#include "mmsmote/svm.hpp"

namespace oracle {

using mmsmote::Labels;
using mmsmote::Matrix;
using mmsmote::Vector;

struct QpSolution {
    double objective = -std::numeric_limits<double>::infinity();
    Vector alpha;
};

/**
 * Maximizes sum(a) - 1/2 a'Qa, Q_ij = y_i y_j K_ij, over 0 <= a_i <= C_i and
 * y'a = 0 by enumerating every (lower, upper, free) status assignment and
 * solving the equality-constrained stationarity system on the free block.
 * Exact for positive-definite K; exponential in n, so n <= 9 or so.
 */
inline QpSolution brute_force_dual(const Matrix& k, const Labels& y, const Vector& c) {
    const int n = static_cast<int>(y.size());
    Vector yv(n);
    for (int i = 0; i < n; ++i) yv(i) = y[static_cast<std::size_t>(i)];
    Matrix q(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) q(i, j) = yv(i) * yv(j) * k(i, j);

    QpSolution best;
    std::vector<int> status(static_cast<std::size_t>(n), 0);  // 0 lower, 1 upper, 2 free
    long total = 1;
    for (int i = 0; i < n; ++i) total *= 3;
    for (long code = 0; code < total; ++code) {
        long rest = code;
        std::vector<int> free_idx;
        Vector a = Vector::Zero(n);
        for (int i = 0; i < n; ++i) {
            status[static_cast<std::size_t>(i)] = static_cast<int>(rest % 3);
            rest /= 3;
            if (status[static_cast<std::size_t>(i)] == 1) a(i) = c(i);
            if (status[static_cast<std::size_t>(i)] == 2) free_idx.push_back(i);
        }
        const int f = static_cast<int>(free_idx.size());
        if (f == 0) {
            if (std::abs(yv.dot(a)) > 1e-12) continue;
        } else {
            // [Q_FF y_F; y_F' 0] [a_F; nu] = [1 - Q_FB a_B; -y_B' a_B]
            Matrix sys = Matrix::Zero(f + 1, f + 1);
            Vector rhs(f + 1);
            const Vector qa = q * a;  // only bound entries are non-zero so far
            double yb = yv.dot(a);
            for (int r = 0; r < f; ++r) {
                for (int s = 0; s < f; ++s) sys(r, s) = q(free_idx[r], free_idx[s]);
                sys(r, f) = yv(free_idx[r]);
                sys(f, r) = yv(free_idx[r]);
                rhs(r) = 1.0 - qa(free_idx[r]);
            }
            rhs(f) = -yb;
            const Vector sol = sys.colPivHouseholderQr().solve(rhs);
            if ((sys * sol - rhs).norm() > 1e-9 * (1.0 + rhs.norm())) continue;
            bool feasible = true;
            for (int r = 0; r < f; ++r) {
                const double v = sol(r);
                const double ci = c(free_idx[r]);
                if (v < -1e-12 || v > ci + 1e-12) {
                    feasible = false;
                    break;
                }
                a(free_idx[r]) = std::clamp(v, 0.0, ci);
            }
            if (!feasible) continue;
        }
        const double obj = a.sum() - 0.5 * a.dot(q * a);
        if (obj > best.objective) {
            best.objective = obj;
            best.alpha = a;
        }
    }
    return best;
}

/// Explicit feature map of (<x,y> + coef0)^2.
inline Vector poly2_features(const Vector& x, double coef0) {
    const auto d = x.size();
    Vector phi(1 + d + d + d * (d - 1) / 2);
    Eigen::Index p = 0;
    phi(p++) = coef0;
    for (Eigen::Index i = 0; i < d; ++i) phi(p++) = std::sqrt(2.0 * coef0) * x(i);
    for (Eigen::Index i = 0; i < d; ++i) phi(p++) = x(i) * x(i);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = i + 1; j < d; ++j) phi(p++) = std::sqrt(2.0) * x(i) * x(j);
    return phi;
}

/// Rows of `x` mapped through poly2_features.
inline Matrix poly2_map(const Matrix& x, double coef0) {
    Matrix out;
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const Vector phi = poly2_features(x.row(r).transpose(), coef0);
        if (r == 0) out.resize(x.rows(), phi.size());
        out.row(r) = phi.transpose();
    }
    return out;
}

/// Original rows followed by the explicit points phi_i + delta (phi_j - phi_i).
inline Matrix explicit_augmented_points(const Matrix& phi, const mmsmote::SynthesisPlan& plan) {
    Matrix out(phi.rows() + static_cast<Eigen::Index>(plan.size()), phi.cols());
    out.topRows(phi.rows()) = phi;
    for (std::size_t q = 0; q < plan.size(); ++q) {
        const auto& e = plan.entries[q];
        const auto xi = phi.row(static_cast<Eigen::Index>(e.base));
        const auto xj = phi.row(static_cast<Eigen::Index>(e.partner));
        out.row(phi.rows() + static_cast<Eigen::Index>(q)) = xi + e.delta * (xj - xi);
    }
    return out;
}

/// Plain inner-product Gram matrix, written out longhand.
inline Matrix inner_products(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), b.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < b.rows(); ++j) {
            double s = 0.0;
            for (Eigen::Index t = 0; t < a.cols(); ++t) s += a(i, t) * b(j, t);
            out(i, j) = s;
        }
    return out;
}

/// Random plan over the minority rows of `labels` with both delta signs.
inline mmsmote::SynthesisPlan random_plan(const Labels& labels, std::size_t s, std::mt19937_64& rng) {
    std::vector<std::size_t> minority;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == mmsmote::kMinority) minority.push_back(i);
    std::uniform_int_distribution<std::size_t> pick(0, minority.size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    mmsmote::SynthesisPlan plan;
    for (std::size_t q = 0; q < s; ++q) {
        mmsmote::PlanEntry e;
        e.base = minority[pick(rng)];
        do {
            e.partner = minority[pick(rng)];
        } while (e.partner == e.base);
        double u = 0.0;
        do {
            u = unit(rng);
        } while (u <= 0.0);
        if (unit(rng) < 0.5) {
            e.kind = mmsmote::SynthesisCase::Conservative;
            e.delta = u;
        } else {
            e.kind = mmsmote::SynthesisCase::Aggressive;
            e.delta = -u;
        }
        plan.entries.push_back(e);
    }
    plan.canonicalize();
    return plan;
}

/// Random labeled dataset with at least `min_minority` minority and 1 majority rows.
inline mmsmote::Dataset random_dataset(std::size_t n, std::size_t d, std::size_t min_minority, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = normal(rng);
    Labels y(n, mmsmote::kMajority);
    std::bernoulli_distribution coin(0.4);
    for (std::size_t i = 0; i < n; ++i) y[i] = coin(rng) ? mmsmote::kMinority : mmsmote::kMajority;
    for (std::size_t i = 0; i < min_minority; ++i) y[i] = mmsmote::kMinority;
    y[n - 1] = mmsmote::kMajority;
    return mmsmote::make_dataset(std::move(x), std::move(y));
}

/// Linear-kernel MM-SMOTE redone in input coordinates: materialize the plan's
/// points, retrain on their plain Gram matrix, return decisions on `queries`.
inline Vector explicit_linear_decisions(const mmsmote::Dataset& train, const mmsmote::SynthesisPlan& plan, double c,
                                        const mmsmote::SmoOptions& opt, const Matrix& queries) {
    const Matrix pts = explicit_augmented_points(train.features, plan);
    Labels y = train.labels;
    y.insert(y.end(), plan.size(), mmsmote::kMinority);
    const auto model = mmsmote::train_smo(inner_products(pts, pts), y, c, opt);
    return mmsmote::decision_values(model, inner_products(queries, pts));
}

/// Regular n x n grid over the bounding box of `x`, padded by `pad`.
inline Matrix grid_2d(const Matrix& x, int n, double pad) {
    const double x0 = x.col(0).minCoeff() - pad;
    const double x1 = x.col(0).maxCoeff() + pad;
    const double y0 = x.col(1).minCoeff() - pad;
    const double y1 = x.col(1).maxCoeff() + pad;
    Matrix g(n * n, 2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            g(i * n + j, 0) = x0 + (x1 - x0) * i / (n - 1);
            g(i * n + j, 1) = y0 + (y1 - y0) * j / (n - 1);
        }
    return g;
}

}  // namespace oracle
