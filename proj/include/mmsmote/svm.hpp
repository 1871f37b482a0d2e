#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mmsmote/dataset.hpp"
#include "mmsmote/error.hpp"
#include "mmsmote/format.hpp"

namespace mmsmote {

struct SmoOptions {
    double tol = 1e-3;
    std::size_t max_passes = 10'000;  // iteration cap is max_passes * n
    std::uint64_t seed = 0;
};

/**
 * Soft-margin SVM in dual form. The kernel itself is not owned: callers
 * keep the (possibly augmented) training kernel and pass kernel rows in.
 */
struct TrainedModel {
    Vector alpha;
    double bias = 0.0;
    Labels labels;
    Vector c_vector;
    double objective = 0.0;  // sum(alpha) - 1/2 alpha' Q alpha
    bool converged = false;
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
    std::string kernel_fingerprint;

    std::size_t size() const noexcept { return labels.size(); }

    std::size_t support_count() const {
        return static_cast<std::size_t>((alpha.array() > 0.0).count());
    }
};

namespace detail {

inline void check_problem(const Matrix& k, const Labels& y, const Vector& c) {
    const auto n = static_cast<Eigen::Index>(y.size());
    if (k.rows() != n || k.cols() != n) {
        throw std::invalid_argument("train_smo: kernel is " + std::to_string(k.rows()) + "x" +
                                    std::to_string(k.cols()) + " but there are " + std::to_string(n) + " labels");
    }
    if (c.size() != n) throw std::invalid_argument("train_smo: c_vector length mismatch");
    if (!(c.array() > 0.0).all()) throw std::invalid_argument("train_smo: every C_i must be positive");
    bool pos = false;
    bool neg = false;
    for (int v : y) {
        if (v == kMinority) pos = true;
        else if (v == kMajority) neg = true;
        else throw std::invalid_argument("train_smo: labels must be +1 or -1");
    }
    if (!pos || !neg) throw DataError("train_smo: training labels contain a single class");
}

}  // namespace detail

/**
 * Sequential minimal optimization with first-order maximal-violating-pair
 * working-set selection and per-sample box constraints 0 <= a_i <= C_i.
 *
 * Stops when the violating-pair gap drops below `tol`, which bounds every
 * KKT violation of the returned model by `tol`. Hitting the iteration cap
 * returns the last iterate with `converged == false`.
 */
inline TrainedModel train_smo(const Matrix& k, const Labels& y, const Vector& c, const SmoOptions& opt = {},
                              std::string kernel_fingerprint = {}) {
    detail::check_problem(k, y, c);
    const auto n = static_cast<Eigen::Index>(y.size());
    constexpr double kTau = 1e-12;
    constexpr double kSnap = 1e-12;

    Vector yv(n);
    for (Eigen::Index t = 0; t < n; ++t) yv(t) = y[static_cast<std::size_t>(t)];

    Vector alpha = Vector::Zero(n);
    Vector grad = Vector::Constant(n, -1.0);  // Q alpha - 1

    auto in_up = [&](Eigen::Index t) { return yv(t) > 0 ? alpha(t) < c(t) : alpha(t) > 0.0; };
    auto in_low = [&](Eigen::Index t) { return yv(t) > 0 ? alpha(t) > 0.0 : alpha(t) < c(t); };

    const std::size_t max_iter = std::max<std::size_t>(1, opt.max_passes) * static_cast<std::size_t>(n);
    std::size_t iter = 0;
    bool converged = false;
    for (; iter < max_iter; ++iter) {
        Eigen::Index i = -1;
        Eigen::Index j = -1;
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < n; ++t) {
            const double v = -yv(t) * grad(t);
            if (in_up(t) && v > gmax) {
                gmax = v;
                i = t;
            }
            if (in_low(t) && v < gmin) {
                gmin = v;
                j = t;
            }
        }
        if (i < 0 || j < 0 || gmax - gmin < opt.tol) {
            converged = true;
            break;
        }

        const double kii = k(i, i);
        const double kjj = k(j, j);
        const double kij = k(i, j);
        const double ci = c(i);
        const double cj = c(j);
        const double old_ai = alpha(i);
        const double old_aj = alpha(j);
        double ai = old_ai;
        double aj = old_aj;

        double quad = kii + kjj - 2.0 * kij;
        if (quad <= 0.0) quad = kTau;
        if (yv(i) != yv(j)) {
            const double delta = (-grad(i) - grad(j)) / quad;
            const double diff = ai - aj;
            ai += delta;
            aj += delta;
            if (diff > 0.0) {
                if (aj < 0.0) {
                    aj = 0.0;
                    ai = diff;
                }
            } else if (ai < 0.0) {
                ai = 0.0;
                aj = -diff;
            }
            if (diff > ci - cj) {
                if (ai > ci) {
                    ai = ci;
                    aj = ci - diff;
                }
            } else if (aj > cj) {
                aj = cj;
                ai = cj + diff;
            }
        } else {
            const double delta = (grad(i) - grad(j)) / quad;
            const double sum = ai + aj;
            ai -= delta;
            aj += delta;
            if (sum > ci) {
                if (ai > ci) {
                    ai = ci;
                    aj = sum - ci;
                }
            } else if (aj < 0.0) {
                aj = 0.0;
                ai = sum;
            }
            if (sum > cj) {
                if (aj > cj) {
                    aj = cj;
                    ai = sum - cj;
                }
            } else if (ai < 0.0) {
                ai = 0.0;
                aj = sum;
            }
        }
        // pull values left a rounding error away from a bound onto it, so the
        // free set (and with it the bias) does not hinge on the last bit
        auto snap = [](double a, double cap) {
            if (a < kSnap * cap) return 0.0;
            if (a > cap * (1.0 - kSnap)) return cap;
            return a;
        };
        ai = snap(ai, ci);
        aj = snap(aj, cj);
        alpha(i) = ai;
        alpha(j) = aj;

        // grad_t += Q_ti * d_i + Q_tj * d_j, with Q_ts = y_t y_s K_ts
        const double di = (ai - old_ai) * yv(i);
        const double dj = (aj - old_aj) * yv(j);
        grad.array() += yv.array() * (k.col(i).array() * di + k.col(j).array() * dj);
    }

    // Bias: average over free vectors, else the midpoint of the feasible interval.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    std::size_t n_free = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        const double yg = yv(t) * grad(t);
        if (alpha(t) >= c(t)) {
            if (yv(t) < 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (alpha(t) <= 0.0) {
            if (yv(t) > 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            free_sum += yg;
        }
    }
    const double rho = n_free > 0 ? free_sum / static_cast<double>(n_free) : 0.5 * (ub + lb);

    TrainedModel model;
    model.alpha = std::move(alpha);
    model.bias = -rho;
    model.labels = y;
    model.c_vector = c;
    model.objective = model.alpha.sum() - 0.5 * model.alpha.dot(grad + Vector::Ones(n));
    model.converged = converged;
    model.iterations = iter;
    model.seed = opt.seed;
    model.kernel_fingerprint = std::move(kernel_fingerprint);
    return model;
}

/// Same C for every sample.
inline TrainedModel train_smo(const Matrix& k, const Labels& y, double c, const SmoOptions& opt = {},
                              std::string kernel_fingerprint = {}) {
    return train_smo(k, y, Vector::Constant(static_cast<Eigen::Index>(y.size()), c), opt,
                     std::move(kernel_fingerprint));
}

/// sum_i a_i y_i k_row[i] + b
template <typename Row>
double raw_decision(const TrainedModel& model, const Eigen::MatrixBase<Row>& k_row) {
    if (k_row.size() != model.alpha.size()) {
        throw std::invalid_argument("raw_decision: kernel row has " + std::to_string(k_row.size()) +
                                    " entries, model has " + std::to_string(model.alpha.size()));
    }
    double sum = model.bias;
    for (Eigen::Index t = 0; t < model.alpha.size(); ++t) {
        const double a = model.alpha(t);
        if (a != 0.0) sum += a * model.labels[static_cast<std::size_t>(t)] * k_row(t);
    }
    return sum;
}

/// Decision values for each row of `k_rows` (one query per row).
inline Vector decision_values(const TrainedModel& model, const Matrix& k_rows) {
    Vector out(k_rows.rows());
    for (Eigen::Index r = 0; r < k_rows.rows(); ++r) out(r) = raw_decision(model, k_rows.row(r));
    return out;
}

/// Sign of the decision value; exact zero maps to +1.
inline int sign_label(double f) noexcept { return f >= 0.0 ? kMinority : kMajority; }

inline Labels predict(const TrainedModel& model, const Matrix& k_rows) {
    const Vector f = decision_values(model, k_rows);
    Labels out(static_cast<std::size_t>(f.size()));
    for (Eigen::Index r = 0; r < f.size(); ++r) out[static_cast<std::size_t>(r)] = sign_label(f(r));
    return out;
}

/// Functional margins y_i f(x_i) over the training kernel.
inline Vector training_margins(const TrainedModel& model, const Matrix& k, const Labels& y) {
    if (k.rows() != model.alpha.size() || static_cast<Eigen::Index>(y.size()) != k.rows()) {
        throw std::invalid_argument("training_margins: kernel/labels do not match the model");
    }
    Vector ay(model.alpha.size());
    for (Eigen::Index t = 0; t < ay.size(); ++t) ay(t) = model.alpha(t) * model.labels[static_cast<std::size_t>(t)];
    Vector f = k * ay;
    f.array() += model.bias;
    for (Eigen::Index t = 0; t < f.size(); ++t) f(t) *= y[static_cast<std::size_t>(t)];
    return f;
}

/// Hinge slack max(0, 1 - y_i f(x_i)) per training sample.
inline Vector slack(const TrainedModel& model, const Matrix& k, const Labels& y) {
    return (1.0 - training_margins(model, k, y).array()).max(0.0).matrix();
}

/// Largest KKT violation of `model` on its training kernel.
inline double max_kkt_violation(const TrainedModel& model, const Matrix& k) {
    const Vector m = training_margins(model, k, model.labels);
    double worst = 0.0;
    for (Eigen::Index t = 0; t < m.size(); ++t) {
        const double a = model.alpha(t);
        double v = 0.0;
        if (a <= 0.0) v = 1.0 - m(t);
        else if (a >= model.c_vector(t)) v = m(t) - 1.0;
        else v = std::abs(m(t) - 1.0);
        worst = std::max(worst, v);
    }
    return worst;
}

/// |w| in feature space: sqrt(sum_ij a_i a_j y_i y_j K_ij).
inline double weight_norm(const TrainedModel& model, const Matrix& k) {
    Vector ay(model.alpha.size());
    for (Eigen::Index t = 0; t < ay.size(); ++t) ay(t) = model.alpha(t) * model.labels[static_cast<std::size_t>(t)];
    return std::sqrt(std::max(0.0, ay.dot(k * ay)));
}

// ---------------------------------------------------------------------------
// Minority support-vector taxonomy
// ---------------------------------------------------------------------------

enum class SvClass { Safe, OnMargin, InMargin, Misclassified };

inline const char* to_string(SvClass c) {
    switch (c) {
        case SvClass::Safe: return "safe";
        case SvClass::OnMargin: return "on_margin";
        case SvClass::InMargin: return "in_margin";
        case SvClass::Misclassified: return "misclassified";
    }
    return "unknown";
}

inline constexpr double kMarginBand = 1e-6;

inline SvClass classify_margin(double margin, double eps = kMarginBand) {
    if (margin < 0.0) return SvClass::Misclassified;
    if (margin > 1.0 + eps) return SvClass::Safe;
    if (std::abs(margin - 1.0) <= eps) return SvClass::OnMargin;
    return SvClass::InMargin;
}

/// Per-minority-sample position relative to the margin.
struct SvTaxonomy {
    std::vector<std::size_t> rows;  // training rows of the minority samples
    std::vector<SvClass> classes;
    std::vector<double> margins;    // y_i f(x_i)
    std::vector<double> distances;  // |f(x_i)| / |w|
    double w_norm = 0.0;

    std::size_t count(SvClass c) const {
        return static_cast<std::size_t>(std::count(classes.begin(), classes.end(), c));
    }

    /// Positions (into `rows`) of every non-Safe minority sample.
    std::vector<std::size_t> support_vectors() const {
        std::vector<std::size_t> out;
        for (std::size_t p = 0; p < classes.size(); ++p) {
            if (classes[p] != SvClass::Safe) out.push_back(p);
        }
        return out;
    }
};

inline SvTaxonomy classify_minority_svs(const TrainedModel& model, const Matrix& k, const Labels& y) {
    SvTaxonomy tax;
    tax.w_norm = weight_norm(model, k);
    if (!(tax.w_norm > 0.0)) throw ModelError("degenerate SVM model: |w| = 0, no separating hyperplane");
    const Vector margins = training_margins(model, k, y);
    for (std::size_t t = 0; t < y.size(); ++t) {
        if (y[t] != kMinority) continue;
        const double m = margins(static_cast<Eigen::Index>(t));
        tax.rows.push_back(t);
        tax.margins.push_back(m);
        tax.classes.push_back(classify_margin(m));
        tax.distances.push_back(std::abs(m) / tax.w_norm);  // |y f| == |f|
    }
    return tax;
}

// ---------------------------------------------------------------------------
// Text serialization
// ---------------------------------------------------------------------------

inline void write_model(std::ostream& out, const TrainedModel& m) {
    out << "mmsmote-svm-model 1\n";
    out << "kernel " << m.kernel_fingerprint << '\n';
    out << "bias " << format_double(m.bias) << '\n';
    out << "objective " << format_double(m.objective) << '\n';
    out << "converged " << (m.converged ? 1 : 0) << '\n';
    out << "iterations " << m.iterations << '\n';
    out << "seed " << m.seed << '\n';
    out << "n " << m.labels.size() << '\n';
    for (std::size_t t = 0; t < m.labels.size(); ++t) {
        const auto i = static_cast<Eigen::Index>(t);
        out << m.labels[t] << ' ' << format_double(m.alpha(i)) << ' ' << format_double(m.c_vector(i)) << '\n';
    }
}

inline TrainedModel read_model(std::istream& in) {
    auto expect_key = [&](const std::string& key) -> std::string {
        std::string line;
        if (!std::getline(in, line)) throw DataError("model file truncated before '" + key + "'");
        if (line.rfind(key + " ", 0) != 0 && line != key) {
            throw DataError("model file: expected '" + key + "', found '" + line + "'");
        }
        return line.size() > key.size() ? line.substr(key.size() + 1) : std::string{};
    };
    if (expect_key("mmsmote-svm-model") != "1") throw DataError("unsupported model file version");
    TrainedModel m;
    m.kernel_fingerprint = expect_key("kernel");
    m.bias = parse_double_strict(expect_key("bias"));
    m.objective = parse_double_strict(expect_key("objective"));
    m.converged = expect_key("converged") == "1";
    m.iterations = std::stoull(expect_key("iterations"));
    m.seed = std::stoull(expect_key("seed"));
    const auto n = static_cast<Eigen::Index>(std::stoull(expect_key("n")));
    m.alpha.resize(n);
    m.c_vector.resize(n);
    m.labels.resize(static_cast<std::size_t>(n));
    for (Eigen::Index t = 0; t < n; ++t) {
        std::string line;
        if (!std::getline(in, line)) throw DataError("model file truncated in coefficient block");
        std::istringstream row(line);
        std::string label;
        std::string alpha;
        std::string c;
        if (!(row >> label >> alpha >> c)) throw DataError("malformed coefficient line: " + line);
        m.labels[static_cast<std::size_t>(t)] = std::stoi(label);
        m.alpha(t) = parse_double_strict(alpha);
        m.c_vector(t) = parse_double_strict(c);
    }
    return m;
}

}  // namespace mmsmote
