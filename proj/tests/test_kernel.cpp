#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <filesystem>
#include <random>

#include "mmsmote/kernel.hpp"
#include "oracles.hpp"

namespace {

using namespace mmsmote;

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    return m;
}

TEST(EvalKernel, Basics) {
    const auto rbf = KernelSpec::rbf(0.5);
    EXPECT_DOUBLE_EQ(eval_kernel(rbf, vec({1.3, -2.0}), vec({1.3, -2.0})), 1.0);
    EXPECT_DOUBLE_EQ(eval_kernel(KernelSpec::linear(), vec({1, 0}), vec({0, 1})), 0.0);
    EXPECT_NEAR(eval_kernel(rbf, vec({0, 0}), vec({2, 0})), 0.1353352832366127, 1e-15);
    EXPECT_DOUBLE_EQ(eval_kernel(KernelSpec::polynomial(3, 1.0), vec({1, 1}), vec({1, 0})), 8.0);
    EXPECT_THROW(eval_kernel(rbf, vec({0, 0}), vec({0, 0, 0})), std::invalid_argument);
}

TEST(KernelSpec, Validation) {
    EXPECT_THROW(KernelSpec::rbf(0.0), std::invalid_argument);
    EXPECT_THROW(KernelSpec::rbf(-1.0), std::invalid_argument);
    EXPECT_THROW(KernelSpec::polynomial(0, 1.0), std::invalid_argument);
    EXPECT_EQ(KernelSpec::rbf(0.25).fingerprint(), "rbf(gamma=0.25)");
}

TEST(DefaultRbf, InverseDimTimesVariance) {
    Matrix x{{0.0, 0.0}, {2.0, 4.0}};  // variances 1 and 4, mean 2.5
    EXPECT_DOUBLE_EQ(default_rbf(x).gamma, 1.0 / (2.0 * 2.5));
}

TEST(KernelDistance, Values) {
    const auto rbf = KernelSpec::rbf(0.5);
    EXPECT_DOUBLE_EQ(kernel_distance2(rbf, vec({3, 1}), vec({3, 1})), 0.0);
    EXPECT_NEAR(kernel_distance2(rbf, vec({0, 0}), vec({2, 0})), 1.7293294335267746, 1e-15);
    EXPECT_NEAR(kernel_distance2(KernelSpec::linear(), vec({1, 2}), vec({4, -2})), 25.0, 1e-12);
}

TEST(KernelDistance, SymmetricNonNegative) {
    std::mt19937_64 rng(1);
    for (const auto& spec : {KernelSpec::rbf(0.7), KernelSpec::linear(), KernelSpec::polynomial(2, 1.0)}) {
        const Matrix x = random_matrix(30, 3, rng);
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            for (Eigen::Index j = 0; j < x.rows(); ++j) {
                const double a = kernel_distance2(spec, x.row(i), x.row(j));
                EXPECT_GE(a, 0.0);
                EXPECT_DOUBLE_EQ(a, kernel_distance2(spec, x.row(j), x.row(i)));
                if (i != j && spec.family != KernelFamily::Polynomial) {
                    EXPECT_GT(a, 0.0);
                }
            }
    }
}

TEST(Gram, IdentityAndDiagonal) {
    const Matrix eye{{1, 0}, {0, 1}};
    EXPECT_TRUE(gram(KernelSpec::linear(), eye).values.isApprox(eye));
    std::mt19937_64 rng(2);
    const GramMatrix g = gram(KernelSpec::rbf(1.3), random_matrix(12, 4, rng));
    for (Eigen::Index i = 0; i < 12; ++i) EXPECT_EQ(g.values(i, i), 1.0);
    EXPECT_TRUE(g.values == g.values.transpose());
    EXPECT_THROW(gram(KernelSpec::linear(), Matrix(0, 2)), std::invalid_argument);
}

TEST(Gram, EntrywiseOracleAndPsd) {
    std::mt19937_64 rng(3);
    for (const auto& spec : {KernelSpec::rbf(0.3), KernelSpec::linear(), KernelSpec::polynomial(3, 0.5)}) {
        const Matrix x = random_matrix(3, 5, rng);
        const GramMatrix g = gram(spec, x);
        for (Eigen::Index p = 0; p < 3; ++p)
            for (Eigen::Index q = 0; q < 3; ++q) {
                const double expected = spec.family == KernelFamily::Rbf
                                            ? std::exp(-0.3 * (x.row(p) - x.row(q)).squaredNorm())
                                            : (spec.family == KernelFamily::Linear
                                                   ? x.row(p).dot(x.row(q))
                                                   : std::pow(x.row(p).dot(x.row(q)) + 0.5, 3));
                EXPECT_NEAR(g.values(p, q), expected, 1e-14 * std::max(1.0, std::abs(expected)));
            }
        const Matrix big = gram(spec, random_matrix(40, 3, rng)).values;
        Eigen::SelfAdjointEigenSolver<Matrix> eig(big);
        EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-8 * std::max(1.0, big.norm()));
    }
}

TEST(CrossGram, MatchesGramAndEvalKernel) {
    std::mt19937_64 rng(4);
    const auto spec = KernelSpec::rbf(0.9);
    const Matrix x = random_matrix(6, 2, rng);
    EXPECT_TRUE(cross_gram(spec, x, x).isApprox(gram(spec, x).values, 1e-15));
    const Matrix a = random_matrix(1, 2, rng);
    const Matrix b = random_matrix(1, 2, rng);
    EXPECT_DOUBLE_EQ(cross_gram(spec, a, b)(0, 0), eval_kernel(spec, a.row(0), b.row(0)));

    const Matrix p = random_matrix(2, 4, rng);
    const Matrix q = random_matrix(3, 4, rng);
    const Matrix c = cross_gram(KernelSpec::linear(), p, q);
    ASSERT_EQ(c.rows(), 2);
    ASSERT_EQ(c.cols(), 3);
    EXPECT_TRUE(c.isApprox(oracle::inner_products(p, q), 1e-14));
    EXPECT_THROW(cross_gram(spec, p, x), std::invalid_argument);
}

struct Fixture {
    Matrix x;
    Labels y;
};

// Rows 0..2 minority, 3 majority.
Fixture small_fixture() {
    return {Matrix{{0.0, 0.0}, {2.0, 0.0}, {0.5, 1.5}, {1.0, 1.0}}, Labels{+1, +1, +1, -1}};
}

TEST(AugmentGram, ZeroDeltaReproducesBaseColumn) {
    const auto f = small_fixture();
    const auto spec = KernelSpec::rbf(0.4);
    const GramMatrix g = gram(spec, f.x);
    // delta == 0 is outside the strict case interval, so build the block by hand through augmented_row
    SynthesisPlan plan{{PlanEntry{0, 1, 0.0, SynthesisCase::Conservative}}};
    for (Eigen::Index p = 0; p < 4; ++p) {
        const Vector row = augmented_row(spec, f.x.row(p), f.x, plan);
        EXPECT_DOUBLE_EQ(row(4), g.values(p, 0));
    }
    EXPECT_THROW(augment_gram(g, f.y, plan), std::invalid_argument);
}

TEST(AugmentGram, ExplicitLinearPoint) {
    const auto f = small_fixture();
    const auto spec = KernelSpec::linear();
    const GramMatrix g = gram(spec, f.x);
    SynthesisPlan plan{{PlanEntry{0, 1, 0.5, SynthesisCase::Conservative}}};
    const AugmentedKernel aug = augment_gram(g, spec, f.x, f.y, plan);
    // x_hat = (1, 0); x_p = (1, 1) -> <(1,1),(1,0)> = 1
    EXPECT_NEAR(aug.values(3, 4), 1.0, 1e-15);
    EXPECT_NEAR(aug.values(4, 4), 1.0, 1e-15);
    EXPECT_EQ(aug.labels, (Labels{+1, +1, +1, -1, +1}));
    EXPECT_TRUE(aug.values.topLeftCorner(4, 4) == g.values);
    EXPECT_TRUE(aug.values == aug.values.transpose());
}

TEST(AugmentGram, ValidatesPlan) {
    const auto f = small_fixture();
    const GramMatrix g = gram(KernelSpec::linear(), f.x);
    EXPECT_THROW(augment_gram(g, f.y, SynthesisPlan{{PlanEntry{0, 9, 0.5, SynthesisCase::Conservative}}}),
                 std::out_of_range);
    EXPECT_THROW(augment_gram(g, f.y, SynthesisPlan{{PlanEntry{0, 1, -0.5, SynthesisCase::Conservative}}}),
                 std::invalid_argument);
    EXPECT_THROW(augment_gram(g, f.y, SynthesisPlan{{PlanEntry{0, 1, 0.5, SynthesisCase::Aggressive}}}),
                 std::invalid_argument);
    EXPECT_THROW(augment_gram(g, f.y, SynthesisPlan{{PlanEntry{0, 3, 0.5, SynthesisCase::Conservative}}}),
                 std::invalid_argument);  // partner is majority
    EXPECT_THROW(augment_gram(g, f.y, SynthesisPlan{{PlanEntry{1, 1, 0.5, SynthesisCase::Conservative}}}),
                 std::invalid_argument);
    SynthesisPlan misordered{{PlanEntry{0, 1, -0.5, SynthesisCase::Aggressive},
                              PlanEntry{0, 1, 0.5, SynthesisCase::Conservative}}};
    EXPECT_THROW(augment_gram(g, f.y, misordered), std::invalid_argument);
    EXPECT_THROW(augment_gram(g, KernelSpec::rbf(1.0), f.x, f.y, SynthesisPlan{}), std::invalid_argument);
}

TEST(AugmentedRow, EmptyPlanAndBoundaryDelta) {
    const auto f = small_fixture();
    const auto spec = KernelSpec::rbf(0.8);
    const GramMatrix g = gram(spec, f.x);
    const Vector row = augmented_row(spec, f.x.row(2), f.x, SynthesisPlan{});
    EXPECT_TRUE(row == g.values.row(2).transpose());

    SynthesisPlan edge{{PlanEntry{0, 2, 1.0, SynthesisCase::Conservative}}};
    const Vector q = vec({0.3, -0.4});
    EXPECT_DOUBLE_EQ(augmented_row(spec, q, f.x, edge)(4), eval_kernel(spec, q, f.x.row(2)));
    EXPECT_THROW(augmented_row(spec, vec({1, 2, 3}), f.x, edge), std::invalid_argument);
}

// Linear kernel: the augmented kernel must equal the Gram matrix of explicitly
// interpolated points, and kernel rows must match cross_gram against them.
TEST(AugmentGram, LinearExplicitOracleProperty) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 25; ++trial) {
        const auto ds = oracle::random_dataset(20, 3, 3, rng);
        const auto plan = oracle::random_plan(ds.labels, 15, rng);
        const auto spec = KernelSpec::linear();
        const AugmentedKernel aug = augment_gram(gram(spec, ds.features), ds.labels, plan);
        const Matrix pts = oracle::explicit_augmented_points(ds.features, plan);
        EXPECT_LE((aug.values - oracle::inner_products(pts, pts)).cwiseAbs().maxCoeff(), 1e-10);

        const Matrix queries = random_matrix(5, 3, rng);
        const Matrix rows = augmented_rows(spec, queries, ds.features, plan);
        EXPECT_LE((rows - cross_gram(spec, queries, pts)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(AugmentedRow, ReproducesAugmentedKernelRows) {
    std::mt19937_64 rng(22);
    const auto ds = oracle::random_dataset(25, 4, 4, rng);
    const auto plan = oracle::random_plan(ds.labels, 10, rng);
    for (const auto& spec : {KernelSpec::rbf(0.2), KernelSpec::polynomial(2, 1.0)}) {
        const AugmentedKernel aug = augment_gram(gram(spec, ds.features), ds.labels, plan);
        for (Eigen::Index p = 0; p < ds.features.rows(); ++p) {
            const Vector row = augmented_row(spec, ds.features.row(p), ds.features, plan);
            EXPECT_LE((row - aug.values.row(p).transpose()).cwiseAbs().maxCoeff(),
                      1e-12 * std::max(1.0, aug.values.cwiseAbs().maxCoeff()));
        }
    }
}

TEST(MatrixDump, RoundTripsAndLayout) {
    const Matrix m{{1.5, -2.0, 3.25}, {0.0, 1e-300, 7.0}};
    const auto path = (std::filesystem::temp_directory_path() / "mmsmote_dump.bin").string();
    dump_matrix(path, m);
    EXPECT_EQ(std::filesystem::file_size(path), 16u + 6u * 8u);
    EXPECT_TRUE(load_matrix_dump(path) == m);
    std::ifstream in(path, std::ios::binary);
    unsigned char head[8];
    in.read(reinterpret_cast<char*>(head), 8);
    EXPECT_EQ(head[0], 2);  // little-endian row count
    for (int b = 1; b < 8; ++b) EXPECT_EQ(head[b], 0);
}

}  // namespace
