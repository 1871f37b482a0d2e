#include <gtest/gtest.h>

#include <random>

#include "mmsmote/metrics.hpp"
#include "mmsmote/reported_results.hpp"

namespace {

using namespace mmsmote;

TEST(Confusion, Counts) {
    EXPECT_EQ(confusion(Labels{+1, -1, +1}, Labels{+1, +1, -1}), (ConfusionMatrix{1, 1, 0, 1}));
    const auto perfect = confusion(Labels{+1, -1, -1}, Labels{+1, -1, -1});
    EXPECT_EQ(perfect.fp + perfect.fn, 0u);
    const auto none = confusion(Labels{+1, -1, +1}, Labels{-1, -1, -1});
    EXPECT_EQ(none.tp + none.fp, 0u);
    EXPECT_EQ(none.total(), 3u);
    EXPECT_THROW(confusion(Labels{+1}, Labels{+1, -1}), std::invalid_argument);
    EXPECT_THROW(confusion(Labels{0}, Labels{+1}), std::invalid_argument);
}

TEST(Scores, Examples) {
    const auto r = scores_from(0.9998, 0.7198);
    EXPECT_NEAR(r.f1, 0.8370040009, 1e-9);
    EXPECT_NEAR(r.gmean, 0.8483254328, 1e-9);
    const auto one = scores(ConfusionMatrix{5, 0, 5, 0});
    EXPECT_EQ(one.f1, 1.0);
    EXPECT_EQ(one.gmean, 1.0);
    const auto zero = scores(ConfusionMatrix{0, 0, 10, 4});
    EXPECT_EQ(zero.precision, 0.0);
    EXPECT_EQ(zero.recall, 0.0);
    EXPECT_EQ(zero.f1, 0.0);
    EXPECT_EQ(zero.gmean, 0.0);
    const auto empty = scores(ConfusionMatrix{});
    EXPECT_EQ(empty.f1, 0.0);
}

TEST(Scores, HarmonicBelowGeometric) {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<std::size_t> count(0, 50);
    for (int i = 0; i < 5000; ++i) {
        const ConfusionMatrix cm{count(rng), count(rng), count(rng), count(rng)};
        const auto s = scores(cm);
        EXPECT_LE(s.f1, s.gmean + 1e-15);
        if (s.precision > 0.0 && s.recall > 0.0) {
            EXPECT_GE(s.f1, std::min(s.precision, s.recall) - 1e-15);
            EXPECT_LE(s.gmean, std::max(s.precision, s.recall) + 1e-15);
            if (s.precision == s.recall) {
                EXPECT_NEAR(s.f1, s.gmean, 1e-15);
            }
        }
    }
}

TEST(ReportedRows, TableShape) {
    EXPECT_EQ(kReportedRows.size(), 30u);
    const auto checks = check_reported_rows();
    ASSERT_EQ(checks.size(), 30u);
    for (const auto& c : checks) {
        const auto r = scores_from(c.row.precision, c.row.recall);
        EXPECT_EQ(c.recomputed.f1, r.f1);
        EXPECT_EQ(c.recomputed.gmean, r.gmean);
    }
    // the worked example row
    EXPECT_TRUE(checks.front().ok());
}

}  // namespace
