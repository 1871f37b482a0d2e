#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "mmsmote/baselines.hpp"
#include "mmsmote/metrics.hpp"

namespace mmsmote {

/// One published result row of the credit-card fraud benchmark (4 d.p.).
struct ReportedRow {
    int ratio;
    Method method;
    double precision;
    double recall;
    double f1;
    double gmean;
};

// clang-format off
inline constexpr std::array<ReportedRow, 30> kReportedRows{{
    {2, Method::PlainSvm,         0.9998, 0.7198, 0.8370, 0.8483},
    {2, Method::ClassWeightedSvm, 0.8956, 0.9082, 0.9019, 0.9019},
    {2, Method::RusSvm,           0.8986, 0.9034, 0.9010, 0.9010},
    {2, Method::SmoteSvm,         0.9123, 0.9034, 0.9078, 0.9078},
    {2, Method::MmSmote,          0.8983, 0.9103, 0.9056, 0.9057},
    {4, Method::PlainSvm,         0.9833, 0.8115, 0.8893, 0.8933},
    {4, Method::ClassWeightedSvm, 0.9696, 0.8744, 0.9150, 0.9160},
    {4, Method::RusSvm,           0.8930, 0.9130, 0.9029, 0.9030},
    {4, Method::SmoteSvm,         0.9477, 0.8841, 0.9148, 0.9153},
    {4, Method::MmSmote,          0.9394, 0.8986, 0.9185, 0.9187},
    {6, Method::PlainSvm,         0.9950, 0.7536, 0.8577, 0.8659},
    {6, Method::ClassWeightedSvm, 0.9691, 0.8406, 0.9003, 0.9026},
    {6, Method::RusSvm,           0.8992, 0.8986, 0.8989, 0.8989},
    {6, Method::SmoteSvm,         0.9575, 0.8889, 0.9219, 0.9226},
    {6, Method::MmSmote,          0.9617, 0.8937, 0.9264, 0.9270},
    {8, Method::PlainSvm,         0.9994, 0.7343, 0.8466, 0.8567},
    {8, Method::ClassWeightedSvm, 0.9821, 0.7923, 0.8770, 0.8821},
    {8, Method::RusSvm,           0.9374, 0.9082, 0.9226, 0.9227},
    {8, Method::SmoteSvm,         0.9666, 0.8647, 0.9128, 0.9143},
    {8, Method::MmSmote,          0.9547, 0.8889, 0.9206, 0.9212},
    {10, Method::PlainSvm,         0.9995, 0.7246, 0.8402, 0.8510},
    {10, Method::ClassWeightedSvm, 0.9877, 0.7778, 0.8703, 0.8765},
    {10, Method::RusSvm,           0.9278, 0.9034, 0.9154, 0.9155},
    {10, Method::SmoteSvm,         0.9823, 0.8261, 0.8975, 0.9008},
    {10, Method::MmSmote,          0.9734, 0.9034, 0.9371, 0.9378},
    {70, Method::PlainSvm,         0.9999, 0.6570, 0.7929, 0.8105},
    {70, Method::ClassWeightedSvm, 0.9946, 0.7101, 0.8286, 0.8404},
    {70, Method::RusSvm,           0.9141, 0.9034, 0.9087, 0.9087},
    {70, Method::SmoteSvm,         0.9914, 0.8261, 0.9012, 0.9050},
    {70, Method::MmSmote,          0.9926, 0.8647, 0.9243, 0.9264},
}};
// clang-format on

inline constexpr double kReportedRounding = 5e-4;

struct RowCheck {
    ReportedRow row;
    MetricsReport recomputed;
    bool f1_ok = false;
    bool gmean_ok = false;

    bool ok() const noexcept { return f1_ok && gmean_ok; }
};

/// Recomputes F1 and G-mean from each row's precision and recall.
inline std::vector<RowCheck> check_reported_rows(double tolerance = kReportedRounding) {
    std::vector<RowCheck> out;
    for (const auto& r : kReportedRows) {
        RowCheck c{r, scores_from(r.precision, r.recall)};
        // 1e-12 absorbs binary representation of the 4 d.p. inputs
        c.f1_ok = std::abs(c.recomputed.f1 - r.f1) <= tolerance + 1e-12;
        c.gmean_ok = std::abs(c.recomputed.gmean - r.gmean) <= tolerance + 1e-12;
        out.push_back(c);
    }
    return out;
}

}  // namespace mmsmote
