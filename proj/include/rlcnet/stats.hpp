#pragma once

#include <span>

#include <json.hpp>

namespace rlcnet {

/// Mean of squared elementwise differences.
double mse(std::span<const double> a, std::span<const double> b);

struct RankSumResult {
    double z = 0.0;           // (W_x - E[W_x]) / sd, normal approximation
    double p = 1.0;           // two-sided
    double rank_sum_x = 0.0;  // W_x
    double rank_sum_y = 0.0;
    bool tie_corrected = false;
    bool significant = false;  // p < alpha
};

/// Wilcoxon rank-sum test of x against y with midranks for ties and the
/// tie-corrected normal approximation (no continuity correction). A positive
/// z means x tends to rank above y.
RankSumResult wilcoxon_rank_sum(std::span<const double> x, std::span<const double> y, double alpha = 0.05);

void to_json(nlohmann::json& j, const RankSumResult& r);

}  // namespace rlcnet
