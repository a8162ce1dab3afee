#include "rlcnet/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rlcnet/error.hpp"

namespace rlcnet {

double mse(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) {
        throw InvalidArgument("mse: sequences have different lengths");
    }
    if (a.empty()) {
        throw InvalidArgument("mse: sequences are empty");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum / static_cast<double>(a.size());
}

RankSumResult wilcoxon_rank_sum(std::span<const double> x, std::span<const double> y, double alpha)
{
    if (x.empty() || y.empty()) {
        throw InvalidArgument("rank-sum test needs two non-empty samples");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidArgument("rank-sum test: alpha must lie in (0, 1)");
    }
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(x.begin(), x.end(), finite) || !std::all_of(y.begin(), y.end(), finite)) {
        throw InvalidArgument("rank-sum test: samples must be finite");
    }
    const std::size_t n = x.size(), m = y.size(), total = n + m;

    std::vector<std::pair<double, bool>> pooled;  // (value, from x)
    pooled.reserve(total);
    for (double v : x) pooled.emplace_back(v, true);
    for (double v : y) pooled.emplace_back(v, false);
    std::sort(pooled.begin(), pooled.end(),
              [](const auto& l, const auto& r) { return l.first < r.first; });

    RankSumResult result;
    double tie_term = 0.0;  // sum over tie groups of (t^3 - t)
    for (std::size_t i = 0; i < total;) {
        std::size_t j = i;
        while (j < total && pooled[j].first == pooled[i].first) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);
        const auto group = static_cast<double>(j - i);
        if (j - i > 1) tie_term += group * group * group - group;
        for (std::size_t k = i; k < j; ++k) {
            (pooled[k].second ? result.rank_sum_x : result.rank_sum_y) += midrank;
        }
        i = j;
    }

    const auto dn = static_cast<double>(n), dm = static_cast<double>(m), dt = static_cast<double>(total);
    const double mean = dn * (dt + 1.0) / 2.0;
    double variance = dn * dm / 12.0 * (dt + 1.0);
    if (tie_term > 0.0) {
        variance -= dn * dm * tie_term / (12.0 * dt * (dt - 1.0));
        result.tie_corrected = true;
    }
    if (variance > 0.0) {
        result.z = (result.rank_sum_x - mean) / std::sqrt(variance);
        result.p = std::erfc(std::abs(result.z) / std::sqrt(2.0));
    }
    result.p = std::clamp(result.p, 0.0, 1.0);
    result.significant = result.p < alpha;
    return result;
}

void to_json(nlohmann::json& j, const RankSumResult& r)
{
    j = nlohmann::json{{"z", r.z},
                       {"p", r.p},
                       {"significant", r.significant},
                       {"rank_sum_x", r.rank_sum_x},
                       {"rank_sum_y", r.rank_sum_y},
                       {"tie_corrected", r.tie_corrected}};
}

}  // namespace rlcnet
