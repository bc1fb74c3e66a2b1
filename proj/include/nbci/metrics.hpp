#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nbci/errors.hpp"

namespace nbci {

/// One point of the ROC curve. `threshold` is the score at or above which
/// a pattern is called positive; the leading (0,0) point carries +inf.
struct RocPoint {
    double threshold;
    double fpr;
    double tpr;
};

/// Classifier performance regions. Intervals are open below and closed
/// above: BEST (0.80, 1], ACCEPT (0.70, 0.80], WORST (0.60, 0.70];
/// everything at or below 0.60 is FAIL.
enum class RegionLabel { kBest, kAccept, kWorst, kFail };

constexpr std::string_view to_string(RegionLabel r) noexcept {
    switch (r) {
        case RegionLabel::kBest: return "BEST";
        case RegionLabel::kAccept: return "ACCEPT";
        case RegionLabel::kWorst: return "WORST";
        case RegionLabel::kFail: return "FAIL";
    }
    return "?";
}

struct RocResult {
    double auc = 0.0;
    std::vector<RocPoint> points;  // from (0,0) to (1,1), both axes non-decreasing
    RegionLabel region = RegionLabel::kFail;
};

/// AUC as the Mann-Whitney pair statistic:
/// (#{s_i > s_j : y_i=+1, y_j=-1} + ties/2) / (P*N),
/// plus the full ROC polyline. Throws ArgumentError when a class is absent
/// or a score is not finite.
RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

/// Region for an AUC in [0,1]; out-of-range input throws ArgumentError.
RegionLabel region(double auc);

/// Command gate: true iff auc exceeds 0.70 strictly.
bool command_gate(double auc);

/// Writes "threshold,fpr,tpr" rows for plot tooling.
void write_roc_csv(const RocResult& roc, const std::string& path);

/// p disjoint index sets of near-equal size (differ by at most one).
struct FoldPlan {
    std::vector<std::vector<int>> folds;
    std::uint64_t seed = 0;

    int p() const noexcept { return static_cast<int>(folds.size()); }
};

/// Deterministic shuffle of 0..m-1 into p folds. m < p throws ArgumentError.
FoldPlan tenfold(int m, int p, std::uint64_t seed);

/// Same, but each fold receives a near-equal share of every class so no
/// fold degenerates to a single class (labels are arbitrary class tags).
FoldPlan tenfold_stratified(const std::vector<int>& labels, int p, std::uint64_t seed);

} // namespace nbci
