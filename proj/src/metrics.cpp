#include "nbci/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "nbci/rng.hpp"

namespace nbci {

namespace {

void check_scores(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) {
        throw ArgumentError("roc_auc: scores and labels differ in length");
    }
    if (scores.empty()) throw ArgumentError("roc_auc: empty input");
    for (double s : scores) {
        if (!std::isfinite(s)) throw ArgumentError("roc_auc: non-finite score");
    }
}

} // namespace

RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_scores(scores, labels);

    const std::size_t m = scores.size();
    std::size_t pos = 0;
    for (int y : labels) {
        if (y != +1 && y != -1) throw ArgumentError("roc_auc: labels must be +1 or -1");
        if (y == +1) ++pos;
    }
    const std::size_t neg = m - pos;
    if (pos == 0 || neg == 0) {
        throw ArgumentError("roc_auc: AUC undefined, only one class present");
    }

    // Sort indices by score descending; ties grouped per distinct score.
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocResult out;
    out.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});

    // Pair statistic via a single descending sweep: negatives seen strictly
    // above a positive each contribute a miss; ties contribute half.
    double correct_pairs = 0.0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t i = 0;
    while (i < m) {
        std::size_t j = i;
        std::size_t tie_pos = 0;
        std::size_t tie_neg = 0;
        while (j < m && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]] == +1) {
                ++tie_pos;
            } else {
                ++tie_neg;
            }
            ++j;
        }
        // Each positive in this tie group beats every negative ranked below
        // it and halves against the group's own negatives.
        const double negs_below = static_cast<double>(neg - fp - tie_neg);
        correct_pairs += static_cast<double>(tie_pos) *
                         (negs_below + 0.5 * static_cast<double>(tie_neg));
        tp += tie_pos;
        fp += tie_neg;
        out.points.push_back({scores[order[i]],
                              static_cast<double>(fp) / static_cast<double>(neg),
                              static_cast<double>(tp) / static_cast<double>(pos)});
        i = j;
    }

    out.auc = correct_pairs / (static_cast<double>(pos) * static_cast<double>(neg));
    out.region = region(out.auc);
    return out;
}

RegionLabel region(double auc) {
    if (!(auc >= 0.0 && auc <= 1.0)) {
        throw ArgumentError("region: AUC must lie in [0,1]");
    }
    if (auc > 0.80) return RegionLabel::kBest;
    if (auc > 0.70) return RegionLabel::kAccept;
    if (auc > 0.60) return RegionLabel::kWorst;
    return RegionLabel::kFail;
}

bool command_gate(double auc) { return auc > 0.70; }

void write_roc_csv(const RocResult& roc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("write_roc_csv: cannot open '" + path + "'");
    out << "threshold,fpr,tpr\n";
    out.precision(17);
    for (const RocPoint& p : roc.points) {
        out << p.threshold << ',' << p.fpr << ',' << p.tpr << '\n';
    }
}

FoldPlan tenfold(int m, int p, std::uint64_t seed) {
    if (p < 2) throw ArgumentError("tenfold: need at least two folds");
    if (m < p) throw ArgumentError("tenfold: fewer examples than folds");

    std::vector<int> idx(static_cast<std::size_t>(m));
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    rng.shuffle(idx);

    FoldPlan plan;
    plan.seed = seed;
    plan.folds.resize(static_cast<std::size_t>(p));
    for (int i = 0; i < m; ++i) {
        plan.folds[static_cast<std::size_t>(i % p)].push_back(idx[static_cast<std::size_t>(i)]);
    }
    for (auto& f : plan.folds) std::sort(f.begin(), f.end());
    return plan;
}

FoldPlan tenfold_stratified(const std::vector<int>& labels, int p, std::uint64_t seed) {
    const int m = static_cast<int>(labels.size());
    if (p < 2) throw ArgumentError("tenfold_stratified: need at least two folds");
    if (m < p) throw ArgumentError("tenfold_stratified: fewer examples than folds");

    // Group indices per class, shuffle each group, then deal round-robin.
    std::vector<int> classes;
    for (int y : labels) {
        if (std::find(classes.begin(), classes.end(), y) == classes.end()) classes.push_back(y);
    }
    std::sort(classes.begin(), classes.end());

    FoldPlan plan;
    plan.seed = seed;
    plan.folds.resize(static_cast<std::size_t>(p));
    Rng rng(seed);
    int dealt = 0;
    for (int cls : classes) {
        std::vector<int> idx;
        for (int i = 0; i < m; ++i) {
            if (labels[static_cast<std::size_t>(i)] == cls) idx.push_back(i);
        }
        rng.shuffle(idx);
        for (int i = 0; i < static_cast<int>(idx.size()); ++i, ++dealt) {
            plan.folds[static_cast<std::size_t>(dealt % p)].push_back(idx[static_cast<std::size_t>(i)]);
        }
    }
    for (auto& f : plan.folds) std::sort(f.begin(), f.end());
    return plan;
}

} // namespace nbci
