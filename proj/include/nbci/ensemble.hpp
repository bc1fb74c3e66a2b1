#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nbci/features.hpp"
#include "nbci/metrics.hpp"
#include "nbci/svm.hpp"

namespace nbci {

/// Three-valued ensemble outcome: +1, -1, or the unknown case U.
enum class Outcome { kPositive, kNegative, kUnknown };

constexpr std::string_view to_string(Outcome o) noexcept {
    switch (o) {
        case Outcome::kPositive: return "+1";
        case Outcome::kNegative: return "-1";
        case Outcome::kUnknown: return "U";
    }
    return "?";
}

struct Decision {
    Outcome outcome = Outcome::kUnknown;
    int positive_votes = 0;
    double mean_score = 0.0;  // mean member decision score, the ensemble's continuous output
};

/// k-of-n majority rule: positives >= k -> +1, else positives <= n-k -> -1,
/// otherwise U. Requires n >= 1 and n/2 <= k <= n.
Outcome majority_outcome(int positive_votes, int n, int k);

/// Per-member training record.
struct MemberMeta {
    int omitted_fold = 0;
    double c = 1.0;
    std::vector<double> fold_aucs;  // per-fold AUC(j) for the chosen C
};

/// A named group of base SVMs with a vote threshold. E1 decides
/// right-vs-rest, E2 left-vs-rest.
struct Ensemble {
    EnsembleGroup group = EnsembleGroup::kE1;
    int k = 4;
    std::vector<SvmModel> members;
    std::vector<MemberMeta> meta;
    std::uint64_t fold_seed = 0;

    int n() const noexcept { return static_cast<int>(members.size()); }
    void validate() const;
};

struct EnsembleTrainOptions {
    int n_members = 6;
    int folds = 10;
    int k = 4;
    std::uint64_t fold_seed = 0;
};

/// Trains n members, each on a distinct rotation of folds (member i omits
/// fold i). Each member's C comes from `c_grid` by maximal mean per-fold
/// AUC over an inner tenfold CV of its own training data; ties prefer the
/// smaller C. Labels must already follow the group convention (+1 task,
/// -1 rest); single-class data and an empty grid are errors.
Ensemble train_ensemble(const LabeledSet& data, EnsembleGroup group,
                        const std::vector<double>& c_grid,
                        const EnsembleTrainOptions& opts = {});

/// Seed of member i's inner C-search folds, so the grid search can be
/// replayed externally.
std::uint64_t ensemble_member_cv_seed(std::uint64_t fold_seed, int member);

/// Majority vote over one pattern.
Decision vote(const Ensemble& ensemble, const Vector& z);

/// Binary table y_{j,i}: 1 when member i assigns pattern j its true label.
struct VoteMatrix {
    std::vector<std::vector<int>> y;  // rows = patterns, cols = members

    int patterns() const noexcept { return static_cast<int>(y.size()); }
    int members() const noexcept { return y.empty() ? 0 : static_cast<int>(y.front().size()); }
    /// Correct assignments of member i.
    int n1(int i) const;
    /// Mistakes of member i (patterns - n1).
    int n0(int i) const;
};

struct EnsembleEval {
    VoteMatrix votes;
    RocResult roc;                    // from mean member scores vs labels
    std::vector<Decision> decisions;  // per pattern, U reported discretely
    std::vector<double> scores;
};

/// Evaluates every member on a test set and derives the vote table, the
/// per-pattern majority decisions and the ensemble ROC/AUC.
EnsembleEval evaluate_ensemble(const Ensemble& ensemble, const LabeledSet& test);

/// "ens-v1" bundle embedding the svm-v1 members with their fold metadata.
nlohmann::json ensemble_to_json(const Ensemble& ensemble);
Ensemble ensemble_from_json(const nlohmann::json& j);

} // namespace nbci
