#include "nbci/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "nbci/rng.hpp"

namespace nbci {

Outcome majority_outcome(int positive_votes, int n, int k) {
    if (n < 1) throw ArgumentError("majority_outcome: n must be >= 1");
    if (2 * k < n || k > n) throw ArgumentError("majority_outcome: need n/2 <= k <= n");
    if (positive_votes < 0 || positive_votes > n) {
        throw ArgumentError("majority_outcome: vote count out of range");
    }
    if (positive_votes >= k) return Outcome::kPositive;
    if (positive_votes <= n - k) return Outcome::kNegative;
    return Outcome::kUnknown;
}

void Ensemble::validate() const {
    if (members.empty()) throw ArgumentError("ensemble: no members");
    if (2 * k < n() || k > n()) throw ArgumentError("ensemble: need n/2 <= k <= n");
    const int d = members.front().dim();
    for (const SvmModel& m : members) {
        if (m.dim() != d) throw ArgumentError("ensemble: members disagree on feature dimension");
    }
}

namespace {

std::vector<double> member_scores(const SvmModel& model, const LabeledSet& set) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(set.size()));
    for (int i = 0; i < set.size(); ++i) {
        out.push_back(decide(model, set.x.row(i).transpose()).score);
    }
    return out;
}

double cv_mean_auc(const LabeledSet& data, double c, int folds, std::uint64_t seed,
                   std::vector<double>* fold_aucs) {
    const FoldPlan plan = tenfold_stratified(data.y, folds, seed);
    double sum = 0.0;
    int used = 0;
    if (fold_aucs != nullptr) fold_aucs->clear();
    for (int f = 0; f < plan.p(); ++f) {
        std::vector<int> train_idx;
        for (int g = 0; g < plan.p(); ++g) {
            if (g == f) continue;
            train_idx.insert(train_idx.end(), plan.folds[static_cast<std::size_t>(g)].begin(),
                             plan.folds[static_cast<std::size_t>(g)].end());
        }
        const LabeledSet train = data.subset(train_idx);
        const LabeledSet test = data.subset(plan.folds[static_cast<std::size_t>(f)]);
        const bool train_ok = std::any_of(train.y.begin(), train.y.end(), [](int y) { return y == +1; }) &&
                              std::any_of(train.y.begin(), train.y.end(), [](int y) { return y == -1; });
        const bool test_ok = std::any_of(test.y.begin(), test.y.end(), [](int y) { return y == +1; }) &&
                             std::any_of(test.y.begin(), test.y.end(), [](int y) { return y == -1; });
        if (!train_ok || !test_ok) continue;  // degenerate fold, skipped
        const SvmModel model = train_svm(train, c);
        const double auc = roc_auc(member_scores(model, test), test.y).auc;
        if (fold_aucs != nullptr) fold_aucs->push_back(auc);
        sum += auc;
        ++used;
    }
    if (used == 0) throw ArgumentError("train_ensemble: every CV fold degenerated");
    return sum / used;
}

} // namespace

Ensemble train_ensemble(const LabeledSet& data, EnsembleGroup group,
                        const std::vector<double>& c_grid,
                        const EnsembleTrainOptions& opts) {
    if (c_grid.empty()) throw ArgumentError("train_ensemble: empty C grid");
    for (double c : c_grid) {
        if (!(c > 0.0)) throw ArgumentError("train_ensemble: C grid entries must be positive");
    }
    data.validate(/*require_both_classes=*/true);
    if (data.size() < 2 * opts.folds) {
        throw ArgumentError("train_ensemble: need at least 2 x folds examples");
    }
    if (opts.n_members < 1) throw ArgumentError("train_ensemble: n_members must be >= 1");

    const FoldPlan plan = tenfold_stratified(data.y, opts.folds, opts.fold_seed);

    Ensemble ens;
    ens.group = group;
    ens.k = opts.k;
    ens.fold_seed = opts.fold_seed;

    for (int member = 0; member < opts.n_members; ++member) {
        const int omitted = member % opts.folds;
        std::vector<int> idx;
        for (int g = 0; g < plan.p(); ++g) {
            if (g == omitted) continue;
            idx.insert(idx.end(), plan.folds[static_cast<std::size_t>(g)].begin(),
                       plan.folds[static_cast<std::size_t>(g)].end());
        }
        std::sort(idx.begin(), idx.end());
        const LabeledSet member_data = data.subset(idx);
        member_data.validate(/*require_both_classes=*/true);

        double best_c = c_grid.front();
        double best_auc = -std::numeric_limits<double>::infinity();
        const std::uint64_t inner_seed = ensemble_member_cv_seed(opts.fold_seed, member);
        for (double c : c_grid) {
            const double auc = cv_mean_auc(member_data, c, opts.folds, inner_seed, nullptr);
            if (auc > best_auc || (auc == best_auc && c < best_c)) {
                best_auc = auc;
                best_c = c;
            }
        }

        MemberMeta meta;
        meta.omitted_fold = omitted;
        meta.c = best_c;
        cv_mean_auc(member_data, best_c, opts.folds, inner_seed, &meta.fold_aucs);

        ens.members.push_back(train_svm(member_data, best_c));
        ens.meta.push_back(std::move(meta));
    }
    ens.validate();
    return ens;
}

std::uint64_t ensemble_member_cv_seed(std::uint64_t fold_seed, int member) {
    return Rng::splitmix64(fold_seed ^ (0xA5A5A5A5ULL + static_cast<std::uint64_t>(member)));
}

Decision vote(const Ensemble& ensemble, const Vector& z) {
    ensemble.validate();
    int positives = 0;
    double score_sum = 0.0;
    for (const SvmModel& m : ensemble.members) {
        const DecideResult r = decide(m, z);
        if (r.sign == +1) ++positives;
        score_sum += r.score;
    }
    Decision d;
    d.positive_votes = positives;
    d.mean_score = score_sum / ensemble.n();
    d.outcome = majority_outcome(positives, ensemble.n(), ensemble.k);
    return d;
}

int VoteMatrix::n1(int i) const {
    int s = 0;
    for (const auto& row : y) s += row[static_cast<std::size_t>(i)];
    return s;
}

int VoteMatrix::n0(int i) const { return patterns() - n1(i); }

EnsembleEval evaluate_ensemble(const Ensemble& ensemble, const LabeledSet& test) {
    ensemble.validate();
    test.validate(/*require_both_classes=*/true);

    EnsembleEval eval;
    eval.votes.y.assign(static_cast<std::size_t>(test.size()),
                        std::vector<int>(static_cast<std::size_t>(ensemble.n()), 0));
    eval.scores.reserve(static_cast<std::size_t>(test.size()));
    eval.decisions.reserve(static_cast<std::size_t>(test.size()));

    for (int j = 0; j < test.size(); ++j) {
        const Vector z = test.x.row(j).transpose();
        int positives = 0;
        double score_sum = 0.0;
        for (int i = 0; i < ensemble.n(); ++i) {
            const DecideResult r = decide(ensemble.members[static_cast<std::size_t>(i)], z);
            if (r.sign == +1) ++positives;
            score_sum += r.score;
            eval.votes.y[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] =
                r.sign == test.y[static_cast<std::size_t>(j)] ? 1 : 0;
        }
        Decision d;
        d.positive_votes = positives;
        d.mean_score = score_sum / ensemble.n();
        d.outcome = majority_outcome(positives, ensemble.n(), ensemble.k);
        eval.decisions.push_back(d);
        eval.scores.push_back(d.mean_score);
    }
    eval.roc = roc_auc(eval.scores, test.y);
    return eval;
}

nlohmann::json ensemble_to_json(const Ensemble& ensemble) {
    nlohmann::json j;
    j["version"] = "ens-v1";
    j["group"] = std::string(to_string(ensemble.group));
    j["k"] = ensemble.k;
    j["n"] = ensemble.n();
    j["fold_seed"] = ensemble.fold_seed;
    auto members = nlohmann::json::array();
    for (std::size_t i = 0; i < ensemble.members.size(); ++i) {
        nlohmann::json jm;
        jm["model"] = svm_to_json(ensemble.members[i]);
        jm["omitted_fold"] = ensemble.meta[i].omitted_fold;
        jm["C"] = ensemble.meta[i].c;
        jm["fold_aucs"] = ensemble.meta[i].fold_aucs;
        members.push_back(std::move(jm));
    }
    j["members"] = std::move(members);
    return j;
}

Ensemble ensemble_from_json(const nlohmann::json& j) {
    if (j.value("version", "") != "ens-v1") {
        throw DataError("ensemble_from_json: expected version 'ens-v1'");
    }
    Ensemble ens;
    ens.group = group_from_string(j.at("group").get<std::string>());
    ens.k = j.at("k").get<int>();
    ens.fold_seed = j.value("fold_seed", std::uint64_t{0});
    for (const auto& jm : j.at("members")) {
        ens.members.push_back(svm_from_json(jm.at("model")));
        MemberMeta meta;
        meta.omitted_fold = jm.value("omitted_fold", 0);
        meta.c = jm.value("C", 1.0);
        if (jm.contains("fold_aucs")) meta.fold_aucs = jm.at("fold_aucs").get<std::vector<double>>();
        ens.meta.push_back(std::move(meta));
    }
    if (j.contains("n") && j.at("n").get<int>() != ens.n()) {
        throw DataError("ensemble_from_json: field 'n' disagrees with member count");
    }
    ens.validate();
    return ens;
}

} // namespace nbci
