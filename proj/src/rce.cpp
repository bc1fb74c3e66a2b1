#include "nbci/rce.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "nbci/metrics.hpp"

namespace nbci {

namespace {

double zero_one_error(const SvmModel& model, const LabeledSet& test) {
    int wrong = 0;
    for (int i = 0; i < test.size(); ++i) {
        if (decide(model, test.x.row(i).transpose()).sign != test.y[static_cast<std::size_t>(i)]) {
            ++wrong;
        }
    }
    return static_cast<double>(wrong) / static_cast<double>(test.size());
}

double mean_weight(const SvmModel& model, const std::vector<std::vector<int>>& blocks) {
    const std::vector<double> mags = weight_magnitudes(model, blocks);
    return std::accumulate(mags.begin(), mags.end(), 0.0) / static_cast<double>(mags.size());
}

bool single_class(const std::vector<int>& y) {
    return std::all_of(y.begin(), y.end(), [&](int v) { return v == y.front(); });
}

} // namespace

ChannelRanking rce(const ChannelizedSet& data, const RceOptions& opts) {
    const int l = data.n_channels();
    if (opts.target < 1 || opts.target > l) {
        throw ArgumentError("rce: target must lie in [1, channel count]");
    }
    data.data.validate(/*require_both_classes=*/true);

    const FoldPlan plan = tenfold_stratified(data.data.y, opts.folds, opts.fold_seed);
    const int rounds_total = l - opts.target;

    ChannelRanking out;
    // survival_round[ch] per fold: the round the channel fell, or
    // rounds_total + 1 when it survived to the end.
    std::map<int, std::vector<double>> survival_round;
    std::map<int, std::vector<double>> final_scores;

    for (int f = 0; f < plan.p(); ++f) {
        RceFoldHistory hist;
        hist.fold = f;

        std::vector<int> train_idx;
        for (int g = 0; g < plan.p(); ++g) {
            if (g == f) continue;
            train_idx.insert(train_idx.end(), plan.folds[static_cast<std::size_t>(g)].begin(),
                             plan.folds[static_cast<std::size_t>(g)].end());
        }
        std::sort(train_idx.begin(), train_idx.end());
        const std::vector<int>& test_idx = plan.folds[static_cast<std::size_t>(f)];

        const LabeledSet train_full = data.data.subset(train_idx);
        const LabeledSet test_full = data.data.subset(test_idx);
        if (single_class(train_full.y) || test_full.size() == 0) {
            hist.skipped = true;
            hist.warning = "fold " + std::to_string(f) + " degenerate (single class), skipped";
            out.folds.push_back(std::move(hist));
            continue;
        }

        const ChannelizedSet train_ch = [&] {
            ChannelizedSet c;
            c.data = train_full;
            c.channel_ids = data.channel_ids;
            c.blocks = data.blocks;
            return c;
        }();
        const ChannelizedSet test_ch = [&] {
            ChannelizedSet c;
            c.data = test_full;
            c.channel_ids = data.channel_ids;
            c.blocks = data.blocks;
            return c;
        }();

        std::vector<int> survivors = data.channel_ids;
        for (int round = 1; round <= rounds_total; ++round) {
            int victim = -1;
            double victim_score = 0.0;
            double victim_error = 0.0;

            if (opts.fast) {
                // One training on the current survivors; each channel is
                // scored by its own weight block and the argmin falls.
                const ChannelizedSet cur = train_ch.restrict(survivors);
                const SvmModel model = train_svm(cur.data, opts.c);
                const std::vector<double> mags = weight_magnitudes(model, cur.blocks);
                for (std::size_t i = 0; i < survivors.size(); ++i) {
                    if (victim < 0 || mags[i] < victim_score ||
                        (mags[i] == victim_score && survivors[i] < victim)) {
                        victim = survivors[i];
                        victim_score = mags[i];
                    }
                }
                std::vector<int> next = survivors;
                next.erase(std::find(next.begin(), next.end(), victim));
                const SvmModel after = train_svm(train_ch.restrict(next).data, opts.c);
                victim_error = zero_one_error(after, test_ch.restrict(next).data);
            } else {
                // Leave-one-channel-out: score each candidate by the mean
                // per-channel |w| of the model trained without it; a small
                // score means the remaining channels separate with a wide
                // margin, so the candidate is expendable.
                for (int candidate : survivors) {
                    std::vector<int> kept;
                    for (int ch : survivors) {
                        if (ch != candidate) kept.push_back(ch);
                    }
                    const ChannelizedSet sub_train = train_ch.restrict(kept);
                    const SvmModel model = train_svm(sub_train.data, opts.c);
                    const double score = mean_weight(model, sub_train.blocks);
                    if (victim < 0 || score < victim_score ||
                        (score == victim_score && candidate < victim)) {
                        victim = candidate;
                        victim_score = score;
                        victim_error = zero_one_error(model, test_ch.restrict(kept).data);
                    }
                }
            }

            survivors.erase(std::find(survivors.begin(), survivors.end(), victim));
            hist.rounds.push_back({round, victim, victim_score, victim_error});
            survival_round[victim].push_back(static_cast<double>(round));
            final_scores[victim].push_back(victim_score);
        }

        // Survivors of this fold all score the sentinel round; their final
        // ranking score comes from the survivor model's weight blocks.
        const ChannelizedSet final_train = train_ch.restrict(survivors);
        const SvmModel final_model = train_svm(final_train.data, opts.c);
        const std::vector<double> final_mags = weight_magnitudes(final_model, final_train.blocks);
        for (std::size_t i = 0; i < survivors.size(); ++i) {
            survival_round[survivors[i]].push_back(static_cast<double>(rounds_total + 1));
            final_scores[survivors[i]].push_back(final_mags[i]);
        }
        hist.survivors = survivors;
        hist.final_test_error = zero_one_error(final_model, test_ch.restrict(survivors).data);
        out.folds.push_back(std::move(hist));
    }

    if (survival_round.empty()) {
        throw ArgumentError("rce: every fold degenerated, nothing to rank");
    }

    // Aggregate: later mean survival round wins; ties by larger mean score,
    // then by lower channel id.
    struct Agg {
        int channel;
        double mean_round;
        double mean_score;
    };
    std::vector<Agg> agg;
    for (int ch : data.channel_ids) {
        const auto& rounds = survival_round[ch];
        const auto& scores = final_scores[ch];
        agg.push_back({ch,
                       std::accumulate(rounds.begin(), rounds.end(), 0.0) /
                           static_cast<double>(rounds.size()),
                       std::accumulate(scores.begin(), scores.end(), 0.0) /
                           static_cast<double>(scores.size())});
    }
    std::sort(agg.begin(), agg.end(), [](const Agg& a, const Agg& b) {
        if (a.mean_round != b.mean_round) return a.mean_round > b.mean_round;
        if (a.mean_score != b.mean_score) return a.mean_score > b.mean_score;
        return a.channel < b.channel;
    });

    for (int i = 0; i < opts.target; ++i) out.survivors.push_back(agg[static_cast<std::size_t>(i)].channel);
    for (int i = l - 1; i >= opts.target; --i) {
        out.ranked.push_back(agg[static_cast<std::size_t>(i)].channel);  // first eliminated first
    }
    return out;
}

GeneralizationError generalization_error(const std::vector<double>& fold_errors) {
    if (fold_errors.empty()) throw ArgumentError("generalization_error: no fold results");
    GeneralizationError out;
    out.per_fold = fold_errors;
    out.mean = std::accumulate(fold_errors.begin(), fold_errors.end(), 0.0) /
               static_cast<double>(fold_errors.size());
    return out;
}

nlohmann::json rce_report(const ChannelRanking& ranking) {
    nlohmann::json j;
    j["survivors"] = ranking.survivors;
    j["ranked"] = ranking.ranked;
    auto folds = nlohmann::json::array();
    std::vector<double> errors;
    for (const RceFoldHistory& hist : ranking.folds) {
        nlohmann::json jf;
        jf["fold"] = hist.fold;
        jf["skipped"] = hist.skipped;
        if (hist.skipped) {
            jf["warning"] = hist.warning;
        } else {
            auto rounds = nlohmann::json::array();
            for (const RceRound& r : hist.rounds) {
                rounds.push_back({{"round", r.round},
                                  {"eliminated", r.eliminated_channel},
                                  {"score", r.score},
                                  {"test_error", r.test_error}});
            }
            jf["rounds"] = std::move(rounds);
            jf["survivors"] = hist.survivors;
            jf["test_error"] = hist.final_test_error;
            errors.push_back(hist.final_test_error);
        }
        folds.push_back(std::move(jf));
    }
    j["folds"] = std::move(folds);
    if (!errors.empty()) {
        j["generalization_error"] = generalization_error(errors).mean;
    }
    return j;
}

} // namespace nbci
