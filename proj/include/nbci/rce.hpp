#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nbci/features.hpp"

namespace nbci {

struct RceOptions {
    int target = 20;          // channels to retain (45 -> 20 mirrors the protocol)
    int folds = 10;
    double c = 1.0;           // SVM penalty used during elimination
    bool fast = false;        // one training per round, score = own |w| block
    std::uint64_t fold_seed = 0;
};

/// One elimination within a fold.
struct RceRound {
    int round = 0;                 // 1-based
    int eliminated_channel = 0;
    double score = 0.0;            // ranking score R of the eliminated channel
    double test_error = 0.0;       // 0/1 error of the surviving model on the held-out fold
};

struct RceFoldHistory {
    int fold = 0;
    bool skipped = false;          // degenerate fold (single class); recorded, not fatal
    std::string warning;
    std::vector<RceRound> rounds;
    std::vector<int> survivors;    // this fold's surviving channel ids
    double final_test_error = 0.0;
};

/// Aggregate outcome. `ranked` lists eliminated channels from first to
/// last eliminated (by mean survival round over folds); `survivors` holds
/// the retained channels ordered strongest first.
struct ChannelRanking {
    std::vector<int> ranked;
    std::vector<int> survivors;
    std::vector<RceFoldHistory> folds;
};

/// Recursive channel elimination over tenfold splits. Per fold and round,
/// each surviving channel is scored by R = mean per-channel |w| of a model
/// trained without it (fast mode: by its own |w| block of a single model)
/// and the argmin is eliminated until `target` remain. Folds are aggregated
/// by mean survival round, ties by mean score, then by lower channel id.
ChannelRanking rce(const ChannelizedSet& data, const RceOptions& opts);

struct GeneralizationError {
    double mean = 0.0;
    std::vector<double> per_fold;
};

/// Mean 0/1 error over per-fold test results; empty input is an error.
GeneralizationError generalization_error(const std::vector<double>& fold_errors);

/// Report with per-round eliminations, per-fold errors and the survivor list.
nlohmann::json rce_report(const ChannelRanking& ranking);

} // namespace nbci
