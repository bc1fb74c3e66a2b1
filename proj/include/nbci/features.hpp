#pragma once

#include <vector>

#include "nbci/dataio.hpp"
#include "nbci/linalg.hpp"
#include "nbci/pca.hpp"
#include "nbci/svm.hpp"
#include "nbci/types.hpp"

namespace nbci {

/// How raw channel-by-sample windows become classifier inputs.
struct FeatureOptions {
    int pca_k = 2;        // directions per window; 0 = pick by variance rule
    bool center = false;  // remove each channel's mean over the window first
    int window_len = 0;   // 0 = use whole segments as single windows
    int hop = 14;
};

/// Valid window start offsets for a block of n samples.
std::vector<int> window_offsets(int n, int window_len, int hop);

/// One window (channels x samples) -> feature vector of length
/// channels * k: the window's own top-k projection features, flattened so
/// that channel c owns the contiguous index block [c*k, (c+1)*k).
/// Features are scaled by 1/sqrt(samples) so their magnitude does not grow
/// with the window length. `center` removes per-channel means first.
Vector featurize_window(const Matrix& window, int k, bool center);

/// Drops post-task rest segments. The hemodynamic response outlasts the
/// task block, so its tail bleeds into the trailing rest; classifiers
/// train and evaluate against the clean preceding-rest baseline instead.
std::vector<Segment> training_segments(const std::vector<Segment>& segments);

/// The feature-index partition matching featurize_window's layout.
std::vector<std::vector<int>> channel_blocks(int n_channels, int k);

/// A feature vector with its task label.
struct Example {
    Vector x;
    TaskLabel label = TaskLabel::kRest;
};

/// Cuts windows from each segment (whole segments when window_len == 0)
/// and featurizes them. Windows never straddle segment boundaries.
std::vector<Example> make_examples(const std::vector<Segment>& segments,
                                   const FeatureOptions& opts);

/// Median over windows of the per-window variance-rule k. Used to resolve
/// pca_k == 0 deterministically before training.
int auto_pca_k(const std::vector<Segment>& segments, const FeatureOptions& opts,
               double variance_fraction = 0.95);

/// Ensemble group conventions: E1 takes RIGHT as +1, E2 takes LEFT as +1;
/// REST is -1 for both; the other task's examples are dropped.
enum class EnsembleGroup { kE1, kE2 };

constexpr std::string_view to_string(EnsembleGroup g) noexcept {
    return g == EnsembleGroup::kE1 ? "E1" : "E2";
}

inline EnsembleGroup group_from_string(std::string_view s) {
    if (s == "E1") return EnsembleGroup::kE1;
    if (s == "E2") return EnsembleGroup::kE2;
    throw DataError("unknown ensemble group '" + std::string(s) + "'");
}

/// Builds the +1/-1 set for a group from task-labeled examples.
LabeledSet group_set(const std::vector<Example>& examples, EnsembleGroup group);

/// A labeled set whose feature indices are grouped by source channel,
/// the input shape recursive channel elimination works on.
struct ChannelizedSet {
    LabeledSet data;
    std::vector<int> channel_ids;            // per block, size L
    std::vector<std::vector<int>> blocks;    // per-channel feature indices

    int n_channels() const noexcept { return static_cast<int>(channel_ids.size()); }

    /// Restriction to a subset of channels (by id, kept in the given order).
    ChannelizedSet restrict(const std::vector<int>& keep_ids) const;
};

ChannelizedSet channelize(const LabeledSet& data, const std::vector<int>& channel_ids, int k);

} // namespace nbci
