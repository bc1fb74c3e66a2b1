#include "nbci/features.hpp"

#include <algorithm>
#include <cmath>

namespace nbci {

std::vector<int> window_offsets(int n, int window_len, int hop) {
    if (window_len < 1) throw ArgumentError("window_offsets: window length must be >= 1");
    if (hop < 1) throw ArgumentError("window_offsets: hop must be >= 1");
    std::vector<int> out;
    for (int off = 0; off + window_len <= n; off += hop) out.push_back(off);
    return out;
}

Vector featurize_window(const Matrix& window, int k, bool center) {
    PcaOptions opts;
    opts.center = false;  // any centering happens here, shared by extraction and projection
    const Matrix x = center ? Matrix(window.colwise() - window.rowwise().mean()) : window;
    const ProjectionBasis basis = pca_directions(x, k, opts);
    const Matrix f = project(x, basis);  // channels x k
    const double scale = std::sqrt(static_cast<double>(window.cols()));
    Vector v(f.size());
    for (Eigen::Index c = 0; c < f.rows(); ++c) {
        v.segment(c * k, k) = f.row(c).transpose() / scale;
    }
    return v;
}

std::vector<Segment> training_segments(const std::vector<Segment>& segments) {
    std::vector<Segment> out;
    for (const Segment& seg : segments) {
        if (seg.block_index != 2) out.push_back(seg);
    }
    return out;
}

std::vector<std::vector<int>> channel_blocks(int n_channels, int k) {
    std::vector<std::vector<int>> blocks(static_cast<std::size_t>(n_channels));
    for (int c = 0; c < n_channels; ++c) {
        for (int j = 0; j < k; ++j) blocks[static_cast<std::size_t>(c)].push_back(c * k + j);
    }
    return blocks;
}

std::vector<Example> make_examples(const std::vector<Segment>& segments,
                                   const FeatureOptions& opts) {
    if (opts.pca_k < 1) throw ArgumentError("make_examples: pca_k must be resolved (>= 1)");
    std::vector<Example> out;
    for (const Segment& seg : segments) {
        const int n = static_cast<int>(seg.window.cols());
        if (opts.window_len == 0) {
            if (std::min<int>(static_cast<int>(seg.window.rows()), n) < opts.pca_k) continue;
            out.push_back({featurize_window(seg.window, opts.pca_k, opts.center), seg.label});
            continue;
        }
        for (int off : window_offsets(n, opts.window_len, opts.hop)) {
            out.push_back({featurize_window(seg.window.middleCols(off, opts.window_len),
                                            opts.pca_k, opts.center),
                           seg.label});
        }
    }
    return out;
}

int auto_pca_k(const std::vector<Segment>& segments, const FeatureOptions& opts,
               double variance_fraction) {
    std::vector<int> ks;
    PcaOptions popts;
    popts.center = opts.center;
    for (const Segment& seg : segments) {
        const int n = static_cast<int>(seg.window.cols());
        if (opts.window_len == 0) {
            ks.push_back(choose_k(seg.window, variance_fraction, popts));
            continue;
        }
        for (int off : window_offsets(n, opts.window_len, opts.hop)) {
            ks.push_back(choose_k(seg.window.middleCols(off, opts.window_len),
                                  variance_fraction, popts));
        }
    }
    if (ks.empty()) throw ArgumentError("auto_pca_k: no windows");
    std::sort(ks.begin(), ks.end());
    return ks[ks.size() / 2];
}

LabeledSet group_set(const std::vector<Example>& examples, EnsembleGroup group) {
    const TaskLabel positive = group == EnsembleGroup::kE1 ? TaskLabel::kRight : TaskLabel::kLeft;
    std::vector<const Example*> kept;
    for (const Example& e : examples) {
        if (e.label == positive || e.label == TaskLabel::kRest) kept.push_back(&e);
    }
    if (kept.empty()) throw ArgumentError("group_set: no examples for group");
    LabeledSet set;
    set.x.resize(static_cast<Eigen::Index>(kept.size()), kept.front()->x.size());
    set.y.reserve(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (kept[i]->x.size() != set.x.cols()) {
            throw ArgumentError("group_set: inconsistent feature dimensions");
        }
        set.x.row(static_cast<Eigen::Index>(i)) = kept[i]->x;
        set.y.push_back(kept[i]->label == positive ? +1 : -1);
    }
    return set;
}

ChannelizedSet channelize(const LabeledSet& data, const std::vector<int>& channel_ids, int k) {
    if (k < 1) throw ArgumentError("channelize: k must be >= 1");
    const int l = static_cast<int>(channel_ids.size());
    if (data.dim() != l * k) {
        throw ArgumentError("channelize: feature dimension " + std::to_string(data.dim()) +
                            " is not channels * k = " + std::to_string(l * k));
    }
    ChannelizedSet out;
    out.data = data;
    out.channel_ids = channel_ids;
    out.blocks = channel_blocks(l, k);
    return out;
}

ChannelizedSet ChannelizedSet::restrict(const std::vector<int>& keep_ids) const {
    std::vector<int> positions;
    positions.reserve(keep_ids.size());
    for (int id : keep_ids) {
        const auto it = std::find(channel_ids.begin(), channel_ids.end(), id);
        if (it == channel_ids.end()) {
            throw ArgumentError("restrict: channel " + std::to_string(id) + " not present");
        }
        positions.push_back(static_cast<int>(it - channel_ids.begin()));
    }

    ChannelizedSet out;
    out.channel_ids = keep_ids;
    const int k = n_channels() > 0 ? static_cast<int>(blocks.front().size()) : 0;
    out.blocks = channel_blocks(static_cast<int>(keep_ids.size()), k);
    out.data.y = data.y;
    out.data.x.resize(data.x.rows(), static_cast<Eigen::Index>(keep_ids.size()) * k);
    for (std::size_t c = 0; c < positions.size(); ++c) {
        for (int j = 0; j < k; ++j) {
            out.data.x.col(static_cast<Eigen::Index>(c) * k + j) =
                data.x.col(blocks[static_cast<std::size_t>(positions[c])][static_cast<std::size_t>(j)]);
        }
    }
    return out;
}

} // namespace nbci
