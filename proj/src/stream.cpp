#include "nbci/stream.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "nbci/features.hpp"
#include "nbci/metrics.hpp"

namespace nbci {

SampleStream to_stream(const Session& session, const std::vector<int>& channels) {
    SampleStream stream;
    stream.channel_ids = channels;
    const std::vector<Segment> segments = segment_trials(session);
    if (!session.trials.empty()) stream.sample_rate_hz = session.trials.front().sample_rate_hz;

    std::vector<int> rows;
    if (!session.trials.empty()) {
        const std::vector<int>& ids = session.trials.front().channel_ids;
        for (int ch : channels) {
            const auto it = std::find(ids.begin(), ids.end(), ch);
            if (it == ids.end()) {
                throw ArgumentError("to_stream: channel " + std::to_string(ch) +
                                    " not recorded in session");
            }
            rows.push_back(static_cast<int>(it - ids.begin()));
        }
    }

    for (const Segment& seg : segments) {
        for (int i = 0; i < seg.window.cols(); ++i) {
            StreamFrame frame;
            frame.values.reserve(rows.size());
            for (int r : rows) frame.values.push_back(seg.window(r, i));
            frame.block_label = seg.label;
            frame.trial_index = seg.trial_index;
            frame.block_index = seg.block_index;
            stream.frames.push_back(std::move(frame));
        }
    }
    return stream;
}

std::vector<Window> window_stream(const SampleStream& stream, int window_len, int hop) {
    if (window_len < 1) throw ArgumentError("window_stream: window length must be >= 1");
    if (hop < 1) throw ArgumentError("window_stream: hop must be >= 1");
    const std::size_t n_channels = stream.channel_ids.size();

    std::vector<Window> out;
    std::size_t i = 0;
    while (i < stream.frames.size()) {
        // One block = a run of frames sharing the (trial, block) tag.
        const std::size_t begin = i;
        const StreamFrame& head = stream.frames[begin];
        while (i < stream.frames.size() &&
               stream.frames[i].trial_index == head.trial_index &&
               stream.frames[i].block_index == head.block_index) {
            if (stream.frames[i].values.size() != n_channels) {
                const double t = static_cast<double>(i) / stream.sample_rate_hz;
                throw StreamError("window_stream: channel dropout at t=" + std::to_string(t) +
                                  "s (frame " + std::to_string(i) + " carries " +
                                  std::to_string(stream.frames[i].values.size()) + " of " +
                                  std::to_string(n_channels) + " channels)");
            }
            ++i;
        }
        const int block_len = static_cast<int>(i - begin);
        for (int off : window_offsets(block_len, window_len, hop)) {
            Window w;
            w.samples.resize(static_cast<Eigen::Index>(n_channels), window_len);
            for (int col = 0; col < window_len; ++col) {
                const StreamFrame& frame = stream.frames[begin + static_cast<std::size_t>(off + col)];
                for (std::size_t c = 0; c < n_channels; ++c) {
                    w.samples(static_cast<Eigen::Index>(c), col) = frame.values[c];
                }
            }
            w.start_sample = static_cast<int>(begin) + off;
            w.start_time_s = static_cast<double>(w.start_sample) / stream.sample_rate_hz;
            w.block_label = head.block_label;
            w.trial_index = head.trial_index;
            w.block_index = head.block_index;
            out.push_back(std::move(w));
        }
    }
    return out;
}

namespace {

double auc_against_baseline(double score, std::span<const double> baseline) {
    std::vector<double> scores(baseline.begin(), baseline.end());
    std::vector<int> labels(baseline.size(), -1);
    scores.push_back(score);
    labels.push_back(+1);
    return roc_auc(scores, labels).auc;
}

std::int8_t arbitrate(double auc1, double auc2, double gate) {
    const bool g1 = auc1 > gate;
    const bool g2 = auc2 > gate;
    if (g1 && g2) {
        if (auc1 > auc2) return +1;
        if (auc2 > auc1) return -1;
        return 0;  // exact tie
    }
    if (g1) return +1;
    if (g2) return -1;
    return 0;
}

} // namespace

Command decode_window(const Ensemble& e1, const Ensemble& e2, const Window& window,
                      std::span<const double> baseline_e1, std::span<const double> baseline_e2,
                      const DecoderConfig& cfg) {
    const Vector f = featurize_window(window.samples, cfg.pca_k, cfg.center);
    const Decision d1 = vote(e1, f);
    const Decision d2 = vote(e2, f);

    Command cmd;
    if (static_cast<int>(baseline_e1.size()) < cfg.min_baseline ||
        static_cast<int>(baseline_e2.size()) < cfg.min_baseline) {
        return cmd;  // NONE; caller flags the insufficient baseline
    }
    cmd.auc_e1 = static_cast<float>(auc_against_baseline(d1.mean_score, baseline_e1));
    cmd.auc_e2 = static_cast<float>(auc_against_baseline(d2.mean_score, baseline_e2));
    cmd.direction = arbitrate(cmd.auc_e1, cmd.auc_e2, cfg.gate);
    return cmd;
}

bool WindowDecision::same_decisions(const WindowDecision& other) const {
    return start_sample == other.start_sample && block_label == other.block_label &&
           trial_index == other.trial_index && block_index == other.block_index &&
           d1.outcome == other.d1.outcome && d1.positive_votes == other.d1.positive_votes &&
           d1.mean_score == other.d1.mean_score && d2.outcome == other.d2.outcome &&
           d2.positive_votes == other.d2.positive_votes && d2.mean_score == other.d2.mean_score &&
           task_window == other.task_window &&
           insufficient_baseline == other.insufficient_baseline && command == other.command;
}

OnlineDecoder::OnlineDecoder(const Ensemble& e1, const Ensemble& e2, const DecoderConfig& cfg,
                             double sample_rate_hz)
    : e1_(e1), e2_(e2), cfg_(cfg), sample_rate_hz_(sample_rate_hz) {
    e1_.validate();
    e2_.validate();
    if (cfg_.window_len < 1 || cfg_.hop < 1) {
        throw ArgumentError("decoder: window length and hop must be >= 1");
    }
    if (cfg_.pca_k < 1) throw ArgumentError("decoder: pca_k must be >= 1");
    if (e1_.members.front().dim() % cfg_.pca_k != 0) {
        throw ArgumentError("decoder: ensemble dimension is not a multiple of pca_k");
    }
    expected_channels_ = e1_.members.front().dim() / cfg_.pca_k;
}

WindowDecision OnlineDecoder::process_window(const Window& window) {
    WindowDecision wd;
    wd.start_sample = window.start_sample;
    wd.start_time_s = window.start_time_s;
    wd.block_label = window.block_label;
    wd.trial_index = window.trial_index;
    wd.block_index = window.block_index;

    const Vector f = featurize_window(window.samples, cfg_.pca_k, cfg_.center);
    wd.d1 = vote(e1_, f);
    wd.d2 = vote(e2_, f);

    if (window.block_label == TaskLabel::kRest) {
        // Only the rest block preceding a task feeds the rolling baseline;
        // trailing rest still carries the hemodynamic tail-off. No command
        // is emitted either way.
        if (window.block_index == 0) {
            baselines_.e1.push_back(wd.d1.mean_score);
            baselines_.e2.push_back(wd.d2.mean_score);
            while (baselines_.e1.size() > cfg_.baseline_capacity) baselines_.e1.pop_front();
            while (baselines_.e2.size() > cfg_.baseline_capacity) baselines_.e2.pop_front();
        }
        return wd;
    }

    wd.task_window = true;
    wd.command.sequence = next_seq_++;
    if (static_cast<int>(baselines_.e1.size()) < cfg_.min_baseline ||
        static_cast<int>(baselines_.e2.size()) < cfg_.min_baseline) {
        wd.insufficient_baseline = true;
        return wd;
    }
    const std::vector<double> b1(baselines_.e1.begin(), baselines_.e1.end());
    const std::vector<double> b2(baselines_.e2.begin(), baselines_.e2.end());
    wd.command.auc_e1 = static_cast<float>(auc_against_baseline(wd.d1.mean_score, b1));
    wd.command.auc_e2 = static_cast<float>(auc_against_baseline(wd.d2.mean_score, b2));
    wd.command.direction = arbitrate(wd.command.auc_e1, wd.command.auc_e2, cfg_.gate);
    return wd;
}

std::optional<WindowDecision> OnlineDecoder::push_frame(const StreamFrame& frame) {
    if (static_cast<int>(frame.values.size()) != expected_channels_) {
        const double t = static_cast<double>(global_sample_) / sample_rate_hz_;
        throw StreamError("decoder: channel dropout at t=" + std::to_string(t) + "s (frame " +
                          std::to_string(global_sample_) + " carries " +
                          std::to_string(frame.values.size()) + " of " +
                          std::to_string(expected_channels_) + " channels)");
    }
    if (have_block_ && (frame.trial_index != cur_trial_ || frame.block_index != cur_block_)) {
        block_frames_.clear();
        next_offset_ = 0;
        have_block_ = false;
    }
    if (!have_block_) {
        have_block_ = true;
        cur_trial_ = frame.trial_index;
        cur_block_ = frame.block_index;
        cur_label_ = frame.block_label;
        block_start_sample_ = global_sample_;
    }
    block_frames_.push_back(frame.values);
    ++global_sample_;

    const int count = static_cast<int>(block_frames_.size());
    if (count < next_offset_ + cfg_.window_len) return std::nullopt;

    Window w;
    w.samples.resize(expected_channels_, cfg_.window_len);
    for (int col = 0; col < cfg_.window_len; ++col) {
        const auto& vals = block_frames_[static_cast<std::size_t>(next_offset_ + col)];
        for (int c = 0; c < expected_channels_; ++c) {
            w.samples(c, col) = vals[static_cast<std::size_t>(c)];
        }
    }
    w.start_sample = block_start_sample_ + next_offset_;
    w.start_time_s = static_cast<double>(w.start_sample) / sample_rate_hz_;
    w.block_label = cur_label_;
    w.trial_index = cur_trial_;
    w.block_index = cur_block_;
    next_offset_ += cfg_.hop;
    return process_window(w);
}

std::vector<WindowDecision> batch_decode(const SampleStream& stream, const Ensemble& e1,
                                         const Ensemble& e2, const DecoderConfig& cfg) {
    OnlineDecoder decoder(e1, e2, cfg, stream.sample_rate_hz);
    std::vector<WindowDecision> out;
    for (const Window& w : window_stream(stream, cfg.window_len, cfg.hop)) {
        out.push_back(decoder.process_window(w));
    }
    return out;
}

CommandLink::CommandLink(const LinkConfig& cfg)
    : cfg_(cfg), socket_(cfg.local_port), remote_(resolve_ipv4(cfg.host, cfg.remote_port)) {}

SendReport CommandLink::send(const Command& cmd) {
    const std::vector<std::uint8_t> wire = encode_datagram(cmd);
    ++stats_.sent;
    for (int attempt = 0; attempt <= cfg_.retransmits; ++attempt) {
        if (attempt > 0) ++stats_.retransmissions;
        socket_.send_to(wire, remote_);
        const auto deadline =
            std::chrono::steady_clock::now() + std::chrono::milliseconds(cfg_.ack_timeout_ms);
        for (;;) {
            const auto now = std::chrono::steady_clock::now();
            if (now >= deadline) break;
            const int remaining = static_cast<int>(
                std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());
            const auto received = socket_.recv(std::max(remaining, 1));
            if (!received) break;
            try {
                const Message msg = decode_datagram(received->payload);
                if (const Ack* ack = std::get_if<Ack>(&msg); ack && ack->sequence == cmd.sequence) {
                    ++stats_.acked;
                    return {true, attempt + 1};
                }
                // STATE messages and stale ACKs are ignored here.
            } catch (const ProtocolError&) {
                // Garbage on the wire never kills the link.
            }
        }
    }
    ++stats_.lost;
    if (on_loss) on_loss(cmd.sequence);
    return {false, cfg_.retransmits + 1};
}

PipelineReport run_stream_pipeline(const SampleStream& stream, const Ensemble& e1,
                                   const Ensemble& e2, const DecoderConfig& cfg,
                                   CommandLink* link, double speed) {
    BoundedQueue<StreamFrame> queue(64);

    std::thread producer([&] {
        const bool paced = speed > 0.0 && stream.sample_rate_hz > 0.0;
        const auto period = paced ? std::chrono::duration<double>(1.0 / (stream.sample_rate_hz * speed))
                                  : std::chrono::duration<double>(0.0);
        for (const StreamFrame& frame : stream.frames) {
            queue.push(frame);
            if (paced) std::this_thread::sleep_for(period);
        }
        queue.close();
    });

    PipelineReport report;
    OnlineDecoder decoder(e1, e2, cfg, stream.sample_rate_hz);
    while (auto frame = queue.pop()) {
        if (auto wd = decoder.push_frame(*frame)) {
            if (wd->task_window && link != nullptr) {
                link->send(wd->command);
            }
            report.decisions.push_back(std::move(*wd));
        }
    }
    producer.join();
    if (link != nullptr) report.link = link->stats();
    return report;
}

HapticSimulator::HapticSimulator(const SimulatorConfig& cfg) : cfg_(cfg), socket_(cfg.port) {
    state_.step_cm = cfg.step_cm;
}

int HapticSimulator::run(const std::function<void(const HapticState&, const Command&)>& on_step) {
    int applied = 0;
    auto last_traffic = std::chrono::steady_clock::now();
    while (!stop_) {
        if (cfg_.idle_timeout_ms >= 0) {
            const auto idle = std::chrono::duration_cast<std::chrono::milliseconds>(
                                  std::chrono::steady_clock::now() - last_traffic)
                                  .count();
            if (idle > cfg_.idle_timeout_ms) break;
        }
        const auto received = socket_.recv(50);
        if (!received) continue;
        last_traffic = std::chrono::steady_clock::now();
        Message msg;
        try {
            msg = decode_datagram(received->payload);
        } catch (const ProtocolError&) {
            ++protocol_errors_;
            continue;
        }
        const Command* cmd = std::get_if<Command>(&msg);
        if (cmd == nullptr) continue;  // ACK/STATE addressed elsewhere

        state_ = haptic_step(state_, *cmd);
        socket_.send_to(encode_datagram(Ack{cmd->sequence}), received->from);
        if (cfg_.send_state) {
            socket_.send_to(encode_datagram(StateMsg{cmd->sequence, state_.position_cm}),
                            received->from);
        }
        if (on_step) on_step(state_, *cmd);
        ++applied;
        if (cfg_.max_commands > 0 && applied >= cfg_.max_commands) break;
    }
    return applied;
}

} // namespace nbci
