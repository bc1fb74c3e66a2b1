#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "nbci/dataio.hpp"
#include "nbci/ensemble.hpp"
#include "nbci/haptic.hpp"
#include "nbci/protocol.hpp"
#include "nbci/udp.hpp"

namespace nbci {

/// One multichannel sample on the wire-facing stream, tagged with the
/// protocol block it belongs to. Values follow the decoder's channel order.
struct StreamFrame {
    std::vector<double> values;
    TaskLabel block_label = TaskLabel::kRest;
    int trial_index = 0;
    int block_index = 0;
};

struct SampleStream {
    std::vector<StreamFrame> frames;
    double sample_rate_hz = 14.28;
    std::vector<int> channel_ids;  // RCE survivors in ranking order
};

/// Flattens a session into a frame stream restricted to `channels`
/// (given in ranking order).
SampleStream to_stream(const Session& session, const std::vector<int>& channels);

/// A decode window: `samples` is channels x window_len, channels being the
/// RCE survivors in ranking order (20 x 42 in the shipped configuration).
struct Window {
    Matrix samples;
    double start_time_s = 0.0;
    int start_sample = 0;  // global frame index
    TaskLabel block_label = TaskLabel::kRest;
    int trial_index = 0;
    int block_index = 0;

    int n_channels() const noexcept { return static_cast<int>(samples.rows()); }
    int n_samples() const noexcept { return static_cast<int>(samples.cols()); }
};

/// Cuts windows at hop intervals; no window crosses a block boundary.
/// A frame whose value count disagrees with the stream's channel list is a
/// channel dropout: StreamError naming the timestamp.
std::vector<Window> window_stream(const SampleStream& stream, int window_len = 42, int hop = 14);

struct DecoderConfig {
    int window_len = 42;
    int hop = 14;
    int pca_k = 2;
    bool center = false;
    double gate = 0.70;            // AUC must exceed this strictly
    int min_baseline = 10;         // windows required before commands flow
    std::size_t baseline_capacity = 64;
};

/// Rolling ensemble scores from preceding-rest windows, the reference
/// sample for online AUC. Post-task rest windows stay out: the response
/// tail-off would contaminate the baseline.
struct BaselineBuffers {
    std::deque<double> e1;
    std::deque<double> e2;
};

/// Online AUC + gate + arbitration for a single task-period window: each
/// ensemble's score is ranked against the rest-block baseline scores
/// (Mann-Whitney), the gate demands AUC > gate strictly, and the larger
/// AUC picks the direction (exact tie: none). Too few baseline scores
/// yields a NONE command; the caller sees that through the decision flag.
Command decode_window(const Ensemble& e1, const Ensemble& e2, const Window& window,
                      std::span<const double> baseline_e1, std::span<const double> baseline_e2,
                      const DecoderConfig& cfg = {});

/// The decoder's full per-window record.
struct WindowDecision {
    int start_sample = 0;
    double start_time_s = 0.0;
    TaskLabel block_label = TaskLabel::kRest;
    int trial_index = 0;
    int block_index = 0;
    Decision d1;
    Decision d2;
    bool task_window = false;          // command emitted only when true
    bool insufficient_baseline = false;
    Command command;                   // meaningful when task_window

    bool same_decisions(const WindowDecision& other) const;
};

/// Incremental frame-by-frame decoder. Feeding it a session's frames in
/// order produces exactly the decisions of the batch path over
/// window_stream(), bit for bit.
class OnlineDecoder {
public:
    OnlineDecoder(const Ensemble& e1, const Ensemble& e2, const DecoderConfig& cfg,
                  double sample_rate_hz = 14.28);

    /// Consumes one frame; returns a decision when a window completes.
    std::optional<WindowDecision> push_frame(const StreamFrame& frame);

    /// Decides one pre-cut window, updating baselines and sequence state.
    WindowDecision process_window(const Window& window);

    const BaselineBuffers& baselines() const noexcept { return baselines_; }
    std::uint32_t next_sequence() const noexcept { return next_seq_; }

private:
    const Ensemble& e1_;
    const Ensemble& e2_;
    DecoderConfig cfg_;
    double sample_rate_hz_;
    int expected_channels_ = 0;
    std::vector<std::vector<double>> block_frames_;
    int block_start_sample_ = 0;
    int next_offset_ = 0;
    int global_sample_ = 0;
    bool have_block_ = false;
    TaskLabel cur_label_ = TaskLabel::kRest;
    int cur_trial_ = -1;
    int cur_block_ = -1;
    BaselineBuffers baselines_;
    std::uint32_t next_seq_ = 1;
};

/// Batch evaluation: cut all windows first, then decide each in stream
/// order with the same baseline bookkeeping.
std::vector<WindowDecision> batch_decode(const SampleStream& stream, const Ensemble& e1,
                                         const Ensemble& e2, const DecoderConfig& cfg);

/// Bounded multi-producer/consumer queue; push blocks while full
/// (back-pressure), pop blocks while empty and returns nullopt once the
/// queue is closed and drained.
template <typename T>
class BoundedQueue {
public:
    explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

    void push(T value) {
        std::unique_lock lock(mutex_);
        not_full_.wait(lock, [&] { return items_.size() < capacity_ || closed_; });
        if (closed_) return;
        items_.push_back(std::move(value));
        not_empty_.notify_one();
    }

    std::optional<T> pop() {
        std::unique_lock lock(mutex_);
        not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
        if (items_.empty()) return std::nullopt;
        T value = std::move(items_.front());
        items_.pop_front();
        not_full_.notify_one();
        return value;
    }

    void close() {
        std::lock_guard lock(mutex_);
        closed_ = true;
        not_empty_.notify_all();
        not_full_.notify_all();
    }

private:
    std::size_t capacity_;
    std::deque<T> items_;
    bool closed_ = false;
    std::mutex mutex_;
    std::condition_variable not_full_;
    std::condition_variable not_empty_;
};

struct LinkConfig {
    std::string host = "127.0.0.1";
    std::uint16_t remote_port = 7802;
    std::uint16_t local_port = 0;  // 0: ephemeral (the CLI binds 7801)
    int retransmits = 3;           // beyond the first transmission
    int ack_timeout_ms = 50;
};

struct LinkStats {
    long sent = 0;
    long acked = 0;
    long lost = 0;
    long retransmissions = 0;
};

struct SendReport {
    bool acked = false;
    int transmissions = 0;
};

/// Fire-and-forget UDP with acknowledgement and bounded retransmit: a
/// command is retransmitted up to R times and then dropped as a logged
/// loss event.
class CommandLink {
public:
    explicit CommandLink(const LinkConfig& cfg);

    SendReport send(const Command& cmd);

    const LinkStats& stats() const noexcept { return stats_; }
    std::uint16_t local_port() const { return socket_.local_port(); }

    /// Invoked with the sequence number of every dropped command.
    std::function<void(std::uint32_t)> on_loss;

private:
    LinkConfig cfg_;
    UdpSocket socket_;
    UdpEndpoint remote_;
    LinkStats stats_;
};

struct PipelineReport {
    std::vector<WindowDecision> decisions;
    LinkStats link;
};

/// Producer/consumer replay: one thread feeds frames through a bounded
/// queue (capacity 64), the other windows, decodes and (when a link is
/// given) emits task-window commands. speed <= 0 replays as fast as the
/// consumer drains; otherwise frames pace at rate * speed.
PipelineReport run_stream_pipeline(const SampleStream& stream, const Ensemble& e1,
                                   const Ensemble& e2, const DecoderConfig& cfg,
                                   CommandLink* link = nullptr, double speed = 0.0);

struct SimulatorConfig {
    std::uint16_t port = 7802;  // 0: ephemeral
    double step_cm = 1.0;
    int max_commands = 0;       // 0: no bound
    int idle_timeout_ms = -1;   // return after this long without traffic; -1: wait for stop()
    bool send_state = true;
};

/// The haptic device endpoint: a single-threaded event loop over incoming
/// datagrams that steps the simulated pose, acknowledges every command and
/// answers with a STATE message.
class HapticSimulator {
public:
    explicit HapticSimulator(const SimulatorConfig& cfg);

    std::uint16_t port() const { return socket_.local_port(); }
    const HapticState& state() const noexcept { return state_; }
    long protocol_errors() const noexcept { return protocol_errors_; }

    /// Runs until stop(), max_commands, or idle timeout; returns the number
    /// of commands applied. `on_step` fires after each valid command.
    int run(const std::function<void(const HapticState&, const Command&)>& on_step = {});
    void stop() noexcept { stop_ = true; }

private:
    SimulatorConfig cfg_;
    UdpSocket socket_;
    HapticState state_;
    long protocol_errors_ = 0;
    std::atomic<bool> stop_{false};
};

} // namespace nbci
