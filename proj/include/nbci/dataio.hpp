#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nbci/errors.hpp"
#include "nbci/linalg.hpp"
#include "nbci/types.hpp"

namespace nbci {

/// Durations of the Rest -> Task -> Rest blocks of one trial, in seconds.
struct BlockTiming {
    double rest_pre_s = 15.0;
    double task_s = 20.0;
    double rest_post_s = 15.0;
};

/// One recorded trial: oxy-Hb concentration changes, channels x samples.
struct Trial {
    Matrix samples;                // l x m
    TaskLabel label = TaskLabel::kRest;
    double sample_rate_hz = 14.28;
    std::vector<int> channel_ids;  // strictly increasing, each in [1, 45]

    int n_channels() const noexcept { return static_cast<int>(samples.rows()); }
    int n_samples() const noexcept { return static_cast<int>(samples.cols()); }

    void validate() const;
};

struct Session {
    std::vector<Trial> trials;
    BlockTiming timing;
    Condition condition = Condition::kMi;
    std::string subject_id;
    std::uint64_t seed = 0;  // synthetic only
};

struct SessionSet {
    std::vector<Session> sessions;
};

/// Parameters of the synthetic hemodynamic generator that stands in for
/// subject recordings. Task-relevant channels carry a boxcar convolved
/// with a double-gamma hemodynamic response (peak amplitude snr * noise
/// sigma) on top of Gaussian noise and a slow sinusoidal drift; the other
/// channels carry noise and drift only.
struct GeneratorConfig {
    int n_channels = 45;
    std::vector<int> task_channels;
    double hrf_peak_delay_s = 6.0;  // response peak, within [4, 8]
    double snr = 5.0;               // peak amplitude over noise sigma; 0 disables the signal
    double noise_sigma = 1.0;
    double drift_amplitude = 0.2;
    double drift_freq_low_hz = 0.005;
    double drift_freq_high_hz = 0.03;
    double aomi_gain = 1.5;         // extra task amplitude under AOMI
    int trials_per_session = 10;    // alternating RIGHT / LEFT
    double sample_rate_hz = 14.28;
    Condition condition = Condition::kMi;
    std::string subject_prefix = "synth";
    std::uint64_t seed = 0;
};

/// Deterministic for a fixed (config, seed): two runs produce bit-identical
/// sessions. Throws ArgumentError on invalid configs, in particular
/// task channels outside 1..n_channels and an empty task-channel set with
/// snr > 0.
SessionSet generate_synthetic(const GeneratorConfig& config, int sessions,
                              const BlockTiming& timing);

/// The task-response waveform the generator plants (unit peak, zero before
/// task onset), exposed so callers can inspect the planted shape.
std::vector<double> task_response(const GeneratorConfig& config, const BlockTiming& timing);

/// One block cut out of a trial: the windowed samples and their label
/// (task blocks keep the trial label, rest blocks are REST).
struct Segment {
    Matrix window;  // channels x block samples
    TaskLabel label = TaskLabel::kRest;
    int trial_index = 0;
    int block_index = 0;  // 0 = pre rest, 1 = task, 2 = post rest
};

/// Splits every trial into its Rest/Task/Rest blocks. Block sample counts
/// are floor(duration * rate); a timing longer than the recording throws
/// DataError. Zero-length blocks are dropped.
std::vector<Segment> segment_trials(const Session& session);

/// Writes one CSV per trial plus a manifest.json into `dir` (created if
/// missing). Round-trips losslessly at full precision.
void save_dataset(const SessionSet& set, const std::string& dir);

/// Loads a dataset from a directory containing manifest.json (or from the
/// manifest path itself). Parse errors name the file, line and field.
SessionSet load_dataset(const std::string& path);

} // namespace nbci
