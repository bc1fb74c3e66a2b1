#include "nbci/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nbci/rng.hpp"

namespace fs = std::filesystem;

namespace nbci {

namespace {

constexpr int kMaxChannelId = 45;

int block_samples(double duration_s, double rate_hz) {
    return static_cast<int>(std::floor(duration_s * rate_hz));
}

// Canonical double-gamma impulse response with the peak moved to
// `peak_delay_s` by scaling both time constants.
double double_gamma(double t_s, double peak_delay_s) {
    if (t_s <= 0.0) return 0.0;
    const double a1 = 6.0;
    const double a2 = 12.0;
    const double b1 = peak_delay_s / a1;
    const double b2 = b1;
    const double d1 = a1 * b1;
    const double d2 = a2 * b2;
    const double c = 0.35;
    return std::pow(t_s / d1, a1) * std::exp(-(t_s - d1) / b1) -
           c * std::pow(t_s / d2, a2) * std::exp(-(t_s - d2) / b2);
}

void validate_config(const GeneratorConfig& config) {
    if (config.n_channels < 1 || config.n_channels > kMaxChannelId) {
        throw ArgumentError("generator: n_channels must lie in [1, 45]");
    }
    for (int ch : config.task_channels) {
        if (ch < 1 || ch > config.n_channels) {
            throw ArgumentError("generator: task channel " + std::to_string(ch) +
                                " outside 1.." + std::to_string(config.n_channels));
        }
    }
    if (config.task_channels.empty() && config.snr > 0.0) {
        throw ArgumentError("generator: snr > 0 requested but no task channels configured");
    }
    if (config.hrf_peak_delay_s < 4.0 || config.hrf_peak_delay_s > 8.0) {
        throw ArgumentError("generator: hrf_peak_delay_s must lie in [4, 8]");
    }
    if (config.snr < 0.0) throw ArgumentError("generator: snr must be non-negative");
    if (config.noise_sigma < 0.0) throw ArgumentError("generator: noise sigma must be non-negative");
    if (config.drift_amplitude < 0.0) throw ArgumentError("generator: drift amplitude must be non-negative");
    if (config.aomi_gain <= 1.0) throw ArgumentError("generator: aomi gain must exceed 1");
    if (config.trials_per_session < 1) throw ArgumentError("generator: trials_per_session must be >= 1");
    if (config.sample_rate_hz <= 0.0) throw ArgumentError("generator: sample rate must be positive");
}

} // namespace

void Trial::validate() const {
    if (samples.rows() != static_cast<Eigen::Index>(channel_ids.size())) {
        throw DataError("trial: row count does not match channel_ids");
    }
    if (samples.cols() < 1) throw DataError("trial: no samples");
    if (sample_rate_hz <= 0.0) throw DataError("trial: non-positive sample rate");
    int prev = 0;
    for (int ch : channel_ids) {
        if (ch < 1 || ch > kMaxChannelId) {
            throw DataError("trial: channel id " + std::to_string(ch) + " outside [1, 45]");
        }
        if (ch <= prev) throw DataError("trial: channel ids not strictly increasing");
        prev = ch;
    }
}

std::vector<double> task_response(const GeneratorConfig& config, const BlockTiming& timing) {
    const double rate = config.sample_rate_hz;
    const int m_pre = block_samples(timing.rest_pre_s, rate);
    const int m_task = block_samples(timing.task_s, rate);
    const int m_post = block_samples(timing.rest_post_s, rate);
    const int m = m_pre + m_task + m_post;

    // Boxcar over the task block convolved with the impulse response; the
    // response is causal, so samples before onset stay exactly zero.
    std::vector<double> kernel;
    const double span_s = 32.0;  // impulse response support
    const int kernel_len = static_cast<int>(std::ceil(span_s * rate));
    kernel.reserve(static_cast<std::size_t>(kernel_len));
    for (int i = 0; i < kernel_len; ++i) {
        kernel.push_back(double_gamma(static_cast<double>(i) / rate, config.hrf_peak_delay_s));
    }

    std::vector<double> r(static_cast<std::size_t>(m), 0.0);
    for (int i = m_pre; i < m; ++i) {
        double acc = 0.0;
        for (int j = m_pre; j < std::min(i + 1, m_pre + m_task); ++j) {
            const int lag = i - j;
            if (lag < kernel_len) acc += kernel[static_cast<std::size_t>(lag)];
        }
        r[static_cast<std::size_t>(i)] = acc;
    }
    const double peak = *std::max_element(r.begin(), r.end());
    if (peak > 0.0) {
        for (double& v : r) v /= peak;
    }
    return r;
}

SessionSet generate_synthetic(const GeneratorConfig& config, int sessions,
                              const BlockTiming& timing) {
    validate_config(config);
    if (sessions < 1) throw ArgumentError("generator: sessions must be >= 1");

    const double rate = config.sample_rate_hz;
    const int m = block_samples(timing.rest_pre_s, rate) + block_samples(timing.task_s, rate) +
                  block_samples(timing.rest_post_s, rate);
    if (m < 1) throw ArgumentError("generator: block timing yields no samples");

    const std::vector<double> response = task_response(config, timing);
    const double amplitude = config.snr * config.noise_sigma *
                             (config.condition == Condition::kAomi ? config.aomi_gain : 1.0);

    std::vector<int> channel_ids(static_cast<std::size_t>(config.n_channels));
    for (int c = 0; c < config.n_channels; ++c) channel_ids[static_cast<std::size_t>(c)] = c + 1;

    const Rng root(config.seed);
    SessionSet set;
    set.sessions.reserve(static_cast<std::size_t>(sessions));
    for (int s = 0; s < sessions; ++s) {
        Session session;
        session.timing = timing;
        session.condition = config.condition;
        session.subject_id = config.subject_prefix + "-" + std::to_string(s);
        Rng srng = root.fork(static_cast<std::uint64_t>(s));
        session.seed = srng.seed();

        for (int t = 0; t < config.trials_per_session; ++t) {
            Trial trial;
            trial.label = (t % 2 == 0) ? TaskLabel::kRight : TaskLabel::kLeft;
            trial.sample_rate_hz = rate;
            trial.channel_ids = channel_ids;
            trial.samples.resize(config.n_channels, m);

            for (int c = 0; c < config.n_channels; ++c) {
                const int ch_id = c + 1;
                const bool task_channel =
                    std::find(config.task_channels.begin(), config.task_channels.end(), ch_id) !=
                    config.task_channels.end();
                const double drift_freq = srng.uniform(config.drift_freq_low_hz, config.drift_freq_high_hz);
                const double drift_phase = srng.uniform(0.0, 2.0 * std::numbers::pi);
                for (int i = 0; i < m; ++i) {
                    const double t_s = static_cast<double>(i) / rate;
                    double v = config.noise_sigma * srng.gaussian() +
                               config.drift_amplitude *
                                   std::sin(2.0 * std::numbers::pi * drift_freq * t_s + drift_phase);
                    if (task_channel) {
                        v += amplitude * response[static_cast<std::size_t>(i)];
                    }
                    trial.samples(c, i) = v;
                }
            }
            trial.validate();
            session.trials.push_back(std::move(trial));
        }
        set.sessions.push_back(std::move(session));
    }
    return set;
}

std::vector<Segment> segment_trials(const Session& session) {
    std::vector<Segment> out;
    for (std::size_t t = 0; t < session.trials.size(); ++t) {
        const Trial& trial = session.trials[t];
        trial.validate();
        const double rate = trial.sample_rate_hz;
        const int m_pre = block_samples(session.timing.rest_pre_s, rate);
        const int m_task = block_samples(session.timing.task_s, rate);
        const int m_post = block_samples(session.timing.rest_post_s, rate);
        if (m_pre + m_task + m_post > trial.n_samples()) {
            throw DataError("segment_trials: trial " + std::to_string(t) + " has " +
                            std::to_string(trial.n_samples()) + " samples but timing needs " +
                            std::to_string(m_pre + m_task + m_post));
        }
        const auto emit = [&](int start, int len, TaskLabel label, int block) {
            if (len < 1) return;
            Segment seg;
            seg.window = trial.samples.middleCols(start, len);
            seg.label = label;
            seg.trial_index = static_cast<int>(t);
            seg.block_index = block;
            out.push_back(std::move(seg));
        };
        emit(0, m_pre, TaskLabel::kRest, 0);
        emit(m_pre, m_task, trial.label, 1);
        emit(m_pre + m_task, m_post, TaskLabel::kRest, 2);
    }
    return out;
}

namespace {

std::string trial_filename(std::size_t session, std::size_t trial) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "s%03zu_t%03zu.csv", session, trial);
    return buf;
}

void write_trial_csv(const Trial& trial, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("save_dataset: cannot open '" + path.string() + "'");
    out.precision(17);
    out << 't';
    for (int ch : trial.channel_ids) out << ",ch" << ch;
    out << '\n';
    for (int i = 0; i < trial.n_samples(); ++i) {
        out << static_cast<double>(i) / trial.sample_rate_hz;
        for (int c = 0; c < trial.n_channels(); ++c) out << ',' << trial.samples(c, i);
        out << '\n';
    }
}

struct CsvColumns {
    std::vector<int> channel_ids;   // ids of the used (chN) columns
    std::vector<int> channel_cols;  // their positions in the row
};

CsvColumns parse_header(const std::string& line, const fs::path& file) {
    CsvColumns cols;
    std::stringstream ss(line);
    std::string field;
    int pos = 0;
    int prev_id = 0;
    while (std::getline(ss, field, ',')) {
        if (pos == 0) {
            if (field != "t") {
                throw DataError(file.string() + ":1: malformed header, first column must be 't'");
            }
        } else if (field.rfind("ch", 0) == 0) {
            int id = 0;
            const char* first = field.data() + 2;
            const char* last = field.data() + field.size();
            auto [p, ec] = std::from_chars(first, last, id);
            if (ec != std::errc() || p != last) {
                throw DataError(file.string() + ":1: malformed channel column '" + field + "'");
            }
            if (id <= prev_id) {
                throw DataError(file.string() + ":1: channel ids not strictly increasing at '" +
                                field + "'");
            }
            prev_id = id;
            cols.channel_ids.push_back(id);
            cols.channel_cols.push_back(pos);
        }
        // Other columns (deoxy*, total*, ...) are accepted and ignored.
        ++pos;
    }
    if (cols.channel_ids.empty()) {
        throw DataError(file.string() + ":1: malformed header, no channel columns");
    }
    return cols;
}

Trial read_trial_csv(const fs::path& path, int expected_channels) {
    std::ifstream in(path);
    if (!in) throw DataError("load_dataset: cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(path.string() + ":1: malformed header, empty file");
    }
    const CsvColumns cols = parse_header(line, path);
    if (expected_channels >= 0 && static_cast<int>(cols.channel_ids.size()) != expected_channels) {
        throw DataError(path.string() + ":1: channel count mismatch, manifest declares " +
                        std::to_string(expected_channels) + " channels but header has " +
                        std::to_string(cols.channel_ids.size()));
    }

    std::vector<std::vector<double>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            try {
                std::size_t used = 0;
                fields.push_back(std::stod(field, &used));
                if (used != field.size()) throw std::invalid_argument(field);
            } catch (const std::exception&) {
                throw DataError(path.string() + ":" + std::to_string(lineno) +
                                ": field " + std::to_string(fields.size() + 1) +
                                " is not a number ('" + field + "')");
            }
        }
        std::vector<double> values;
        values.reserve(cols.channel_cols.size());
        for (int col : cols.channel_cols) {
            if (col >= static_cast<int>(fields.size())) {
                throw DataError(path.string() + ":" + std::to_string(lineno) +
                                ": row has " + std::to_string(fields.size()) +
                                " fields, channel column " + std::to_string(col + 1) + " missing");
            }
            values.push_back(fields[static_cast<std::size_t>(col)]);
        }
        rows.push_back(std::move(values));
    }

    Trial trial;
    trial.channel_ids = cols.channel_ids;
    trial.samples.resize(static_cast<Eigen::Index>(cols.channel_ids.size()),
                         static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < cols.channel_ids.size(); ++c) {
            trial.samples(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)) =
                rows[i][c];
        }
    }
    return trial;
}

} // namespace

void save_dataset(const SessionSet& set, const std::string& dir) {
    const fs::path root(dir);
    fs::create_directories(root);

    nlohmann::json manifest;
    manifest["format"] = "nbci-dataset-v1";
    auto sessions = nlohmann::json::array();
    for (std::size_t s = 0; s < set.sessions.size(); ++s) {
        const Session& session = set.sessions[s];
        nlohmann::json js;
        js["subject_id"] = session.subject_id;
        js["condition"] = std::string(to_string(session.condition));
        js["seed"] = session.seed;
        js["blocks"] = nlohmann::json::array({
            {{"kind", "rest"}, {"duration_s", session.timing.rest_pre_s}},
            {{"kind", "task"}, {"duration_s", session.timing.task_s}},
            {{"kind", "rest"}, {"duration_s", session.timing.rest_post_s}},
        });
        double rate = 0.0;
        int n_channels = 0;
        auto trials = nlohmann::json::array();
        for (std::size_t t = 0; t < session.trials.size(); ++t) {
            const Trial& trial = session.trials[t];
            trial.validate();
            rate = trial.sample_rate_hz;
            n_channels = trial.n_channels();
            const std::string file = trial_filename(s, t);
            write_trial_csv(trial, root / file);
            trials.push_back({{"file", file}, {"label", std::string(to_string(trial.label))}});
        }
        js["sample_rate_hz"] = rate;
        js["n_channels"] = n_channels;
        js["trials"] = std::move(trials);
        sessions.push_back(std::move(js));
    }
    manifest["sessions"] = std::move(sessions);

    std::ofstream out(root / "manifest.json");
    if (!out) throw DataError("save_dataset: cannot open manifest in '" + dir + "'");
    out << manifest.dump(2) << '\n';
}

SessionSet load_dataset(const std::string& path) {
    fs::path manifest_path(path);
    if (fs::is_directory(manifest_path)) manifest_path /= "manifest.json";
    std::ifstream in(manifest_path);
    if (!in) throw DataError("load_dataset: cannot open '" + manifest_path.string() + "'");

    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(manifest_path.string() + ": malformed manifest: " + e.what());
    }
    if (manifest.value("format", "") != "nbci-dataset-v1") {
        throw DataError(manifest_path.string() + ": field 'format' must be 'nbci-dataset-v1'");
    }

    const fs::path root = manifest_path.parent_path();
    SessionSet set;
    for (const auto& js : manifest.at("sessions")) {
        Session session;
        session.subject_id = js.at("subject_id").get<std::string>();
        session.condition = condition_from_string(js.at("condition").get<std::string>());
        session.seed = js.at("seed").get<std::uint64_t>();
        const auto& blocks = js.at("blocks");
        if (blocks.size() != 3 || blocks[0].at("kind") != "rest" ||
            blocks[1].at("kind") != "task" || blocks[2].at("kind") != "rest") {
            throw DataError(manifest_path.string() +
                            ": field 'blocks' must be [rest, task, rest]");
        }
        session.timing.rest_pre_s = blocks[0].at("duration_s").get<double>();
        session.timing.task_s = blocks[1].at("duration_s").get<double>();
        session.timing.rest_post_s = blocks[2].at("duration_s").get<double>();
        const double rate = js.at("sample_rate_hz").get<double>();
        const int n_channels = js.value("n_channels", -1);

        for (const auto& jt : js.at("trials")) {
            Trial trial = read_trial_csv(root / jt.at("file").get<std::string>(), n_channels);
            trial.label = task_label_from_string(jt.at("label").get<std::string>());
            trial.sample_rate_hz = rate;
            trial.validate();
            session.trials.push_back(std::move(trial));
        }
        set.sessions.push_back(std::move(session));
    }
    return set;
}

} // namespace nbci
