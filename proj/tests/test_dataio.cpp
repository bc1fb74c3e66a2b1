#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "nbci/dataio.hpp"
#include "nbci/rng.hpp"

using namespace nbci;
namespace fs = std::filesystem;

namespace {

GeneratorConfig small_config(std::uint64_t seed) {
    GeneratorConfig cfg;
    cfg.n_channels = 5;
    cfg.task_channels = {3};
    cfg.trials_per_session = 4;
    cfg.seed = seed;
    return cfg;
}

bool identical(const SessionSet& a, const SessionSet& b) {
    if (a.sessions.size() != b.sessions.size()) return false;
    for (std::size_t s = 0; s < a.sessions.size(); ++s) {
        const Session& sa = a.sessions[s];
        const Session& sb = b.sessions[s];
        if (sa.subject_id != sb.subject_id || sa.condition != sb.condition ||
            sa.seed != sb.seed || sa.trials.size() != sb.trials.size()) {
            return false;
        }
        for (std::size_t t = 0; t < sa.trials.size(); ++t) {
            const Trial& ta = sa.trials[t];
            const Trial& tb = sb.trials[t];
            if (ta.label != tb.label || ta.channel_ids != tb.channel_ids) return false;
            if (ta.samples.rows() != tb.samples.rows() || ta.samples.cols() != tb.samples.cols()) {
                return false;
            }
            if (ta.samples != tb.samples) return false;  // exact, bitwise-equal doubles
        }
    }
    return true;
}

// Independent reference for the planted response: direct double-gamma
// convolution of the task boxcar, normalized to unit peak.
std::vector<double> reference_response(double rate, double rest_pre_s, double task_s,
                                       double rest_post_s, double peak_delay_s) {
    const int m_pre = static_cast<int>(std::floor(rest_pre_s * rate));
    const int m_task = static_cast<int>(std::floor(task_s * rate));
    const int m = m_pre + m_task + static_cast<int>(std::floor(rest_post_s * rate));
    const auto hrf = [&](double t) {
        if (t <= 0.0) return 0.0;
        const double b1 = peak_delay_s / 6.0;
        const double d1 = 6.0 * b1;
        const double d2 = 12.0 * b1;
        return std::pow(t / d1, 6.0) * std::exp(-(t - d1) / b1) -
               0.35 * std::pow(t / d2, 12.0) * std::exp(-(t - d2) / b1);
    };
    std::vector<double> r(static_cast<std::size_t>(m), 0.0);
    for (int i = 0; i < m; ++i) {
        double acc = 0.0;
        for (int j = m_pre; j < std::min(i + 1, m_pre + m_task); ++j) {
            acc += hrf((i - j) / rate);
        }
        r[static_cast<std::size_t>(i)] = acc;
    }
    const double peak = *std::max_element(r.begin(), r.end());
    for (double& v : r) v /= peak;
    return r;
}

} // namespace

TEST_CASE("generator: identical seeds give bit-identical session sets") {
    const BlockTiming timing{10.0, 10.0, 10.0};
    const SessionSet a = generate_synthetic(small_config(7), 2, timing);
    const SessionSet b = generate_synthetic(small_config(7), 2, timing);
    CHECK(identical(a, b));
    const SessionSet c = generate_synthetic(small_config(8), 2, timing);
    CHECK_FALSE(identical(a, c));
}

TEST_CASE("generator: snr=0 leaves task channels indistinguishable") {
    GeneratorConfig cfg = small_config(19);
    cfg.snr = 0.0;
    cfg.drift_amplitude = 0.0;
    const BlockTiming timing{10.0, 15.0, 10.0};
    const SessionSet set = generate_synthetic(cfg, 1, timing);

    // Two-sample mean test between the task channel and a non-task channel
    // over the task block, pooled across trials.
    std::vector<double> task_vals;
    std::vector<double> other_vals;
    for (const Segment& seg : segment_trials(set.sessions.front())) {
        if (seg.block_index != 1) continue;
        for (int i = 0; i < seg.window.cols(); ++i) {
            task_vals.push_back(seg.window(2, i));   // channel 3
            other_vals.push_back(seg.window(0, i));  // channel 1
        }
    }
    const auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    const auto var = [&](const std::vector<double>& v, double mu) {
        double s = 0.0;
        for (double x : v) s += (x - mu) * (x - mu);
        return s / static_cast<double>(v.size() - 1);
    };
    const double m1 = mean(task_vals);
    const double m2 = mean(other_vals);
    const double z = std::abs(m1 - m2) /
                     std::sqrt(var(task_vals, m1) / task_vals.size() +
                               var(other_vals, m2) / other_vals.size());
    CHECK(z < 4.0);  // no detectable mean shift
}

TEST_CASE("generator: snr=5 lifts the task-block mean by more than 3 noise sigmas") {
    GeneratorConfig cfg;
    cfg.n_channels = 10;
    cfg.task_channels = {3, 9};
    cfg.snr = 5.0;
    cfg.drift_amplitude = 0.0;
    cfg.trials_per_session = 10;
    cfg.seed = 333;
    const BlockTiming timing{15.0, 20.0, 15.0};
    const SessionSet set = generate_synthetic(cfg, 1, timing);

    // Independent oracle: expected lift over the pre-task rest block (which
    // carries no response by causality) is snr * sigma * mean reference
    // response across the task block, i.e. 5 * 0.617 = 3.08 noise sigmas.
    const auto ref = reference_response(cfg.sample_rate_hz, 15.0, 20.0, 15.0, cfg.hrf_peak_delay_s);
    const int m_pre = static_cast<int>(std::floor(15.0 * cfg.sample_rate_hz));
    const int m_task = static_cast<int>(std::floor(20.0 * cfg.sample_rate_hz));
    double ref_mean = 0.0;
    for (int i = m_pre; i < m_pre + m_task; ++i) ref_mean += ref[static_cast<std::size_t>(i)];
    ref_mean /= m_task;
    const double expected_lift = cfg.snr * cfg.noise_sigma * ref_mean;

    double task_sum = 0.0;
    double rest_sum = 0.0;
    long task_n = 0;
    long rest_n = 0;
    for (const Segment& seg : segment_trials(set.sessions.front())) {
        if (seg.block_index == 2) continue;  // post-rest carries HRF tail-off
        for (int i = 0; i < seg.window.cols(); ++i) {
            if (seg.block_index == 1) {
                task_sum += seg.window(2, i);
                ++task_n;
            } else {
                rest_sum += seg.window(2, i);
                ++rest_n;
            }
        }
    }
    const double lift = task_sum / task_n - rest_sum / rest_n;
    CHECK(lift > 3.0 * cfg.noise_sigma);
    CHECK(lift == doctest::Approx(expected_lift).epsilon(0.05));
}

TEST_CASE("generator: response is causal (zero before task onset)") {
    GeneratorConfig cfg = small_config(5);
    // Planted amplitude is snr * sigma; a tiny sigma with a huge snr keeps
    // the response at unit scale while silencing the noise floor.
    cfg.noise_sigma = 1e-9;
    cfg.snr = 1e9;
    cfg.drift_amplitude = 0.0;
    const BlockTiming timing{12.0, 10.0, 8.0};
    const SessionSet set = generate_synthetic(cfg, 1, timing);
    const Trial& trial = set.sessions.front().trials.front();
    const int m_pre = static_cast<int>(std::floor(12.0 * cfg.sample_rate_hz));
    for (int i = 0; i < m_pre; ++i) {
        CHECK(std::abs(trial.samples(2, i)) < 1e-6);
    }
    double energy = 0.0;
    for (int i = m_pre; i < trial.n_samples(); ++i) energy += std::abs(trial.samples(2, i));
    CHECK(energy > 1.0);
}

TEST_CASE("generator: AOMI scales the planted amplitude by the configured gain") {
    GeneratorConfig mi = small_config(11);
    mi.noise_sigma = 1e-9;
    mi.snr = 1e9;
    mi.drift_amplitude = 0.0;
    GeneratorConfig aomi = mi;
    aomi.condition = Condition::kAomi;
    const BlockTiming timing{8.0, 10.0, 8.0};
    const SessionSet set_mi = generate_synthetic(mi, 1, timing);
    const SessionSet set_aomi = generate_synthetic(aomi, 1, timing);
    const Trial& t_mi = set_mi.sessions.front().trials.front();
    const Trial& t_aomi = set_aomi.sessions.front().trials.front();
    const int peak_idx = static_cast<int>(std::floor(8.0 * mi.sample_rate_hz)) +
                         static_cast<int>(std::floor(7.0 * mi.sample_rate_hz));
    CHECK(t_aomi.samples(2, peak_idx) ==
          doctest::Approx(1.5 * t_mi.samples(2, peak_idx)).epsilon(1e-6));
}

TEST_CASE("generator: configuration errors") {
    const BlockTiming timing{5.0, 5.0, 5.0};
    GeneratorConfig cfg = small_config(1);
    cfg.task_channels = {};
    CHECK_THROWS_AS(generate_synthetic(cfg, 1, timing), ArgumentError);  // snr > 0, no channels
    cfg.snr = 0.0;
    CHECK_NOTHROW(generate_synthetic(cfg, 1, timing));

    cfg = small_config(1);
    cfg.task_channels = {9};  // beyond n_channels = 5
    CHECK_THROWS_AS(generate_synthetic(cfg, 1, timing), ArgumentError);

    cfg = small_config(1);
    cfg.hrf_peak_delay_s = 3.0;
    CHECK_THROWS_AS(generate_synthetic(cfg, 1, timing), ArgumentError);

    CHECK_THROWS_AS(generate_synthetic(small_config(1), 0, timing), ArgumentError);
}

TEST_CASE("segment_trials: block sample counts at 14.28 Hz") {
    GeneratorConfig cfg = small_config(3);
    cfg.trials_per_session = 5;
    const BlockTiming timing{15.0, 20.0, 15.0};
    const SessionSet set = generate_synthetic(cfg, 1, timing);
    const auto segments = segment_trials(set.sessions.front());
    REQUIRE(segments.size() == 15);  // 5 trials x 3 blocks
    for (std::size_t i = 0; i < segments.size(); i += 3) {
        CHECK(segments[i].window.cols() == 214);      // floor(15 * 14.28)
        CHECK(segments[i].label == TaskLabel::kRest);
        CHECK(segments[i + 1].window.cols() == 285);  // floor(20 * 14.28)
        CHECK(segments[i + 1].label != TaskLabel::kRest);
        CHECK(segments[i + 2].window.cols() == 214);
        CHECK(segments[i + 2].label == TaskLabel::kRest);
    }

    int rest = 0;
    int task = 0;
    for (const auto& seg : segments) {
        (seg.label == TaskLabel::kRest ? rest : task) += 1;
    }
    CHECK(rest >= 2 * task);  // two rest blocks per task block
}

TEST_CASE("segment_trials: zero task duration emits only rest examples") {
    GeneratorConfig cfg = small_config(3);
    cfg.snr = 0.0;
    cfg.task_channels = {};
    const BlockTiming timing{10.0, 0.0, 10.0};
    const SessionSet set = generate_synthetic(cfg, 1, timing);
    for (const auto& seg : segment_trials(set.sessions.front())) {
        CHECK(seg.label == TaskLabel::kRest);
    }
}

TEST_CASE("segment_trials: timing longer than the recording fails") {
    GeneratorConfig cfg = small_config(3);
    const SessionSet set = generate_synthetic(cfg, 1, BlockTiming{5.0, 5.0, 5.0});
    Session session = set.sessions.front();
    session.timing = BlockTiming{20.0, 20.0, 20.0};
    CHECK_THROWS_AS(segment_trials(session), DataError);
}

TEST_CASE("dataset: save/load round-trip is lossless") {
    const BlockTiming timing{6.0, 8.0, 6.0};
    const SessionSet set = generate_synthetic(small_config(21), 2, timing);
    const fs::path dir = fs::temp_directory_path() / "nbci_dataset_roundtrip";
    fs::remove_all(dir);
    save_dataset(set, dir.string());
    const SessionSet loaded = load_dataset(dir.string());
    CHECK(identical(set, loaded));

    // save(load(p)) == load(p)
    const fs::path dir2 = fs::temp_directory_path() / "nbci_dataset_roundtrip2";
    fs::remove_all(dir2);
    save_dataset(loaded, dir2.string());
    CHECK(identical(load_dataset(dir2.string()), loaded));
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("dataset: empty set round-trips") {
    const fs::path dir = fs::temp_directory_path() / "nbci_dataset_empty";
    fs::remove_all(dir);
    save_dataset(SessionSet{}, dir.string());
    CHECK(load_dataset(dir.string()).sessions.empty());
    fs::remove_all(dir);
}

namespace {

fs::path write_fixture(const std::string& name, const std::string& manifest,
                       const std::string& csv_name, const std::string& csv) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "manifest.json") << manifest;
    if (!csv_name.empty()) std::ofstream(dir / csv_name) << csv;
    return dir;
}

const char* kManifestTemplate = R"({
  "format": "nbci-dataset-v1",
  "sessions": [{
    "subject_id": "s0", "condition": "MI", "seed": 0,
    "sample_rate_hz": 14.28, "n_channels": %N%,
    "blocks": [{"kind":"rest","duration_s":0.1},{"kind":"task","duration_s":0.0},{"kind":"rest","duration_s":0.0}],
    "trials": [{"file": "t.csv", "label": "RIGHT"}]
  }]
})";

std::string manifest_with_channels(int n) {
    std::string s = kManifestTemplate;
    s.replace(s.find("%N%"), 3, std::to_string(n));
    return s;
}

} // namespace

TEST_CASE("dataset: channel count mismatch names the problem") {
    const fs::path dir = write_fixture("nbci_dataset_mismatch", manifest_with_channels(3),
                                       "t.csv", "t,ch1,ch2\n0,1.0,2.0\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir.string()),
                         doctest::Contains("channel count mismatch"), DataError);
    fs::remove_all(dir);
}

TEST_CASE("dataset: non-monotone channel ids are a parse error") {
    const fs::path dir = write_fixture("nbci_dataset_order", manifest_with_channels(2),
                                       "t.csv", "t,ch3,ch2\n0,1.0,2.0\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir.string()),
                         doctest::Contains("strictly increasing"), DataError);
    fs::remove_all(dir);
}

TEST_CASE("dataset: malformed header and fields name file and line") {
    const fs::path bad_header = write_fixture("nbci_dataset_header", manifest_with_channels(2),
                                              "t.csv", "time,ch1,ch2\n0,1.0,2.0\n");
    CHECK_THROWS_WITH_AS(load_dataset(bad_header.string()), doctest::Contains(":1:"), DataError);
    fs::remove_all(bad_header);

    const fs::path bad_field = write_fixture("nbci_dataset_field", manifest_with_channels(2),
                                             "t.csv", "t,ch1,ch2\n0,1.0,huh\n");
    CHECK_THROWS_WITH_AS(load_dataset(bad_field.string()), doctest::Contains(":2:"), DataError);
    fs::remove_all(bad_field);
}

TEST_CASE("dataset: deoxy and total columns are accepted but ignored") {
    const fs::path dir = write_fixture(
        "nbci_dataset_deoxy", manifest_with_channels(2), "t.csv",
        "t,ch1,deoxy1,ch2,total1\n0,1.0,9.0,2.0,9.0\n0.07,3.0,9.0,4.0,9.0\n");
    const SessionSet set = load_dataset(dir.string());
    const Trial& trial = set.sessions.front().trials.front();
    CHECK(trial.channel_ids == std::vector<int>{1, 2});
    CHECK(trial.samples(0, 0) == 1.0);
    CHECK(trial.samples(1, 1) == 4.0);
    fs::remove_all(dir);
}

TEST_CASE("task_response: unit peak near the configured delay") {
    GeneratorConfig cfg = small_config(1);
    const BlockTiming timing{10.0, 20.0, 10.0};
    const auto r = task_response(cfg, timing);
    const double peak = *std::max_element(r.begin(), r.end());
    CHECK(peak == doctest::Approx(1.0));
    const int m_pre = static_cast<int>(std::floor(10.0 * cfg.sample_rate_hz));
    for (int i = 0; i < m_pre; ++i) CHECK(r[static_cast<std::size_t>(i)] == 0.0);
}
