#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "nbci/metrics.hpp"
#include "nbci/rng.hpp"
#include "support/oracles.hpp"

using namespace nbci;

TEST_CASE("roc_auc: perfect separation") {
    const auto roc = roc_auc({0.9, 0.8, 0.3, 0.1}, {+1, +1, -1, -1});
    CHECK(roc.auc == doctest::Approx(1.0));
    CHECK(roc.region == RegionLabel::kBest);
}

TEST_CASE("roc_auc: all scores tied gives chance level") {
    const auto roc = roc_auc({0.5, 0.5, 0.5, 0.5}, {+1, -1, +1, -1});
    CHECK(roc.auc == doctest::Approx(0.5));
}

TEST_CASE("roc_auc: three of four pairs correct") {
    // positives {0.9, 0.3}, negatives {0.4, 0.2}
    const auto roc = roc_auc({0.9, 0.3, 0.4, 0.2}, {+1, +1, -1, -1});
    CHECK(roc.auc == doctest::Approx(0.75));
}

TEST_CASE("roc_auc: single class is an error") {
    CHECK_THROWS_AS(roc_auc({0.1, 0.2}, {+1, +1}), ArgumentError);
    CHECK_THROWS_AS(roc_auc({0.1, 0.2}, {-1, -1}), ArgumentError);
    CHECK_THROWS_AS(roc_auc({0.1, std::nan("")}, {+1, -1}), ArgumentError);
}

TEST_CASE("roc_auc: pair statistic equals trapezoidal area and naive count") {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(60));
        std::vector<double> scores;
        std::vector<int> labels;
        bool pos = false;
        bool neg = false;
        for (int i = 0; i < n; ++i) {
            // Coarse quantization makes ties common.
            scores.push_back(std::floor(rng.uniform() * 8.0) / 8.0);
            labels.push_back(rng.uniform() < 0.5 ? +1 : -1);
            (labels.back() == +1 ? pos : neg) = true;
        }
        if (!pos || !neg) continue;
        const auto roc = roc_auc(scores, labels);
        CHECK(std::abs(roc.auc - oracles::trapezoid_auc(roc)) < 1e-12);
        CHECK(std::abs(roc.auc - oracles::pair_count_auc(scores, labels)) < 1e-12);
    }
}

TEST_CASE("roc_auc: curve runs from (0,0) to (1,1) monotonically") {
    Rng rng(7);
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 50; ++i) {
        scores.push_back(rng.gaussian());
        labels.push_back(i % 3 == 0 ? +1 : -1);
    }
    const auto roc = roc_auc(scores, labels);
    CHECK(roc.points.front().fpr == 0.0);
    CHECK(roc.points.front().tpr == 0.0);
    CHECK(roc.points.back().fpr == doctest::Approx(1.0));
    CHECK(roc.points.back().tpr == doctest::Approx(1.0));
    for (std::size_t i = 1; i < roc.points.size(); ++i) {
        CHECK(roc.points[i].fpr >= roc.points[i - 1].fpr);
        CHECK(roc.points[i].tpr >= roc.points[i - 1].tpr);
    }
}

TEST_CASE("roc_auc: complement and monotone-transform properties") {
    Rng rng(99);
    std::vector<double> scores;
    std::vector<int> labels;
    std::set<double> seen;
    for (int i = 0; i < 40; ++i) {
        double s = rng.gaussian();
        while (seen.count(s)) s = rng.gaussian();
        seen.insert(s);
        scores.push_back(s);
        labels.push_back(i % 2 == 0 ? +1 : -1);
    }
    const double auc = roc_auc(scores, labels).auc;

    std::vector<double> negated;
    std::vector<double> warped;
    for (double s : scores) {
        negated.push_back(-s);
        warped.push_back(std::exp(s) + 3.0);  // strictly increasing
    }
    CHECK(roc_auc(negated, labels).auc == doctest::Approx(1.0 - auc).epsilon(1e-12));
    CHECK(roc_auc(warped, labels).auc == doctest::Approx(auc).epsilon(1e-12));
}

TEST_CASE("region: paper anchors and boundaries") {
    CHECK(region(0.9499) == RegionLabel::kBest);    // S4, rightward MI
    CHECK(region(0.6866) == RegionLabel::kWorst);   // S3, rightward MI
    CHECK(region(0.80) == RegionLabel::kAccept);    // boundary, open-below intervals
    CHECK(region(0.70) == RegionLabel::kWorst);
    CHECK(region(0.60) == RegionLabel::kFail);
    CHECK(region(1.0) == RegionLabel::kBest);
    CHECK(region(0.0) == RegionLabel::kFail);
    CHECK_THROWS_AS(region(1.5), ArgumentError);
    CHECK_THROWS_AS(region(-0.1), ArgumentError);
}

TEST_CASE("region: every auc maps to exactly one label") {
    for (int i = 0; i <= 1000; ++i) {
        const double auc = i / 1000.0;
        const RegionLabel r = region(auc);
        const int matches = (r == RegionLabel::kBest) + (r == RegionLabel::kAccept) +
                            (r == RegionLabel::kWorst) + (r == RegionLabel::kFail);
        CHECK(matches == 1);
    }
}

TEST_CASE("command_gate: strict threshold") {
    CHECK_FALSE(command_gate(0.70));
    CHECK(command_gate(0.8441));   // Table 2, Subject 4
    CHECK_FALSE(command_gate(0.6589));  // Table 2, Subject 2 session 2
    CHECK(command_gate(0.70 + 1e-12));
}

TEST_CASE("tenfold: sizes, determinism, errors") {
    const FoldPlan even = tenfold(100, 10, 42);
    for (const auto& f : even.folds) CHECK(f.size() == 10);

    const FoldPlan uneven = tenfold(23, 10, 42);
    std::vector<std::size_t> sizes;
    for (const auto& f : uneven.folds) sizes.push_back(f.size());
    std::sort(sizes.begin(), sizes.end());
    CHECK(std::count(sizes.begin(), sizes.end(), 3) == 3);
    CHECK(std::count(sizes.begin(), sizes.end(), 2) == 7);

    // Disjoint cover of 0..m-1.
    std::set<int> all;
    for (const auto& f : uneven.folds) {
        for (int i : f) CHECK(all.insert(i).second);
    }
    CHECK(all.size() == 23);

    const FoldPlan again = tenfold(23, 10, 42);
    CHECK(again.folds == uneven.folds);
    const FoldPlan other = tenfold(23, 10, 43);
    CHECK(other.folds != uneven.folds);

    CHECK_THROWS_AS(tenfold(5, 10, 0), ArgumentError);
    CHECK_THROWS_AS(tenfold(10, 1, 0), ArgumentError);
}

TEST_CASE("tenfold_stratified: every fold sees both classes") {
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) labels.push_back(i < 12 ? +1 : -1);
    const FoldPlan plan = tenfold_stratified(labels, 10, 5);
    std::set<int> all;
    for (const auto& f : plan.folds) {
        bool pos = false;
        bool neg = false;
        for (int i : f) {
            CHECK(all.insert(i).second);
            (labels[static_cast<std::size_t>(i)] == +1 ? pos : neg) = true;
        }
        CHECK(pos);
        CHECK(neg);
    }
    CHECK(all.size() == labels.size());
}

TEST_CASE("write_roc_csv emits the header and all points") {
    const auto roc = roc_auc({0.9, 0.1}, {+1, -1});
    const auto path = std::filesystem::temp_directory_path() / "nbci_roc_test.csv";
    write_roc_csv(roc, path.string());
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "threshold,fpr,tpr");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == static_cast<int>(roc.points.size()));
    std::filesystem::remove(path);
}
