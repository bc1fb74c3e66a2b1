#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "nbci/rng.hpp"
#include "nbci/svm.hpp"
#include "support/oracles.hpp"

using namespace nbci;

namespace {

LabeledSet random_set(Rng& rng, int m, int d) {
    LabeledSet set;
    set.x.resize(m, d);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < d; ++j) set.x(i, j) = rng.gaussian();
        set.y.push_back(i % 2 == 0 ? +1 : -1);
    }
    return set;
}

// Classes shifted apart along a random direction; margin >= 2 * shift
// over that direction by construction, so the set is linearly separable.
LabeledSet separable_set(Rng& rng, int m, int d, double shift) {
    LabeledSet set = random_set(rng, m, d);
    Vector dir(d);
    for (int j = 0; j < d; ++j) dir[j] = rng.gaussian();
    dir.normalize();
    for (int i = 0; i < m; ++i) {
        const double side = set.y[static_cast<std::size_t>(i)];
        const double along = set.x.row(i).dot(dir);
        set.x.row(i) += (side * shift - along) * dir.transpose();  // project then offset
    }
    return set;
}

} // namespace

TEST_CASE("gram: orthonormal vectors give the identity") {
    Matrix x = Matrix::Identity(3, 3);
    CHECK((gram(x) - Matrix::Identity(3, 3)).norm() == doctest::Approx(0.0));
}

TEST_CASE("gram: single example") {
    Matrix x(1, 2);
    x << 2.0, 0.0;
    const Matrix k = gram(x);
    CHECK(k.rows() == 1);
    CHECK(k(0, 0) == doctest::Approx(4.0));
}

TEST_CASE("gram: matches the naive double loop and stays symmetric PSD") {
    Rng rng(12);
    std::vector<Vector> examples;
    for (int i = 0; i < 5; ++i) {
        Vector v(3);
        for (int j = 0; j < 3; ++j) v[j] = rng.gaussian();
        examples.push_back(v);
    }
    const Matrix k = gram(examples);
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            CHECK(k(i, j) == doctest::Approx(examples[i].dot(examples[j])));
        }
    }
    CHECK((k - k.transpose()).norm() < 1e-12);
    CHECK(oracles::dense_eig(k).values.minCoeff() >= -1e-8);
}

TEST_CASE("gram: ragged dimensions rejected") {
    std::vector<Vector> examples{Vector::Ones(3), Vector::Ones(2)};
    CHECK_THROWS_AS(gram(examples), ArgumentError);
    CHECK_THROWS_AS(gram(std::vector<Vector>{}), ArgumentError);
}

TEST_CASE("train_svm: symmetric two-point problem") {
    LabeledSet set;
    set.x.resize(2, 2);
    set.x << 1.0, 0.0,
            -1.0, 0.0;
    set.y = {+1, -1};
    const SvmModel model = train_svm(set, 100.0);
    CHECK(model.w[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(model.w[1] == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(model.b == doctest::Approx(0.0).epsilon(1e-8));
    for (int i = 0; i < 2; ++i) {
        const double margin =
            set.y[static_cast<std::size_t>(i)] * decide(model, set.x.row(i).transpose()).score;
        CHECK(margin == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("decide: two-point model scores and the tie convention") {
    LabeledSet set;
    set.x.resize(2, 2);
    set.x << 1.0, 0.0,
            -1.0, 0.0;
    set.y = {+1, -1};
    const SvmModel model = train_svm(set, 100.0);

    Vector z(2);
    z << 3.0, 0.0;
    const auto r = decide(model, z);
    CHECK(r.score == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(r.sign == +1);

    z << 0.0, 0.0;
    const auto tie = decide(model, z);
    CHECK(std::abs(tie.score) < 1e-8);
    CHECK(tie.sign == +1);  // sign(0) = +1

    CHECK_THROWS_AS(decide(model, Vector::Zero(3)), ArgumentError);
}

TEST_CASE("decide: kernel-sum route equals w.z + b on random models") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const LabeledSet set = random_set(rng, 8, 3);
        const SvmModel model = train_svm(set, 2.0);
        for (int probe = 0; probe < 5; ++probe) {
            Vector z(3);
            for (int j = 0; j < 3; ++j) z[j] = rng.gaussian();
            const double direct = model.w.dot(z) + model.b;
            CHECK(std::abs(decide(model, z).score - direct) < 1e-10);
        }
    }
}

TEST_CASE("train_svm: duplicate point with conflicting labels matches the QP oracle") {
    LabeledSet set;
    set.x.resize(2, 2);
    set.x << 0.7, -0.4,
             0.7, -0.4;
    set.y = {+1, -1};
    Vector alpha;
    const SvmModel model = train_svm(set, 1.0, {}, &alpha);
    const auto oracle = oracles::qp_oracle(gram(set.x), set.y, 1.0);
    CHECK(std::abs(dual_objective(model) - oracle.objective) < 1e-5);
    for (int i = 0; i < 2; ++i) {
        const bool at_bound = alpha[i] < 1e-9 || std::abs(alpha[i] - 1.0) < 1e-9;
        const bool interior = alpha[i] > 0.0 && alpha[i] < 1.0;
        CHECK((at_bound || interior));
    }
}

TEST_CASE("train_svm: separable data is fit exactly under a large C") {
    Rng rng(17);
    const LabeledSet set = separable_set(rng, 10, 4, 1.0);
    Vector alpha;
    const SvmModel model = train_svm(set, 1e4, {}, &alpha);
    for (int i = 0; i < set.size(); ++i) {
        const double yf =
            set.y[static_cast<std::size_t>(i)] * decide(model, set.x.row(i).transpose()).score;
        CHECK(decide(model, set.x.row(i).transpose()).sign == set.y[static_cast<std::size_t>(i)]);
        CHECK(std::max(0.0, 1.0 - yf) < 1e-3);  // slack
    }
}

TEST_CASE("train_svm: dual feasibility and KKT residuals on random instances") {
    Rng rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        const int m = 4 + static_cast<int>(rng.below(10));
        const double c = std::exp(rng.uniform(-2.0, 4.0));
        const LabeledSet set = random_set(rng, m, 3);
        Vector alpha;
        const SvmModel model = train_svm(set, c, {}, &alpha);
        double balance = 0.0;
        for (int i = 0; i < m; ++i) {
            CHECK(alpha[i] >= 0.0);
            CHECK(alpha[i] <= c + 1e-12);
            balance += alpha[i] * set.y[static_cast<std::size_t>(i)];
        }
        CHECK(std::abs(balance) < 1e-6);
        CHECK(max_kkt_violation(model, set, alpha) < 1e-6);
    }
}

TEST_CASE("train_svm: objective matches the brute-force oracle on small instances") {
    Rng rng(29);
    for (int trial = 0; trial < 50; ++trial) {
        const int m = 2 + static_cast<int>(rng.below(5));
        LabeledSet set = random_set(rng, m, 2);
        bool pos = false;
        bool neg = false;
        for (int y : set.y) (y == +1 ? pos : neg) = true;
        if (!pos || !neg) continue;
        const double c = std::exp(rng.uniform(-1.5, 3.0));
        const SvmModel model = train_svm(set, c);
        const auto oracle = oracles::qp_oracle(gram(set.x), set.y, c);
        CHECK(dual_objective(model) == doctest::Approx(oracle.objective).epsilon(1e-5));
    }
}

TEST_CASE("train_svm: scaling inputs with C/s^2 keeps the support set") {
    Rng rng(37);
    const LabeledSet set = random_set(rng, 12, 3);
    const double c = 2.0;
    const double s = 3.0;
    Vector alpha_base;
    Vector alpha_scaled;
    train_svm(set, c, {}, &alpha_base);
    LabeledSet scaled = set;
    scaled.x *= s;
    train_svm(scaled, c / (s * s), {}, &alpha_scaled);

    std::set<int> sv_base;
    std::set<int> sv_scaled;
    for (int i = 0; i < set.size(); ++i) {
        if (alpha_base[i] > 1e-9 * c) sv_base.insert(i);
        if (alpha_scaled[i] > 1e-9 * c / (s * s)) sv_scaled.insert(i);
    }
    CHECK(sv_base == sv_scaled);
}

TEST_CASE("train_svm: argument errors") {
    LabeledSet set;
    set.x.resize(2, 1);
    set.x << 1.0, 2.0;
    set.y = {+1, +1};
    CHECK_THROWS_AS(train_svm(set, 1.0), ArgumentError);  // single class
    set.y = {+1, -1};
    CHECK_THROWS_AS(train_svm(set, 0.0), ArgumentError);
    CHECK_THROWS_AS(train_svm(set, -1.0), ArgumentError);
}

TEST_CASE("train_svm: deterministic across runs") {
    Rng rng(41);
    const LabeledSet set = random_set(rng, 14, 4);
    const SvmModel a = train_svm(set, 3.0);
    const SvmModel b = train_svm(set, 3.0);
    CHECK(a.b == b.b);
    CHECK((a.w - b.w).norm() == 0.0);
    CHECK((a.alpha - b.alpha).norm() == 0.0);
}

TEST_CASE("weight_magnitudes: block sums") {
    SvmModel model;
    model.w.resize(3);
    model.w << 1.0, -2.0, 3.0;
    model.support_x.resize(0, 3);
    const auto mags = weight_magnitudes(model, {{0}, {1, 2}});
    CHECK(mags[0] == doctest::Approx(1.0));
    CHECK(mags[1] == doctest::Approx(5.0));

    model.w.setZero();
    const auto zeros = weight_magnitudes(model, {{0}, {1, 2}});
    CHECK(zeros[0] == 0.0);
    CHECK(zeros[1] == 0.0);
}

TEST_CASE("weight_magnitudes: matches the naive per-index sum") {
    Rng rng(47);
    const LabeledSet set = random_set(rng, 10, 6);
    const SvmModel model = train_svm(set, 1.0);
    const auto mags = weight_magnitudes(model, {{0, 1}, {2, 3}, {4, 5}});
    for (int blk = 0; blk < 3; ++blk) {
        const double naive = std::abs(model.w[2 * blk]) + std::abs(model.w[2 * blk + 1]);
        CHECK(mags[static_cast<std::size_t>(blk)] == doctest::Approx(naive));
    }
}

TEST_CASE("weight_magnitudes: non-partitions rejected") {
    SvmModel model;
    model.w = Vector::Ones(3);
    model.support_x.resize(0, 3);
    CHECK_THROWS_AS(weight_magnitudes(model, {{0}, {1}}), ArgumentError);          // missing 2
    CHECK_THROWS_AS(weight_magnitudes(model, {{0, 1}, {1, 2}}), ArgumentError);    // duplicate
    CHECK_THROWS_AS(weight_magnitudes(model, {{0, 1}, {2, 3}}), ArgumentError);    // out of range
}

TEST_CASE("svm-v1 serialization round-trips") {
    Rng rng(53);
    const LabeledSet set = random_set(rng, 9, 3);
    const SvmModel model = train_svm(set, 2.5);
    const SvmModel loaded = svm_from_json(svm_to_json(model));
    CHECK(loaded.b == model.b);
    CHECK(loaded.c == model.c);
    CHECK((loaded.w - model.w).norm() == 0.0);
    CHECK((loaded.alpha - model.alpha).norm() == 0.0);
    Vector z(3);
    for (int j = 0; j < 3; ++j) z[j] = rng.gaussian();
    CHECK(decide(loaded, z).score == decide(model, z).score);

    nlohmann::json bad = svm_to_json(model);
    bad["version"] = "svm-v0";
    CHECK_THROWS_AS(svm_from_json(bad), DataError);
}
