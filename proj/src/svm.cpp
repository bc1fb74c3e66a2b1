#include "nbci/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace nbci {

void LabeledSet::validate(bool require_both_classes) const {
    if (x.rows() != static_cast<Eigen::Index>(y.size())) {
        throw ArgumentError("labeled set: example/label count mismatch");
    }
    if (x.rows() == 0) throw ArgumentError("labeled set: empty");
    if (!x.allFinite()) throw ArgumentError("labeled set: non-finite feature");
    bool pos = false;
    bool neg = false;
    for (int label : y) {
        if (label == +1) {
            pos = true;
        } else if (label == -1) {
            neg = true;
        } else {
            throw ArgumentError("labeled set: labels must be +1 or -1");
        }
    }
    if (require_both_classes && !(pos && neg)) {
        throw ArgumentError("labeled set: training requires both classes");
    }
}

LabeledSet LabeledSet::subset(const std::vector<int>& idx) const {
    LabeledSet out;
    out.x.resize(static_cast<Eigen::Index>(idx.size()), x.cols());
    out.y.reserve(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.x.row(static_cast<Eigen::Index>(i)) = x.row(idx[i]);
        out.y.push_back(y[static_cast<std::size_t>(idx[i])]);
    }
    return out;
}

Matrix gram(const Matrix& examples, Kernel kernel) {
    if (examples.rows() == 0) throw ArgumentError("gram: empty example list");
    switch (kernel) {
        case Kernel::kLinear:
            return examples * examples.transpose();
    }
    throw ArgumentError("gram: unknown kernel");
}

Matrix gram(const std::vector<Vector>& examples, Kernel kernel) {
    if (examples.empty()) throw ArgumentError("gram: empty example list");
    const Eigen::Index d = examples.front().size();
    Matrix x(static_cast<Eigen::Index>(examples.size()), d);
    for (std::size_t i = 0; i < examples.size(); ++i) {
        if (examples[i].size() != d) {
            throw ArgumentError("gram: example " + std::to_string(i) +
                                " has dimension " + std::to_string(examples[i].size()) +
                                ", expected " + std::to_string(d));
        }
        x.row(static_cast<Eigen::Index>(i)) = examples[i];
    }
    return gram(x, kernel);
}

namespace {

constexpr double kQuadFloor = 1e-12;

// Maximal-violating-pair SMO on
//   min 1/2 a^T Q a - e^T a   s.t.  y^T a = 0, 0 <= a <= C,
// with Q_ij = y_i y_j K_ij. Optimality holds when
//   m(a) = max_{i in I_up} -y_i G_i  <=  M(a) = min_{i in I_low} -y_i G_i,
// and any b in [M(a), m(a)]... (at optimum the bracket closes; we take the
// midpoint, or the mean over free vectors when those exist).
struct SmoResult {
    Vector alpha;
    double b;
};

SmoResult smo_solve(const Matrix& k, const std::vector<int>& y, double c,
                    const SvmOptions& opts) {
    const int m = static_cast<int>(y.size());
    Vector alpha = Vector::Zero(m);
    Vector grad = Vector::Constant(m, -1.0);  // G_i = (Q a)_i - 1

    const auto in_up = [&](int i) {
        return (y[static_cast<std::size_t>(i)] == +1 && alpha[i] < c) ||
               (y[static_cast<std::size_t>(i)] == -1 && alpha[i] > 0.0);
    };
    const auto in_low = [&](int i) {
        return (y[static_cast<std::size_t>(i)] == -1 && alpha[i] < c) ||
               (y[static_cast<std::size_t>(i)] == +1 && alpha[i] > 0.0);
    };

    double gap = 0.0;
    for (long update = 0;; ++update) {
        // Working pair: i is the maximal KKT violator in I_up; j is picked
        // among the violating I_low members by largest second-order
        // objective decrease (first-order-only selection zigzags on
        // ill-conditioned data).
        int i = -1;
        double up_best = -std::numeric_limits<double>::infinity();
        double low_best = std::numeric_limits<double>::infinity();
        for (int t = 0; t < m; ++t) {
            const double v = -y[static_cast<std::size_t>(t)] * grad[t];
            if (in_up(t) && v > up_best) {
                up_best = v;
                i = t;
            }
            if (in_low(t) && v < low_best) low_best = v;
        }
        gap = up_best - low_best;
        if (i < 0 || !std::isfinite(low_best) || gap < opts.tol) break;
        if (update >= opts.max_updates) {
            throw NumericError("train_svm: update cap reached before convergence", gap);
        }

        int j = -1;
        double gain_best = -std::numeric_limits<double>::infinity();
        for (int t = 0; t < m; ++t) {
            if (!in_low(t)) continue;
            const double vt = -y[static_cast<std::size_t>(t)] * grad[t];
            const double b_it = up_best - vt;
            if (b_it <= 0.0) continue;
            double a_it = k(i, i) + k(t, t) - 2.0 * k(i, t);
            if (a_it <= 0.0) a_it = kQuadFloor;
            const double gain = b_it * b_it / a_it;
            if (gain > gain_best) {
                gain_best = gain;
                j = t;
            }
        }
        if (j < 0) break;

        const int yi = y[static_cast<std::size_t>(i)];
        const int yj = y[static_cast<std::size_t>(j)];
        const double old_ai = alpha[i];
        const double old_aj = alpha[j];

        if (yi != yj) {
            // Curvature along the feasible direction (d_i = d_j = +1):
            // Q_ii + Q_jj + 2 Q_ij with Q_ij = y_i y_j K_ij = -K_ij here.
            double quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
            if (quad <= 0.0) quad = kQuadFloor;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0 && alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = diff;
            } else if (diff <= 0.0 && alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0 && alpha[i] > c) {
                alpha[i] = c;
                alpha[j] = c - diff;
            } else if (diff <= 0.0 && alpha[j] > c) {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            double quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
            if (quad <= 0.0) quad = kQuadFloor;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c && alpha[i] > c) {
                alpha[i] = c;
                alpha[j] = sum - c;
            } else if (sum <= c && alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > c && alpha[j] > c) {
                alpha[j] = c;
                alpha[i] = sum - c;
            } else if (sum <= c && alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        const double dai = (alpha[i] - old_ai) * yi;
        const double daj = (alpha[j] - old_aj) * yj;
        for (int t = 0; t < m; ++t) {
            grad[t] += y[static_cast<std::size_t>(t)] * (k(t, i) * dai + k(t, j) * daj);
        }
    }

    // Bias: mean of y_i - u_i over free vectors (that difference equals
    // -y_i G_i); otherwise midpoint of the bound-derived bracket.
    double free_sum = 0.0;
    int free_count = 0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int t = 0; t < m; ++t) {
        const double v = -y[static_cast<std::size_t>(t)] * grad[t];
        if (alpha[t] > 0.0 && alpha[t] < c) {
            free_sum += v;
            ++free_count;
        }
        if (in_up(t)) lo = std::max(lo, v);
        if (in_low(t)) hi = std::min(hi, v);
    }
    double b = 0.0;
    if (free_count > 0) {
        b = free_sum / free_count;
    } else if (std::isfinite(lo) && std::isfinite(hi)) {
        b = 0.5 * (lo + hi);
    } else if (std::isfinite(lo)) {
        b = lo;
    } else if (std::isfinite(hi)) {
        b = hi;
    }
    return {std::move(alpha), b};
}

} // namespace

SvmModel train_svm(const LabeledSet& data, double c, const SvmOptions& opts,
                   Vector* full_alpha_out) {
    if (!(c > 0.0)) throw ArgumentError("train_svm: C must be positive");
    data.validate(/*require_both_classes=*/true);

    const Matrix k = gram(data.x, Kernel::kLinear);
    const SmoResult sol = smo_solve(k, data.y, c, opts);
    if (full_alpha_out != nullptr) *full_alpha_out = sol.alpha;

    SvmModel model;
    model.kernel = Kernel::kLinear;
    model.c = c;
    model.b = sol.b;

    std::vector<int> sv;
    for (int i = 0; i < data.size(); ++i) {
        if (sol.alpha[i] > 0.0) sv.push_back(i);
    }
    model.support_x.resize(static_cast<Eigen::Index>(sv.size()), data.x.cols());
    model.alpha.resize(static_cast<Eigen::Index>(sv.size()));
    model.support_y.reserve(sv.size());
    for (std::size_t i = 0; i < sv.size(); ++i) {
        model.support_x.row(static_cast<Eigen::Index>(i)) = data.x.row(sv[i]);
        model.alpha[static_cast<Eigen::Index>(i)] = sol.alpha[sv[i]];
        model.support_y.push_back(data.y[static_cast<std::size_t>(sv[i])]);
    }

    model.w = Vector::Zero(data.x.cols());
    for (std::size_t i = 0; i < sv.size(); ++i) {
        model.w += model.alpha[static_cast<Eigen::Index>(i)] * model.support_y[i] *
                   model.support_x.row(static_cast<Eigen::Index>(i)).transpose();
    }
    return model;
}

DecideResult decide(const SvmModel& model, const Vector& z) {
    if (z.size() != model.support_x.cols()) {
        throw ArgumentError("decide: pattern dimension " + std::to_string(z.size()) +
                            " does not match model dimension " +
                            std::to_string(model.support_x.cols()));
    }
    double score = model.b;
    for (Eigen::Index i = 0; i < model.alpha.size(); ++i) {
        score += model.alpha[i] * model.support_y[static_cast<std::size_t>(i)] *
                 model.support_x.row(i).dot(z);
    }
    return {score, score < 0.0 ? -1 : +1};
}

std::vector<double> weight_magnitudes(const SvmModel& model,
                                      const std::vector<std::vector<int>>& blocks) {
    const int d = model.dim();
    std::vector<int> seen(static_cast<std::size_t>(d), 0);
    for (const auto& block : blocks) {
        for (int idx : block) {
            if (idx < 0 || idx >= d) {
                throw ArgumentError("weight_magnitudes: feature index out of range");
            }
            ++seen[static_cast<std::size_t>(idx)];
        }
    }
    for (int count : seen) {
        if (count != 1) {
            throw ArgumentError("weight_magnitudes: blocks do not partition the feature indices");
        }
    }
    std::vector<double> out;
    out.reserve(blocks.size());
    for (const auto& block : blocks) {
        double s = 0.0;
        for (int idx : block) s += std::abs(model.w[idx]);
        out.push_back(s);
    }
    return out;
}

double dual_objective(const SvmModel& model) {
    const Eigen::Index s = model.alpha.size();
    double obj = model.alpha.sum();
    for (Eigen::Index i = 0; i < s; ++i) {
        for (Eigen::Index j = 0; j < s; ++j) {
            obj -= 0.5 * model.alpha[i] * model.alpha[j] *
                   model.support_y[static_cast<std::size_t>(i)] *
                   model.support_y[static_cast<std::size_t>(j)] *
                   model.support_x.row(i).dot(model.support_x.row(j));
        }
    }
    return obj;
}

double max_kkt_violation(const SvmModel& model, const LabeledSet& data,
                         const Vector& full_alpha) {
    data.validate(false);
    if (full_alpha.size() != data.x.rows()) {
        throw ArgumentError("max_kkt_violation: alpha size does not match data");
    }
    double worst = 0.0;
    for (int i = 0; i < data.size(); ++i) {
        const double a = full_alpha[i];
        const double yf = data.y[static_cast<std::size_t>(i)] * decide(model, data.x.row(i).transpose()).score;
        double v = 0.0;
        if (a <= 0.0) {
            v = 1.0 - yf;           // must sit on or outside the margin
        } else if (a >= model.c) {
            v = yf - 1.0;           // must sit on or inside the margin
        } else {
            v = std::abs(yf - 1.0); // free vectors sit on the margin
        }
        worst = std::max(worst, v);
    }
    return worst;
}

nlohmann::json svm_to_json(const SvmModel& model) {
    nlohmann::json j;
    j["version"] = "svm-v1";
    j["kernel"] = "linear";
    j["C"] = model.c;
    j["b"] = model.b;
    j["alpha"] = std::vector<double>(model.alpha.begin(), model.alpha.end());
    j["support_y"] = model.support_y;
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < model.support_x.rows(); ++i) {
        rows.push_back(std::vector<double>(model.support_x.row(i).begin(),
                                           model.support_x.row(i).end()));
    }
    j["support_x"] = std::move(rows);
    j["dim"] = model.dim();
    return j;
}

SvmModel svm_from_json(const nlohmann::json& j) {
    if (j.value("version", "") != "svm-v1") {
        throw DataError("svm_from_json: expected version 'svm-v1'");
    }
    if (j.value("kernel", "") != "linear") {
        throw DataError("svm_from_json: unknown kernel '" + j.value("kernel", std::string()) + "'");
    }
    SvmModel model;
    model.c = j.at("C").get<double>();
    model.b = j.at("b").get<double>();
    const auto alpha = j.at("alpha").get<std::vector<double>>();
    model.support_y = j.at("support_y").get<std::vector<int>>();
    const auto& rows = j.at("support_x");
    const int d = j.at("dim").get<int>();
    if (rows.size() != alpha.size() || model.support_y.size() != alpha.size()) {
        throw DataError("svm_from_json: field 'alpha'/'support_y'/'support_x' sizes disagree");
    }
    model.alpha = Eigen::Map<const Vector>(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
    model.support_x.resize(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto row = rows[i].get<std::vector<double>>();
        if (static_cast<int>(row.size()) != d) {
            throw DataError("svm_from_json: support vector " + std::to_string(i) +
                            " has wrong dimension");
        }
        model.support_x.row(static_cast<Eigen::Index>(i)) =
            Eigen::Map<const Vector>(row.data(), d);
    }
    model.w = Vector::Zero(d);
    for (Eigen::Index i = 0; i < model.alpha.size(); ++i) {
        model.w += model.alpha[i] * model.support_y[static_cast<std::size_t>(i)] *
                   model.support_x.row(i).transpose();
    }
    return model;
}

} // namespace nbci
