#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nbci/errors.hpp"
#include "nbci/linalg.hpp"

namespace nbci {

/// Training set: one example per row of x, labels in {+1, -1}.
struct LabeledSet {
    Matrix x;            // m x d
    std::vector<int> y;  // m entries, +1 or -1

    int size() const noexcept { return static_cast<int>(x.rows()); }
    int dim() const noexcept { return static_cast<int>(x.cols()); }

    /// Throws ArgumentError unless sizes agree, labels are +/-1 and
    /// features are finite. `require_both_classes` additionally demands at
    /// least one example of each class.
    void validate(bool require_both_classes) const;

    /// Rows listed in `idx`, in order.
    LabeledSet subset(const std::vector<int>& idx) const;
};

enum class Kernel { kLinear };

/// Trained soft-margin SVM: dual coefficients over the retained support
/// vectors, the bias, and (for the linear kernel) the explicit weight
/// vector w = sum_i alpha_i y_i x_i.
struct SvmModel {
    Kernel kernel = Kernel::kLinear;
    double c = 1.0;
    double b = 0.0;
    Matrix support_x;            // s x d
    std::vector<int> support_y;  // s
    Vector alpha;                // s, each in (0, C]
    Vector w;                    // d

    int dim() const noexcept { return static_cast<int>(support_x.cols()); }
};

struct SvmOptions {
    double tol = 1e-6;               // stop when the max KKT violation falls below
    long max_updates = 1'000'000;    // pair updates before giving up
};

/// Gram matrix K_{i,j} = K(x_i, x_j); kLinear gives plain dot products.
Matrix gram(const Matrix& examples, Kernel kernel = Kernel::kLinear);

/// Ragged-input variant; rejects examples of differing dimension.
Matrix gram(const std::vector<Vector>& examples, Kernel kernel = Kernel::kLinear);

/// Solves the soft-margin dual by SMO-style pairwise coordinate ascent with
/// maximal-violating-pair working-set selection. Throws ArgumentError for
/// C <= 0 or single-class data, NumericError (with the residual violation)
/// when the update cap is hit. `full_alpha_out`, when given, receives the
/// alpha for every training example (zeros included).
SvmModel train_svm(const LabeledSet& data, double c, const SvmOptions& opts = {},
                   Vector* full_alpha_out = nullptr);

struct DecideResult {
    double score;  // sum_i alpha_i y_i K(x_i, z) + b
    int sign;      // sign(score), with sign(0) = +1
};

/// Decision function applied to a single pattern.
DecideResult decide(const SvmModel& model, const Vector& z);

/// Per-block sums of |w_l|. `blocks` must partition 0..dim-1 exactly.
std::vector<double> weight_magnitudes(const SvmModel& model,
                                      const std::vector<std::vector<int>>& blocks);

/// Dual objective sum(alpha) - 1/2 alpha^T Q alpha of a trained model
/// (non-support alphas are zero and contribute nothing).
double dual_objective(const SvmModel& model);

/// Largest violation of the KKT conditions over a training set, given the
/// per-example alphas and the model's bias. Zero (within tolerance)
/// certifies optimality.
double max_kkt_violation(const SvmModel& model, const LabeledSet& data,
                         const Vector& full_alpha);

/// "svm-v1" serialization.
nlohmann::json svm_to_json(const SvmModel& model);
SvmModel svm_from_json(const nlohmann::json& j);

} // namespace nbci
