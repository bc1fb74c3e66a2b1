#pragma once

#include "nbci/errors.hpp"
#include "nbci/linalg.hpp"

namespace nbci {

/// Ordered projection directions u_1..u_k with the variance each captures.
/// Directions are unit-norm columns, pairwise orthogonal, variances
/// non-increasing.
struct ProjectionBasis {
    Matrix directions;   // m x k, column j = u_j
    Vector eigenvalues;  // k, lambda_1 >= ... >= lambda_k >= 0

    int k() const noexcept { return static_cast<int>(directions.cols()); }
    int dim() const noexcept { return static_cast<int>(directions.rows()); }
};

struct PcaOptions {
    bool center = true;      // subtract per-column mean before extraction
    double tol = 1e-10;      // power-iteration stop on direction change
    int max_iterations = 10000;
};

/// Deflation-based extraction: u_j is the leading eigenvector of the
/// deflated Gram X_j^T X_j, found by power iteration; X_{j+1} = X_j (I - u_j u_j^T).
/// Reported eigenvalues are u_j^T X^T X u_j against the (centered) input.
/// k outside [1, min(rows, cols)] throws ArgumentError; a direction that
/// fails to settle within the iteration cap throws NumericError carrying
/// the last direction change.
ProjectionBasis pca_directions(const Matrix& x, int k, const PcaOptions& opts = {});

/// Feature extraction: column j of the result is X u_j, exactly.
Matrix project(const Matrix& x, const ProjectionBasis& basis);

/// Smallest k whose directions capture at least `variance_fraction` of the
/// total variance (trace of the centered Gram).
int choose_k(const Matrix& x, double variance_fraction = 0.95, const PcaOptions& opts = {});

} // namespace nbci
