#include "nbci/pca.hpp"

#include <algorithm>
#include <cmath>

#include "nbci/rng.hpp"

namespace nbci {

namespace {

constexpr double kRankFloor = 1e-13;      // relative: Gram treated as exhausted below this
constexpr double kDegenerateTol = 1e-4;   // relative eigen-residual accepted at the cap

Matrix centered(const Matrix& x) {
    return x.rowwise() - x.colwise().mean();
}

// Deterministic generic start vector; a fixed draw is almost surely not
// orthogonal to the dominant eigenspace.
Vector start_vector(Eigen::Index m) {
    Rng rng(0x243F6A8885A308D3ULL);
    Vector v(m);
    for (Eigen::Index i = 0; i < m; ++i) v[i] = rng.gaussian();
    v.normalize();
    return v;
}

// Unit vector orthogonal to the first `found` columns of dirs, used when the
// deflated Gram has no variance left (rank exhausted).
Vector orthogonal_fallback(const Matrix& dirs, int found) {
    const Eigen::Index m = dirs.rows();
    for (Eigen::Index e = 0; e < m; ++e) {
        Vector v = Vector::Unit(m, e);
        for (int j = 0; j < found; ++j) {
            v -= dirs.col(j).dot(v) * dirs.col(j);
        }
        const double n = v.norm();
        if (n > 0.5) return v / n;  // basis vector mostly outside the span
    }
    throw NumericError("pca: no orthogonal fallback direction", 0.0);
}

// Leading eigenvector of the PSD matrix `gram` by power iteration with a
// direction-change stop. When the cap is hit with the iterate already an
// invariant direction up to kDegenerateTol (near-degenerate leading
// eigenvalues), that vector is accepted: any vector of the dominant
// eigenspace is a valid direction. Returns false when gram is zero.
bool leading_eigenvector(const Matrix& gram, double scale, const PcaOptions& opts, Vector& u) {
    Vector v = start_vector(gram.rows());
    double change = 0.0;
    for (int it = 0; it < opts.max_iterations; ++it) {
        Vector w = gram * v;
        const double n = w.norm();
        if (n <= kRankFloor * std::max(scale, 1.0)) return false;
        w /= n;
        change = std::min((w - v).norm(), (w + v).norm());
        v = w;
        if (change < opts.tol) {
            u = v;
            return true;
        }
    }
    const double lambda = v.dot(gram * v);
    const double residual = (gram * v - lambda * v).norm();
    if (lambda > 0.0 && residual <= kDegenerateTol * lambda) {
        u = v;
        return true;
    }
    throw NumericError("pca: power iteration did not converge", change);
}

// Leading right-singular direction of x (the top eigenvector of x^T x),
// iterating on whichever side of the Gram is smaller.
bool leading_direction(const Matrix& x, double scale, const PcaOptions& opts, Vector& u) {
    if (x.rows() < x.cols()) {
        Vector w;
        if (!leading_eigenvector(x * x.transpose(), scale, opts, w)) return false;
        u = x.transpose() * w;
        const double n = u.norm();
        if (n <= kRankFloor * std::max(std::sqrt(scale), 1.0)) return false;
        u /= n;
        return true;
    }
    return leading_eigenvector(x.transpose() * x, scale, opts, u);
}

} // namespace

ProjectionBasis pca_directions(const Matrix& x, int k, const PcaOptions& opts) {
    const int l = static_cast<int>(x.rows());
    const int m = static_cast<int>(x.cols());
    if (l < 1 || m < 1) throw ArgumentError("pca_directions: empty matrix");
    if (k < 1 || k > std::min(l, m)) {
        throw ArgumentError("pca_directions: k must lie in [1, min(rows, cols)]");
    }
    if (!x.allFinite()) throw ArgumentError("pca_directions: non-finite input");

    const Matrix x0 = opts.center ? centered(x) : x;
    const double scale = x0.squaredNorm();  // trace of the Gram

    ProjectionBasis basis;
    basis.directions = Matrix::Zero(m, k);
    basis.eigenvalues = Vector::Zero(k);

    Matrix xj = x0;
    for (int j = 0; j < k; ++j) {
        Vector u;
        if (!leading_direction(xj, scale, opts, u)) {
            u = orthogonal_fallback(basis.directions, j);
        }
        // Sign convention: largest-magnitude component positive.
        Eigen::Index imax = 0;
        u.cwiseAbs().maxCoeff(&imax);
        if (u[imax] < 0.0) u = -u;

        basis.directions.col(j) = u;
        basis.eigenvalues[j] = (x0 * u).squaredNorm();  // u^T X^T X u
        xj -= (xj * u) * u.transpose();  // X_{j+1} = X_j (I - u u^T)
    }
    return basis;
}

Matrix project(const Matrix& x, const ProjectionBasis& basis) {
    if (x.cols() != basis.directions.rows()) {
        throw ArgumentError("project: matrix has " + std::to_string(x.cols()) +
                            " columns but basis dimension is " +
                            std::to_string(basis.directions.rows()));
    }
    return x * basis.directions;
}

int choose_k(const Matrix& x, double variance_fraction, const PcaOptions& opts) {
    if (!(variance_fraction > 0.0 && variance_fraction <= 1.0)) {
        throw ArgumentError("choose_k: variance fraction must lie in (0,1]");
    }
    const int kmax = static_cast<int>(std::min(x.rows(), x.cols()));
    const Matrix x0 = opts.center ? centered(x) : x;
    const double total = x0.squaredNorm();
    if (total <= 0.0) return 1;

    const ProjectionBasis basis = pca_directions(x, kmax, opts);
    double cum = 0.0;
    for (int j = 0; j < kmax; ++j) {
        cum += basis.eigenvalues[j];
        if (cum >= variance_fraction * total) return j + 1;
    }
    return kmax;
}

} // namespace nbci
